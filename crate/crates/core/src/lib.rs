mod error;
pub mod exact;
pub mod experiments;
pub mod kernels;
pub mod monomial_engine;
pub mod operator_calculus;
pub mod quadrature;
pub mod symbolic;

pub use error::{Error, Result};
