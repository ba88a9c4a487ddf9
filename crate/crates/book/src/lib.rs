//! The chapters of the guide, compiled as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/kernels.md")]
pub mod kernels {}
#[doc = include_str!("../../../book/src/exact.md")]
pub mod exact {}
#[doc = include_str!("../../../book/src/operators.md")]
pub mod operators {}
#[doc = include_str!("../../../book/src/quadrature.md")]
pub mod quadrature {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
