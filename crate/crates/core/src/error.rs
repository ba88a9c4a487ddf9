use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point outside the domain of the requested kernel or operator.
    #[error("domain error: {0}")]
    Domain(String),

    /// An integral whose parameters fall outside the convergence range.
    #[error("divergent integral: {0}")]
    Divergence(String),

    /// Evaluation at a point where a negative power or the map is singular.
    #[error("singular point: {0}")]
    SingularPoint(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// A non-finite value produced at a quadrature node.
    #[error("evaluation error at node ({location}): {message}")]
    Evaluation { location: String, message: String },

    /// A test-family member that does not lie in the source space.
    #[error("family membership error: {0}")]
    FamilyMembership(String),
}
