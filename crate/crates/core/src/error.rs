use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degree {degree} exceeds the supported limit of {limit}")]
    DegreeLimit { degree: usize, limit: usize },

    #[error("non-finite function value {value} at node x = {node}")]
    NonFiniteNode { node: f64, value: f64 },

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid approximation spec: {0}")]
    Spec(String),

    #[error("invalid model parameters: {0}")]
    Params(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("latent resampling exceeded {attempts} attempts; l1 cap {cap} is too tight")]
    ResamplingExhausted { attempts: usize, cap: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("moment Gram matrix is numerically singular (condition {condition:.3e}); degree {degree} is too high")]
    IllConditioned { degree: usize, condition: f64 },
}
