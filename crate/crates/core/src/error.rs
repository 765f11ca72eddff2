use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension n = {n}: {reason}")]
    InvalidDimension { n: u32, reason: &'static str },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("conformal Laplacian L_g is not invertible on {0} (constants lie in its kernel)")]
    NotInvertible(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("series arithmetic: {0}")]
    Series(String),

    #[error("extrapolation did not converge: fit residual {residual:.3e} exceeds tolerance {tolerance:.3e} (estimate {estimate:.6e})")]
    Extrapolation {
        estimate: f64,
        residual: f64,
        tolerance: f64,
    },

    #[error("image sum did not reach its tail bound after {terms} terms (tail {tail:.3e}, partial sum {partial:.6e})")]
    ImageSum { terms: usize, tail: f64, partial: f64 },

    #[error("spectral residual {residual:.3e} exceeds tolerance {tolerance:.3e} at degree {degree}")]
    Residual {
        residual: f64,
        tolerance: f64,
        degree: usize,
    },

    #[error("perturbed scalar curvature {value:.6e} is not positive at {point:?}")]
    CurvatureViolation { point: Vec<f64>, value: f64 },

    #[error("{what} did not converge (residual {residual:.3e})")]
    NonConvergence { what: String, residual: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
