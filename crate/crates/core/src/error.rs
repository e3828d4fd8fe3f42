use thiserror::Error;

/// Errors raised by the eigentomo library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid elastic constants: E = {e}, nu = {nu} (need E > 0 and -1 < nu < 0.5)")]
    InvalidElasticConstants { e: f64, nu: f64 },

    #[error("grid with {m} points per axis is too coarse (need at least {min})")]
    GridTooCoarse { m: usize, min: usize },

    #[error("non-finite value in component {component} at node {index}")]
    NonFinite { component: &'static str, index: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("index ({j}, {k}, {l}) out of range for N = {n}")]
    IndexOutOfRange { j: usize, k: usize, l: usize, n: usize },

    #[error("SVD failed: {0}")]
    Svd(String),

    #[error("polynomial degree {degree} exceeds cap {cap}")]
    DegreeCap { degree: u32, cap: u32 },

    #[error("parameter {name} must not depend on x{var}")]
    VariableRestriction { name: &'static str, var: usize },

    #[error("degree bound {bound} is smaller than input degree {degree}")]
    DegreeBoundTooSmall { bound: u32, degree: u32 },

    #[error("cannot integrate a term that is constant along x{axis}")]
    NonPeriodicAntiderivative { axis: usize },

    #[error("far-face consistency violated for s{axis}{axis}: |value| = {value:e} > {tol:e}")]
    FarFaceInconsistent { axis: usize, value: f64, tol: f64 },

    #[error("missing derivative access: {0}")]
    MissingDerivatives(String),

    #[error("discrete operator is rank deficient: smallest singular value {sigma_min:e} (relative {relative:e})")]
    RankDeficient { sigma_min: f64, relative: f64 },

    #[error("{0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
