use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} outside cached range 0..={j_max}")]
    Range { index: usize, j_max: usize },

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("invalid polynomial: {field}: {reason}")]
    InvalidPoly { field: String, reason: String },

    #[error("invalid series: {field}: {reason}")]
    InvalidSeries { field: String, reason: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("root solver did not converge at t = {t:?} (residual {residual:e})")]
    Solver { t: Vec<f64>, residual: f64 },

    #[error("degenerate fiber: tau-polynomial vanishes identically at z = {z}")]
    DegenerateFiber { z: Complex64 },

    #[error("domain too large: empty fiber in the parameter box at z = {z}")]
    EmptyFiber { z: Complex64 },

    #[error("calibration failed: no admissible delta above {floor:e} for eta = {eta}")]
    Calibration { eta: f64, floor: f64 },

    #[error("near pole: |P(z,t)| = {value:e} at z = {z}")]
    NearPole { z: Complex64, value: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("insufficient sampling: {usable} usable bins, need at least {needed}")]
    InsufficientSampling { usable: usize, needed: usize },

    #[error("branch tracking ambiguous at |t| = {radius:e}")]
    BranchTracking { radius: f64 },

    #[error("branches overlap away from the origin (distance {distance:e} at |x| = {modulus:e})")]
    Overlap { distance: f64, modulus: f64 },

    #[error("fit undefined: {0}")]
    Fit(String),

    #[error("division did not reach a fixed point within {0} iterations")]
    DivisionNonConvergence(usize),

    #[error("misuse: {0}")]
    Misuse(String),
}
