use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {m} samples (need at least {min})")]
    InvalidGrid { m: usize, min: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("matrix is not Hermitian (asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("Hermitian form is singular (|det A| = {0:.3e})")]
    SingularForm(f64),

    #[error("parameter |a| = {abs_a} too close to the unit circle")]
    NearBoundaryParameter { abs_a: f64 },

    #[error("invalid disc parameters: {0}")]
    InvalidParameters(String),

    #[error("isotropic direction: t(conj v) A v = {0:.3e}")]
    IsotropicDirection(f64),

    #[error("point outside the admissible region (Re gamma = {re_gamma})")]
    OutsideAdmissibleRegion { re_gamma: f64 },

    #[error("no star-normalized disc has this boundary jet (Re gamma = {re_gamma})")]
    InconsistentJet { re_gamma: f64 },

    #[error("rotation matrix does not preserve the Hermitian form (defect {0:.3e})")]
    InvalidRotation(f64),

    #[error("degenerate fibration at boundary sample {index}")]
    DegenerateFibration { index: usize },

    #[error("under-resolved: {0}")]
    UnderResolved(String),

    #[error("point is not on the fibration (residual {0:.3e})")]
    NotOnFibration(f64),

    #[error("gradient vanishes at the base point; not a hypersurface")]
    NonHypersurface,

    #[error("solver diverged after {} iterations (last residual {:.3e})", .history.len(), .history.last().copied().unwrap_or(f64::NAN))]
    Divergence { history: Vec<f64> },

    #[error("continuation failed; last good tau = {last_tau}")]
    ContinuationFailure { last_tau: f64 },

    #[error("map differential is singular at boundary sample {index}")]
    SingularDifferential { index: usize },

    #[error("transported conormal is not aligned with (1,0,...,0) (defect {0:.3e})")]
    NormalMisalignment(f64),

    #[error("disc leaves the domain of the map (sup |f| = {sup}, radius {radius})")]
    Domain { sup: f64, radius: f64 },

    #[error("format error: {0}")]
    Format(String),
}
