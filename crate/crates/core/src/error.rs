use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the numerical pipeline can report.
///
/// Numbers are carried as `f64` regardless of the working precision so the
/// error type stays non-generic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("kappa must be nonzero")]
    KappaZero,

    #[error("infeasible amplitude: {relation} needs a positive value, got {value:e}")]
    InfeasibleAmplitude { relation: &'static str, value: f64 },

    #[error("under-determined constraint set: {0}")]
    UnderDetermined(String),

    #[error("over-determined constraint set: {relation} is violated (relative defect {defect:e})")]
    OverDetermined { relation: &'static str, defect: f64 },

    #[error("missing or invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Class II profile with kappa = {kappa} grows at infinity and is not localized")]
    NonLocalizable { kappa: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error(
        "stationary residual {residual:e} exceeds {limit:e}; model and solution are inconsistent"
    )]
    InconsistentParameters { residual: f64, limit: f64 },

    #[error("eigensolver failed: {0}")]
    NoConvergence(String),

    #[error("propagation blew up at z = {z}: peak amplitude {peak:e} exceeds {limit:e}")]
    StepUnstable { z: f64, peak: f64, limit: f64 },

    #[error(
        "step-halving gate failed for dz = {dz}: fields differ by {defect:e} (limit {limit:e})"
    )]
    NonConvergedStep { dz: f64, defect: f64, limit: f64 },

    #[error("deviation never left the noise floor; no linear-growth window")]
    NoGrowthWindow,
}

impl Error {
    /// Whether the failure is a property of the requested configuration rather
    /// than of the numerics.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::KappaZero
                | Error::InfeasibleAmplitude { .. }
                | Error::UnderDetermined(_)
                | Error::OverDetermined { .. }
                | Error::InvalidParameter(_)
                | Error::NonLocalizable { .. }
                | Error::InvalidGrid(_)
                | Error::InconsistentParameters { .. }
        )
    }
}
