use alloc::string::String;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("curvature profile is not finite at s = {s}")]
    NonFiniteCurvature { s: f64 },
    #[error("adaptive integrator could not meet tolerance near s = {s} (step {step:e})")]
    StepUnderflow { s: f64, step: f64 },
    #[error("argument {value} outside the domain {domain}")]
    OutOfDomain { value: f64, domain: String },
    #[error("quadrature did not converge on [{a}, {b}] (error estimate {estimate:e})")]
    QuadratureFailure { a: f64, b: f64, estimate: f64 },
    #[error("operation requires an infinite radius of definition, model has R = {radius}")]
    FiniteRadius { radius: f64 },
    #[error("radius {r} is below the pole floor {floor}")]
    PoleSingularity { r: f64, floor: f64 },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("annulus [{inner}, {outer}] has zero measure")]
    DegenerateAnnulus { inner: f64, outer: f64 },
    #[error("integrand is negative ({value}) at r = {r}")]
    NegativeIntegrand { r: f64, value: f64 },
    #[error("curvature function vanishes identically; use the zero-curvature criterion instead")]
    ZeroProfile,
    #[error("invalid start radius {r_start}: {reason}")]
    InvalidStart { r_start: f64, reason: String },
    #[error("drift is not finite at r = {r} (path {path})")]
    DriftOverflow { r: f64, path: u64 },
}

pub type Result<T> = core::result::Result<T, Error>;
