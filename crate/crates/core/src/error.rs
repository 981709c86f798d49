use thiserror::Error;

/// Errors surfaced by the numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size must be a power of two, got {0}")]
    GridSizeNotPowerOfTwo(usize),
    #[error("domain length must be positive, got {0}")]
    NonPositiveLength(f64),
    #[error("field length {got} does not match grid size {expected}")]
    FieldLengthMismatch { got: usize, expected: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("field contains non-finite values")]
    NonFiniteField,
    #[error("spectral derivative left an imaginary residue {residue:.3e} above tolerance {tol:.3e}")]
    SpectralResidue { residue: f64, tol: f64 },
    #[error("time step must be positive, got {0}")]
    NonPositiveTimeStep(f64),
    #[error("{name} must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("state violates tail containment: |psi| = {edge:.3e} at the domain edge (limit {limit:.1e})")]
    TailContainment { edge: f64, limit: f64 },
    #[error("density mask is empty (no points above the floor)")]
    EmptyMask,
    #[error("density mask splits into {0} disconnected regions; diagnostics would silently drop cross terms")]
    DisconnectedMask(usize),
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("trajectory step {dt} does not divide the frame spacing {frame_dt}")]
    StepFrameMismatch { dt: f64, frame_dt: f64 },
    #[error("{count} of {total} trajectories left the supported density region (limit {limit})")]
    TooManyFlaggedPaths { count: usize, total: usize, limit: usize },
    #[error("time {t} is outside the tape range [{t0}, {t1}]")]
    TimeOutOfRange { t: f64, t0: f64, t1: f64 },
    #[error("derivative cache holds orders up to {max}, requested k_max {requested}")]
    SeriesOrderTooHigh { requested: usize, max: usize },
    #[error("time step {dt} exceeds the configured stability bound {max_dt}")]
    UnstableTimeStep { dt: f64, max_dt: f64 },
    #[error("empty sample")]
    EmptySample,
    #[error("sample has zero variance; automatic bandwidth is undefined")]
    ZeroVarianceSample,
    #[error("lag {lag} exceeds series length {len}")]
    LagTooLarge { lag: usize, len: usize },
    #[error("errors must be positive for order estimation")]
    NonPositiveError,
    #[error("kernel density underflowed at x = {0}; ensemble left the supported region")]
    DensityUnderflow(f64),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
