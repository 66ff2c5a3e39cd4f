use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown profile `{0}` (expected couette, sinus or poly)")]
    UnknownProfile(String),
    #[error("invalid profile parameters: {0}")]
    InvalidProfile(String),
    #[error("degenerate domain [{0}, {1}]")]
    DegenerateDomain(f64, f64),
    #[error("wavenumber must be positive, got {0}")]
    NonPositiveWavenumber(f64),
    #[error("grid mismatch between fields")]
    GridMismatch,
    #[error("sobolev order {0} outside -2..=2")]
    SobolevOrder(i32),
    #[error("singular discrete system: {0}")]
    Singular(String),
    #[error("spectral parameter c = {0} is real and lies inside Ran(u)")]
    RealSpectralParameter(f64),
    #[error("ill-conditioned solve (condition estimate {0:.3e}); refine the grid or move c off the layer")]
    IllConditioned(f64),
    #[error("limiting absorption did not converge (last extrapolant change {last_change:.3e})")]
    NoConvergence { last_change: f64 },
    #[error("critical level c = {0} is attained at a stationary point or a wall; boundary values are not available there")]
    DegenerateCriticalLevel(f64),
    #[error("invalid absorption schedule: {0}")]
    InvalidSchedule(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("eigensolver failure: {0}")]
    Eigensolver(String),
    #[error("requested {requested} eigenvalues but only {resolved} are resolved")]
    Unresolved { requested: usize, resolved: usize },
    #[error("mode gram matrix is near singular (condition {0:.3e})")]
    DefectiveModes(f64),
    #[error("zero field")]
    ZeroField,
    #[error("time step {dt} exceeds the stability bound {bound}")]
    UnstableTimeStep { dt: f64, bound: f64 },
    #[error("non-finite state detected after sample {last_valid_sample}")]
    Diverged { last_valid_sample: usize },
    #[error("decay fit: {0}")]
    Fit(String),
    #[error("parameter {value} outside the open range of curve {curve}")]
    CurveParameter { curve: &'static str, value: f64 },
    #[error("beta = {0} outside the admissible band (-9pi^2/16, 9pi^2/16)")]
    InadmissibleBeta(f64),
    #[error("ω/p is undefined at a zero of p where ω is not certified to vanish (y = {0})")]
    WeightQuotient(f64),
}
