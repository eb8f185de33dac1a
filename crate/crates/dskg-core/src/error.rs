use thiserror::Error;

/// Errors from model construction and validation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("lambda must be > 0 (massless case unsupported), got {0}")]
    NonPositiveMass(f64),
    #[error("spatial dimension must be >= 1, got {0}")]
    BadDimension(usize),
    #[error("grid size must be an even integer >= 4, got {0}")]
    BadGrid(usize),
    #[error("perturbation amplitude must be >= 0, got {0}")]
    BadPerturbation(f64),
    #[error("initial slice t0 must be >= 1, got {0}")]
    BadInitialSlice(f64),
    #[error("torus period must be > 0, got {0}")]
    BadPeriod(f64),
    #[error("alpha = {alpha} invalid for lambda = {lambda}, n = {n}: {rule}")]
    BadAlpha {
        alpha: f64,
        lambda: f64,
        n: usize,
        rule: &'static str,
    },
}

/// Errors from per-mode ODE solvers and the series oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModeError {
    #[error("adaptive step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("series oracle unavailable: {0}")]
    OracleUnavailable(String),
}

/// Errors from field transforms and norms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("field shapes differ: {0} vs {1}")]
    ShapeMismatch(String, String),
    #[error("empty trace")]
    EmptyTrace,
    #[error("trace times are not a uniform increasing grid")]
    NonUniformGrid,
}

/// Errors from full-field propagator assembly.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PropagatorError {
    #[error("residual check needs >= 5 uniform time samples, got {0}")]
    GridTooCoarse(usize),
    #[error(transparent)]
    Mode(#[from] ModeError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Errors from the estimate harnesses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("power-law fit needs >= 4 strictly positive points")]
    NonPositiveData,
    #[error("dispersive window too wide: antipodal kernel mass is {frac:.3} of sup")]
    WindowTooWide { frac: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Propagator(#[from] PropagatorError),
    #[error(transparent)]
    Semilinear(#[from] SemilinearError),
}

/// Errors from the semilinear solver stack.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemilinearError {
    #[error("critical power undefined for n = 1")]
    DimensionTooSmall,
    #[error("time step rejected below floor at t = {t} (h = {h:e}); likely blow-up or under-resolution")]
    StepRejected { t: f64, h: f64 },
    #[error("Picard iteration diverged after {iterations} iterations (distance {distance:e})")]
    Diverged { iterations: usize, distance: f64 },
    #[error(transparent)]
    Propagator(#[from] PropagatorError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

pub use ModelError as GeometryError;
