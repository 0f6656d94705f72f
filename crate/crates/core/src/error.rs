use thiserror::Error;

/// Errors raised by the corner-map numerics and file interfaces.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid corner configuration: {0}")]
    InvalidConfig(String),

    #[error("{what} = {value} lies outside the admissible range {range}")]
    Domain {
        what: &'static str,
        value: f64,
        range: String,
    },

    #[error("series coefficients violate a1 != 0, b1 > 0 (a1 = {a1}, b1 = {b1})")]
    Constraint { a1: f64, b1: f64 },

    #[error("degenerate fit: a1 = {a1}, b1 = {b1} (thresholds |a1| >= {threshold}, b1 >= {threshold})")]
    DegenerateFit { a1: f64, b1: f64, threshold: f64 },

    #[error("insufficient arc samples: {got} given, {need} required")]
    InsufficientSamples { got: usize, need: usize },

    #[error("arc data inconsistent with the side data at phi = {phi}: deviation {deviation}")]
    ArcEndpointMismatch { phi: f64, deviation: f64 },

    #[error("angle theta = {theta} is not supported for a reentrant corner (beta = {beta})")]
    UnsupportedAngle { theta: f64, beta: f64 },

    #[error("singular direction phi = {phi}: cos(phi/beta) vanishes")]
    SingularDirection { phi: f64 },

    #[error("formula requires beta in {expected}, got beta = {beta}")]
    Case { beta: f64, expected: &'static str },

    #[error("no bracketing sign change at radius r = {radius}")]
    NoRoot { radius: f64 },

    #[error("curve too short for order estimation: {samples} samples over {decades:.2} decades (need >= 12 over >= 2)")]
    ShortCurve { samples: usize, decades: f64 },

    #[error("poor asymptotic fit: residual {residual} exceeds {limit}")]
    PoorFit { residual: f64, limit: f64 },

    #[error("invalid domain boundary: {0}")]
    InvalidDomain(String),

    #[error("boundary sub-arc for square side {side} has zero length")]
    DegenerateSide { side: usize },

    #[error("solver diverged (non-finite node value) at sweep {sweep}")]
    Diverged { sweep: usize },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("grid and map boundary data disagree by {deviation} (tolerance {tolerance})")]
    Misaligned { deviation: f64, tolerance: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
