use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is out of range ({range})")]
    Bounds {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-planar matching: links {0:?} and {1:?} cross")]
    NonPlanar((usize, usize), (usize, usize)),

    #[error("singular evaluation: {0}")]
    Singularity(String),

    #[error("boundary point {0} is not on a smooth boundary segment")]
    NonSmoothBoundary(String),

    #[error("point outside domain: {0}")]
    Domain(String),

    #[error("point swallowed at step {step} (t = {time})")]
    Swallowed { step: usize, time: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("degenerate segment at index {0}")]
    DegenerateSegment(usize),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("interface tracing invariant violated: {0}")]
    TracingInvariant(String),

    #[error("loop representation invariant violated: {0}")]
    Representation(String),

    #[error("statistics error: {0}")]
    Statistics(String),

    #[error("data quality error: {0}")]
    DataQuality(String),

    #[error("partition provider error: {0}")]
    Provider(String),

    #[error("numerical blow-up: {0}")]
    NumericalBlowup(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn bounds(what: &'static str, value: f64, range: &'static str) -> Self {
        Error::Bounds { what, value, range }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
