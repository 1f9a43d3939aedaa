use thiserror::Error;

/// Errors raised by scheme construction, window algebra and the experiment runner.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("group mismatch: expected {expected}, found {found}")]
    GroupMismatch { expected: String, found: String },

    #[error("operation requires a finite internal group, got {0}")]
    NotFinite(String),

    #[error("{0} carries no normalized Haar measure")]
    NoHaarMeasure(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("invalid element: {0}")]
    InvalidElement(String),

    #[error("star image is not dense in {group}: {reason}")]
    NotDense { group: String, reason: String },

    #[error("degenerate lattice basis: {0}")]
    DegenerateBasis(String),

    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("budget exceeded: {what} needs {requested}, limit is {limit}")]
    BudgetExceeded {
        what: String,
        requested: u128,
        limit: u128,
    },

    #[error("not a subgroup: {0}")]
    NotSubgroup(String),

    #[error("not a lattice point: {0}")]
    NotOnLattice(String),

    #[error("configuration is empty; the torus parameter is undefined")]
    EmptyConfiguration,

    #[error("configuration has projected flavor; internal coordinates are required")]
    ProjectedFlavor,

    #[error("set is not primitive: {divisor} divides {multiple}")]
    NonPrimitive { divisor: u64, multiple: u64 },

    #[error("refused: {0}")]
    Refused(String),

    #[error("patch too small: {0}")]
    InsufficientPatch(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Io(err.to_string())
    }
}
