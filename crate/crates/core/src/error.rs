use thiserror::Error;

/// Errors produced by the simulator and its file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("tiles {first} and {second} have identical edge colors")]
    DuplicateTile { first: usize, second: usize },
    #[error("tile set is empty")]
    EmptySet,
    #[error("tile set has {0} tiles; at most 254 are supported")]
    TooManyTiles(usize),
    #[error("unknown tile set fixture `{0}`")]
    UnknownFixture(String),
    #[error("tile set is not deterministic from the {0} corner")]
    NotDeterministic(&'static str),
    #[error("tile id {id} out of range for a set of {n} tiles")]
    IdOutOfRange { id: usize, n: usize },
    #[error("symbol {symbol} out of range for an alphabet of {size}")]
    SymbolOutOfRange { symbol: u8, size: usize },
    #[error("boundary stream exhausted at step {step}")]
    StreamExhausted { step: usize },
    #[error("requested window {requested} exceeds the available extent {available}")]
    WindowTooLarge { requested: String, available: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("extent mismatch: {0:?} vs {1:?}")]
    ExtentMismatch([usize; 4], [usize; 4]),
    #[error("flip at {0:?} lies inside the boundary margin")]
    FlipInMargin([usize; 3]),
    #[error("support of cell {0:?} is truncated by the window")]
    TruncatedSupport([usize; 4]),
    #[error("malformed dump: {0}")]
    MalformedDump(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
