use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("duplicate position {0}")]
    DuplicatePosition(String),
    #[error("malformed structure: {0}")]
    Malformed(String),
    #[error("tree on positions {0:?} does not span its four points")]
    NotSpanning(Vec<u32>),
    #[error("invalid linking-number input: {0}")]
    LinkingInput(String),
    #[error("wrong diagram kind: expected {expected}, got {got}")]
    WrongKind { expected: String, got: String },
    #[error("unsupported size: {0}")]
    Unsupported(String),
    #[error("series has zero constant term and cannot be inverted")]
    NotInvertible,
    #[error("invalid desingularisation: {0}")]
    InvalidSplit(String),
    #[error("column count mismatch: {0} vs {1}")]
    ColumnMismatch(usize, usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("no admissible sign-flip set found")]
    NoAdmissibleFlip,
    #[error("strand mismatch: {0} vs {1}")]
    StrandMismatch(usize, usize),
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error("knot is not Morse: {0}")]
    NotMorse(String),
    #[error("knot self-intersects: {0}")]
    SelfIntersection(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("path changes critical-point count (perestroika) near phi = {0}")]
    Perestroika(f64),
    #[error("braid strands collide: {0}")]
    DiagonalCollision(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
