use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("index out of bounds: {0}")]
    Bounds(String),
    #[error("move precondition violated: {0}")]
    Precondition(String),
    #[error("kink pattern mismatch: {0}")]
    Pattern(String),
    #[error("grid numbers differ: {left} vs {right}")]
    Dimension { left: usize, right: usize },
    #[error("unbalanced stabilization: {stabilize} added vs {destabilize} removed")]
    Unbalanced { stabilize: usize, destabilize: usize },
    #[error("malformed configuration: {0}")]
    Shape(String),
    #[error("cannot parse move sequence: {0}")]
    Parse(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DigitizeError {
    #[error("invalid grid specification: {0}")]
    Spec(String),
    #[error("non-finite coordinate at point {index}")]
    NonFinite { index: usize },
    #[error("betti index must be 0 or 1, got {0}")]
    BettiIndex(usize),
    #[error("raster resolution must be at least 1")]
    Resolution,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymmetryError {
    #[error("block size {size} does not fit a grid of number {n}")]
    BlockSize { size: usize, n: usize },
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IsingError {
    #[error("invalid ising parameters: {0}")]
    Params(String),
    #[error("lattice of {cells} cells is too large for exhaustive enumeration (limit {limit}); use Metropolis sampling")]
    Capacity { cells: usize, limit: usize },
    #[error("configuration is {got}, model expects {expected}")]
    Dimension { got: String, expected: String },
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid generator parameters: {0}")]
    Params(String),
}
