use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("SVD did not converge within {0} iterations")]
    ConvergenceFailure(usize),
    #[error("value {0} is outside the binary64 range")]
    Overflow(String),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("tensor with {entries} entries exceeds the size cap of {cap}")]
    SizeCapExceeded { entries: u128, cap: usize },
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("decomposition does not materialize to the given tensor")]
    DecompositionMismatch,
    #[error("tensor zero pattern does not match {0}")]
    PatternMismatch(String),
    #[error("certificate needs n >= 2, got n = {0}")]
    DegenerateN(usize),
    #[error("certificate needs k - 2 <= n bit positions to flip, got n = {n}, k = {k}")]
    TooManyPlayers { n: usize, k: usize },
    #[error("turn {turn}: generated matrix is not unitary (residual {residual:e})")]
    NonUnitary { turn: usize, residual: f64 },
    #[error("turn {turn}: player {player} read input of player {input}, which the model hides")]
    HiddenInput { turn: usize, player: usize, input: usize },
    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),
    #[error("compressed state has zero norm for column {0}, but that column holds a 1-input")]
    Normalization(usize),
    #[error("no coefficients found after {0} attempts")]
    NotFound(usize),
    #[error("protocol premise violated: {0}")]
    PremiseViolation(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
