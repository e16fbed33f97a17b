use thiserror::Error;

/// Errors raised by the inference routines.
///
/// Variants split into input problems (bad data, bad parameters) and
/// numerical failures; [`Error::is_numerical`] tells them apart so the CLI
/// can pick an exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("group {group} has {len} scores; at least 2 are required")]
    TooFewScores { group: u8, len: usize },

    #[error("non-finite score at position {index} of group {group}")]
    NonFiniteScore { group: u8, index: usize },

    #[error(
        "tied values at positions {first} and {second} ({value}); ranks require distinct scores"
    )]
    Ties {
        first: usize,
        second: usize,
        value: f64,
    },

    #[error("truncation interval ({lower}, {upper}) has no representable interior point")]
    DegenerateTruncation { lower: f64, upper: f64 },

    #[error("rank-likelihood chain stuck: degenerate truncation for {coordinate}")]
    StuckChain { coordinate: String },

    #[error("variance estimate nonpositive ({0}); fall back to bootstrap calibration")]
    NonpositiveVariance(f64),

    #[error("{0}")]
    Config(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateTruncation { .. }
                | Error::StuckChain { .. }
                | Error::NonpositiveVariance(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
