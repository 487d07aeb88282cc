use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("equation parameter t must be at least 1, got {0}")]
    InvalidParameter(u64),

    #[error("modulus must be odd and at least {min}, got {got}")]
    InvalidModulus { got: String, min: u32 },

    #[error("cannot combine pair states with different {0}")]
    Mismatch(&'static str),

    #[error("negative input {0} has no integer square root")]
    NegativeSqrt(String),

    #[error("index {0} must be odd")]
    EvenIndex(i64),

    #[error("index {n} is not admissible: {reason}")]
    InadmissibleIndex { n: i64, reason: &'static str },

    #[error("prime {p} divides 2t(t+1) for t = {t}; the sequence degenerates")]
    DegeneratePrime { t: u64, p: u64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cache I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
