use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (estimate {estimate:e}, error {error:e})"
    )]
    NonConvergence {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("degenerate cluster: mean cluster size {0} < 1 leaves the intra-cluster distance undefined")]
    DegenerateCluster(f64),

    #[error("point pattern has no eligible points")]
    EmptyPattern,

    #[error("received power is undefined at zero distance")]
    ZeroDistance,

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("empty input sample")]
    EmptyInput,

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
