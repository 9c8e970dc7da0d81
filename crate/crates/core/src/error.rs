use thiserror::Error;

use crate::network::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("negative mass {value} at symbol {index}")]
    NegativeMass { index: usize, value: f64 },
    #[error("mass sums to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("alphabet must have at least 2 symbols, got {0}")]
    AlphabetTooSmall(usize),
    #[error("alphabet sizes differ ({0} vs {1})")]
    AlphabetMismatch(usize, usize),
    #[error("divergence is infinite: q is zero at symbol {0} where p is positive")]
    InfiniteDivergence(usize),
    #[error("{name} = {value} is out of range")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("agent {0} has no neighbors")]
    IsolatedAgent(usize),
    #[error("invalid network: {0:?}")]
    InvalidNetwork(Vec<Violation>),
    #[error("power iteration did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("observed symbol has zero likelihood under both states")]
    ZeroLikelihood,
    #[error("likelihood model is uninformative")]
    UninformativeModel,
    #[error("closed-form attack puts mass {value} < epsilon on symbol {symbol}")]
    FloorViolation { symbol: usize, value: f64 },
    #[error("support pair ({0}, {1}) has zero determinant")]
    DegeneratePair(usize, usize),
    #[error("distortion region admits no feasible forged model")]
    EmptyRegion,
    #[error("epsilon {epsilon} is not below the bound {bound}")]
    EpsilonTooLarge { epsilon: f64, bound: f64 },
    #[error("no adversary has an informative model")]
    AllUninformative,
    #[error("margin has no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("{0}")]
    InvalidInput(String),
    #[error("parse error at line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
