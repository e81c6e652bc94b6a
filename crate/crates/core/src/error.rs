use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain size mismatch: {left} vs {right}")]
    DomainMismatch { left: usize, right: usize },
    #[error("distribution over an empty domain")]
    EmptyDomain,
    #[error("negative probability {value} at element {index}")]
    NegativeProbability { index: usize, value: f64 },
    #[error("non-finite probability at element {index}")]
    NonFinite { index: usize },
    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("operation needs two distinct hypothesis indices, got {0} twice")]
    SameIndex(usize),
    #[error("index {index} out of range for {len} hypotheses")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("sample set is empty")]
    EmptySample,
    #[error("sample element {element} outside domain of size {domain}")]
    SampleOutOfDomain { element: usize, domain: usize },
    #[error("hypothesis set is empty")]
    EmptyHypothesisSet,
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("malformed pair order: {0}")]
    MalformedOrder(String),
    #[error("max semi-distance of hypothesis {0} is zero")]
    ZeroWeight(usize),
    #[error("supplied OPT {opt} is infeasible: no pivot qualified in the first round")]
    OptInfeasible { opt: f64 },
    #[error("diameter query needs at least two surviving points")]
    DiameterExhausted,
    #[error("threshold solver made no progress after {0} iterations")]
    NoProgress(usize),
    #[error("target OPT {0} could not be planted")]
    InfeasibleTarget(f64),
    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
