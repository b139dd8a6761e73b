use thiserror::Error;

/// Every failure the engine can report. Computational errors are never
/// papered over with a guessed value.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BerkError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands live on different backends")]
    IncompatibleBackends,
    #[error("addition across incompatible fractional offsets")]
    FractionalOffsetMismatch,
    #[error("element has negative valuation and does not reduce")]
    NegativeValuation,
    #[error("residue extension bound exceeded: {0}")]
    ExtensionBound(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("center is a pole of the map")]
    PoleAtCenter,
    #[error("image verification failed: {0}")]
    ProbeFailure(String),
    #[error("operand is the point at infinity")]
    InfinityOperand,
    #[error("operand is a type I point")]
    TypeIOperand,
    #[error("measure does not have total mass zero")]
    NonzeroMass,
    #[error("measure has an atom at a type I point")]
    TypeIAtom,
    #[error("parameter outside its domain: {0}")]
    ParamDomain(String),
    #[error("skeleton map is not a Bernoulli system")]
    NotBernoulli,
    #[error("skeleton and map disagree at t = {0}")]
    Mismatch(String),
    #[error("inconclusive after {0} iterations")]
    Inconclusive(usize),
    #[error("cannot parse input: {0}")]
    Parse(String),
}

impl BerkError {
    /// Stable machine-readable name, used in error JSON.
    pub fn code(&self) -> &'static str {
        match self {
            BerkError::DivisionByZero => "DivisionByZero",
            BerkError::IncompatibleBackends => "IncompatibleBackends",
            BerkError::FractionalOffsetMismatch => "FractionalOffsetMismatch",
            BerkError::NegativeValuation => "NegativeValuation",
            BerkError::ExtensionBound(_) => "ExtensionBound",
            BerkError::PrecisionExhausted(_) => "PrecisionExhausted",
            BerkError::PoleAtCenter => "PoleAtCenter",
            BerkError::ProbeFailure(_) => "ProbeFailure",
            BerkError::InfinityOperand => "InfinityOperand",
            BerkError::TypeIOperand => "TypeIOperand",
            BerkError::NonzeroMass => "NonzeroMass",
            BerkError::TypeIAtom => "TypeIAtom",
            BerkError::ParamDomain(_) => "ParamDomain",
            BerkError::NotBernoulli => "NotBernoulli",
            BerkError::Mismatch(_) => "Mismatch",
            BerkError::Inconclusive(_) => "INCONCLUSIVE",
            BerkError::Parse(_) => "Parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, BerkError>;
