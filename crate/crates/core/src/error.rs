use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid angle: {0}")]
    InvalidAngle(String),
    #[error("zero denominator in {0}")]
    ZeroDenominator(String),
    #[error("{0}/{1} is not reduced")]
    NotReduced(String, String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("invalid upper index N = {0}; partial sums need N >= 1")]
    InvalidN(u64),
    #[error("invalid alpha {0}: expected a value in (0, 1]")]
    InvalidAlpha(f64),
    #[error("series diverges for {0}; no finite value exists")]
    DivergentInput(String),
    #[error("rate certificate failed: {0}")]
    CertificateFailed(String),
    #[error("shell analysis needs an irrational angle, got {0}")]
    RationalInput(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("continued fraction too short: {0}")]
    InsufficientExpansion(String),
    #[error("empty interval ({0}, {1})")]
    EmptyInterval(String, String),
    #[error("exponent identity violated: {0}")]
    IdentityViolated(String),
    #[error("budget too small: {0}")]
    BudgetTooSmall(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable code used in CLI error reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidAngle(_) => "InvalidAngle",
            Error::ZeroDenominator(_) => "ZeroDenominator",
            Error::NotReduced(..) => "NotReduced",
            Error::PrecisionExhausted(_) => "PrecisionExhausted",
            Error::InvalidN(_) => "InvalidN",
            Error::InvalidAlpha(_) => "InvalidAlpha",
            Error::DivergentInput(_) => "DivergentInput",
            Error::CertificateFailed(_) => "CertificateFailed",
            Error::RationalInput(_) => "RationalInput",
            Error::InsufficientData(_) => "InsufficientData",
            Error::InsufficientExpansion(_) => "InsufficientExpansion",
            Error::EmptyInterval(..) => "EmptyInterval",
            Error::IdentityViolated(_) => "IdentityViolated",
            Error::BudgetTooSmall(_) => "BudgetTooSmall",
            Error::Precondition(_) => "Precondition",
            Error::Parse(_) => "Parse",
        }
    }

    /// True for errors that signal a broken internal invariant rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::CertificateFailed(_) | Error::IdentityViolated(_))
    }
}
