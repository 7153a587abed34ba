use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("curve ({a},{b}) is singular or not minimal")]
    InvalidCurve { a: i64, b: i64 },

    #[error("prime {p} divides the discriminant of ({a},{b})")]
    BadReduction { a: i64, b: i64, p: u64 },

    #[error("4r^3+27s^2 vanishes mod {p} for (r,s)=({r},{s})")]
    SingularReduction { r: u64, s: u64, p: u64 },

    #[error("unsupported prime {0}")]
    UnsupportedPrime(u64),

    #[error("{0} is not a supported Hurwitz discriminant (need n > 0, n = 0 or 3 mod 4)")]
    InvalidDiscriminant(i64),

    #[error("trace {a} outside the Hasse range for p = {p}")]
    OutOfHasseRange { p: u64, a: i64 },

    #[error("residue {0} must be nonzero")]
    ZeroResidue(i64),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("matrix is not invertible mod {0}")]
    NotInvertible(u32),

    #[error("corrupt cache file: {0}")]
    CorruptFile(String),

    #[error("conflicting cache entry for ({a},{b}) at p={p}: {left} vs {right}")]
    ConflictingEntry {
        a: i64,
        b: i64,
        p: u32,
        left: i32,
        right: i32,
    },

    #[error("line {line}: {msg}")]
    ParseError { line: u64, msg: String },

    #[error("line {line}: conflicting ranks {left} and {right} for ({a},{b})")]
    ConflictingRank {
        line: u64,
        a: i64,
        b: i64,
        left: u32,
        right: u32,
    },

    #[error("line {line}: ({a},{b}) is not a valid curve model")]
    InvalidCurveRow { line: u64, a: i64, b: i64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable class name, printed by the CLI on failure.
    pub fn class(&self) -> &'static str {
        match self {
            Error::InvalidCurve { .. } | Error::InvalidCurveRow { .. } => "InvalidCurve",
            Error::BadReduction { .. } => "BadReduction",
            Error::SingularReduction { .. } => "SingularReduction",
            Error::UnsupportedPrime(_) => "UnsupportedPrime",
            Error::InvalidDiscriminant(_) => "InvalidDiscriminant",
            Error::OutOfHasseRange { .. } => "OutOfHasseRange",
            Error::ZeroResidue(_) => "ZeroResidue",
            Error::BudgetExceeded(_) => "BudgetExceeded",
            Error::NotInvertible(_) => "NotInvertible",
            Error::CorruptFile(_) => "CorruptFile",
            Error::ConflictingEntry { .. } => "ConflictingEntry",
            Error::ParseError { .. } => "ParseError",
            Error::ConflictingRank { .. } => "ConflictingRank",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Io(_) => "Io",
        }
    }
}
