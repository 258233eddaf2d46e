use thiserror::Error;

/// Everything that can go wrong inside the library.
///
/// Variants split into two families: inputs that are well formed but
/// mathematically rejected (see [`Error::is_mathematical`]) and inputs that
/// are malformed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("cannot extract a (p-1)-th root of zero")]
    KummerZero,
    #[error("element is not a unit: {0}")]
    NonUnit(String),
    #[error("exponent denominator {den} exceeds the cap {cap}")]
    DenominatorOverflow { den: i64, cap: i64 },
    #[error("matrix is singular within precision {0}")]
    SingularMatrix(String),
    #[error("E-height {height} exceeds e*r = {bound}")]
    HeightExceeded { height: i64, bound: i64 },
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("Frobenius matrix is not triangular; use change_basis first")]
    NotTriangular,
    #[error("basis change matrix is not invertible over k[[u]]")]
    NonUnitBasisChange,
    #[error("parameter out of range: {0}")]
    Range(String),
    #[error("exponent {0} is not representable in the quotient algebra")]
    ExponentNotRepresentable(String),
    #[error("the mixed-characteristic side requires p | e")]
    RequiresPDividesE,
    #[error("the mixed-characteristic side requires k = F_p")]
    RequiresPrimeField,
    #[error("Frobenius matrix entries are not in k[[u^p]]")]
    EntriesNotInUp,
    #[error("the mixed-characteristic side requires r = 1")]
    RequiresHeightOne,
    #[error("not an Eisenstein polynomial: {0}")]
    NotEisenstein(String),
    #[error("invalid field description: {0}")]
    InvalidField(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
}

impl Error {
    /// Stable kebab-case identifier used in JSON reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::KummerZero => "kummer-zero",
            Error::NonUnit(_) => "non-unit",
            Error::DenominatorOverflow { .. } => "denominator-overflow",
            Error::SingularMatrix(_) => "singular-matrix",
            Error::HeightExceeded { .. } => "height-exceeded",
            Error::PrecisionExhausted(_) => "precision-exhausted",
            Error::NotTriangular => "not-triangular",
            Error::NonUnitBasisChange => "non-unit-basis-change",
            Error::Range(_) => "range-violation",
            Error::ExponentNotRepresentable(_) => "exponent-not-representable",
            Error::RequiresPDividesE => "requires-p-divides-e",
            Error::RequiresPrimeField => "requires-prime-field",
            Error::EntriesNotInUp => "entries-not-in-u^p",
            Error::RequiresHeightOne => "requires-r-equals-1",
            Error::NotEisenstein(_) => "not-eisenstein",
            Error::InvalidField(_) => "invalid-field",
            Error::Schema(_) => "schema",
            Error::Inconsistent(_) => "inconsistent",
        }
    }

    /// True when the input was well formed but rejected on mathematical grounds.
    pub fn is_mathematical(&self) -> bool {
        !matches!(self, Error::Schema(_) | Error::InvalidField(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
