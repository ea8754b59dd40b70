use thiserror::Error;

/// Errors raised by instance validation, the solvers and the quadrature.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("time must be positive and finite, got {0}")]
    NonPositiveTime(f64),

    #[error("locations must be finite and strictly increasing (x[{index}] = {left} >= x[{}] = {right})", index + 1)]
    UnsortedLocations { index: usize, left: f64, right: f64 },

    #[error("location x[{0}] is not finite")]
    NonFiniteLocation(usize),

    #[error("multiplicity m[{index}] = {value} is not a positive integer")]
    NonPositiveMultiplicity { index: usize, value: i64 },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("an instance needs at least one location")]
    EmptyInstance,

    #[error("no merge happens in [0, t]; the first merge time is undefined")]
    NoMerge,

    #[error("evaluation time {s} lies outside [{start}, {end}]")]
    OutOfRange { s: f64, start: f64, end: f64 },

    #[error("oracle dimension {0} exceeds the enumeration limit of {max}", max = crate::oracle::MAX_ORACLE_DIM)]
    DimensionTooLarge(usize),

    #[error("recursion identity needs a single final cluster and n >= 2 (n = {n}, clusters = {clusters})")]
    HypothesisNotMet { n: usize, clusters: usize },

    #[error("contour quadrature supports total moment at most {max}, got {0}", max = crate::quadrature::MAX_QUADRATURE_NU)]
    NuTooLarge(usize),

    #[error("invalid contour: {0}")]
    InvalidContour(String),

    #[error("quadrature returned a non-positive moment {0}; increase the resolution")]
    NonPositiveMoment(f64),

    #[error("non-positive isotonic weight w[{index}] = {value}")]
    NonPositiveWeight { index: usize, value: f64 },
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonPositiveTime(_) => "NonPositiveTime",
            Error::UnsortedLocations { .. } => "UnsortedLocations",
            Error::NonFiniteLocation(_) => "NonFiniteLocation",
            Error::NonPositiveMultiplicity { .. } => "NonPositiveMultiplicity",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::EmptyInstance => "EmptyInstance",
            Error::NoMerge => "NoMerge",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::DimensionTooLarge(_) => "DimensionTooLarge",
            Error::HypothesisNotMet { .. } => "HypothesisNotMet",
            Error::NuTooLarge(_) => "NuTooLarge",
            Error::InvalidContour(_) => "InvalidContour",
            Error::NonPositiveMoment(_) => "NonPositiveMoment",
            Error::NonPositiveWeight { .. } => "NonPositiveWeight",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, found })
    }
}
