//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("division by a quantity indistinguishable from zero at working precision")]
    DivisionByIndistinguishableZero,
    #[error("logarithm of zero")]
    ZeroArgument,
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("point cannot be separated from the boundary at working precision")]
    PointTooCloseToBoundary,
    #[error("edge has the wrong orientation for transport to the base edge")]
    WrongOrientation,
    #[error("operator {0} is not defined at this level")]
    BadOperator(String),
    #[error("Hecke eigenvalue field is not rational: {0}")]
    NonRationalEigenvalue(String),
    #[error("element is not torsion of order 2, 3, 4 or 6")]
    NotTorsion,
    #[error("all ord pairings vanished; resample boundary elements")]
    AllOrdValuesVanish,
    #[error("curve does not have split multiplicative reduction at p")]
    NotMultiplicativeReduction,
    #[error("U-invariant must be nonzero")]
    ZeroU,
    #[error("filtration is N-stable; module is degenerate")]
    DegenerateFiltration,
    #[error("not a valid discriminant for this configuration: {0}")]
    BadDiscriminant(String),
    #[error("form is not primitive")]
    NotPrimitive,
    #[error("character is not quadratic")]
    NonQuadraticCharacter,
    #[error("cover depth too shallow to separate the integrand's singularities")]
    DepthTooShallow,
    #[error("requested precision exceeds the machine-word capacity for p={0}")]
    PrecisionOverflow(u64),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
