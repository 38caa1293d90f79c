use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not nilpotent: A^{m} != 0 (kernel dimensions {kernel_dims:?})")]
    NotNilpotent { m: usize, kernel_dims: Vec<usize> },

    #[error("endomorphism is not generic: kernel filtration {filtration:?}")]
    NotGeneric { filtration: Vec<usize> },

    #[error("invalid model data: {0}")]
    InvalidModel(String),

    #[error("coset lies in the orthogonal complement of the null direction")]
    CosetOrthogonal,

    #[error("scaling factor must be positive and different from 1, got {0}")]
    BadScale(String),

    #[error("t must be positive, got {0}")]
    NonPositiveTime(f64),

    #[error("complex characteristic exponents (1 + 4c = {disc} < 0) are not supported")]
    ComplexExponents { disc: f64 },

    #[error("mismatched model data between solutions")]
    ModelMismatch,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("polynomial is not a GL(Z)-polynomial: {0}")]
    NotGlz(String),

    #[error("matrix is not unimodular (det = {0})")]
    NotUnimodular(String),

    #[error("polynomial is reducible; factors {factors:?}")]
    Reducible { factors: Vec<Vec<i64>> },

    #[error("degree {degree} exceeds the configured bound {bound}")]
    DegreeTooLarge { degree: usize, bound: usize },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("{name} out of range: {detail}")]
    OutOfRange { name: &'static str, detail: String },

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
