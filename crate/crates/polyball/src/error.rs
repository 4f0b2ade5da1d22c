use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("word {word} exceeds the truncation degrees {degrees:?}")]
    WordOutOfRange { word: String, degrees: Vec<usize> },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("pair ({alpha}; {beta}) is not in the index set Lambda")]
    NotInLambda { alpha: String, beta: String },

    #[error("series diverges: {0}")]
    Divergence(String),

    #[error("kernel is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },

    #[error("singular resolvent (min singular value {min_singular_value:e})")]
    SingularResolvent { min_singular_value: f64 },

    #[error("generator value missing for ({alpha}; {beta})")]
    MissingGenerator { alpha: String, beta: String },

    #[error("generator is not Hermitian at ({alpha}; {beta}), defect {defect:e}")]
    NonHermitian {
        alpha: String,
        beta: String,
        defect: f64,
    },

    #[error("commutation violated: {0}")]
    CommutationViolation(String),

    #[error("point is outside the polyball: {0}")]
    NotInPolyball(String),

    #[error("malformed json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
