use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CmvError {
    #[error("coefficient {value} at index {index} is outside the admissible disk (|alpha| = {modulus})")]
    Domain {
        index: i64,
        value: String,
        modulus: f64,
    },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("window needs explicit cuts at both ends to be tiled by complete blocks")]
    MissingCut,

    #[error("index {index} is outside [{lo}, {hi}]")]
    IndexOutOfWindow { index: i64, lo: i64, hi: i64 },

    #[error("singular solve: z = {0} is numerically an eigenvalue")]
    SingularSolve(String),

    #[error("series has a vanishing constant term where a nonzero one is required ({0})")]
    ZeroConstantTerm(&'static str),

    #[error("square-root branch mismatch: root0^2 = {root_sq}, series constant = {constant}")]
    BranchMismatch { root_sq: String, constant: String },

    #[error("expected constant term {expected}, found {found}")]
    WrongConstantTerm { expected: String, found: String },

    #[error("need moments up to order {needed}, have {available}")]
    InsufficientMoments { needed: usize, available: usize },

    #[error("moment Gram matrix is numerically singular at basis element {0}")]
    RankDeficient(usize),

    #[error("recovered coefficient at index {index} has modulus {modulus} >= 1")]
    OutOfDisk { index: i64, modulus: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("series order too low: need {needed}, have {available}")]
    OrderTooLow { needed: usize, available: usize },

    #[error("json: {0}")]
    Json(String),
}

impl CmvError {
    /// Numerical failures (as opposed to malformed input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            CmvError::SingularSolve(_)
                | CmvError::ZeroConstantTerm(_)
                | CmvError::BranchMismatch { .. }
                | CmvError::RankDeficient(_)
                | CmvError::OutOfDisk { .. }
                | CmvError::HypothesisViolation(_)
        )
    }
}

impl From<serde_json::Error> for CmvError {
    fn from(e: serde_json::Error) -> Self {
        CmvError::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CmvError>;
