use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("angle must be finite, got {0}")]
    NonFiniteAngle(f64),

    #[error("setting {label:?} is not available on {side:?}")]
    InvalidSetting {
        side: crate::model::Side,
        label: crate::model::Label,
    },

    #[error("setting pair must be (Side1, Side2), got ({0:?}, {1:?})")]
    InvalidPair(crate::model::Side, crate::model::Side),

    #[error("invalid probabilities ({p_plus}, {p_minus}) for {setting}")]
    InvalidProbabilities {
        setting: String,
        p_plus: f64,
        p_minus: f64,
    },

    #[error("outcome selector components must be +1 or -1, got ({0}, {1})")]
    InvalidSelector(i8, i8),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("detector parameter {name} = {value} is outside [0, 1]")]
    InvalidDetectorParam { name: &'static str, value: f64 },

    #[error("linear program is infeasible (phase-one residual {0:e})")]
    Infeasible(f64),

    #[error("linear program is unbounded (entering column {0})")]
    Unbounded(usize),

    #[error("simplex did not terminate within {0} pivots")]
    IterationLimit(usize),

    #[error("certificate does not match problem: {0}")]
    MismatchedProblem(String),

    #[error("phi grid is empty")]
    EmptyGrid,

    #[error("phi grid must be strictly increasing and finite (index {0})")]
    UnorderedGrid(usize),

    #[error("invalid simulation config: {0}")]
    InvalidSimConfig(String),

    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
}
