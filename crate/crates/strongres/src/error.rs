use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("ring must have at least one variable")]
    EmptyNames,
    #[error("duplicate variable name `{0}`")]
    DuplicateNames(String),
    #[error("malformed name `{0}`")]
    MalformedName(String),
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("move touches frozen coordinate {0}")]
    FrozenViolation(usize),
    #[error("linear move is not invertible")]
    SingularMove,
    #[error("all inputs are zero")]
    AllZeroInput,
    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: i64, found: i64 },
    #[error("primary decomposition heuristic could not split {0}")]
    DecompositionIncomplete(String),
    #[error("unknown coordinate {0}")]
    UnknownCoordinate(usize),
    #[error("repeated coordinate {0}")]
    RepeatedCoordinate(usize),
    #[error("center is not permissible: order {order} below threshold {threshold}")]
    ImpermissibleCenter { order: u32, threshold: u32 },
    #[error("flag coordinate {0} is exceptional")]
    FlagAlongExceptional(usize),
    #[error("singular locus is empty")]
    EmptySingularLocus,
    #[error("object is in the monomial case")]
    MonomialCase,
    #[error("codimension-one component {0} cannot be made a coordinate")]
    R1NotRealizable(String),
    #[error("no hypersurface of maximal contact among generators of {0}")]
    MaximalContactNotRealizable(String),
    #[error("step budget {0} exhausted")]
    BudgetExceeded(usize),
    #[error("input is not pure dimensional: component dimensions {0:?}")]
    NonPureDimensional(Vec<i64>),
    #[error("blowup centers leave the singular locus: {0}")]
    RelativePropertyViolated(String),
    #[error("ideal has {gens} generators but codimension {codim}")]
    NotCompleteIntersection { gens: usize, codim: usize },
    #[error("ideal is the unit ideal")]
    UnitIdeal,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

pub type Result<T> = std::result::Result<T, Error>;
