use thiserror::Error;

/// Errors surfaced by the algebraic core and the graph oracles.
#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero in field arithmetic")]
    DivisionByZero,

    #[error("{0} is not an odd prime")]
    NotPrime(u64),

    #[error(
        "transform of length {needed} needs two-adicity {required}, field provides {available}"
    )]
    TransformTooLong {
        needed: usize,
        required: u32,
        available: u32,
    },

    #[error("no built-in prime serves n = {n} with degree bound {degree_bound}")]
    FieldCapacity { n: usize, degree_bound: usize },

    #[error("field of size {p} cannot provide {needed} distinct evaluation points")]
    EvalCapacity { p: u64, needed: u128 },

    #[error("polynomial division left a non-zero remainder")]
    NotDivisible,

    #[error("duplicate interpolation abscissa")]
    DuplicatePoint,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is singular")]
    Singular,

    #[error(
        "kernel basis rank degeneracy: expected {expected} independent columns, found {found}"
    )]
    RankDegeneracy { expected: usize, found: usize },

    #[error("algebraic invariant violated: {0}")]
    Invariant(String),

    #[error("matrix became singular after the update batch; retry with a new seed")]
    SingularAfterUpdate,

    #[error("randomized encoding is singular; retry with a new seed")]
    SingularEncoding,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
