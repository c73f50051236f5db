use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime below 65536")]
    InvalidPrime(u32),

    #[error("prime {p} is too small for degree {degree}: characters need p > n")]
    PrimeTooSmall { p: u32, degree: usize },

    #[error("map does not descend to the quotient")]
    DoesNotDescend,

    #[error("map does not preserve the subspace")]
    NotASubmodule,

    #[error("relation `{identity}` fails in degree {degree}")]
    RelationViolation { degree: usize, identity: String },

    #[error("degree {required} needed but only degrees up to {available} are trusted")]
    OutOfWindow { required: usize, available: usize },

    #[error("no degree bound was supplied for the torsion submodule")]
    UncertifiedBound,

    #[error("nonzero value in a degree the bound {bound} forbids: {what}")]
    GuardBandNonzero { bound: i32, what: String },

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
}
