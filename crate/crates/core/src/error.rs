use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("matrix {0} is not invertible")]
    NotInvertible(String),
    #[error("bad modulus: {0}")]
    BadModulus(String),
    #[error("group exceeds the size cap of {cap} elements")]
    GroupTooLarge { cap: usize },
    #[error("subgroup is not normal")]
    NotNormal,
    #[error("quotient is not abelian")]
    NotAbelianQuotient,
    #[error("search budget of {budget} candidate evaluations exhausted")]
    SearchBudgetExceeded { budget: u64 },
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("image does not contain SL2(Z/{0}Z)")]
    NotLarge(u32),
    #[error("malformed record: {0}")]
    MalformedRecord(String),
    #[error("t = {0} is a pole of j")]
    Pole(String),
}

pub type Result<T> = std::result::Result<T, Error>;
