use thiserror::Error;

/// Stage at which a word system failed the isomorphism condition on some free algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Op2Stage {
    Membership,
    NotInjective,
    NotSurjective,
}

impl std::fmt::Display for Op2Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Op2Stage::Membership => "membership",
            Op2Stage::NotInjective => "not-injective",
            Op2Stage::NotSurjective => "not-surjective",
        })
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{symbol}` expects {expected} argument(s), got {found}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("variable x{index} is outside x1..x{rank}")]
    VariableOutOfRange { index: usize, rank: usize },
    #[error("variable x{0} has no assigned value")]
    UnmappedVariable(usize),
    #[error("algebras do not share a signature")]
    SignatureMismatch,
    #[error("invalid operation table: {0}")]
    InvalidTable(String),
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("product of an empty family")]
    EmptyProduct,
    #[error("empty seed set over a signature without constants")]
    EmptySeeds,
    #[error("partition is not a congruence of `{0}`")]
    NotACongruence(String),
    #[error("{what} exceeded cap {cap} (reached {reached})")]
    CapExceeded {
        what: &'static str,
        reached: usize,
        cap: usize,
    },
    #[error("algebra `{0}` lies outside the variety")]
    OutsideVariety(String),
    #[error("word for `{0}` uses variables beyond its arity")]
    Op1Violation(String),
    #[error("word system fails the isomorphism condition at rank {rank} ({stage}): {detail}")]
    Op2Failed {
        rank: usize,
        stage: Op2Stage,
        detail: String,
    },
    #[error("rank bound {bound} is below the required rank {needed}")]
    BoundTooSmall { needed: usize, bound: usize },
    #[error("map is not a bijection")]
    NotBijective,
    #[error("rank {0} is outside the free-algebra scope")]
    OutOfScope(usize),
    #[error("free algebra of rank 0 is empty: the signature has no constants")]
    EmptyFreeAlgebra,
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
