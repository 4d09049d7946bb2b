use alloc::string::String;

/// Errors produced by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("invalid probability {value} at index {index}")]
    InvalidProbability { index: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Markov chain is not irreducible and aperiodic")]
    NotErgodic,

    #[error("enumeration budget exceeded: {needed} > {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("observation has zero likelihood under the model (index {index})")]
    ZeroLikelihood { index: usize },

    #[error("no reproduction symbol with finite distortion for source symbol {0}")]
    InfeasibleRow(usize),

    #[error("target distortion {target} is below the minimum achievable {min}")]
    InfeasibleTarget { target: f64, min: f64 },

    #[error("no codeword has finite distortion")]
    NoFiniteCodeword,

    #[error("affine coefficient is unidentifiable: distortion rows are constant")]
    Unidentifiable,

    #[error("linear program is infeasible")]
    LpInfeasible,

    #[error("linear program is unbounded")]
    LpUnbounded,

    #[error("perception constraint violated: output marginal differs by {gap}")]
    PerceptionViolated { gap: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_budget(needed: u128, budget: u128) -> Result<()> {
    if needed > budget {
        Err(Error::BudgetExceeded { needed, budget })
    } else {
        Ok(())
    }
}

/// `base^exp` as u128, saturating.
pub(crate) fn pow_count(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}
