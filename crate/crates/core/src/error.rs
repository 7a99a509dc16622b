use thiserror::Error;

/// Errors produced by the geometry, objective, solver and analysis layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("objective has no known optimal value; run in dual-gap-only mode or attach a reference value")]
    MissingOptimalValue,

    #[error("objective has no minimizer witness")]
    MissingMinimizer,

    #[error("primal gap {0:e} is negative beyond round-off")]
    NegativePrimalGap(f64),

    #[error("Frank-Wolfe gap {gap:e} is negative at t={t}; the LMO or gradient is inconsistent")]
    NegativeFwGap { t: u64, gap: f64 },

    #[error("starting point is not feasible (tolerance {tol:e})")]
    InfeasibleStart { tol: f64 },

    #[error("non-finite iterate at t={t}")]
    NumericBreakdown { t: u64 },

    #[error("no convergence within {budget} iterations (best Frank-Wolfe gap {best_gap:e})")]
    NonConvergence { budget: u64, best_gap: f64 },

    #[error("exact convergence at t={t}: primal gap is zero inside the fit window")]
    ExactConvergence { t: u64 },

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("no sampled point lies within rho={rho} of the reference set")]
    EmptyNeighborhood { rho: f64 },

    #[error("linear program failed: {0}")]
    LinearProgram(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
