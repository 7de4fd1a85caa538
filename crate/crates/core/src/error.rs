use thiserror::Error;

/// Errors produced by model construction, validation, and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// A model or instance failed structural validation.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// Instance data violates one of the standing assumptions
    /// (penalty dominance, nonnegative coupling matrix, nonnegative costs,
    /// ordered bounds, centered nominal).
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// A budget parameter is outside its admissible range.
    #[error("invalid budget: {0}")]
    InvalidBudget(String),

    /// The simplex or branch-and-bound loop hit its iteration/node cap
    /// without reaching a provable conclusion. Never silently downgraded
    /// to a wrong answer.
    #[error("solver stalled: {0}")]
    SolverStalled(String),

    /// Non-finite numbers appeared in the model or during the solve.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A model that was expected to be solvable has no feasible point.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A model that was expected to be bounded has unbounded optimum.
    #[error("unbounded: {0}")]
    Unbounded(String),

    /// A pipeline stage failed; wraps the inner error with stage attribution.
    #[error("{stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    /// Scenario sampling could not reach the requested acceptance count.
    #[error("sampling error: {0}")]
    Sampling(String),

    /// Instance file could not be read or parsed.
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Wraps an error with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
