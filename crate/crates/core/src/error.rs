use thiserror::Error;

/// Errors surfaced by the library. Solver *outcomes* such as infeasibility are
/// reported through [`crate::solvers::SolveStatus`]; only contract violations and
/// hard failures land here.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("feedback kind mismatch: dataset holds {expected} feedback, got {found}")]
    FeedbackKind {
        expected: &'static str,
        found: &'static str,
    },
    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },
    #[error("empty posterior: every candidate has zero profile likelihood or zero prior mass")]
    EmptyPosterior,
    #[error("invalid belief: {0}")]
    InvalidBelief(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("all objective weights are zero")]
    AllWeightsZero,
    #[error("solver did not reach an optimal point: {0}")]
    Solver(String),
    #[error("data admit no M-Lipschitz interpolant (pair {i}, {j}); profile likelihood is zero everywhere")]
    InconsistentData { i: usize, j: usize },
    #[error("rejection sampler gave up after {attempts} attempts (estimated acceptance rate {acceptance_rate:.3e})")]
    MaxAttempts { attempts: u64, acceptance_rate: f64 },
    #[error("degenerate geometry: {0}")]
    Geometry(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
