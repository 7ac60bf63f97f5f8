use thiserror::Error;

use crate::geometry::ScalarField;
use crate::solver::SolveReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("grid too small: {0}")]
    GridTooSmall(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("field coverage insufficient: {0}")]
    Coverage(String),

    #[error("window outside grid: {0}")]
    Window(String),

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("not a graph in this direction: {flagged} of {occupied} occupied cells hold separated crossings")]
    NotAGraph { flagged: usize, occupied: usize },

    #[error("active-set iteration did not converge at time step {step}")]
    NoConvergence {
        step: usize,
        last_iterate: Box<ScalarField>,
        report: Box<SolveReport>,
    },

    #[error("boundary data mismatch: {0}")]
    DataMismatch(String),

    #[error("unknown scenario `{name}`; available: {}", available.join(", "))]
    UnknownScenario { name: String, available: Vec<String> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
