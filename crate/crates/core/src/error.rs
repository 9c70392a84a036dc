use thiserror::Error;

/// Errors produced by the workbench.
///
/// `BudgetExceeded` is kept apart from the input errors because the command
/// line front end reports it with its own exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("search budget exceeded: {what} needs {needed} but the budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        budget: u64,
    },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid coloring: {0}")]
    InvalidColoring(String),
    #[error("invalid CSP instance: {0}")]
    InvalidCsp(String),
    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("invalid function table: {0}")]
    InvalidTable(String),
    #[error("invalid label cover instance: {0}")]
    InvalidLabelCover(String),
    #[error("malformed coloring: {0}")]
    MalformedColoring(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
