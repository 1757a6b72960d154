use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown φ family {0} (expected 0..=14)")]
    UnknownFamily(u32),

    #[error("φ family {family}: {message}")]
    PhiDomain { family: u32, message: String },

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("evaluation error at node {coords:?}: {message}")]
    EvalAtNode { coords: Vec<f64>, message: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("non-finite {quantity} at node {coords:?}")]
    NonFinite {
        quantity: &'static str,
        coords: Vec<f64>,
    },

    #[error("hypothesis ({condition}) fails: {message}")]
    Hypothesis {
        condition: &'static str,
        message: String,
    },

    #[error("threshold computation: {0}")]
    Threshold(String),

    #[error("iteration failed to converge: {0}")]
    NoConvergence(String),

    #[error("solver: {0}")]
    Solver(String),
}
