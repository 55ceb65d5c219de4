use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument {value} outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("weighted moment diverges for beta = {beta}, alpha = {alpha}")]
    Divergent { beta: f64, alpha: f64 },

    #[error("diffusion coefficient {value:e} is not positive at ({x1}, {x2})")]
    NonPositiveCoefficient { value: f64, x1: f64, x2: f64 },

    #[error("conjugate gradients stopped after {iterations} iterations at relative residual {residual:e}")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("cubature node {node}: {source}")]
    AtNode {
        node: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("rate fit needs at least 3 usable points, got {0}")]
    TooFewPoints(usize),

    #[error("sequence is not nonincreasing and nonnegative at index {0}")]
    Unordered(usize),

    #[error("no {kind} registered under the name `{name}`")]
    UnknownStrategy { kind: &'static str, name: String },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// True for failures of the numerics (solver breakdown, loss of
    /// ellipticity) as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NonPositiveCoefficient { .. } | Error::NoConvergence { .. } => true,
            Error::AtNode { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub(crate) fn at_node(node: usize, source: Error) -> Self {
        Error::AtNode {
            node,
            source: Box::new(source),
        }
    }
}
