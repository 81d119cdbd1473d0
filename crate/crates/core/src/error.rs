use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("vertices {u} and {v} lie in different components")]
    Disconnected { u: usize, v: usize },

    #[error("image of the approximating matrix is not contained in the image of the reference")]
    IncomparableKernels,

    #[error("ridge system is singular on the direction of row ({u}, {v})")]
    SingularRidge { u: usize, v: usize },

    #[error("weight balancing did not terminate within {iterations} iterations")]
    NonTermination {
        iterations: usize,
        /// Last assignment (pair order matches the hyperedge's lexicographic pairs).
        last: Vec<f64>,
    },

    #[error("capability exceeded: {0}")]
    Capability(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("input contains no edges")]
    EmptyGraph,

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
