use thiserror::Error;

/// Errors produced by graph construction, transforms, metrics and experiments.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("node {0} has zero degree")]
    IsolatedNode(usize),

    #[error("edge ({i}, {j}) given in both directions with differing weights")]
    AsymmetricInput { i: usize, j: usize },

    #[error("edge ({i}, {j}) listed more than once")]
    DuplicateEdge { i: usize, j: usize },

    #[error("edge ({i}, {j}) has invalid weight {w}; weights must be finite and positive")]
    NegativeWeight { i: usize, j: usize, w: f64 },

    #[error("self-loop at node {0} but self-loops are disabled")]
    SelfLoop(usize),

    #[error("index {index} out of range for {len} nodes")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("symmetric eigensolver did not converge")]
    EigenFailure,

    #[error("graph is disconnected (second eigenvalue {lambda1} of the lazy diffusion is 1)")]
    DisconnectedGraph { lambda1: f64 },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("beta = {0} outside the admissible range")]
    BetaOutOfRange(f64),

    #[error("scattering shapes differ: (m={m1}, J={j1}) vs (m={m2}, J={j2})")]
    ShapeMismatch {
        m1: usize,
        j1: usize,
        m2: usize,
        j2: usize,
    },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("exact permutation search is capped at n = {cap}, got n = {n}; use heuristic mode")]
    TooLargeForExact { n: usize, cap: usize },

    #[error("diffusion time s = {0} does not make 2s a positive integer")]
    NonIntegerPower(f64),

    #[error("matrix norm {0} is not below 1")]
    NormTooLarge(f64),

    #[error("{what}: no valid sample after {attempts} attempts")]
    GenerationFailed { what: &'static str, attempts: usize },

    #[error("class {0} has no training examples")]
    DegenerateLabels(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
