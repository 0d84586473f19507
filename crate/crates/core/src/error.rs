use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("operands live in different variable registries")]
    RegistryMismatch,
    #[error("substitution cycle through variable {0}")]
    SubstitutionCycle(String),
    #[error("variable {0} has no conjugation partner")]
    UnpairedVariable(String),
    #[error("linear part of the implicit system is singular")]
    SingularLinearPart,
    #[error("implicit solve did not converge within {0} passes")]
    NoConvergence(usize),
    #[error("invalid manifold: {0}")]
    InvalidManifold(String),
    #[error("point is not on the manifold: {0}")]
    PointNotOnManifold(String),
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("multi-index order {order} exceeds cap {cap}")]
    OrderCap { order: usize, cap: usize },
    #[error("{0} is not real-valued on the manifold")]
    NotRealOnManifold(String),
    #[error("vector field is not tangent to the manifold")]
    NotTangent,
    #[error("flow is not computable: {0}")]
    FlowUnavailable(String),
    #[error("map jet has a non-invertible linear part")]
    NonInvertibleLinearPart,
    #[error("jet constraints are inconsistent at degree {0}")]
    Inconsistent(u32),
    #[error("prerequisites fail: {0}")]
    Prerequisites(String),
}

pub type Result<T> = std::result::Result<T, Error>;
