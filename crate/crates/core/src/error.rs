use alloc::string::String;

/// Errors raised by the library. Every precondition failure names the
/// violated inequality or the offending sub-formula.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("measure space must have at least one atom")]
    EmptySpace,
    #[error("atom {index} has weight {weight}; weights must be positive and finite")]
    BadWeight { index: usize, weight: f64 },
    #[error("value dimension must be at least 1")]
    BadDimension,
    #[error("function has {got} values, space has {expected} atoms of dimension {dim}")]
    ShapeMismatch {
        expected: usize,
        dim: usize,
        got: usize,
    },
    #[error("function contains a non-finite component")]
    NonFinite,
    #[error("functions live on different measure spaces")]
    SpaceMismatch,
    #[error("exponent p = {0} is invalid; need p >= 1 or p = +inf")]
    BadExponent(f64),
    #[error("invalid parameter {name} = {value}: {requirement}")]
    InvalidParam {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("epsilon = {epsilon} is outside (0, sigma*) with sigma* = {sigma_star}")]
    EpsilonOutOfRange { epsilon: f64, sigma_star: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("logarithm domain error in {term}: base = {base}, argument = {arg}")]
    LogDomain {
        term: &'static str,
        base: f64,
        arg: f64,
    },
    #[error("instance too large for the grid oracle: {0}")]
    OracleTooLarge(String),
    #[error("certified sandwich violated: lower = {lower} exceeds upper = {upper}")]
    SandwichViolation { lower: f64, upper: f64 },
    #[error("kernel has zero Lipschitz weight at (xi = {xi}, s = {s}) but moves by {jump}")]
    ZeroLipschitzViolated { xi: usize, s: usize, jump: f64 },
    #[error("kernel configuration invalid: {0}")]
    BadKernel(String),
    #[error("output bound violated: ||F(x)||_1 = {observed} > psi_0 = {bound}")]
    OutputBoundViolated { observed: f64, bound: f64 },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
