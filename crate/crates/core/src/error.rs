use alloc::string::String;

/// Everything that can go wrong inside the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("parameter `{name}` = {value} is outside its domain: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("`{quantity}` is not representable (offending parameter `{name}` = {value})")]
    Overflow {
        quantity: &'static str,
        name: &'static str,
        value: f64,
    },
    #[error("asymptote of `{quantity}` vanishes at the evaluation point")]
    ZeroAsymptote { quantity: &'static str },
    #[error("singular phase map: {0}")]
    Singular(&'static str),
    #[error("quadrature budget exceeded: {requested} evaluations per point, cap is {cap}")]
    Budget { requested: u64, cap: u64 },
    #[error("test function `{label}` declares no {which} asymptote")]
    MissingAsymptote { label: String, which: &'static str },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid quadrature rule: {0}")]
    Rule(&'static str),
    #[error("evolution matrix has determinant {0}, expected 1")]
    NotUnimodular(f64),
    #[error("invalid Gaussian: {0}")]
    Gaussian(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
