use thiserror::Error;

/// Errors raised by the library. Each variant names the offending object so
/// callers can report it without re-deriving context.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("transition matrix must be {k}x{k}: {detail}")]
    Shape { k: usize, detail: String },
    #[error("entry ({row},{col}) is {value}, expected 0 or 1")]
    NonBinary { row: usize, col: usize, value: i64 },
    #[error("{axis} {index} of the transition matrix is identically zero")]
    ZeroRowOrColumn { axis: Axis, index: usize },
    #[error("reducible matrix: symbol {to} is not reachable from symbol {from}")]
    ReducibleMatrix { from: usize, to: usize },
    #[error("irreducible matrix with period {period}")]
    PeriodicMatrix { period: usize },
    #[error("word {word} is not admissible")]
    InadmissibleWord { word: String },
    #[error("point is not admissible at position {position}")]
    InadmissiblePoint { position: usize },
    #[error("potential table of depth {depth} has no value for word {word}")]
    MissingWord { depth: usize, word: String },
    #[error("potential table has {got} entries, expected {expected}")]
    TableSize { expected: usize, got: usize },
    #[error("roof function must be positive, found {value} on word {word}")]
    NonPositiveRoof { word: String, value: f64 },
    #[error("vector has length {got}, operator expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operator is not primitive")]
    NonPrimitive,
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("no sign change of the pressure function on [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },
    #[error("tracked eigenvalue collides with another (separation {separation:e})")]
    EigenvalueCollision { separation: f64 },
    #[error("potential of depth {depth} cannot be integrated against a measure on words of length {max}")]
    DepthMismatch { depth: usize, max: usize },
    #[error("enumeration needs {needed} items, budget is {budget}")]
    EnumerationBudgetExceeded { needed: u128, budget: u128 },
    #[error("log of the zeta function winds {winding} times around the circle")]
    DivergentOnCircle { winding: i64 },
    #[error("{count} poles inside the residue contour, expected 1")]
    PoleNotIsolated { count: i64 },
    #[error("argument {0} outside the domain")]
    DomainError(f64),
    #[error("horizon too small: {orbits} orbits")]
    HorizonTooSmall { orbits: usize },
    #[error("window [{lo}, {hi}] contains no orbit")]
    EmptyWindow { lo: f64, hi: f64 },
    #[error("function leaves the cone: ratio {ratio} exceeds {bound} on pair ({left}, {right})")]
    ConeViolation { ratio: f64, bound: f64, left: String, right: String },
    #[error("entry {index} is not positive")]
    NonPositive { index: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Row,
    Column,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axis::Row => f.write_str("row"),
            Axis::Column => f.write_str("column"),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
