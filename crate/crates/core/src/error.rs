use thiserror::Error;

/// Errors raised by the solvers, diagnostics and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point coincides with the center of the target")]
    DegeneratePoint,
    #[error("point at signed distance {distance} lies outside the tubular neighborhood (half-width {halfwidth})")]
    OutsideTubularNeighborhood { distance: f64, halfwidth: f64 },
    #[error("point is not on the target boundary (signed distance {distance})")]
    NotOnBoundary { distance: f64 },
    #[error("grid too small: need at least {needed} points along an axis, got {got}")]
    GridTooSmall { needed: usize, got: usize },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("no convergence after {iterations} iterations (last change {last_change:e})")]
    NonConvergence { iterations: usize, last_change: f64 },
    #[error("source term is negative at node {node}")]
    NegativeSource { node: usize },
    #[error("boundary data is outside the closed target at node {node}")]
    BoundaryDataOutsideTarget { node: usize },
    #[error("empty point set")]
    EmptySet,
    #[error("point is not a free-boundary node")]
    NotFreeBoundaryPoint,
    #[error("insufficient nodes in ball: need {needed}, found {found}")]
    InsufficientNodes { needed: usize, found: usize },
    #[error("coefficient g(x0) = {0:e} is below tolerance")]
    ZeroCoefficient(f64),
    #[error("no scale lies in the window ({lower}, 1)")]
    EmptyScaleWindow { lower: f64 },
    #[error("invalid conic parameters: {0}")]
    InvalidConic(String),
    #[error("point lies on the branch cut of the Schwarz function")]
    BranchCut,
    #[error("no admissible integration path to the point")]
    PathBlocked,
    #[error("fundamental solution evaluated at the origin")]
    OriginSingularity,
    #[error("kernel evaluated at a singular pair")]
    KernelSingularity,
    #[error("quadrature too coarse: cell diameter {cell} exceeds guard {guard}")]
    QuadratureTooCoarse { cell: f64, guard: f64 },
    #[error("growth hypothesis violated at r = {r}: sup|f| = {sup} > {bound}")]
    HypothesisViolated { r: f64, sup: f64, bound: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("field file: {0}")]
    FieldFormat(String),
    #[error("config: {0}")]
    ConfigParse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable name used in error reports and the C interface.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DegeneratePoint => "DegeneratePoint",
            Error::OutsideTubularNeighborhood { .. } => "OutsideTubularNeighborhood",
            Error::NotOnBoundary { .. } => "NotOnBoundary",
            Error::GridTooSmall { .. } => "GridTooSmall",
            Error::GridMismatch(_) => "GridMismatch",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::NegativeSource { .. } => "NegativeSource",
            Error::BoundaryDataOutsideTarget { .. } => "BoundaryDataOutsideTarget",
            Error::EmptySet => "EmptySet",
            Error::NotFreeBoundaryPoint => "NotFreeBoundaryPoint",
            Error::InsufficientNodes { .. } => "InsufficientNodes",
            Error::ZeroCoefficient(_) => "ZeroCoefficient",
            Error::EmptyScaleWindow { .. } => "EmptyScaleWindow",
            Error::InvalidConic(_) => "InvalidConic",
            Error::BranchCut => "BranchCut",
            Error::PathBlocked => "PathBlocked",
            Error::OriginSingularity => "OriginSingularity",
            Error::KernelSingularity => "KernelSingularity",
            Error::QuadratureTooCoarse { .. } => "QuadratureTooCoarse",
            Error::HypothesisViolated { .. } => "HypothesisViolated",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::FieldFormat(_) => "FieldFormat",
            Error::ConfigParse(_) => "ConfigParse",
            Error::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
