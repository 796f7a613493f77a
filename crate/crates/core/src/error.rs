use thiserror::Error;

use crate::mav::SolutionReport;

/// Errors raised by the torus calculus and field constructors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("lattice parameter must have positive imaginary part (got {0})")]
    NonPositiveImaginaryPart(f64),
    #[error("grid size must be a power of two and at least 8 (got {0})")]
    BadGridSize(usize),
    #[error("density has non-zero integral {integral:e} (tolerance {tol:e})")]
    NonZeroMean { integral: f64, tol: f64 },
    #[error("field length {got} does not match grid with {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("theta truncation must be at least 8 (got {0})")]
    TruncationTooSmall(usize),
}

/// Errors raised by the pointwise curvature algebra.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("operation requires rank 2 (got rank {0})")]
    RankNotTwo(usize),
    #[error("block shapes are inconsistent with rank {0}")]
    Shape(usize),
    #[error("sampled fields have mismatched lengths")]
    GridMismatch,
    #[error("dimension {0} outside supported range 1..=4")]
    DimensionOutOfRange(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Errors raised by the vortex solver.
#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(
        "stability gate: r1 = {r1} <= r2 = {r2} (alpha <= 1); set allow_unstable to force a run"
    )]
    StabilityGate { r1: u32, r2: u32 },
    #[error("linear solve failed: {0}")]
    LinearSolveFailure(String),
    #[error("Newton iteration stalled after {iterations} steps (residual {residual:e})")]
    NewtonStalled { iterations: usize, residual: f64 },
    #[error("damping factor fell below floor without residual decrease (residual {residual:e})")]
    DampingFloor { residual: f64 },
    #[error("continuation step fell below floor at t = {t}")]
    StepFloorReached { t: f64, report: Box<SolutionReport> },
    #[error("monitor violation at t = {t}: {reason}")]
    MonitorViolation {
        t: f64,
        reason: String,
        report: Box<SolutionReport>,
    },
    #[error(
        "f2 equation not solvable: right-hand side integrates to {integral} instead of {expected}"
    )]
    SolvabilityFailure { integral: f64, expected: f64 },
}

impl SolveError {
    /// Partial report carried by continuation failures.
    pub fn report(&self) -> Option<&SolutionReport> {
        match self {
            SolveError::StepFloorReached { report, .. }
            | SolveError::MonitorViolation { report, .. } => Some(report),
            _ => None,
        }
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            SolveError::Config(_) => "ConfigError",
            SolveError::Geometry(_) => "GeometryError",
            SolveError::StabilityGate { .. } => "StabilityGate",
            SolveError::LinearSolveFailure(_) => "LinearSolveFailure",
            SolveError::NewtonStalled { .. } => "NewtonStalled",
            SolveError::DampingFloor { .. } => "DampingFloor",
            SolveError::StepFloorReached { .. } => "StepFloorReached",
            SolveError::MonitorViolation { .. } => "MonitorViolation",
            SolveError::SolvabilityFailure { .. } => "SolvabilityFailure",
        }
    }
}
