use thiserror::Error;

/// Failures raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalabiError {
    #[error("step too coarse: {0}")]
    StepTooCoarse(String),
    #[error("vector norm {norm:e} below 1e-12 (nearly colliding points)")]
    ZeroVector { norm: f64 },
    #[error("map is not area preserving: max |det Df - 1| = {residual:e}")]
    NotAreaPreserving { residual: f64 },
    #[error("hamiltonian varies by {variation:e} along the boundary circle at t = {time}")]
    BoundaryNotConstant { time: f64, variation: f64 },
    #[error("orbits came within {separation:e} of each other after {iterate} iterates")]
    OrbitCollision { iterate: usize, separation: f64 },
    #[error("measured distance to the identity {epsilon} exceeds 1/2")]
    ScaleTooLarge { epsilon: f64 },
    #[error("convergent denominator {q} exceeds the iterate budget {q_max}")]
    QMaxExceeded { q: u64, q_max: u64 },
    #[error("trajectory left the closed disk (radius {radius})")]
    LeftDisk { radius: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl CalabiError {
    /// Stable variant name, used on the diagnostic stream of the CLI.
    pub fn name(&self) -> &'static str {
        match self {
            CalabiError::StepTooCoarse(_) => "StepTooCoarse",
            CalabiError::ZeroVector { .. } => "ZeroVector",
            CalabiError::NotAreaPreserving { .. } => "NotAreaPreserving",
            CalabiError::BoundaryNotConstant { .. } => "BoundaryNotConstant",
            CalabiError::OrbitCollision { .. } => "OrbitCollision",
            CalabiError::ScaleTooLarge { .. } => "ScaleTooLarge",
            CalabiError::QMaxExceeded { .. } => "QMaxExceeded",
            CalabiError::LeftDisk { .. } => "LeftDisk",
            CalabiError::InvalidParameter(_) => "InvalidParameter",
        }
    }
}

pub type Result<T, E = CalabiError> = std::result::Result<T, E>;
