use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unsupported dimension {0}, expected 1, 2 or 3")]
    UnsupportedDimension(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("states or fields live on different grids")]
    GridMismatch,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported moment order {0}, at most 4 is available")]
    UnsupportedOrder(usize),

    #[error("dense assembly of {size} basis states exceeds the limit of {limit}")]
    MemoryGuard { size: usize, limit: usize },

    #[error("potential is not real valued")]
    NonRealPotential,

    #[error("time step too large: dt * E_kin,max / hbar = {ratio:.3e} exceeds {limit}")]
    StepSize { ratio: f64, limit: f64 },

    #[error("norm drift {drift:.3e} after step {step} exceeds 1e-6")]
    NormDrift { step: usize, drift: f64 },

    #[error("eigensolver did not converge: worst residual {residual:.3e} exceeds {tolerance:.3e}")]
    Convergence { residual: f64, tolerance: f64 },

    #[error("need at least {needed} snapshots, found {found}")]
    InsufficientSnapshots { needed: usize, found: usize },

    #[error("the correction applies to S states only (requested l = {0})")]
    NonSState(usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unknown convention identifier `{0}`")]
    UnknownConvention(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("malformed data: {0}")]
    Parse(String),
}

impl Error {
    /// True for aborts raised by a running computation rather than by
    /// input validation.
    pub fn is_numerical_guard(&self) -> bool {
        matches!(self, Self::NormDrift { .. } | Self::Convergence { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
