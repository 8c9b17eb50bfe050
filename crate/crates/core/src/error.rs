use thiserror::Error;

/// Errors raised by the core pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimMismatch(&'static str),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("invalid field: {0}")]
    InvalidField(&'static str),
    #[error("operator row {row} has norm {norm}, expected 1")]
    NotUnitNorm { row: usize, norm: f64 },

    #[error("patch centered at ({row}, {col}) does not fit inside the grid")]
    PositionOutOfBounds { row: usize, col: usize },
    #[error("patch layout expects {expected} channels, field has {actual}")]
    ChannelMismatch { expected: usize, actual: usize },
    #[error("grid {width}x{height} is smaller than patch side {patch_side}")]
    GridTooSmall { width: usize, height: usize, patch_side: usize },

    #[error("modality weights must be nonnegative with at least one positive")]
    BadWeights,

    #[error("bad operator dimensions: {0}")]
    BadDims(&'static str),
    #[error("retraction produced a zero row")]
    ZeroRow,
    #[error("objective is not finite")]
    ObjectiveNonFinite,
    #[error("line search stalled after {iterations} iterations")]
    LineSearchStall { iterations: usize },
    #[error("invalid optimizer configuration: {0}")]
    BadConfig(&'static str),

    #[error("operator is rank deficient")]
    RankDeficient,
    #[error("operator rows {0} and {1} are coherent")]
    CoherentRows(usize, usize),
    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("no observed depth pixels")]
    NoObservations,

    #[error("invalid scene spec: {0}")]
    BadSpec(&'static str),
    #[error("downsampling factor {factor} too large for {width}x{height} grid")]
    FactorTooLarge { factor: usize, width: usize, height: usize },
    #[error("rate must lie in [0, 1]")]
    BadRate,
    #[error("observations do not form a regular subsampling grid")]
    NotGridObservations,

    #[error("no valid pixels to evaluate")]
    EmptyMask,
    #[error("baseline RMSE must be positive")]
    ZeroBaseline,
}

impl Error {
    /// Whether the error stems from numerical breakdown rather than bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::ZeroRow | Error::ObjectiveNonFinite | Error::LineSearchStall { .. } | Error::RankDeficient | Error::CoherentRows(..)
        )
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
