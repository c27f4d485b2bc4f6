use thiserror::Error;

/// Errors raised by the estimators, generators and the feature pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input is {size} bytes, above the {limit} byte limit")]
    FileTooLarge { size: usize, limit: usize },
    #[error("line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("input contains no data rows")]
    EmptyInput,
    #[error("invalid observation window: {0}")]
    BadWindow(String),
    #[error("invalid cell type label: {0:?}")]
    BadLabel(String),
    #[error("point ({x}, {y}) lies outside the observation window")]
    PointOutsideWindow { x: f64, y: f64 },
    #[error("distance grid needs at least 2 bins, got {0}")]
    BadBins(usize),
    #[error("invalid distance grid: {0}")]
    BadGrid(String),

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("pattern is empty")]
    EmptyPattern,
    #[error("no points of type {0:?}")]
    EmptyType(String),
    #[error("angular sector width must lie in (0, 2pi], got {0}")]
    BadSector(f64),
    #[error("mark weight normaliser is zero")]
    ZeroNormalizer,
    #[error("mark weight function returned {0}, expected a finite nonnegative value")]
    BadMarkWeight(f64),
    #[error("mark {0:?} is not numeric")]
    NonNumericMark(String),
    #[error("negative K estimate {0} at r = {1}")]
    NegativeInput(f64, f64),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("quadrat side count must be at least 2, got {0}")]
    BadQ(usize),
    #[error("field is constant, the statistic is undefined")]
    ConstantField,
    #[error("quadrat grid holds no points")]
    EmptyGrid,
    #[error("both count vectors are empty")]
    BothEmpty,
    #[error("count vector has zero total")]
    ZeroTotal,
    #[error("zero vector")]
    ZeroVector,
    #[error("vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("no landmark points")]
    NoLandmarks,
    #[error("no witness points")]
    NoWitnesses,
    #[error("simplex dimension {0} unsupported")]
    BadDimension(usize),
    #[error("invalid filtration: {0}")]
    InvalidFiltration(String),

    #[error("need at least 2 curves, got {0}")]
    TooFewCurves(usize),
    #[error("only {0} usable grid points remain after dropping undefined columns")]
    DegenerateGrid(usize),

    #[error("intensity must be finite and nonnegative, got {0}")]
    BadIntensity(f64),
    #[error("number of simulations must be positive")]
    BadNSim,

    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("none of the selected cell types occurs in the pattern")]
    NoSelectedTypePresent,
}

impl Error {
    /// True for failures caused by the input file rather than the computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::FileTooLarge { .. }
                | Error::MalformedRow { .. }
                | Error::EmptyInput
                | Error::BadWindow(_)
                | Error::BadLabel(_)
                | Error::PointOutsideWindow { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
