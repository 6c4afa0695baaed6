use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("non-finite value at index {index}")]
    NonFiniteValue { index: usize },
    #[error("illegal ground-truth pixel value {value} at index {index}")]
    IllegalPixelValue { value: u16, index: usize },
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("covariance matrix has rank {rank}, fewer than the {requested} requested components")]
    DegenerateCovariance { rank: usize, requested: usize },
    #[error("k_desired = {k} exceeds the {pixels} available pixels")]
    KTooLarge { k: usize, pixels: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no valid (non-excluded) pixels")]
    EmptyValidArea,
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("segment {segment} has {size} pixels, at least {min} required")]
    SegmentTooSmall { segment: u32, size: usize, min: usize },
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("task {task} has no votes")]
    EmptyVotes { task: String },
    #[error("segment {segment} has no record")]
    MissingSegment { segment: u32 },
    #[error("CSV error: {0}")]
    Csv(String),
}

impl Error {
    /// Stable machine-readable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "IoError",
            Error::MalformedHeader(_) => "MalformedHeader",
            Error::TruncatedPayload { .. } => "TruncatedPayload",
            Error::NonFiniteValue { .. } => "NonFiniteValue",
            Error::IllegalPixelValue { .. } => "IllegalPixelValue",
            Error::InvalidDimensions(_) => "InvalidDimensions",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::DegenerateCovariance { .. } => "DegenerateCovariance",
            Error::KTooLarge { .. } => "KTooLarge",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::EmptyValidArea => "EmptyValidArea",
            Error::EmptyInput(_) => "EmptyInput",
            Error::SegmentTooSmall { .. } => "SegmentTooSmall",
            Error::EmptyTrainingSet => "EmptyTrainingSet",
            Error::EmptyVotes { .. } => "EmptyVotes",
            Error::MissingSegment { .. } => "MissingSegment",
            Error::Csv(_) => "CsvError",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
