use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("already grayscale")]
    AlreadyGrayscale,

    #[error("expected a {expected}-channel image, got {actual} channel(s)")]
    Channels { expected: usize, actual: usize },

    #[error("buffer of {len} samples does not match {width}x{height}x{channels}")]
    BufferLength {
        width: usize,
        height: usize,
        channels: usize,
        len: usize,
    },

    #[error("unsupported image geometry {width}x{height}x{channels}")]
    Geometry {
        width: usize,
        height: usize,
        channels: usize,
    },

    #[error("image is {width}x{height}, need at least {min_width}x{min_height}")]
    TooSmall {
        width: usize,
        height: usize,
        min_width: usize,
        min_height: usize,
    },

    #[error("dimension mismatch: {left:?} vs {right:?} (width, height, channels)")]
    DimensionMismatch {
        left: (usize, usize, usize),
        right: (usize, usize, usize),
    },

    #[error("crop {rect:?} does not fit in a {width}x{height} image")]
    CropOutOfBounds {
        rect: crate::CropRect,
        width: usize,
        height: usize,
    },

    #[error("degenerate histogram: image carries no luminance mass")]
    DegenerateHistogram,

    #[error("histogram shapes differ: {left} vs {right} bins")]
    HistogramShape { left: usize, right: usize },

    #[error("composition ratio undefined for op_x = 0 and op_n = 0")]
    ZeroDenominator,

    #[error("{name} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("{0}")]
    InvalidParameter(String),

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("no usable images in {}", .0.display())]
    EmptyCorpus(PathBuf),

    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },

    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Codec(#[from] ::image::ImageError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }
}
