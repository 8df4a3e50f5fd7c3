use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("wavelength {lambda} nm outside the {material} table span [{min}, {max}] nm")]
    WavelengthOutOfRange {
        material: String,
        lambda: f64,
        min: f64,
        max: f64,
    },
    #[error("invalid dispersion table: {0}")]
    InvalidDispersion(String),
    #[error("invalid film stack: {0}")]
    InvalidStack(String),
    #[error("degenerate interface: Fresnel denominator vanishes")]
    DegenerateInterface,

    #[error("pixel {0} outside 0..=255")]
    PixelOutOfRange(usize),
    #[error("calibration is not strictly increasing at pixel {pixel}")]
    NonMonotoneCalibration { pixel: usize },
    #[error("invalid spectrum frame: {0}")]
    InvalidFrame(String),
    #[error("frames do not belong together: {0}")]
    MismatchedFrames(String),
    #[error("no valid pixels left after reference/dark normalisation")]
    NoValidPixels,
    #[error("smoothing window must be odd and within 1..=31, got {0}")]
    InvalidWindow(usize),

    #[error("{found} valid pixels, at least {required} needed for a fit")]
    TooFewValidPixels { found: usize, required: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("R² undefined: measured values are constant")]
    UndefinedRSquared,
    #[error("residuals are not finite at the initial point")]
    NonFiniteResiduals,
    #[error("bounds violation: {0}")]
    BoundsViolation(String),
    #[error("every multistart fit failed: {}", .0.join("; "))]
    AllStartsFailed(Vec<String>),

    #[error("gated fusion requested but no sensor passed its gate")]
    NoPassingSensors,
    #[error("no sensor produced a thickness estimate")]
    NoThickness,

    #[error("unknown trajectory sequence `{0}`")]
    UnknownSequence(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("{}{}: {message}", path.display(), line.map(|l| format!(":{l}")).unwrap_or_default())]
    Parse {
        path: PathBuf,
        line: Option<u64>,
        message: String,
    },
    #[error("configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn file(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
        move |source| Error::File {
            path: path.to_path_buf(),
            source,
        }
    }
}
