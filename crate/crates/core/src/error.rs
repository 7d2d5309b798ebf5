use thiserror::Error;

/// Errors raised by the field models, solvers and diagnostics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SfgError {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("time grid [{have_start}, {have_end}] ps does not cover required span [{need_start}, {need_end}] ps")]
    GridTooSmall {
        need_start: f64,
        need_end: f64,
        have_start: f64,
        have_end: f64,
    },

    #[error("pulse duration parameter must be positive, got {0} ps")]
    NonPositiveDuration(f64),

    #[error("envelope has zero energy")]
    ZeroEnergy,

    #[error("envelope contains non-finite samples")]
    NonFinite,

    #[error("width undefined: level {level} of peak is not crossed on both sides")]
    WidthUndefined { level: f64 },

    #[error("wavelength {wavelength_um} um outside model validity range [{min_um}, {max_um}] um")]
    OutOfRange {
        wavelength_um: f64,
        min_um: f64,
        max_um: f64,
    },

    #[error("process is not quasi-phase-matchable: k_r - k_s - k_p = {mismatch} rad/mm")]
    NotQpmable { mismatch: f64 },

    #[error("degenerate medium: {0}")]
    DegenerateMedium(String),

    #[error("envelopes live on different time grids")]
    GridMismatch,

    #[error("solver did not converge: step-doubling error {error:e} above tolerance {tolerance:e}")]
    Convergence { error: f64, tolerance: f64 },

    #[error("grid aliasing: {fraction:e} of spectral weight in outer 10% of frequency window")]
    Aliasing { fraction: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dispersion data: {0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, SfgError>;
