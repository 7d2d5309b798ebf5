//! Sum-frequency generation of weak pulses in group-velocity-engineered
//! waveguides.
//!
//! Units throughout: ps, mm, amplitudes in ps^(-1/2), coupling in ps^(1/2)/mm.

pub mod analysis;
pub mod analytical;
pub mod bessel;
pub mod dispersion;
pub mod error;
pub mod grid;
pub mod medium;
pub mod numerical;
pub mod pulse;
pub mod scalar;
pub mod spectral;

pub use error::{Result, SfgError};
pub use grid::{energy, fwhm_intensity, normalize, width_1e_intensity, width_at_level, ComplexEnvelope, TimeGrid};
pub use medium::MediumSpec;
pub use pulse::{gaussian_amplitude, synthesize_gaussian, Chirp, GaussianPulseSpec};
pub use scalar::Real;

pub type TimeGrid64 = TimeGrid<f64>;
pub type TimeGrid32 = TimeGrid<f32>;
pub type Envelope64 = ComplexEnvelope<f64>;
pub type Envelope32 = ComplexEnvelope<f32>;
pub type Medium64 = MediumSpec<f64>;
pub type Medium32 = MediumSpec<f32>;
pub type Pulse64 = GaussianPulseSpec<f64>;
pub type Pulse32 = GaussianPulseSpec<f32>;
