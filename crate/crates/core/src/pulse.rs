//! Parametric Gaussian pulses, optionally chirped and dispersed.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Result, SfgError};
use crate::grid::{ComplexEnvelope, TimeGrid};
use crate::scalar::Real;
use crate::spectral::propagate_linear;

/// Temporal phase imprinted on a pulse at z = 0 (rad).
#[derive(Clone)]
pub enum Chirp<T: Real = f64> {
    /// `sum_k c[k] * (t - t_center)^k`.
    Polynomial(Vec<T>),
    /// One phase value per sample of the synthesis grid.
    Sampled(Vec<T>),
    Function(Arc<dyn Fn(T) -> T + Send + Sync>),
}

impl<T: Real> Chirp<T> {
    /// Pure quadratic chirp `rate * (t - t_center)^2`.
    pub fn quadratic(rate: T) -> Self {
        Self::Polynomial(vec![T::zero(), T::zero(), rate])
    }

    /// Phase of opposite sign, so that `self + self.negated()` cancels.
    pub fn negated(&self) -> Self {
        match self {
            Self::Polynomial(c) => Self::Polynomial(c.iter().map(|&v| -v).collect()),
            Self::Sampled(v) => Self::Sampled(v.iter().map(|&p| -p).collect()),
            Self::Function(f) => {
                let f = Arc::clone(f);
                Self::Function(Arc::new(move |t| -f(t)))
            }
        }
    }

    fn phases(&self, grid: &TimeGrid<T>, t_center: T) -> Result<Vec<T>> {
        match self {
            Self::Polynomial(c) => Ok(grid
                .times()
                .map(|t| {
                    let x = t - t_center;
                    c.iter().rev().fold(T::zero(), |acc, &ck| acc * x + ck)
                })
                .collect()),
            Self::Sampled(v) if v.len() == grid.len() => Ok(v.clone()),
            Self::Sampled(v) => Err(SfgError::InvalidInput(format!(
                "sampled chirp has {} values for a grid of {}",
                v.len(),
                grid.len()
            ))),
            Self::Function(f) => Ok(grid.times().map(|t| f(t)).collect()),
        }
    }
}

impl<T: Real> fmt::Debug for Chirp<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Polynomial(c) => f.debug_tuple("Polynomial").field(c).finish(),
            Self::Sampled(v) => write!(f, "Sampled({} values)", v.len()),
            Self::Function(_) => f.write_str("Function(..)"),
        }
    }
}

/// Gaussian pulse with intensity `exp(-(t - center)^2 / (2 duration^2))` at z = 0.
#[derive(Debug, Clone)]
pub struct GaussianPulseSpec<T: Real = f64> {
    /// Duration parameter `T_p` (ps); the 1/e half width of the amplitude is `2 T_p`.
    pub duration: T,
    /// Peak time at z = 0 (ps).
    pub center: T,
    pub chirp: Option<Chirp<T>>,
}

impl<T: Real> GaussianPulseSpec<T> {
    pub fn new(duration: T, center: T) -> Self {
        Self {
            duration,
            center,
            chirp: None,
        }
    }

    pub fn with_chirp(mut self, chirp: Chirp<T>) -> Self {
        self.chirp = Some(chirp);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > T::zero()) || !self.duration.is_finite() {
            return Err(SfgError::NonPositiveDuration(self.duration.as_f64()));
        }
        if !self.center.is_finite() {
            return Err(SfgError::InvalidInput("pulse center must be finite".into()));
        }
        Ok(())
    }

    /// Amplitude 1/e half width `2 T_p sqrt(1 + (beta2 z)^2 / T_p^4)` after
    /// dispersing over `z` with half-GDD `beta2`.
    pub fn dispersed_half_width(&self, z: T, beta2: T) -> T {
        let tp2 = self.duration * self.duration;
        let s = beta2 * z / tp2;
        T::lit(2.0) * self.duration * (T::one() + s * s).sqrt()
    }

    /// Time interval the pulse occupies after propagating to `z`.
    pub fn support(&self, z: T, beta: T, beta2: T) -> (T, T) {
        let c = self.center + z * beta;
        let w = T::lit(6.0) * self.dispersed_half_width(z, beta2);
        (c - w, c + w)
    }
}

/// Closed-form unchirped Gaussian `A(z, t)` evolving under
/// `(d/dz + beta d/dt + i beta2 d^2/dt^2) A = 0`, unit energy for all z.
pub fn gaussian_amplitude<T: Real>(duration: T, center: T, z: T, beta: T, beta2: T, t: T) -> Complex<T> {
    let tp2 = duration * duration;
    let tau = t - center - z * beta;
    let q = Complex::new(beta2 * z, tp2);
    let exponent = Complex::new(T::zero(), -tau * tau) / (q * T::lit(4.0));
    let norm = duration.sqrt() / T::TAU().sqrt().sqrt();
    let prefactor = Complex::new(tp2, -beta2 * z).sqrt().inv() * norm;
    prefactor * exponent.exp()
}

/// Synthesizes the pulse `spec` at distance `z` (mm) for group slowness `beta`
/// (ps/mm) and half-GDD `beta2` (ps^2/mm).
///
/// A chirp multiplies the z = 0 envelope by `exp(i chirp(t))`; the chirped
/// pulse is then propagated spectrally.
pub fn synthesize_gaussian<T: Real>(
    spec: &GaussianPulseSpec<T>,
    grid: &TimeGrid<T>,
    z: T,
    beta: T,
    beta2: T,
) -> Result<ComplexEnvelope<T>> {
    spec.validate()?;
    let (from, to) = spec.support(z, beta, beta2);
    grid.require_covers(from, to)?;

    match &spec.chirp {
        None => ComplexEnvelope::from_fn(*grid, |t| {
            gaussian_amplitude(spec.duration, spec.center, z, beta, beta2, t)
        }),
        Some(chirp) => {
            let (from0, to0) = spec.support(T::zero(), beta, beta2);
            grid.require_covers(from0, to0)?;
            let phases = chirp.phases(grid, spec.center)?;
            let mut samples: Vec<Complex<T>> = grid
                .times()
                .zip(phases)
                .map(|(t, phi)| {
                    gaussian_amplitude(spec.duration, spec.center, T::zero(), T::zero(), T::zero(), t)
                        * Complex::from_polar(T::one(), phi)
                })
                .collect();
            if z != T::zero() {
                propagate_linear(grid, &mut samples, z * beta, z * beta2);
            }
            ComplexEnvelope::new(*grid, samples)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{energy, fwhm_intensity, width_1e_intensity};
    use approx::assert_relative_eq;

    fn grid() -> TimeGrid<f64> {
        TimeGrid::new(0.0, 0.02, 4096).unwrap()
    }

    #[test]
    fn unit_energy_at_input() {
        let a = synthesize_gaussian(&GaussianPulseSpec::new(1.0, 20.0), &grid(), 0.0, 7.534, 0.0).unwrap();
        assert!((energy(&a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn intensity_widths_of_unit_gaussian() {
        let a = synthesize_gaussian(&GaussianPulseSpec::new(1.0, 20.0), &grid(), 0.0, 0.0, 0.0).unwrap();
        // exp(-t^2/2) crosses 1/e at |t| = sqrt(2).
        assert_relative_eq!(width_1e_intensity(&a).unwrap(), 2.0 * 2f64.sqrt(), max_relative = 1e-4);
        assert_relative_eq!(
            fwhm_intensity(&a).unwrap(),
            2.0 * (2.0 * 2f64.ln()).sqrt(),
            max_relative = 1e-4
        );
    }

    #[test]
    fn input_pulse_is_real_and_positive() {
        let a = synthesize_gaussian(&GaussianPulseSpec::new(1.0, 20.0), &grid(), 0.0, 0.0, 0.0).unwrap();
        assert!(a.samples().iter().all(|s| s.im == 0.0 && s.re >= 0.0));
    }

    #[test]
    fn dispersed_width_follows_closed_form() {
        // 1/e intensity full width of the dispersed pulse is sqrt(2) times the
        // amplitude 1/e half width 2 T_p sqrt(1 + (beta2 z)^2 / T_p^4).
        let g = TimeGrid::new(-40.0, 0.01, 16384).unwrap();
        let spec = GaussianPulseSpec::new(1.0, 20.0);
        let a = synthesize_gaussian(&spec, &g, 40.0, 0.0, 0.1).unwrap();
        let expected = 2f64.sqrt() * 2.0 * 17f64.sqrt();
        assert_relative_eq!(width_1e_intensity(&a).unwrap(), expected, max_relative = 1e-4);
        assert_relative_eq!(spec.dispersed_half_width(40.0, 0.1), 2.0 * 17f64.sqrt());
        assert!((energy(&a) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn closed_form_agrees_with_spectral_propagation() {
        // Independent route: disperse the z = 0 pulse with the Fourier multiplier.
        let g = TimeGrid::new(-40.0, 0.02, 8192).unwrap();
        let spec = GaussianPulseSpec::new(1.0, 20.0);
        let mut a0 = synthesize_gaussian(&spec, &g, 0.0, 0.0, 0.0).unwrap().into_samples();
        propagate_linear(&g, &mut a0, 25.0 * 0.4, 25.0 * 0.08);
        let closed = synthesize_gaussian(&spec, &g, 25.0, 0.4, 0.08).unwrap();
        let err = a0
            .iter()
            .zip(closed.samples())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "max deviation {err}");
    }

    #[test]
    fn chirp_only_changes_phase() {
        let spec = GaussianPulseSpec::new(1.0, 20.0);
        let plain = synthesize_gaussian(&spec, &grid(), 0.0, 0.0, 0.0).unwrap();
        let chirped = synthesize_gaussian(&spec.clone().with_chirp(Chirp::quadratic(0.7)), &grid(), 0.0, 0.0, 0.0).unwrap();
        for (a, b) in plain.samples().iter().zip(chirped.samples()) {
            assert!((a.norm() - b.norm()).abs() < 1e-15);
        }
        let t = 21.0;
        let k = grid().position(t).round() as usize;
        assert_relative_eq!(chirped.samples()[k].arg(), 0.7, max_relative = 1e-9);
    }

    #[test]
    fn sampled_chirp_must_match_grid() {
        let spec = GaussianPulseSpec::new(1.0, 20.0).with_chirp(Chirp::Sampled(vec![0.0; 3]));
        assert!(matches!(
            synthesize_gaussian(&spec, &grid(), 0.0, 0.0, 0.0),
            Err(SfgError::InvalidInput(_))
        ));
    }

    #[test]
    fn rejects_bad_duration_and_small_grid() {
        let g = grid();
        assert_eq!(
            synthesize_gaussian(&GaussianPulseSpec::new(0.0, 20.0), &g, 0.0, 0.0, 0.0).unwrap_err(),
            SfgError::NonPositiveDuration(0.0)
        );
        assert!(matches!(
            synthesize_gaussian(&GaussianPulseSpec::new(1.0, 5.0), &g, 0.0, 0.0, 0.0),
            Err(SfgError::GridTooSmall { .. })
        ));
    }

    #[test]
    fn chirped_pulse_propagates() {
        let g = TimeGrid::new(0.0, 0.02, 8192).unwrap();
        let spec = GaussianPulseSpec::new(1.0, 20.0).with_chirp(Chirp::quadratic(0.3));
        let a = synthesize_gaussian(&spec, &g, 10.0, 2.0, 0.0).unwrap();
        let b = synthesize_gaussian(&spec, &g, 0.0, 0.0, 0.0).unwrap();
        // Pure delay of 20 ps = 1000 samples.
        for k in 0..g.len() - 1000 {
            assert!((a.samples()[k + 1000] - b.samples()[k]).norm() < 1e-10);
        }
    }
}
