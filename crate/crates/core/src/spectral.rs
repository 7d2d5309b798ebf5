//! Linear propagation of envelopes in the Fourier domain.
//!
//! A field obeying `(d/dz + beta d/dt + i beta2 d^2/dt^2) A = 0` advances over a
//! distance `h` by the spectral multiplier `exp(i h (-beta w + beta2 w^2))`,
//! with `w` the angular frequency of the DFT basis function `exp(i w t)`.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::grid::TimeGrid;
use crate::scalar::Real;

/// Forward/inverse FFT plans with a reusable scratch buffer.
pub struct FftPair<T: Real> {
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    scratch: Vec<Complex<T>>,
}

impl<T: Real> FftPair<T> {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            forward,
            inverse,
            scratch: vec![Complex::new(T::zero(), T::zero()); scratch_len],
        }
    }

    pub fn forward(&mut self, data: &mut [Complex<T>]) {
        self.forward.process_with_scratch(data, &mut self.scratch);
    }

    /// Unnormalized inverse transform.
    pub fn inverse(&mut self, data: &mut [Complex<T>]) {
        self.inverse.process_with_scratch(data, &mut self.scratch);
    }
}

/// Linear step for one field: group delay `delay = beta * h` (ps) and
/// dispersion phase `gdd = beta2 * h` (ps^2).
#[derive(Debug, Clone)]
pub enum LinearStep<T: Real> {
    Identity,
    /// Circular shift by a whole number of samples. Identical to the spectral
    /// multiplier `exp(-i w k dt)` on the DFT frequency grid.
    Shift(isize),
    /// Pre-scaled multiplier (includes the `1/n` of the inverse DFT).
    Spectral(Vec<Complex<T>>),
}

/// Relative tolerance for treating a delay as a whole number of samples.
const WHOLE_SAMPLE_TOL: f64 = 1e-9;

impl<T: Real> LinearStep<T> {
    pub fn new(grid: &TimeGrid<T>, delay: T, gdd: T) -> Self {
        if gdd == T::zero() {
            let samples = delay / grid.dt();
            let whole = samples.round();
            if (samples - whole).abs() <= T::lit(WHOLE_SAMPLE_TOL) {
                let k = whole.to_isize().unwrap_or(0);
                return if k == 0 { Self::Identity } else { Self::Shift(k) };
            }
        }
        let scale = T::count(grid.len()).recip();
        let multiplier = grid
            .angular_frequencies()
            .into_iter()
            .map(|w| Complex::from_polar(scale, -delay * w + gdd * w * w))
            .collect();
        Self::Spectral(multiplier)
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Self::Identity)
    }

    pub fn apply(&self, data: &mut [Complex<T>], fft: &mut FftPair<T>) {
        match self {
            Self::Identity => {}
            Self::Shift(k) => {
                let n = data.len() as isize;
                let k = k.rem_euclid(n) as usize;
                data.rotate_right(k);
            }
            Self::Spectral(multiplier) => {
                fft.forward(data);
                data.iter_mut().zip(multiplier).for_each(|(a, m)| *a = *a * m);
                fft.inverse(data);
            }
        }
    }
}

/// Propagates `samples` through a single linear step, planning a transform if needed.
pub fn propagate_linear<T: Real>(grid: &TimeGrid<T>, samples: &mut [Complex<T>], delay: T, gdd: T) {
    let step = LinearStep::new(grid, delay, gdd);
    if step.is_identity() {
        return;
    }
    let mut fft = FftPair::new(grid.len());
    step.apply(samples, &mut fft);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: &TimeGrid<f64>, center: f64) -> Vec<Complex<f64>> {
        grid.times()
            .map(|t| Complex::new((-(t - center).powi(2) / 4.0).exp(), 0.0))
            .collect()
    }

    #[test]
    fn whole_sample_shift_matches_spectral_multiplier() {
        let grid = TimeGrid::new(0.0, 0.1, 512).unwrap();
        let mut fast = gaussian(&grid, 15.0);
        let mut slow = fast.clone();
        let mut fft = FftPair::new(512);
        let step = LinearStep::new(&grid, 0.7, 0.0);
        assert!(matches!(step, LinearStep::Shift(7)));
        step.apply(&mut fast, &mut fft);

        // Force the spectral path with a vanishing GDD perturbation check.
        let scale = 1.0 / 512.0;
        let mult: Vec<_> = grid
            .angular_frequencies()
            .into_iter()
            .map(|w| Complex::from_polar(scale, -0.7 * w))
            .collect();
        LinearStep::Spectral(mult).apply(&mut slow, &mut fft);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn fractional_delay_translates_pulse() {
        let grid = TimeGrid::new(0.0, 0.1, 1024).unwrap();
        let mut a = gaussian(&grid, 20.0);
        propagate_linear(&grid, &mut a, 13.37, 0.0);
        let expected = gaussian(&grid, 33.37);
        for (x, y) in a.iter().zip(&expected) {
            assert!((x - y).norm() < 1e-10);
        }
    }
}
