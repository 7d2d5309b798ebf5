//! Uniform time grids and complex field envelopes sampled on them.
//!
//! Units throughout the crate: time in ps, length in mm, envelope amplitudes
//! in ps^(-1/2) so that `sum |A|^2 dt` is dimensionless.

use num_complex::Complex;

use crate::error::{Result, SfgError};
use crate::scalar::Real;

/// Uniformly sampled time axis `t_k = t_start + k * dt`, `k = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T = f64> {
    t_start: T,
    dt: T,
    n: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(t_start: T, dt: T, n: usize) -> Result<Self> {
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(SfgError::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        if n < 2 {
            return Err(SfgError::InvalidGrid(format!("need at least 2 samples, got {n}")));
        }
        if !t_start.is_finite() {
            return Err(SfgError::InvalidGrid("t_start must be finite".into()));
        }
        Ok(Self { t_start, dt, n })
    }

    /// Grid with a power-of-two sample count starting at `t_start` whose span
    /// is at least `min_span`.
    pub fn power_of_two(t_start: T, dt: T, min_span: T) -> Result<Self> {
        let needed = (min_span / dt).ceil().to_usize().unwrap_or(usize::MAX).max(2);
        Self::new(t_start, dt, needed.next_power_of_two())
    }

    #[inline]
    pub fn t_start(&self) -> T {
        self.t_start
    }

    #[inline]
    pub fn dt(&self) -> T {
        self.dt
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn time(&self, k: usize) -> T {
        self.t_start + T::count(k) * self.dt
    }

    /// Time of the last sample.
    #[inline]
    pub fn t_end(&self) -> T {
        self.time(self.n - 1)
    }

    /// Periodic span `n * dt` seen by discrete Fourier transforms.
    #[inline]
    pub fn span(&self) -> T {
        T::count(self.n) * self.dt
    }

    pub fn times(&self) -> impl ExactSizeIterator<Item = T> + '_ {
        (0..self.n).map(move |k| self.time(k))
    }

    /// Fractional sample position of time `t`.
    #[inline]
    pub fn position(&self, t: T) -> T {
        (t - self.t_start) / self.dt
    }

    pub fn covers(&self, from: T, to: T) -> bool {
        from >= self.t_start && to <= self.t_end()
    }

    pub fn require_covers(&self, from: T, to: T) -> Result<()> {
        if self.covers(from, to) {
            Ok(())
        } else {
            Err(SfgError::GridTooSmall {
                need_start: from.as_f64(),
                need_end: to.as_f64(),
                have_start: self.t_start.as_f64(),
                have_end: self.t_end().as_f64(),
            })
        }
    }

    /// Same sampling with the origin moved by `offset`.
    pub fn shifted(&self, offset: T) -> Self {
        Self {
            t_start: self.t_start + offset,
            ..*self
        }
    }

    /// Grids agree when sample counts match and start/step agree to a few ulps
    /// of the time scale involved.
    pub fn same_as(&self, other: &Self) -> bool {
        let scale = self.t_start.abs().max(self.span()).max(T::one());
        let tol = T::lit(64.0) * T::epsilon() * scale;
        self.n == other.n
            && (self.t_start - other.t_start).abs() <= tol
            && (self.dt - other.dt).abs() <= T::lit(64.0) * T::epsilon() * self.dt
    }

    /// Angular frequencies (rad/ps) of the DFT bins in FFT order.
    pub fn angular_frequencies(&self) -> Vec<T> {
        let n = self.n;
        let dw = T::TAU() / self.span();
        (0..n)
            .map(|m| {
                let signed = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
                T::lit(signed) * dw
            })
            .collect()
    }
}

/// Complex envelope `A(t)` sampled on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexEnvelope<T = f64> {
    grid: TimeGrid<T>,
    samples: Vec<Complex<T>>,
}

impl<T: Real> ComplexEnvelope<T> {
    pub fn new(grid: TimeGrid<T>, samples: Vec<Complex<T>>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(SfgError::InvalidInput(format!(
                "{} samples for a grid of {}",
                samples.len(),
                grid.len()
            )));
        }
        if samples.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(SfgError::NonFinite);
        }
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: TimeGrid<T>) -> Self {
        Self {
            grid,
            samples: vec![Complex::new(T::zero(), T::zero()); grid.len()],
        }
    }

    /// Samples `f(t)` at every grid time.
    pub fn from_fn(grid: TimeGrid<T>, f: impl Fn(T) -> Complex<T>) -> Result<Self> {
        Self::new(grid, grid.times().map(f).collect())
    }

    #[inline]
    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    #[inline]
    pub fn samples(&self) -> &[Complex<T>] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex<T>> {
        self.samples
    }

    pub fn intensity(&self) -> Vec<T> {
        self.samples.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn scaled(&self, factor: Complex<T>) -> Self {
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|a| a * factor).collect(),
        }
    }

    /// Pointwise product with `exp(i phase(t))`.
    pub fn with_phase(&self, phase: impl Fn(T) -> T) -> Self {
        let samples = self
            .samples
            .iter()
            .zip(self.grid.times())
            .map(|(a, t)| a * Complex::from_polar(T::one(), phase(t)))
            .collect();
        Self { grid: self.grid, samples }
    }

    /// Same samples re-labelled onto a grid with a shifted origin.
    pub fn relabelled(&self, offset: T) -> Self {
        Self {
            grid: self.grid.shifted(offset),
            samples: self.samples.clone(),
        }
    }

    /// Every `factor`-th sample, starting with the first.
    pub fn decimated(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(SfgError::InvalidGrid("decimation factor must be positive".into()));
        }
        let samples: Vec<Complex<T>> = self.samples.iter().step_by(factor).copied().collect();
        let grid = TimeGrid::new(self.grid.t_start, self.grid.dt * T::count(factor), samples.len())?;
        Ok(Self { grid, samples })
    }

    /// `sum |A_k|^2 dt`.
    pub fn energy(&self) -> T {
        energy(self)
    }

    pub fn normalized(&self) -> Result<Self> {
        normalize(self)
    }
}

/// Riemann-sum energy `sum_k |A(t_k)|^2 dt`.
pub fn energy<T: Real>(env: &ComplexEnvelope<T>) -> T {
    env.samples
        .iter()
        .fold(T::zero(), |acc, a| acc + a.norm_sqr())
        * env.grid.dt
}

/// Unit-energy copy of `env`.
pub fn normalize<T: Real>(env: &ComplexEnvelope<T>) -> Result<ComplexEnvelope<T>> {
    let e = energy(env);
    if !(e > T::zero()) {
        return Err(SfgError::ZeroEnergy);
    }
    Ok(env.scaled(Complex::new(e.sqrt().recip(), T::zero())))
}

/// Full width (ps) at which the intensity crosses `level * peak`, located by
/// linear interpolation between the samples straddling the crossing on each
/// side of the global maximum.
pub fn width_at_level<T: Real>(env: &ComplexEnvelope<T>, level: T) -> Result<T> {
    let intensity = env.intensity();
    let (peak_idx, peak) = intensity
        .iter()
        .copied()
        .enumerate()
        .fold((0, T::zero()), |best, (k, v)| if v > best.1 { (k, v) } else { best });
    if !(peak > T::zero()) {
        return Err(SfgError::ZeroEnergy);
    }
    let threshold = level * peak;
    let undefined = || SfgError::WidthUndefined { level: level.as_f64() };

    // Outermost crossings: the width of a multi-lobed pulse spans all lobes above threshold.
    let left = intensity.iter().position(|&v| v >= threshold).ok_or_else(undefined)?;
    let right = intensity.iter().rposition(|&v| v >= threshold).ok_or_else(undefined)?;
    if left == 0 || right + 1 >= intensity.len() {
        return Err(undefined());
    }
    debug_assert!(left <= peak_idx && peak_idx <= right);

    let cross = |below: usize, above: usize| -> T {
        let (a, b) = (intensity[below], intensity[above]);
        let frac = (threshold - a) / (b - a);
        env.grid.time(below) + (env.grid.time(above) - env.grid.time(below)) * frac
    };
    let t_left = cross(left - 1, left);
    let t_right = cross(right + 1, right);
    Ok(t_right - t_left)
}

/// Full width at 1/e of peak intensity (ps).
pub fn width_1e_intensity<T: Real>(env: &ComplexEnvelope<T>) -> Result<T> {
    width_at_level(env, T::one() / T::E())
}

/// Full width at half maximum of intensity (ps).
pub fn fwhm_intensity<T: Real>(env: &ComplexEnvelope<T>) -> Result<T> {
    width_at_level(env, T::lit(0.5))
}
