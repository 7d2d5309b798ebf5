//! Closed-form solutions of the coupled signal/SFG equations with an
//! undepleted pump.
//!
//! When signal and pump share a group slowness the SFG output at the end of
//! the medium is an integral over input times `t'` of a Bessel kernel:
//!
//! ```text
//! A_r(L, t) = i g ∫ dt' W(t - t') J0(2 g sqrt(zeta(t, t') (beta_r L - t + t'))) A_p(t') A_s(t')
//! ```
//!
//! with `g = gamma / (beta_r - beta_s)`, `W` the indicator of
//! `beta_s L < t - t' < beta_r L` and `zeta(t, t')` the pump energy between
//! `t'` and `t - beta_s L`.

use num_complex::Complex;
use rayon::prelude::*;

use crate::bessel::{j0, j1, J0_FIRST_ZERO};
use crate::error::{Result, SfgError};
use crate::grid::{energy, ComplexEnvelope, TimeGrid};
use crate::medium::MediumSpec;
use crate::scalar::Real;

/// Samples whose `|A_p A_s|` is below this fraction of the maximum are
/// outside the integration support.
const SUPPORT_CUTOFF: f64 = 1e-15;

/// Inputs of the Green-function integral with precomputed lookup tables.
#[derive(Debug, Clone)]
pub struct GreenKernelContext<T: Real = f64> {
    medium: MediumSpec<T>,
    pump: ComplexEnvelope<T>,
    signal: ComplexEnvelope<T>,
    gain: T,
    /// `product[k] = A_p(t_k) A_s(t_k)`.
    product: Vec<Complex<T>>,
    /// Trapezoid running integral of `|A_p|^2` from the grid start.
    cumulative: Vec<T>,
    /// Inclusive index range carrying the product.
    support: (usize, usize),
}

impl<T: Real> GreenKernelContext<T> {
    /// Pump and signal at the medium input, both on the same grid.
    pub fn new(medium: MediumSpec<T>, pump: ComplexEnvelope<T>, signal: ComplexEnvelope<T>) -> Result<Self> {
        medium.validate_sfg_window()?;
        if !pump.grid().same_as(signal.grid()) {
            return Err(SfgError::GridMismatch);
        }
        for (name, env) in [("pump", &pump), ("signal", &signal)] {
            let e = energy(env).as_f64();
            if (e - 1.0).abs() > 1e-6 {
                log::warn!("{name} energy is {e}, expected 1");
            }
        }
        let grid = *pump.grid();
        let dt = grid.dt();
        let half = T::lit(0.5);
        let mut cumulative = Vec::with_capacity(grid.len());
        let mut acc = T::zero();
        cumulative.push(acc);
        for w in pump.samples().windows(2) {
            acc = acc + half * dt * (w[0].norm_sqr() + w[1].norm_sqr());
            cumulative.push(acc);
        }
        let product: Vec<Complex<T>> = pump.samples().iter().zip(signal.samples()).map(|(p, s)| p * s).collect();
        let peak = product.iter().fold(T::zero(), |m, v| m.max(v.norm()));
        if !(peak > T::zero()) {
            return Err(SfgError::ZeroEnergy);
        }
        let cut = peak * T::lit(SUPPORT_CUTOFF);
        let first = product.iter().position(|v| v.norm() > cut).unwrap_or(0);
        let last = product.iter().rposition(|v| v.norm() > cut).unwrap_or(grid.len() - 1);
        let support = (first.saturating_sub(1), (last + 1).min(grid.len() - 1));
        Ok(Self {
            medium,
            pump,
            signal,
            gain: medium.scaled_gain(),
            product,
            cumulative,
            support,
        })
    }

    pub fn medium(&self) -> &MediumSpec<T> {
        &self.medium
    }

    pub fn pump(&self) -> &ComplexEnvelope<T> {
        &self.pump
    }

    pub fn signal(&self) -> &ComplexEnvelope<T> {
        &self.signal
    }

    pub fn input_grid(&self) -> &TimeGrid<T> {
        self.pump.grid()
    }

    /// `gamma / (beta_r - beta_s)` (ps^(-1/2)).
    pub fn scaled_gain(&self) -> T {
        self.gain
    }

    pub fn cumulative_pump(&self) -> &[T] {
        &self.cumulative
    }

    /// Times between which the input product is non-negligible.
    pub fn support_times(&self) -> (T, T) {
        let g = self.input_grid();
        (g.time(self.support.0), g.time(self.support.1))
    }

    /// Output-time interval where the SFG can be nonzero.
    pub fn output_support(&self) -> (T, T) {
        let (a, b) = self.support_times();
        let l = self.medium.length;
        (a + self.medium.beta_s * l, b + self.medium.beta_r * l)
    }

    fn cumulative_at(&self, t: T) -> T {
        let g = self.input_grid();
        let x = g.position(t);
        if x <= T::zero() {
            return T::zero();
        }
        let last = g.len() - 1;
        if x >= T::count(last) {
            return self.cumulative[last];
        }
        let k = x.floor().to_usize().unwrap_or(0).min(last - 1);
        let f = x - T::count(k);
        self.cumulative[k] + (self.cumulative[k + 1] - self.cumulative[k]) * f
    }

    fn product_at(&self, t: T) -> Complex<T> {
        let g = self.input_grid();
        let x = g.position(t);
        let last = g.len() - 1;
        if x <= T::zero() {
            return self.product[0];
        }
        if x >= T::count(last) {
            return self.product[last];
        }
        let k = x.floor().to_usize().unwrap_or(0).min(last - 1);
        let f = x - T::count(k);
        self.product[k] + (self.product[k + 1] - self.product[k]) * f
    }

    /// `int_lo^hi f(t') dt'` by the trapezoid rule on the input nodes, with
    /// partial cells at both ends.
    fn integrate(&self, lo: T, hi: T, f: impl Fn(T, Complex<T>) -> Complex<T>) -> Complex<T> {
        let g = self.input_grid();
        let half = T::lit(0.5);
        let at = |t: T| f(t, self.product_at(t));
        let k_lo = g.position(lo).ceil().max(T::zero()).to_usize().unwrap_or(0);
        let k_hi = g.position(hi).floor().to_usize().unwrap_or(0).min(g.len() - 1);
        if k_lo > k_hi {
            return (at(lo) + at(hi)) * (half * (hi - lo));
        }
        let node = |k: usize| f(g.time(k), self.product[k]);
        let first = node(k_lo);
        let mut sum = Complex::new(T::zero(), T::zero());
        let mut prev = first;
        for k in k_lo + 1..=k_hi {
            let cur = node(k);
            sum = sum + (prev + cur) * half;
            prev = cur;
        }
        sum = sum * g.dt();
        sum + (at(lo) + first) * (half * (g.time(k_lo) - lo)) + (prev + at(hi)) * (half * (hi - g.time(k_hi)))
    }

    /// Integration limits `(lo, hi)` for output time `t`, or `None` when the
    /// window misses the support.
    fn limits(&self, t: T) -> Option<(T, T)> {
        let l = self.medium.length;
        let (s_lo, s_hi) = self.support_times();
        let lo = (t - self.medium.beta_r * l).max(s_lo);
        let hi = (t - self.medium.beta_s * l).min(s_hi);
        (hi > lo).then_some((lo, hi))
    }

    fn green_at(&self, t: T) -> Complex<T> {
        let Some((lo, hi)) = self.limits(t) else {
            return Complex::new(T::zero(), T::zero());
        };
        let l = self.medium.length;
        let end = t - self.medium.beta_r * l;
        let upper = self.cumulative_at(t - self.medium.beta_s * l);
        let two_g = T::lit(2.0) * self.gain;
        let integral = self.integrate(lo, hi, |tp, p| {
            let zeta = (upper - self.cumulative_at(tp)).max(T::zero());
            let span = (tp - end).max(T::zero());
            p * j0(two_g * (zeta * span).sqrt())
        });
        Complex::new(T::zero(), self.gain) * integral
    }

    fn low_ce_at(&self, t: T) -> Complex<T> {
        match self.limits(t) {
            Some((lo, hi)) => Complex::new(T::zero(), self.gain) * self.integrate(lo, hi, |_, p| p),
            None => Complex::new(T::zero(), T::zero()),
        }
    }

    fn check_output(&self, out_grid: &TimeGrid<T>) -> Result<()> {
        let (from, to) = self.output_support();
        out_grid.require_covers(from, to)
    }
}

/// SFG field at the medium output for arbitrary conversion efficiency.
pub fn sfg_green<T: Real>(ctx: &GreenKernelContext<T>, out_grid: &TimeGrid<T>) -> Result<ComplexEnvelope<T>> {
    ctx.check_output(out_grid)?;
    let samples: Vec<Complex<T>> = (0..out_grid.len())
        .into_par_iter()
        .map(|k| ctx.green_at(out_grid.time(k)))
        .collect();
    ComplexEnvelope::new(*out_grid, samples)
}

/// Weak-coupling limit: the Bessel kernel replaced by one, leaving a windowed
/// convolution of the input product.
pub fn sfg_low_ce<T: Real>(ctx: &GreenKernelContext<T>, out_grid: &TimeGrid<T>) -> Result<ComplexEnvelope<T>> {
    ctx.check_output(out_grid)?;
    let samples: Vec<Complex<T>> = (0..out_grid.len())
        .into_par_iter()
        .map(|k| ctx.low_ce_at(out_grid.time(k)))
        .collect();
    ComplexEnvelope::new(*out_grid, samples)
}

/// Shape of the window profile in the limit of very short input pulses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImpulsiveKernel {
    /// `J0(g sqrt(2 X))`, the conventional closed form.
    AsPrinted,
    /// `J0(2 g sqrt(X))`, the Green-function kernel with the full pump energy.
    GreenArgument,
    /// `2 J1(x) / x` with `x = 2 g sqrt(X)`: the Green function integrated
    /// over a pulse of vanishing duration.
    ExactLimit,
}

impl ImpulsiveKernel {
    pub const ALL: [Self; 3] = [Self::AsPrinted, Self::GreenArgument, Self::ExactLimit];

    pub fn name(self) -> &'static str {
        match self {
            Self::AsPrinted => "as_printed",
            Self::GreenArgument => "green_argument",
            Self::ExactLimit => "exact_limit",
        }
    }

    fn eval<T: Real>(self, gain: T, remaining: T) -> T {
        let two = T::lit(2.0);
        match self {
            Self::AsPrinted => j0(gain * (two * remaining).sqrt()),
            Self::GreenArgument => j0(two * gain * remaining.sqrt()),
            Self::ExactLimit => {
                let x = two * gain * remaining.sqrt();
                if x < T::lit(1e-8) {
                    T::one()
                } else {
                    two * j1(x) / x
                }
            }
        }
    }
}

/// Impulsive-input limit `i g W(t - T_c) J0(g sqrt(2 (beta_r L + T_c - t)))`
/// for unit-energy inputs centred at `t_center`.
pub fn sfg_impulsive<T: Real>(medium: &MediumSpec<T>, t_center: T, out_grid: &TimeGrid<T>) -> Result<ComplexEnvelope<T>> {
    sfg_impulsive_with(medium, t_center, out_grid, ImpulsiveKernel::AsPrinted)
}

pub fn sfg_impulsive_with<T: Real>(
    medium: &MediumSpec<T>,
    t_center: T,
    out_grid: &TimeGrid<T>,
    kernel: ImpulsiveKernel,
) -> Result<ComplexEnvelope<T>> {
    medium.validate_sfg_window()?;
    let g = medium.scaled_gain();
    let l = medium.length;
    let (start, end) = (t_center + medium.beta_s * l, t_center + medium.beta_r * l);
    ComplexEnvelope::from_fn(*out_grid, |t| {
        if t < start || t > end {
            Complex::new(T::zero(), T::zero())
        } else {
            Complex::new(T::zero(), g * kernel.eval(g, end - t))
        }
    })
}

/// Coupling at which the first Bessel zero of the impulsive profile reaches
/// the start of the SFG window: `sqrt(j01^2 / 2 * (beta_r - beta_s) / L)`.
pub fn gamma_crit<T: Real>(medium: &MediumSpec<T>) -> Result<T> {
    medium.validate_sfg_window()?;
    let j = T::lit(J0_FIRST_ZERO);
    Ok((j * j / T::lit(2.0) * (medium.beta_r - medium.beta_s) / medium.length).sqrt())
}

/// Exact solution when all three group slownesses coincide, in the frame
/// moving with the pulses: returns `(A_r, A_s)` at `length`.
pub fn full_gvm_fields<T: Real>(
    length: T,
    gamma: T,
    pump: &ComplexEnvelope<T>,
    signal_in: &ComplexEnvelope<T>,
) -> Result<(ComplexEnvelope<T>, ComplexEnvelope<T>)> {
    if !pump.grid().same_as(signal_in.grid()) {
        return Err(SfgError::GridMismatch);
    }
    let (mut ar, mut as_) = (Vec::with_capacity(pump.grid().len()), Vec::with_capacity(pump.grid().len()));
    for (p, s) in pump.samples().iter().zip(signal_in.samples()) {
        let mag = p.norm();
        let angle = gamma * mag * length;
        let pump_phase = if mag > T::zero() { p / mag } else { Complex::new(T::one(), T::zero()) };
        ar.push(Complex::new(T::zero(), angle.sin()) * pump_phase * s);
        as_.push(s * angle.cos());
    }
    Ok((ComplexEnvelope::new(*pump.grid(), ar)?, ComplexEnvelope::new(*pump.grid(), as_)?))
}

/// Fraction of a unit-energy input signal converted into the SFG field.
pub fn conversion_efficiency<T: Real>(a_r_out: &ComplexEnvelope<T>) -> T {
    let eta = energy(a_r_out);
    if eta > T::one() + T::lit(1e-4) {
        log::warn!("conversion efficiency {eta} exceeds one; inputs may not be unit-normalized");
    }
    eta
}

/// Unit-area spectral density of a rectangular pulse of duration `t_r`:
/// `T sin^2(w T / 2) / (2 pi (w T / 2)^2)`.
pub fn rect_spectrum<T: Real>(t_r: T, omega: T) -> T {
    let x = omega * t_r / T::lit(2.0);
    let s = if x.abs() < T::lit(1e-8) { T::one() } else { x.sin() / x };
    t_r * s * s / T::TAU()
}
