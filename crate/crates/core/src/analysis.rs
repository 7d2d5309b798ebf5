//! Spectra, bandwidths, stretch factors, pulse-shape classification and
//! field comparison.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Result, SfgError};
use crate::grid::{width_1e_intensity, ComplexEnvelope};
use crate::medium::MediumSpec;
use crate::scalar::Real;
use crate::spectral::FftPair;

/// Zero-padding factor applied before transforming.
pub const PAD_FACTOR: usize = 4;

/// A local spectral minimum counts as a zero when below this fraction of the peak.
pub const FIRST_ZERO_DEPTH: f64 = 1e-3;

/// Interior amplitude minima below this fraction of the peak amplitude mark
/// an oscillating pulse.
pub const DEEP_MINIMUM: f64 = 0.1;

/// Intensity max/min ratio over the central 80% below which a pulse is flat.
pub const FLATNESS_LIMIT: f64 = 1.2;

/// Unit-area power spectrum on an ascending detuning axis (rad/ps).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T = f64> {
    pub omega: Vec<T>,
    /// Density (ps/rad), integrating to one.
    pub density: Vec<T>,
    /// `int |A~(w)|^2 dw / (2 pi)` before normalization; equals the pulse energy.
    pub raw_energy: T,
}

impl<T: Real> Spectrum<T> {
    pub fn d_omega(&self) -> T {
        self.omega[1] - self.omega[0]
    }

    pub fn peak_index(&self) -> usize {
        self.density
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |b, (k, &v)| if v > b.1 { (k, v) } else { b })
            .0
    }

    /// Trapezoid-free Riemann area; one by construction.
    pub fn area(&self) -> T {
        self.density.iter().fold(T::zero(), |a, &v| a + v) * self.d_omega()
    }
}

/// Power spectrum of `env` with detuning `w` defined by `A~(w) = int A(t) e^(i w t) dt`.
pub fn spectrum<T: Real>(env: &ComplexEnvelope<T>) -> Result<Spectrum<T>> {
    let n = env.grid().len();
    let m = n * PAD_FACTOR;
    let dt = env.grid().dt();
    let mut buf = vec![Complex::new(T::zero(), T::zero()); m];
    buf[..n].copy_from_slice(env.samples());
    FftPair::new(m).forward(&mut buf);
    let dw = T::TAU() / (T::count(m) * dt);
    // Forward transform uses e^(-i w_k t); the physical detuning is -w_k.
    // Bins k = m/2+1 .. m-1 carry positive detunings, bins 0..=m/2 the rest.
    let mut omega = Vec::with_capacity(m);
    let mut power = Vec::with_capacity(m);
    for j in 0..m {
        // Ascending detuning: j = 0 is the most negative.
        let signed = j as isize - (m / 2) as isize;
        let k = (-signed).rem_euclid(m as isize) as usize;
        omega.push(T::lit(signed as f64) * dw);
        power.push(buf[k].norm_sqr() * dt * dt);
    }
    let raw = power.iter().fold(T::zero(), |a, &v| a + v) * dw / T::TAU();
    if !(raw > T::zero()) {
        return Err(SfgError::ZeroEnergy);
    }
    let edge_bins = m / 20;
    let edge: T = power[..edge_bins].iter().chain(&power[m - edge_bins..]).fold(T::zero(), |a, &v| a + v);
    let total: T = power.iter().fold(T::zero(), |a, &v| a + v);
    if (edge / total).as_f64() > 1e-4 {
        log::warn!("spectrum edge bins carry {:.2e} of the energy", (edge / total).as_f64());
    }
    let scale = (total * dw).recip();
    let density = power.into_iter().map(|p| p * scale).collect();
    Ok(Spectrum {
        omega,
        density,
        raw_energy: raw,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthMethod {
    /// Full width at half maximum.
    Fwhm,
    /// Detuning from the peak to the first deep minimum, averaged over both sides.
    FirstZero,
}

pub fn bandwidth<T: Real>(spec: &Spectrum<T>, method: BandwidthMethod) -> Result<T> {
    match method {
        BandwidthMethod::Fwhm => fwhm(spec),
        BandwidthMethod::FirstZero => first_zero(spec),
    }
}

fn fwhm<T: Real>(spec: &Spectrum<T>) -> Result<T> {
    let d = &spec.density;
    let p = spec.peak_index();
    let half = d[p] / T::lit(2.0);
    let undefined = || SfgError::WidthUndefined { level: 0.5 };
    let right = (p..d.len()).find(|&k| d[k] < half).ok_or_else(undefined)?;
    let left = (0..=p).rev().find(|&k| d[k] < half).ok_or_else(undefined)?;
    let cross = |a: usize, b: usize| {
        let f = (half - d[a]) / (d[b] - d[a]);
        spec.omega[a] + (spec.omega[b] - spec.omega[a]) * f
    };
    Ok(cross(right, right - 1) - cross(left, left + 1))
}

fn first_zero<T: Real>(spec: &Spectrum<T>) -> Result<T> {
    let d = &spec.density;
    let p = spec.peak_index();
    let floor = d[p] * T::lit(FIRST_ZERO_DEPTH);
    let undefined = || SfgError::WidthUndefined { level: FIRST_ZERO_DEPTH };
    let is_min = |k: usize| k > 0 && k + 1 < d.len() && d[k] <= d[k - 1] && d[k] <= d[k + 1] && d[k] < floor;
    let right = (p + 1..d.len() - 1).find(|&k| is_min(k)).ok_or_else(undefined)?;
    let left = (1..p).rev().find(|&k| is_min(k)).ok_or_else(undefined)?;
    // Parabolic vertex through the three samples around each minimum.
    let vertex = |k: usize| {
        let (a, b, c) = (d[k - 1], d[k], d[k + 1]);
        let den = a - T::lit(2.0) * b + c;
        let shift = if den > T::zero() { (a - c) / (T::lit(2.0) * den) } else { T::zero() };
        spec.omega[k] + shift * spec.d_omega()
    };
    let peak = spec.omega[p];
    Ok(((vertex(right) - peak) + (peak - vertex(left))) / T::lit(2.0))
}

/// Ratio of output to input 1/e intensity widths.
pub fn stretch_factor<T: Real>(input: &ComplexEnvelope<T>, output: &ComplexEnvelope<T>) -> Result<T> {
    Ok(width_1e_intensity(output)? / width_1e_intensity(input)?)
}

/// Ratio of input to output FWHM bandwidths.
pub fn compression_factor<T: Real>(input: &Spectrum<T>, output: &Spectrum<T>) -> Result<T> {
    Ok(fwhm(input)? / fwhm(output)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeClass {
    Rectangular,
    RisingExponentialLike,
    Oscillatory,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShapeReport {
    pub classification: ShapeClass,
    /// Interior amplitude minima below `DEEP_MINIMUM` of the peak amplitude.
    pub deep_minima: usize,
    /// All interior local extrema of the amplitude.
    pub interior_extrema: usize,
    /// Smallest interior amplitude minimum relative to the peak amplitude.
    pub min_relative_amplitude: f64,
    pub width_1e_ps: f64,
    /// Intensity max/min over the central 80% of the window.
    pub flatness: f64,
    /// Least-squares slope of `ln |A|` over the central 60% of the window (1/ps).
    pub exp_rate: f64,
    /// RMS residual of that fit.
    pub exp_residual: f64,
}

/// Classifies the SFG pulse `env` inside the generation window of `medium`
/// for inputs centred at `t_center`.
pub fn shape_report<T: Real>(env: &ComplexEnvelope<T>, medium: &MediumSpec<T>, t_center: T) -> Result<ShapeReport> {
    let g = env.grid();
    let l = medium.length.as_f64();
    let start = medium.beta_s.as_f64() * l + t_center.as_f64();
    let end = medium.beta_r.as_f64() * l + t_center.as_f64();
    let duration = end - start;
    let amp: Vec<f64> = env.samples().iter().map(|a| a.norm().as_f64()).collect();
    let peak = amp.iter().cloned().fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(SfgError::ZeroEnergy);
    }
    let t = |k: usize| g.time(k).as_f64();
    let in_range = |a: f64, b: f64| (0..amp.len()).filter(move |&k| t(k) >= a && t(k) <= b);

    // Interior: the window minus 2% at each end, where the edges ramp.
    let margin = 0.02 * duration;
    let interior: Vec<usize> = in_range(start + margin, end - margin).collect();
    let mut deep = 0;
    let mut extrema = 0;
    let mut min_rel = f64::INFINITY;
    let noise = 1e-6 * peak;
    for w in interior.windows(3) {
        let (a, b, c) = (amp[w[0]], amp[w[1]], amp[w[2]]);
        let is_min = b < a && b <= c;
        let is_max = b > a && b >= c;
        if (is_min || is_max) && ((a - b).abs() > noise || (c - b).abs() > noise) {
            extrema += 1;
        }
        if is_min {
            min_rel = min_rel.min(b / peak);
            if b < DEEP_MINIMUM * peak {
                deep += 1;
            }
        }
    }

    let central: Vec<f64> = in_range(start + 0.1 * duration, end - 0.1 * duration)
        .map(|k| amp[k] * amp[k])
        .collect();
    let flatness = match (
        central.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        central.iter().cloned().fold(f64::INFINITY, f64::min),
    ) {
        (hi, lo) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    };

    let fit: Vec<(f64, f64)> = in_range(start + 0.2 * duration, end - 0.2 * duration)
        .filter(|&k| amp[k] > 0.0)
        .map(|k| (t(k), amp[k].ln()))
        .collect();
    let (exp_rate, exp_residual) = line_fit(&fit);

    let classification = if deep > 0 {
        ShapeClass::Oscillatory
    } else if flatness < FLATNESS_LIMIT {
        ShapeClass::Rectangular
    } else if exp_rate > 0.0 {
        ShapeClass::RisingExponentialLike
    } else {
        ShapeClass::Other
    };
    Ok(ShapeReport {
        classification,
        deep_minima: deep,
        interior_extrema: extrema,
        min_relative_amplitude: if min_rel.is_finite() { min_rel } else { 1.0 },
        width_1e_ps: width_1e_intensity(env).map(|w| w.as_f64()).unwrap_or(f64::NAN),
        flatness,
        exp_rate,
        exp_residual,
    })
}

fn line_fit(points: &[(f64, f64)]) -> (f64, f64) {
    if points.len() < 2 {
        return (0.0, f64::NAN);
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let rms = (points
        .iter()
        .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, rms)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    /// `||a - b|| / ||b||`.
    pub rel_l2: f64,
    /// Same after rotating `a` by the global phase that best matches `b`.
    pub rel_l2_phase_aligned: f64,
    /// `|<a, b>|^2 / (||a||^2 ||b||^2)`.
    pub overlap: f64,
}

pub fn compare<T: Real>(a: &ComplexEnvelope<T>, b: &ComplexEnvelope<T>) -> Result<Comparison> {
    if !a.grid().same_as(b.grid()) {
        return Err(SfgError::GridMismatch);
    }
    let mut inner = Complex::new(0.0, 0.0);
    let (mut na, mut nb, mut diff) = (0.0, 0.0, 0.0);
    for (x, y) in a.samples().iter().zip(b.samples()) {
        let x = Complex::new(x.re.as_f64(), x.im.as_f64());
        let y = Complex::new(y.re.as_f64(), y.im.as_f64());
        inner += x.conj() * y;
        na += x.norm_sqr();
        nb += y.norm_sqr();
        diff += (x - y).norm_sqr();
    }
    if !(nb > 0.0) {
        return Err(SfgError::ZeroEnergy);
    }
    // min_phi ||e^(i phi) a - b||^2 = |a|^2 + |b|^2 - 2 |<a, b>|.
    let aligned = (na + nb - 2.0 * inner.norm()).max(0.0);
    Ok(Comparison {
        rel_l2: (diff / nb).sqrt(),
        rel_l2_phase_aligned: (aligned / nb).sqrt(),
        overlap: if na > 0.0 { inner.norm_sqr() / (na * nb) } else { 0.0 },
    })
}
