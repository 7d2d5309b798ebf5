//! Material dispersion, quasi-phase matching and the three-wave phase mismatch.
//!
//! Everything here works in `f64`: the propagation constants are differences
//! of wavenumbers of order 10^4 rad/mm, and their finite-difference
//! derivatives do not survive single precision.
//!
//! Frequencies are angular (rad/ps), wavenumbers rad/mm, slownesses ps/mm and
//! half-GDD values ps^2/mm.

mod phase_map;
mod sellmeier;

pub use phase_map::{phase_match_map, sinc, MapAxes, PhaseMatchMap, MAP_MAGIC};
pub use sellmeier::{
    SellmeierCoefficients, SellmeierModel, TemperatureLaw, Validity, BUNDLED_LINBO3, LINBO3_FILE_NAME,
};

use std::f64::consts::{PI, TAU};

use crate::error::{Result, SfgError};

/// Vacuum speed of light (mm/ps).
pub const SPEED_OF_LIGHT: f64 = 0.299_792_458;

/// Central-difference step for group slowness (rad/ps).
pub const SLOWNESS_STEP: f64 = 1e-3;

/// Central-difference step for half-GDD (rad/ps).
pub const GDD_STEP: f64 = 5e-3;

pub fn omega_from_wavelength_nm(wavelength_nm: f64) -> f64 {
    TAU * SPEED_OF_LIGHT / (wavelength_nm * 1e-6)
}

pub fn wavelength_um_from_omega(omega: f64) -> f64 {
    TAU * SPEED_OF_LIGHT / omega * 1e3
}

/// `k(w) = n(w) w / c`.
pub fn wavenumber(model: &SellmeierModel, omega: f64) -> Result<f64> {
    let n = model.refractive_index(wavelength_um_from_omega(omega))?;
    Ok(n * omega / SPEED_OF_LIGHT)
}

pub fn group_slowness(model: &SellmeierModel, omega: f64) -> Result<f64> {
    group_slowness_with_step(model, omega, SLOWNESS_STEP)
}

/// `dk/dw` by central difference with step `step`.
pub fn group_slowness_with_step(model: &SellmeierModel, omega: f64, step: f64) -> Result<f64> {
    let up = wavenumber(model, omega + step)?;
    let down = wavenumber(model, omega - step)?;
    Ok((up - down) / (2.0 * step))
}

pub fn gdd_half(model: &SellmeierModel, omega: f64) -> Result<f64> {
    gdd_half_with_step(model, omega, GDD_STEP)
}

/// `(1/2) d^2k/dw^2` by central difference with step `step`.
pub fn gdd_half_with_step(model: &SellmeierModel, omega: f64, step: f64) -> Result<f64> {
    let up = wavenumber(model, omega + step)?;
    let mid = wavenumber(model, omega)?;
    let down = wavenumber(model, omega - step)?;
    Ok(0.5 * (up - 2.0 * mid + down) / (step * step))
}

/// Signal + pump -> SFG process. The SFG frequency is the sum of the other two.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ProcessSpec {
    pub lambda_s_nm: f64,
    pub lambda_p_nm: f64,
    /// Poling period (um); `None` until solved for.
    pub poling_period_um: Option<f64>,
}

impl ProcessSpec {
    pub fn new(lambda_s_nm: f64, lambda_p_nm: f64) -> Self {
        Self {
            lambda_s_nm,
            lambda_p_nm,
            poling_period_um: None,
        }
    }

    pub fn with_poling_period(mut self, period_um: f64) -> Self {
        self.poling_period_um = Some(period_um);
        self
    }

    pub fn omega_s(&self) -> f64 {
        omega_from_wavelength_nm(self.lambda_s_nm)
    }

    pub fn omega_p(&self) -> f64 {
        omega_from_wavelength_nm(self.lambda_p_nm)
    }

    pub fn omega_r(&self) -> f64 {
        self.omega_s() + self.omega_p()
    }

    pub fn lambda_r_nm(&self) -> f64 {
        1.0 / (1.0 / self.lambda_s_nm + 1.0 / self.lambda_p_nm)
    }
}

/// Poling period (um) that phase-matches the carrier frequencies:
/// `k_r - k_s - k_p - 2 pi / Lambda = 0`.
pub fn poling_period(model: &SellmeierModel, process: &ProcessSpec) -> Result<f64> {
    let mismatch = wavenumber(model, process.omega_r())?
        - wavenumber(model, process.omega_s())?
        - wavenumber(model, process.omega_p())?;
    if !(mismatch > 0.0) {
        return Err(SfgError::NotQpmable { mismatch });
    }
    Ok(TAU / mismatch * 1e3)
}

/// Exact phase mismatch `k(w) - k(w~) - k(w - w~) - 2 pi / Lambda` (rad/mm)
/// for SFG frequency `omega`, signal frequency `omega_tilde` and poling
/// period `poling_period_um`.
pub fn delta_k(model: &SellmeierModel, omega: f64, omega_tilde: f64, poling_period_um: f64) -> Result<f64> {
    Ok(wavenumber(model, omega)? - wavenumber(model, omega_tilde)? - wavenumber(model, omega - omega_tilde)?
        - TAU / (poling_period_um * 1e-3))
}

/// Second-order expansion of the dispersion relation about each carrier.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TaylorExpansion {
    pub omega_r: f64,
    pub omega_s: f64,
    pub beta_p: f64,
    pub beta_s: f64,
    pub beta_r: f64,
    pub beta2_p: f64,
    pub beta2_s: f64,
    pub beta2_r: f64,
}

impl TaylorExpansion {
    pub fn from_model(model: &SellmeierModel, process: &ProcessSpec) -> Result<Self> {
        let (ws, wp, wr) = (process.omega_s(), process.omega_p(), process.omega_r());
        Ok(Self {
            omega_r: wr,
            omega_s: ws,
            beta_p: group_slowness(model, wp)?,
            beta_s: group_slowness(model, ws)?,
            beta_r: group_slowness(model, wr)?,
            beta2_p: gdd_half(model, wp)?,
            beta2_s: gdd_half(model, ws)?,
            beta2_r: gdd_half(model, wr)?,
        })
    }

    /// Group-velocity-matched signal and pump: `beta_s` replaced by `beta_p`.
    pub fn with_matched_signal(self) -> Self {
        Self {
            beta_s: self.beta_p,
            ..self
        }
    }

    pub fn without_quadratic(self) -> Self {
        Self {
            beta2_p: 0.0,
            beta2_s: 0.0,
            beta2_r: 0.0,
            ..self
        }
    }

    /// Slope `d omega / d omega~` of the linear phase-matching line.
    pub fn contour_slope(&self) -> f64 {
        (self.beta_s - self.beta_p) / (self.beta_r - self.beta_p)
    }

    /// Truncated-Taylor phase mismatch (rad/mm), all three quadratic terms kept.
    pub fn delta_k(&self, omega: f64, omega_tilde: f64) -> f64 {
        let dr = omega - self.omega_r;
        let ds = omega_tilde - self.omega_s;
        let dp = dr - ds;
        dr * (self.beta_r - self.beta_p) - ds * (self.beta_s - self.beta_p) + self.beta2_r * dr * dr
            - self.beta2_s * ds * ds
            - self.beta2_p * dp * dp
    }
}

/// Free-function form of [`TaylorExpansion::delta_k`].
pub fn delta_k_taylor(expansion: &TaylorExpansion, omega: f64, omega_tilde: f64) -> f64 {
    expansion.delta_k(omega, omega_tilde)
}

/// Estimated SFG-band width `pi / ((beta_r - beta_p) L)` (rad/ps) of the
/// phase-matching function.
pub fn acceptance_width(beta_r: f64, beta_p: f64, length: f64) -> Result<f64> {
    if beta_r == beta_p {
        return Err(SfgError::DegenerateMedium("acceptance width undefined for beta_r = beta_p".into()));
    }
    if !(length > 0.0) {
        return Err(SfgError::DegenerateMedium("length must be positive".into()));
    }
    Ok(PI / ((beta_r - beta_p) * length))
}

/// Least-squares slope `d omega / d omega~` of the zero set of `mismatch`
/// through `(omega_r, omega_s)`, sampled at the given signal detunings.
///
/// For each detuning the SFG frequency solving `mismatch = 0` is bracketed
/// outward from `omega_r` and refined by bisection.
pub fn fit_zero_contour_slope(
    mismatch: impl Fn(f64, f64) -> Result<f64>,
    omega_r: f64,
    omega_s: f64,
    detunings: &[f64],
    bracket_step: f64,
) -> Result<f64> {
    let mut points = Vec::with_capacity(detunings.len());
    for &d in detunings {
        let wt = omega_s + d;
        let f = |w: f64| mismatch(w, wt);
        let f0 = f(omega_r)?;
        let mut step = bracket_step;
        let (mut lo, mut hi) = loop {
            let (a, b) = (omega_r - step, omega_r + step);
            let (fa, fb) = (f(a)?, f(b)?);
            if f0 == 0.0 {
                break (omega_r, omega_r);
            }
            if fa.signum() != f0.signum() {
                break (a, omega_r);
            }
            if fb.signum() != f0.signum() {
                break (omega_r, b);
            }
            step *= 2.0;
            if step > 1e3 * bracket_step.max(1.0) {
                return Err(SfgError::InvalidInput(format!("no phase-matching root for detuning {d}")));
            }
        };
        let mut flo = f(lo)?;
        for _ in 0..200 {
            if hi - lo <= 1e-15 * omega_r.abs() {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let fm = f(mid)?;
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        points.push((d, 0.5 * (lo + hi) - omega_r));
    }
    let n = points.len() as f64;
    if points.len() < 2 {
        return Err(SfgError::InvalidInput("need at least two detunings".into()));
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn model() -> SellmeierModel {
        SellmeierModel::lithium_niobate(None).unwrap()
    }

    fn process() -> ProcessSpec {
        ProcessSpec::new(1560.0, 907.0)
    }

    #[test]
    fn energy_conservation_of_carriers() {
        let p = process();
        assert_eq!(p.omega_r(), p.omega_s() + p.omega_p());
        assert_relative_eq!(omega_from_wavelength_nm(p.lambda_r_nm()), p.omega_r(), max_relative = 1e-14);
        assert!((p.lambda_r_nm() - 573.54).abs() < 0.01);
    }

    #[test]
    fn bulk_group_slownesses() {
        let m = model();
        let p = process();
        let beta_p = group_slowness(&m, p.omega_p()).unwrap();
        let beta_r = group_slowness(&m, omega_from_wavelength_nm(574.0)).unwrap();
        assert!((beta_p / 7.534 - 1.0).abs() < 0.02, "beta_p {beta_p}");
        assert!((beta_r / 8.132 - 1.0).abs() < 0.02, "beta_r {beta_r}");
    }

    #[test]
    fn slowness_converges_under_step_halving() {
        let m = model();
        for &w in &[process().omega_s(), process().omega_p(), process().omega_r()] {
            let b1 = group_slowness_with_step(&m, w, SLOWNESS_STEP).unwrap();
            let b2 = group_slowness_with_step(&m, w, SLOWNESS_STEP / 2.0).unwrap();
            assert!(((b1 - b2) / b1).abs() < 1e-4);
            let g1 = gdd_half_with_step(&m, w, GDD_STEP).unwrap();
            let g2 = gdd_half_with_step(&m, w, 2.0 * GDD_STEP).unwrap();
            assert!(((g1 - g2) / g1).abs() < 1e-2, "{g1} vs {g2}");
        }
    }

    #[test]
    fn wavenumber_increases_with_frequency() {
        let m = model();
        let lo = omega_from_wavelength_nm(1990.0);
        let hi = omega_from_wavelength_nm(410.0);
        let mut prev = wavenumber(&m, lo).unwrap();
        for i in 1..=200 {
            let w = lo + (hi - lo) * i as f64 / 200.0;
            let k = wavenumber(&m, w).unwrap();
            assert!(k > prev);
            prev = k;
        }
    }

    #[test]
    fn poling_period_for_nv_conversion() {
        let period = poling_period(&model(), &process()).unwrap();
        assert!((period / 8.4 - 1.0).abs() < 0.05, "period {period}");
    }

    #[test]
    fn qpm_residual_vanishes() {
        let m = model();
        let p = process();
        let period = poling_period(&m, &p).unwrap();
        let dk = delta_k(&m, p.omega_r(), p.omega_s(), period).unwrap();
        assert!(dk.abs() < 1e-9, "residual {dk:e}");
        let off = delta_k(&m, p.omega_r(), p.omega_s(), period * 1.01).unwrap();
        assert!(off.abs() > 1.0);
    }

    #[test]
    fn not_qpmable_when_mismatch_negative() {
        // Difference-frequency ordering gives a negative mismatch.
        let m = model();
        let bad = ProcessSpec::new(-1560.0, 907.0);
        assert!(poling_period(&m, &bad).is_err());
    }

    #[test]
    fn taylor_form_vanishes_at_carriers() {
        let t = TaylorExpansion::from_model(&model(), &process()).unwrap();
        assert_eq!(t.delta_k(t.omega_r, t.omega_s), 0.0);
    }

    #[test]
    fn exact_and_taylor_agree_to_third_order() {
        let m = model();
        let p = process();
        let period = poling_period(&m, &p).unwrap();
        let t = TaylorExpansion::from_model(&m, &p).unwrap();
        // Residual along a fixed direction in (omega, omega~) for two decades of detuning.
        let residual = |eps: f64| {
            let w = p.omega_r() + eps;
            let wt = p.omega_s() - 0.6 * eps;
            (delta_k(&m, w, wt, period).unwrap() - t.delta_k(w, wt)).abs()
        };
        let (e1, e2) = (2.0, 20.0);
        let slope = (residual(e2) / residual(e1)).log10() / (e2 / e1).log10();
        assert!(slope >= 2.9, "log-log slope {slope}");
    }

    #[test]
    fn horizontal_line_when_signal_and_pump_matched() {
        let t = TaylorExpansion::from_model(&model(), &process())
            .unwrap()
            .with_matched_signal()
            .without_quadratic();
        for d in [-0.05, 0.0, 0.03] {
            assert_eq!(t.delta_k(t.omega_r, t.omega_s + d), 0.0);
        }
        assert_eq!(t.contour_slope(), 0.0);
    }

    #[test]
    fn fitted_slope_matches_group_slowness_law() {
        for (bp, bs, br) in [(7.534, 7.335, 8.134), (7.534, 7.0, 30.1), (2.0, 3.0, 5.0)] {
            let t = TaylorExpansion {
                omega_r: 3284.0,
                omega_s: 1207.0,
                beta_p: bp,
                beta_s: bs,
                beta_r: br,
                beta2_p: 0.0,
                beta2_s: 0.0,
                beta2_r: 0.0,
            };
            let detunings: Vec<f64> = (-5..=5).map(|i| 0.01 * i as f64).collect();
            let slope = fit_zero_contour_slope(|w, wt| Ok(t.delta_k(w, wt)), 3284.0, 1207.0, &detunings, 0.01).unwrap();
            assert!((slope - (bs - bp) / (br - bp)).abs() < 1e-6, "{slope}");
        }
    }

    #[test]
    fn acceptance_width_values() {
        assert_relative_eq!(acceptance_width(60.2, 7.534, 40.0).unwrap(), 1.491e-3, max_relative = 1e-3);
        assert_relative_eq!(
            acceptance_width(30.14, 7.534, 40.0).unwrap(),
            PI / 904.24,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            acceptance_width(8.0, 7.0, 20.0).unwrap(),
            2.0 * acceptance_width(8.0, 7.0, 40.0).unwrap()
        );
        assert!(acceptance_width(7.0, 7.0, 40.0).is_err());
    }
}
