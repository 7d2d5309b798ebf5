//! Split-step integrator for the coupled signal/SFG equations with an
//! undepleted pump:
//!
//! ```text
//! (d/dz + beta_r d/dt + i beta2_r d^2/dt^2) A_r = i gamma A_p A_s
//! (d/dz + beta_s d/dt + i beta2_s d^2/dt^2) A_s = i gamma A_p^* A_r
//! ```
//!
//! Fields live on a grid moving with the pump (`tau = t - beta_p z`). Each
//! step is half a linear step, an exact pointwise rotation of `(A_r, A_s)`,
//! and another half linear step. Whole-sample delays are tracked as index
//! offsets, so dispersionless runs need no transforms at all.

use num_complex::Complex;

use crate::error::{Result, SfgError};
use crate::grid::{energy, ComplexEnvelope, TimeGrid};
use crate::medium::MediumSpec;
use crate::pulse::{synthesize_gaussian, GaussianPulseSpec};
use crate::scalar::Real;
use crate::spectral::{FftPair, LinearStep};

/// Largest walk-off of the SFG against the pump per step, in units of the
/// pump duration, used when the step count is chosen automatically.
pub const AUTO_WALK_PER_STEP: f64 = 0.0625;

/// Smallest automatic step count.
pub const MIN_AUTO_STEPS: usize = 512;

/// Fraction of spectral energy in the outer 10% of the frequency window above
/// which a run is rejected as aliased.
pub const ALIASING_LIMIT: f64 = 1e-4;

/// Pump samples below this fraction of the pump peak are not coupled.
const PUMP_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SolverConfig {
    /// Number of z steps; `None` picks one from the walk-off.
    pub n_z: Option<usize>,
    pub include_gdd: bool,
    /// Record intensities every this many steps.
    pub snapshot_every: Option<usize>,
    /// Upper bound on the time step (ps); defaults to a twentieth of the pump duration.
    pub dt_max: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            n_z: None,
            include_gdd: false,
            snapshot_every: None,
            dt_max: None,
        }
    }
}

impl SolverConfig {
    pub fn with_steps(mut self, n_z: usize) -> Self {
        self.n_z = Some(n_z);
        self
    }

    pub fn with_gdd(mut self, include_gdd: bool) -> Self {
        self.include_gdd = include_gdd;
        self
    }

    pub fn with_snapshots(mut self, every: usize) -> Self {
        self.snapshot_every = Some(every);
        self
    }

    pub fn with_dt_max(mut self, dt_max: f64) -> Self {
        self.dt_max = Some(dt_max);
        self
    }

    /// Step count, resolving the automatic choice for `medium` and a pump of
    /// duration `duration` (ps).
    pub fn steps<T: Real>(&self, medium: &MediumSpec<T>, duration: T) -> usize {
        match self.n_z {
            Some(n) => n,
            None => {
                let walk = medium.max_walkoff().as_f64();
                let per_step = AUTO_WALK_PER_STEP * duration.as_f64();
                ((walk / per_step).ceil() as usize).max(MIN_AUTO_STEPS)
            }
        }
    }

    pub fn resolved_dt_max<T: Real>(&self, duration: T) -> T {
        self.dt_max.map(T::lit).unwrap_or(duration / T::lit(20.0))
    }

    fn validate(&self) -> Result<()> {
        if self.n_z == Some(0) {
            return Err(SfgError::InvalidInput("n_z must be at least 1".into()));
        }
        if self.snapshot_every == Some(0) {
            return Err(SfgError::InvalidInput("snapshot interval must be at least 1".into()));
        }
        if let Some(dt) = self.dt_max {
            if !(dt > 0.0) {
                return Err(SfgError::InvalidInput("dt_max must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Intensities at one z position, on the co-moving grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<T = f64> {
    pub z: T,
    pub signal_intensity: Vec<T>,
    pub sfg_intensity: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Diagnostics<T = f64> {
    pub steps: usize,
    pub dz: T,
    /// Energy of signal plus SFG at the input and output.
    pub energy_in: T,
    pub energy_out: T,
    /// Largest relative change of the combined energy seen during the run.
    pub manley_rowe_drift: T,
    /// Spectral energy fraction in the outer 10% of the frequency window.
    pub edge_spectral_fraction: T,
    /// Lab time minus co-moving time at the output (`beta_p L`).
    pub frame_offset: T,
}

#[derive(Debug, Clone)]
pub struct PropagationResult<T: Real = f64> {
    /// Output fields on the lab-time grid.
    pub signal_out: ComplexEnvelope<T>,
    pub sfg_out: ComplexEnvelope<T>,
    pub snapshots: Vec<Snapshot<T>>,
    pub diagnostics: Diagnostics<T>,
}

/// Simulation grid for `medium` and a pump/signal pulse `pulse`.
///
/// The step is chosen so that the per-half-step SFG delay relative to the pump
/// is an even number of samples; the run and its step-doubled check both use
/// exact shifts. The span covers all walk-offs and at least 1.5 times the
/// largest one.
pub fn plan_grid<T: Real>(
    medium: &MediumSpec<T>,
    pulse: &GaussianPulseSpec<T>,
    config: &SolverConfig,
) -> Result<TimeGrid<T>> {
    medium.validate()?;
    pulse.validate()?;
    config.validate()?;
    let l = medium.length;
    let walk_s = (medium.beta_s - medium.beta_p) * l;
    let walk_r = (medium.beta_r - medium.beta_p) * l;
    let n_z = config.steps(medium, pulse.duration);
    let dt_max = config.resolved_dt_max(pulse.duration);

    let lead = if walk_r != T::zero() { walk_r } else { walk_s };
    let dt = if lead == T::zero() {
        dt_max
    } else {
        let half_step = lead.abs() / T::count(2 * n_z);
        let m = T::lit(2.0) * (half_step / (T::lit(2.0) * dt_max)).ceil();
        half_step / m
    };

    let beta2 = if config.include_gdd {
        medium.beta2_p.abs().max(medium.beta2_s.abs()).max(medium.beta2_r.abs())
    } else {
        T::zero()
    };
    let width = T::lit(6.0) * pulse.dispersed_half_width(l, beta2);
    let zero = T::zero();
    let lo = pulse.center - width + zero.min(walk_s).min(walk_r);
    let hi = pulse.center + width + zero.max(walk_s).max(walk_r);
    let needed = (hi - lo).max(T::lit(1.5) * medium.max_walkoff());
    let pad = (needed - (hi - lo)) / T::lit(2.0);
    TimeGrid::power_of_two(lo - pad, dt, needed + dt)
}

struct Field<T: Real> {
    data: Vec<Complex<T>>,
    /// Logical sample `j` is stored at `(j - offset) mod n`.
    offset: isize,
}

impl<T: Real> Field<T> {
    fn new(data: Vec<Complex<T>>) -> Self {
        Self { data, offset: 0 }
    }

    fn materialize(&mut self) {
        let n = self.data.len() as isize;
        let k = self.offset.rem_euclid(n) as usize;
        self.data.rotate_right(k);
        self.offset = 0;
    }

    fn advance(&mut self, step: &LinearStep<T>, fft: &mut FftPair<T>) {
        match step {
            LinearStep::Identity => {}
            LinearStep::Shift(k) => self.offset += *k,
            LinearStep::Spectral(_) => {
                self.materialize();
                step.apply(&mut self.data, fft);
            }
        }
    }

    #[inline]
    fn index(&self, j: usize) -> usize {
        let n = self.data.len() as isize;
        (j as isize - self.offset).rem_euclid(n) as usize
    }

    fn energy(&self, dt: T) -> T {
        self.data.iter().fold(T::zero(), |a, v| a + v.norm_sqr()) * dt
    }

    fn intensity(&self) -> Vec<T> {
        let n = self.data.len();
        (0..n).map(|j| self.data[self.index(j)].norm_sqr()).collect()
    }
}

struct Stepper<T: Real> {
    pump: Field<T>,
    signal: Field<T>,
    sfg: Field<T>,
    pump_step: LinearStep<T>,
    signal_step: LinearStep<T>,
    sfg_step: LinearStep<T>,
    fft: FftPair<T>,
    /// Coupling times the signed step length.
    kappa_scale: T,
    support: (usize, usize),
}

impl<T: Real> Stepper<T> {
    fn update_support(&mut self) {
        let peak = self.pump.data.iter().fold(T::zero(), |m, v| m.max(v.norm()));
        let cut = peak * T::lit(PUMP_CUTOFF);
        let n = self.pump.data.len();
        // The pump never shifts, so its storage and logical indices agree.
        let first = (0..n).find(|&j| self.pump.data[j].norm() > cut).unwrap_or(0);
        let last = (0..n).rev().find(|&j| self.pump.data[j].norm() > cut).unwrap_or(0);
        self.support = (first, last);
    }

    fn half_linear(&mut self) {
        self.pump.advance(&self.pump_step, &mut self.fft);
        self.signal.advance(&self.signal_step, &mut self.fft);
        self.sfg.advance(&self.sfg_step, &mut self.fft);
        if !self.pump_step.is_identity() {
            self.update_support();
        }
    }

    fn nonlinear(&mut self) {
        let (a, b) = self.support;
        for j in a..=b {
            let p = self.pump.data[j];
            let mag = p.norm();
            if mag == T::zero() {
                continue;
            }
            let phase = p / mag;
            let (s, c) = (self.kappa_scale * mag).sin_cos();
            let is = self.signal.index(j);
            let ir = self.sfg.index(j);
            let (xs, xr) = (self.signal.data[is], self.sfg.data[ir]);
            let i = Complex::new(T::zero(), T::one());
            self.sfg.data[ir] = xr * c + i * phase * xs * s;
            self.signal.data[is] = xs * c + i * phase.conj() * xr * s;
        }
    }
}

/// Runs `n_z` Strang steps from `z0` over signed distance `distance`.
#[allow(clippy::too_many_arguments)]
fn run<T: Real>(
    medium: &MediumSpec<T>,
    pump: Vec<Complex<T>>,
    signal: Vec<Complex<T>>,
    sfg: Vec<Complex<T>>,
    grid: &TimeGrid<T>,
    n_z: usize,
    distance: T,
    z0: T,
    include_gdd: bool,
    snapshot_every: Option<usize>,
) -> (Vec<Complex<T>>, Vec<Complex<T>>, Vec<Snapshot<T>>, T) {
    let h = distance / T::count(n_z);
    let half = h / T::lit(2.0);
    let gdd = |b2: T| if include_gdd { b2 * half } else { T::zero() };
    let mut st = Stepper {
        pump: Field::new(pump),
        signal: Field::new(signal),
        sfg: Field::new(sfg),
        pump_step: LinearStep::new(grid, T::zero(), gdd(medium.beta2_p)),
        signal_step: LinearStep::new(grid, (medium.beta_s - medium.beta_p) * half, gdd(medium.beta2_s)),
        sfg_step: LinearStep::new(grid, (medium.beta_r - medium.beta_p) * half, gdd(medium.beta2_r)),
        fft: FftPair::new(grid.len()),
        kappa_scale: medium.gamma * h,
        support: (0, 0),
    };
    st.update_support();

    let dt = grid.dt();
    let e0 = st.signal.energy(dt) + st.sfg.energy(dt);
    let mut drift = T::zero();
    let mut snapshots = Vec::new();
    let mut snap = |st: &Stepper<T>, step: usize, drift: &mut T| {
        let e = st.signal.energy(dt) + st.sfg.energy(dt);
        if e0 > T::zero() {
            *drift = drift.max(((e - e0) / e0).abs());
        }
        if let Some(every) = snapshot_every {
            if step % every == 0 || step == n_z {
                snapshots.push(Snapshot {
                    z: z0 + h * T::count(step),
                    signal_intensity: st.signal.intensity(),
                    sfg_intensity: st.sfg.intensity(),
                });
            }
        }
    };
    snap(&st, 0, &mut drift);
    for step in 1..=n_z {
        st.half_linear();
        st.nonlinear();
        st.half_linear();
        if snapshot_every.is_some_and(|e| step % e == 0) || step == n_z {
            snap(&st, step, &mut drift);
        }
    }
    st.signal.materialize();
    st.sfg.materialize();
    (st.signal.data, st.sfg.data, snapshots, drift)
}

/// Fraction of spectral energy in the outer 10% of the frequency window.
pub fn edge_spectral_fraction<T: Real>(samples: &[Complex<T>]) -> T {
    let n = samples.len();
    let mut buf = samples.to_vec();
    FftPair::new(n).forward(&mut buf);
    let total = buf.iter().fold(T::zero(), |a, v| a + v.norm_sqr());
    if !(total > T::zero()) {
        return T::zero();
    }
    let edge_start = (0.9 * (n / 2) as f64) as usize;
    let edge = buf
        .iter()
        .enumerate()
        .filter(|(m, _)| {
            let f = if *m <= n / 2 { *m } else { n - *m };
            f >= edge_start
        })
        .fold(T::zero(), |a, (_, v)| a + v.norm_sqr());
    edge / total
}

fn check_coverage<T: Real>(
    medium: &MediumSpec<T>,
    pump_spec: &GaussianPulseSpec<T>,
    grid: &TimeGrid<T>,
    include_gdd: bool,
) -> Result<()> {
    let l = medium.length;
    let walk_s = (medium.beta_s - medium.beta_p) * l;
    let walk_r = (medium.beta_r - medium.beta_p) * l;
    let beta2 = if include_gdd {
        medium.beta2_p.abs().max(medium.beta2_s.abs()).max(medium.beta2_r.abs())
    } else {
        T::zero()
    };
    let width = T::lit(6.0) * pump_spec.dispersed_half_width(l, beta2);
    let zero = T::zero();
    grid.require_covers(
        pump_spec.center - width + zero.min(walk_s).min(walk_r),
        pump_spec.center + width + zero.max(walk_s).max(walk_r),
    )
}

/// Propagates `signal_in` (given at z = 0 on the simulation grid) through the
/// medium with the pump `pump_spec`.
pub fn propagate<T: Real>(
    medium: &MediumSpec<T>,
    pump_spec: &GaussianPulseSpec<T>,
    signal_in: &ComplexEnvelope<T>,
    config: &SolverConfig,
) -> Result<PropagationResult<T>> {
    medium.validate()?;
    config.validate()?;
    let grid = *signal_in.grid();
    check_coverage(medium, pump_spec, &grid, config.include_gdd)?;
    let n_z = config.steps(medium, pump_spec.duration);
    let beta2_p = if config.include_gdd { medium.beta2_p } else { T::zero() };
    let pump = synthesize_gaussian(pump_spec, &grid, T::zero(), T::zero(), beta2_p)?;
    let zeros = vec![Complex::new(T::zero(), T::zero()); grid.len()];
    let (signal, sfg, snapshots, drift) = run(
        medium,
        pump.into_samples(),
        signal_in.samples().to_vec(),
        zeros,
        &grid,
        n_z,
        medium.length,
        T::zero(),
        config.include_gdd,
        config.snapshot_every,
    );
    finish(medium, &grid, signal_in, signal, sfg, snapshots, drift, n_z)
}

#[allow(clippy::too_many_arguments)]
fn finish<T: Real>(
    medium: &MediumSpec<T>,
    grid: &TimeGrid<T>,
    signal_in: &ComplexEnvelope<T>,
    signal: Vec<Complex<T>>,
    sfg: Vec<Complex<T>>,
    snapshots: Vec<Snapshot<T>>,
    drift: T,
    n_z: usize,
) -> Result<PropagationResult<T>> {
    let offset = medium.beta_p * medium.length;
    let lab = grid.shifted(offset);
    let signal_out = ComplexEnvelope::new(lab, signal).map_err(|_| SfgError::NonFinite)?;
    let sfg_out = ComplexEnvelope::new(lab, sfg).map_err(|_| SfgError::NonFinite)?;
    let edge = edge_spectral_fraction(signal_out.samples()).max(edge_spectral_fraction(sfg_out.samples()));
    if edge > T::lit(ALIASING_LIMIT) {
        return Err(SfgError::Aliasing { fraction: edge.as_f64() });
    }
    let energy_in = energy(signal_in);
    let energy_out = energy(&signal_out) + energy(&sfg_out);
    Ok(PropagationResult {
        signal_out,
        sfg_out,
        snapshots,
        diagnostics: Diagnostics {
            steps: n_z,
            dz: medium.length / T::count(n_z),
            energy_in,
            energy_out,
            manley_rowe_drift: drift,
            edge_spectral_fraction: edge,
            frame_offset: offset,
        },
    })
}

/// Runs the equations backward from `z = L` to `z = 0`, starting from output
/// fields on the lab-time grid. Returns `(signal, sfg)` at the input on the
/// co-moving (input) grid.
pub fn back_propagate<T: Real>(
    medium: &MediumSpec<T>,
    pump_spec: &GaussianPulseSpec<T>,
    signal_out: &ComplexEnvelope<T>,
    sfg_out: &ComplexEnvelope<T>,
    config: &SolverConfig,
) -> Result<(ComplexEnvelope<T>, ComplexEnvelope<T>)> {
    medium.validate()?;
    config.validate()?;
    if !signal_out.grid().same_as(sfg_out.grid()) {
        return Err(SfgError::GridMismatch);
    }
    let grid = signal_out.grid().shifted(-(medium.beta_p * medium.length));
    check_coverage(medium, pump_spec, &grid, config.include_gdd)?;
    let n_z = config.steps(medium, pump_spec.duration);
    let beta2_p = if config.include_gdd { medium.beta2_p } else { T::zero() };
    let pump = synthesize_gaussian(pump_spec, &grid, medium.length, T::zero(), beta2_p)?;
    let (signal, sfg, _, _) = run(
        medium,
        pump.into_samples(),
        signal_out.samples().to_vec(),
        sfg_out.samples().to_vec(),
        &grid,
        n_z,
        -medium.length,
        medium.length,
        config.include_gdd,
        None,
    );
    Ok((ComplexEnvelope::new(grid, signal)?, ComplexEnvelope::new(grid, sfg)?))
}

fn relative_l2<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> T {
    let num = a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + (x - y).norm_sqr());
    let den = b.iter().fold(T::zero(), |s, y| s + y.norm_sqr());
    if den > T::zero() {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}

/// Relative L2 distance between the SFG outputs of runs with `n_z` and
/// `2 n_z` steps.
pub fn step_doubling_error<T: Real>(
    medium: &MediumSpec<T>,
    pump_spec: &GaussianPulseSpec<T>,
    signal_in: &ComplexEnvelope<T>,
    config: &SolverConfig,
) -> Result<T> {
    let n_z = config.steps(medium, pump_spec.duration);
    let coarse = propagate(medium, pump_spec, signal_in, &config.with_steps(n_z))?;
    let fine = propagate(medium, pump_spec, signal_in, &config.with_steps(2 * n_z))?;
    Ok(relative_l2(coarse.sfg_out.samples(), fine.sfg_out.samples()))
}

/// Propagation whose step-doubling error must be below `tolerance`; the
/// finer of the two runs is returned.
pub fn propagate_certified<T: Real>(
    medium: &MediumSpec<T>,
    pump_spec: &GaussianPulseSpec<T>,
    signal_in: &ComplexEnvelope<T>,
    config: &SolverConfig,
    tolerance: T,
) -> Result<(PropagationResult<T>, T)> {
    let n_z = config.steps(medium, pump_spec.duration);
    let coarse = propagate(medium, pump_spec, signal_in, &config.with_steps(n_z))?;
    let fine = propagate(medium, pump_spec, signal_in, &config.with_steps(2 * n_z))?;
    let err = relative_l2(coarse.sfg_out.samples(), fine.sfg_out.samples());
    if err.as_f64() > tolerance.as_f64() || !err.is_finite() {
        return Err(SfgError::Convergence {
            error: err.as_f64(),
            tolerance: tolerance.as_f64(),
        });
    }
    Ok((fine, err))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GddReport<T = f64> {
    /// Relative L2 distance of the SFG outputs with and without dispersion.
    pub relative_difference: T,
    /// `beta2_j L / T^2` for pump, signal and SFG.
    pub ratios: [T; 3],
    pub efficiency_with: T,
    pub efficiency_without: T,
}

/// Runs with and without the quadratic dispersion terms and compares the SFG
/// outputs.
pub fn gdd_neglect_check<T: Real>(
    medium: &MediumSpec<T>,
    pump_spec: &GaussianPulseSpec<T>,
    signal_in: &ComplexEnvelope<T>,
    config: &SolverConfig,
) -> Result<GddReport<T>> {
    let with = propagate(medium, pump_spec, signal_in, &config.with_gdd(true))?;
    let without = propagate(medium, pump_spec, signal_in, &config.with_gdd(false))?;
    let t2 = pump_spec.duration * pump_spec.duration;
    let l = medium.length;
    Ok(GddReport {
        relative_difference: relative_l2(with.sfg_out.samples(), without.sfg_out.samples()),
        ratios: [medium.beta2_p * l / t2, medium.beta2_s * l / t2, medium.beta2_r * l / t2],
        efficiency_with: energy(&with.sfg_out),
        efficiency_without: energy(&without.sfg_out),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytical::full_gvm_fields;

    fn pulse() -> GaussianPulseSpec {
        GaussianPulseSpec::new(1.0, 20.0)
    }

    fn setup(medium: &MediumSpec, config: &SolverConfig) -> ComplexEnvelope {
        let grid = plan_grid(medium, &pulse(), config).unwrap();
        synthesize_gaussian(&pulse(), &grid, 0.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn planned_grid_makes_sfg_delay_whole_samples() {
        let m = MediumSpec::new(40.0, 7.534, 7.534, 60.2, 1.0);
        let cfg = SolverConfig::default();
        let grid = plan_grid(&m, &pulse(), &cfg).unwrap();
        let n_z = cfg.steps(&m, 1.0);
        let half = (m.beta_r - m.beta_p) * m.length / (2 * n_z) as f64 / grid.dt();
        assert!((half - half.round()).abs() < 1e-9 && half.round() as usize % 2 == 0);
        assert!(grid.dt() <= 0.05);
        assert!(grid.span() >= 1.5 * m.max_walkoff());
        assert!(grid.len().is_power_of_two());
    }

    #[test]
    fn no_coupling_is_pure_transport() {
        let m = MediumSpec::new(10.0, 7.534, 7.0, 9.0, 0.0);
        let cfg = SolverConfig::default().with_steps(64);
        let s = setup(&m, &cfg);
        let out = propagate(&m, &pulse(), &s, &cfg).unwrap();
        assert!(out.sfg_out.samples().iter().all(|v| v.norm() == 0.0));
        // Signal arrives at T_center + beta_s L in lab time.
        let expected = ComplexEnvelope::from_fn(*out.signal_out.grid(), |t| {
            crate::pulse::gaussian_amplitude(1.0, 20.0, 10.0, 7.0, 0.0, t)
        })
        .unwrap();
        let err = relative_l2(out.signal_out.samples(), expected.samples());
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn equal_velocities_reproduce_closed_form() {
        let m = MediumSpec::new(25.0, 7.534, 7.534, 7.534, 0.2);
        let cfg = SolverConfig::default().with_steps(64);
        let s = setup(&m, &cfg);
        let out = propagate(&m, &pulse(), &s, &cfg).unwrap();
        let (ar, as_) = full_gvm_fields(25.0, 0.2, &s, &s).unwrap();
        for (a, b) in out.sfg_out.samples().iter().zip(ar.samples()) {
            assert!((a - b).norm() < 1e-12);
        }
        for (a, b) in out.signal_out.samples().iter().zip(as_.samples()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn combined_energy_is_conserved() {
        let m = MediumSpec::new(40.0, 7.534, 7.534, 30.1, 1.4);
        let cfg = SolverConfig::default().with_steps(256);
        let s = setup(&m, &cfg);
        let out = propagate(&m, &pulse(), &s, &cfg).unwrap();
        assert!(out.diagnostics.manley_rowe_drift < 1e-10);
        assert!((out.diagnostics.energy_out - out.diagnostics.energy_in).abs() < 1e-10);
    }

    #[test]
    fn backward_run_recovers_input() {
        let m = MediumSpec::new(40.0, 7.534, 7.534, 30.1, 1.0);
        let cfg = SolverConfig::default().with_steps(256);
        let s = setup(&m, &cfg);
        let out = propagate(&m, &pulse(), &s, &cfg).unwrap();
        let (s_back, r_back) = back_propagate(&m, &pulse(), &out.signal_out, &out.sfg_out, &cfg).unwrap();
        assert!(relative_l2(s_back.samples(), s.samples()) < 1e-10);
        assert!(r_back.energy() < 1e-20);
    }

    #[test]
    fn dispersion_only_run_is_exactly_comparable() {
        let m = MediumSpec::new(10.0, 7.534, 7.534, 9.0, 0.0);
        let cfg = SolverConfig::default().with_steps(32);
        let s = setup(&m, &cfg);
        let r = gdd_neglect_check(&m, &pulse(), &s, &cfg).unwrap();
        assert_eq!(r.relative_difference, 0.0);
        assert_eq!(r.ratios, [0.0; 3]);
    }

    #[test]
    fn zero_coupling_doubling_error_vanishes() {
        let m = MediumSpec::new(10.0, 7.534, 7.3, 9.0, 0.0);
        let cfg = SolverConfig::default().with_steps(16);
        let s = setup(&m, &cfg);
        assert_eq!(step_doubling_error(&m, &pulse(), &s, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn aliasing_guard_trips_on_undersampled_field() {
        let noisy: Vec<Complex<f64>> = (0..64).map(|k| Complex::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0)).collect();
        assert!(edge_spectral_fraction(&noisy) > 0.99);
        let smooth = synthesize_gaussian(&GaussianPulseSpec::new(2.0, 32.0), &TimeGrid::new(0.0, 0.5, 128).unwrap(), 0.0, 0.0, 0.0)
            .unwrap();
        assert!(edge_spectral_fraction(smooth.samples()) < 1e-12);
    }

    #[test]
    fn grid_must_cover_walkoff() {
        let m = MediumSpec::new(40.0, 7.534, 7.534, 30.1, 1.0);
        let g = TimeGrid::new(0.0, 0.05, 1024).unwrap();
        let s = synthesize_gaussian(&pulse(), &g, 0.0, 0.0, 0.0).unwrap();
        assert!(matches!(
            propagate(&m, &pulse(), &s, &SolverConfig::default()),
            Err(SfgError::GridTooSmall { .. })
        ));
    }
}
