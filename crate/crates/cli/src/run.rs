//! Single cases, scenarios and sweeps.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;
use slowsfg::analysis::{bandwidth, compression_factor, shape_report, spectrum, BandwidthMethod, ShapeReport, Spectrum};
use slowsfg::analytical::{gamma_crit, rect_spectrum, sfg_green, GreenKernelContext};
use slowsfg::numerical::{plan_grid, propagate, Diagnostics, PropagationResult, SolverConfig};
use slowsfg::{synthesize_gaussian, width_1e_intensity, Envelope64, GaussianPulseSpec, MediumSpec, TimeGrid};

use crate::error::{CliError, CliResult};
use crate::output::{tag, Sink};
use crate::scenario::{GridSection, Resolved, ResolvedSweep, Solver, SweepParam};

/// Samples kept on each side of the SFG window in written files (units of T_p).
const FILE_MARGIN: f64 = 5.0;

/// Coarsest time step written to temporal CSV files (ps).
const FILE_DT: f64 = 0.05;

/// One medium, coupling and pair of input pulses.
#[derive(Debug, Clone)]
pub struct Case {
    pub medium: MediumSpec,
    pub pump: GaussianPulseSpec,
    pub signal: GaussianPulseSpec,
    pub grid: GridSection,
    pub snapshots: Option<usize>,
}

impl Case {
    pub fn new(medium: MediumSpec, pump: GaussianPulseSpec, signal: GaussianPulseSpec) -> Self {
        Self {
            medium,
            pump,
            signal,
            grid: GridSection::default(),
            snapshots: None,
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::default().with_gdd(self.grid.gdd);
        if let Some(n) = self.grid.n_z {
            cfg = cfg.with_steps(n);
        }
        if let Some(every) = self.snapshots {
            cfg = cfg.with_snapshots(every);
        }
        cfg
    }

    /// Green-function quadrature step: `min(T_p/20, T_r/200)` unless set.
    pub fn green_dt(&self) -> f64 {
        self.grid.green_dt_ps.unwrap_or_else(|| {
            let tp = self.pump.duration.min(self.signal.duration);
            (tp / 20.0).min(self.medium.window_duration() / 200.0)
        })
    }

    /// Grid holding both input pulses at z = 0 with spacing `dt`.
    pub fn input_grid(&self, dt: f64) -> CliResult<TimeGrid> {
        let (a0, a1) = self.pump.support(0.0, 0.0, 0.0);
        let (b0, b1) = self.signal.support(0.0, 0.0, 0.0);
        let (lo, hi) = (a0.min(b0), a1.max(b1));
        Ok(TimeGrid::new(lo, dt, ((hi - lo) / dt).ceil() as usize + 1)?)
    }

    /// SFG output window `[beta_s L + T_c, beta_r L + T_c]` for the signal centre.
    pub fn window(&self) -> (f64, f64) {
        let m = &self.medium;
        (m.beta_s * m.length + self.signal.center, m.beta_r * m.length + self.signal.center)
    }

    pub fn input_signal(&self, grid: &TimeGrid) -> CliResult<Envelope64> {
        Ok(synthesize_gaussian(&self.signal, grid, 0.0, 0.0, 0.0)?)
    }
}

pub struct SplitRun {
    pub signal_in: Envelope64,
    pub result: PropagationResult,
}

pub fn run_split(case: &Case) -> CliResult<SplitRun> {
    let cfg = case.solver_config();
    let grid = plan_grid(&case.medium, &case.pump, &cfg)?;
    let signal_in = case.input_signal(&grid)?;
    let result = propagate(&case.medium, &case.pump, &signal_in, &cfg)?;
    Ok(SplitRun { signal_in, result })
}

pub struct GreenRun {
    pub signal_in: Envelope64,
    pub sfg: Envelope64,
}

/// Green-function output sampled on `out_grid`, or on a grid of the
/// quadrature step covering the output support when `None`.
pub fn run_green(case: &Case, out_grid: Option<&TimeGrid>) -> CliResult<GreenRun> {
    if case.grid.gdd {
        log::warn!("the Green-function solver ignores dispersion");
    }
    let dt = case.green_dt();
    let input = case.input_grid(dt)?;
    let pump = synthesize_gaussian(&case.pump, &input, 0.0, 0.0, 0.0)?;
    let signal_in = case.input_signal(&input)?;
    let ctx = GreenKernelContext::new(case.medium, pump, signal_in.clone())?;
    let out = match out_grid {
        Some(g) => *g,
        None => {
            let (a, b) = ctx.output_support();
            TimeGrid::new(a - dt, dt, ((b - a) / dt).ceil() as usize + 3)?
        }
    };
    let sfg = sfg_green(&ctx, &out)?;
    Ok(GreenRun { signal_in, sfg })
}

/// Samples of `env` between `from` and `to`, every `step`-th one.
pub fn excerpt(env: &Envelope64, from: f64, to: f64, step: usize) -> CliResult<Envelope64> {
    let g = env.grid();
    let first = g.position(from).ceil().max(0.0) as usize;
    let last = (g.position(to).floor() as usize).min(g.len() - 1);
    if first >= last {
        return Err(CliError::BadInput(format!("excerpt [{from}, {to}] misses the grid")));
    }
    let samples: Vec<Complex<f64>> = env.samples()[first..=last].iter().step_by(step.max(1)).copied().collect();
    Ok(Envelope64::new(TimeGrid::new(g.time(first), g.dt() * step.max(1) as f64, samples.len())?, samples)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Analytical,
    Numerical,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Analytical => "analytical",
            Self::Numerical => "numerical",
        }
    }

    pub fn selected(solver: Solver) -> Vec<Self> {
        let mut v = Vec::new();
        if solver.analytical() {
            v.push(Self::Analytical);
        }
        if solver.numerical() {
            v.push(Self::Numerical);
        }
        v
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Metrics {
    pub eta: f64,
    pub width_1e_ps: Option<f64>,
    pub stretch: Option<f64>,
    pub fwhm_rad_per_ps: Option<f64>,
    pub first_zero_rad_per_ps: Option<f64>,
    pub compression: Option<f64>,
    pub shape: Option<ShapeReport>,
}

pub fn metrics(case: &Case, signal_in: &Envelope64, sfg: &Envelope64) -> (Metrics, Option<Spectrum>) {
    let eta = sfg.energy();
    if eta > 1.0 + 1e-4 {
        log::warn!("conversion efficiency {eta} exceeds one");
    }
    let w_in = width_1e_intensity(signal_in).ok();
    let w_out = width_1e_intensity(sfg).ok();
    let spec_out = (eta > 0.0).then(|| spectrum(sfg).ok()).flatten();
    let spec_in = spectrum(signal_in).ok();
    let fwhm = spec_out.as_ref().and_then(|s| bandwidth(s, BandwidthMethod::Fwhm).ok());
    let first_zero = spec_out.as_ref().and_then(|s| bandwidth(s, BandwidthMethod::FirstZero).ok());
    let compression = match (&spec_in, &spec_out) {
        (Some(a), Some(b)) => compression_factor(a, b).ok(),
        _ => None,
    };
    let shape = if eta > 0.0 && case.medium.beta_r > case.medium.beta_s {
        shape_report(sfg, &case.medium, case.signal.center).ok()
    } else {
        None
    };
    let m = Metrics {
        eta,
        width_1e_ps: w_out,
        stretch: w_in.zip(w_out).map(|(a, b)| b / a),
        fwhm_rad_per_ps: fwhm,
        first_zero_rad_per_ps: first_zero,
        compression,
        shape,
    };
    (m, spec_out)
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseSummary {
    pub gamma: f64,
    pub length_mm: f64,
    pub solver: SolverKind,
    #[serde(flatten)]
    pub metrics: Metrics,
    pub diagnostics: Option<Diagnostics>,
}

pub struct CaseOutput {
    pub summary: CaseSummary,
    pub sfg: Envelope64,
    pub spectrum: Option<Spectrum>,
}

pub fn solve(case: &Case, kind: SolverKind) -> CliResult<CaseOutput> {
    let (signal_in, sfg, diagnostics) = match kind {
        SolverKind::Numerical => {
            let r = run_split(case)?;
            (r.signal_in, r.result.sfg_out, Some(r.result.diagnostics))
        }
        SolverKind::Analytical => {
            let r = run_green(case, None)?;
            (r.signal_in, r.sfg, None)
        }
    };
    let (metrics, spectrum) = metrics(case, &signal_in, &sfg);
    Ok(CaseOutput {
        summary: CaseSummary {
            gamma: case.medium.gamma,
            length_mm: case.medium.length,
            solver: kind,
            metrics,
            diagnostics,
        },
        sfg,
        spectrum,
    })
}

/// Command-line overrides applied on top of a scenario.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub solver: Option<Solver>,
    pub n_z: Option<usize>,
    pub gdd: Option<bool>,
}

impl RunOptions {
    pub fn apply(&self, scenario: &mut Resolved) {
        if let Some(s) = self.solver {
            scenario.solver = s;
        }
        if let Some(n) = self.n_z {
            scenario.grid.n_z = Some(n);
        }
        if let Some(g) = self.gdd {
            scenario.grid.gdd = g;
        }
    }
}

pub fn provenance(scenario: &Resolved) -> String {
    format!(
        "scenario={} sha256={} solver={} n_z={} gdd={} version={}",
        scenario.name,
        scenario.hash(),
        serde_json::to_value(scenario.solver).unwrap().as_str().unwrap_or("?"),
        scenario.grid.n_z.map_or("auto".to_string(), |n| n.to_string()),
        if scenario.grid.gdd { "on" } else { "off" },
        env!("CARGO_PKG_VERSION"),
    )
}

fn base_case(scenario: &Resolved) -> CliResult<Case> {
    let mut case = Case::new(scenario.medium()?, scenario.pump_spec(), scenario.signal_spec());
    case.grid = scenario.grid.clone();
    case.snapshots = scenario.outputs.snapshots;
    Ok(case)
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioSummary {
    pub scenario: String,
    pub description: String,
    pub sha256: String,
    pub medium: MediumSpec,
    pub gamma_crit: Option<f64>,
    pub window_ps: f64,
    pub input_width_1e_ps: Option<f64>,
    pub cases: Vec<CaseSummary>,
    pub failures: Vec<String>,
}

/// Runs every (length, gamma, solver) combination of `scenario` and writes
/// temporal and spectral CSV files plus `<name>_summary.json`.
pub fn simulate(scenario: &Resolved, sink: &Sink) -> CliResult<ScenarioSummary> {
    let base = base_case(scenario)?;
    let lengths = if scenario.lengths.is_empty() {
        vec![base.medium.length]
    } else {
        scenario.lengths.clone()
    };
    let jobs: Vec<(f64, f64, SolverKind)> = lengths
        .iter()
        .flat_map(|&l| {
            scenario
                .gammas
                .iter()
                .flat_map(move |&g| SolverKind::selected(scenario.solver).into_iter().map(move |k| (l, g, k)))
        })
        .collect();
    if jobs.is_empty() {
        return Err(CliError::BadInput(format!("scenario {} lists no gamma values", scenario.name)));
    }
    let results: Vec<(f64, f64, SolverKind, CliResult<CaseOutput>)> = jobs
        .par_iter()
        .map(|&(l, g, k)| {
            let mut case = base.clone();
            case.medium = case.medium.with_length(l).with_gamma(g);
            (l, g, k, solve(&case, k))
        })
        .collect();

    let mut cases = Vec::new();
    let mut failures = Vec::new();
    let mut first_error = None;
    for (l, g, k, r) in results {
        let stem = if scenario.lengths.is_empty() {
            format!("{}_g{}_{}", scenario.name, tag(g), k.name())
        } else {
            format!("{}_L{}_g{}_{}", scenario.name, tag(l), tag(g), k.name())
        };
        match r {
            Ok(out) => {
                let mut case = base.clone();
                case.medium = case.medium.with_length(l);
                write_case(scenario, sink, &case, &stem, &out)?;
                cases.push(out.summary);
            }
            Err(e) => {
                log::error!("{stem}: {e}");
                failures.push(format!("{stem}: {e}"));
                first_error.get_or_insert(e);
            }
        }
    }
    if scenario.outputs.rect_reference {
        write_rect_reference(scenario, sink, &base, &cases)?;
    }
    let input_grid = base.input_grid(base.green_dt().min(0.05))?;
    let summary = ScenarioSummary {
        scenario: scenario.name.clone(),
        description: scenario.description.clone(),
        sha256: scenario.hash(),
        medium: base.medium,
        gamma_crit: gamma_crit(&base.medium).ok(),
        window_ps: base.medium.window_duration(),
        input_width_1e_ps: width_1e_intensity(&base.input_signal(&input_grid)?).ok(),
        cases,
        failures,
    };
    sink.json(&format!("{}_summary.json", scenario.name), &summary)?;
    match first_error {
        Some(e) if summary.cases.is_empty() => Err(e),
        _ => Ok(summary),
    }
}

fn write_case(scenario: &Resolved, sink: &Sink, case: &Case, stem: &str, out: &CaseOutput) -> CliResult<()> {
    let tp = case.pump.duration.max(case.signal.duration);
    if scenario.outputs.temporal {
        let (a, b) = case.window();
        let dt = out.sfg.grid().dt();
        let step = ((FILE_DT / dt).floor() as usize).max(1);
        let ex = excerpt(&out.sfg, a - FILE_MARGIN * tp, b + FILE_MARGIN * tp, step)?;
        let t: Vec<f64> = ex.grid().times().collect();
        let i = ex.intensity();
        sink.csv(&format!("{stem}_temporal.csv"), &["t_ps", "intensity_per_ps"], &[&t, &i])?;
    }
    if scenario.outputs.spectrum {
        if let Some(s) = &out.spectrum {
            let limit = spectral_limit(case);
            let (w, d): (Vec<f64>, Vec<f64>) = s
                .omega
                .iter()
                .zip(&s.density)
                .filter(|(w, _)| w.abs() <= limit)
                .map(|(w, d)| (*w, *d))
                .unzip();
            sink.csv(&format!("{stem}_spectrum.csv"), &["omega_rad_per_ps", "density_ps_per_rad"], &[&w, &d])?;
        }
    }
    if let Some(d) = out.summary.diagnostics {
        log::info!(
            "{stem}: eta={:.6} n_z={} drift={:.2e} edge={:.2e}",
            out.summary.metrics.eta,
            d.steps,
            d.manley_rowe_drift,
            d.edge_spectral_fraction
        );
    }
    Ok(())
}

/// Detuning range written to spectrum files: twenty main-lobe widths.
fn spectral_limit(case: &Case) -> f64 {
    let scale = case.medium.window_duration().max(case.pump.duration);
    20.0 * std::f64::consts::TAU / scale
}

fn write_rect_reference(scenario: &Resolved, sink: &Sink, case: &Case, cases: &[CaseSummary]) -> CliResult<()> {
    let t_r = case.medium.window_duration();
    let limit = spectral_limit(case);
    let n = 4001;
    let w: Vec<f64> = (0..n).map(|k| -limit + 2.0 * limit * k as f64 / (n - 1) as f64).collect();
    let d: Vec<f64> = w.iter().map(|&w| rect_spectrum(t_r, w)).collect();
    sink.csv(
        &format!("{}_rect_reference_spectrum.csv", scenario.name),
        &["omega_rad_per_ps", "density_ps_per_rad"],
        &[&w, &d],
    )?;
    for c in cases {
        log::info!(
            "gamma={} {}: fwhm={:?} first_zero={:?} (2 pi / T_r = {:.6})",
            c.gamma,
            c.solver.name(),
            c.metrics.fwhm_rad_per_ps,
            c.metrics.first_zero_rad_per_ps,
            std::f64::consts::TAU / t_r
        );
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub eta_numerical: Option<f64>,
    pub eta_analytical: Option<f64>,
    pub width_1e_ps: Option<f64>,
    pub classification: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub scenario: String,
    pub sha256: String,
    pub param: SweepParam,
    pub rows: Vec<SweepRow>,
    pub monotone_increasing: bool,
    pub interior_maxima: usize,
    pub failed_points: usize,
}

fn sweep_point(base: &Case, param: SweepParam, value: f64, solver: Solver) -> SweepRow {
    let mut case = base.clone();
    case.medium = match param {
        SweepParam::Gamma => case.medium.with_gamma(value),
        SweepParam::Length => case.medium.with_length(value),
    };
    let mut row = SweepRow {
        value,
        eta_numerical: None,
        eta_analytical: None,
        width_1e_ps: None,
        classification: None,
        error: None,
    };
    let mut errors = Vec::new();
    for kind in SolverKind::selected(solver) {
        match solve(&case, kind) {
            Ok(out) => {
                let m = out.summary.metrics;
                match kind {
                    SolverKind::Numerical => row.eta_numerical = Some(m.eta),
                    SolverKind::Analytical => row.eta_analytical = Some(m.eta),
                }
                if row.width_1e_ps.is_none() || kind == SolverKind::Numerical {
                    row.width_1e_ps = m.width_1e_ps;
                    row.classification = m
                        .shape
                        .map(|s| serde_json::to_value(s.classification).unwrap().as_str().unwrap().to_string());
                }
            }
            Err(e) => errors.push(format!("{}: {e}", kind.name())),
        }
    }
    if !errors.is_empty() {
        row.error = Some(errors.join("; "));
    }
    row
}

/// Counts strict interior local maxima of `values`.
pub fn interior_maxima(values: &[f64]) -> usize {
    values.windows(3).filter(|w| w[1] > w[0] && w[1] > w[2]).count()
}

pub fn monotone_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] >= w[0])
}

/// Runs `sweep` over `scenario` in parallel; failed points are recorded and
/// skipped. Writes `<name>_sweep_<param>.csv` and a JSON summary.
pub fn sweep(scenario: &Resolved, sweep: &ResolvedSweep, sink: &Sink) -> CliResult<SweepSummary> {
    let base = base_case(scenario)?;
    let rows: Vec<SweepRow> = sweep
        .values()
        .par_iter()
        .map(|&v| sweep_point(&base, sweep.param, v, scenario.solver))
        .collect();
    let primary: Vec<f64> = rows
        .iter()
        .filter_map(|r| r.eta_numerical.or(r.eta_analytical))
        .collect();
    let param_name = match sweep.param {
        SweepParam::Gamma => "gamma",
        SweepParam::Length => "length",
    };
    let summary = SweepSummary {
        scenario: scenario.name.clone(),
        sha256: scenario.hash(),
        param: sweep.param,
        monotone_increasing: monotone_increasing(&primary),
        interior_maxima: interior_maxima(&primary),
        failed_points: rows.iter().filter(|r| r.error.is_some()).count(),
        rows,
    };
    let unit = match sweep.param {
        SweepParam::Gamma => "gamma_sqrtps_per_mm",
        SweepParam::Length => "length_mm",
    };
    let fmt = |v: Option<f64>| v.map_or("nan".to_string(), |x| format!("{x:.8e}"));
    let mut body = format!("{unit},eta_numerical,eta_analytical,width_1e_ps,classification,status\n");
    for r in &summary.rows {
        body.push_str(&format!(
            "{:.8e},{},{},{},{},{}\n",
            r.value,
            fmt(r.eta_numerical),
            fmt(r.eta_analytical),
            fmt(r.width_1e_ps),
            r.classification.as_deref().unwrap_or("none"),
            r.error.as_deref().map_or("ok".to_string(), |e| format!("\"{}\"", e.replace('"', "'"))),
        ));
    }
    body.push_str(&format!(
        "# monotone_increasing={} interior_maxima={} failed_points={}\n",
        summary.monotone_increasing, summary.interior_maxima, summary.failed_points
    ));
    sink.csv_text(&format!("{}_sweep_{param_name}.csv", scenario.name), &body)?;
    sink.json(&format!("{}_sweep_{param_name}.json", scenario.name), &summary)?;
    if summary.failed_points == summary.rows.len() {
        return Err(CliError::Convergence(format!("every point of the {param_name} sweep failed")));
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maxima_and_monotonicity() {
        assert_eq!(interior_maxima(&[0.0, 1.0, 0.5, 0.7, 0.2]), 2);
        assert_eq!(interior_maxima(&[0.0, 1.0, 2.0]), 0);
        assert!(monotone_increasing(&[0.0, 0.0, 1.0]));
        assert!(!monotone_increasing(&[0.0, 1.0, 0.9]));
    }

    #[test]
    fn excerpt_keeps_grid_alignment() {
        let g = TimeGrid::new(0.0, 0.1, 101).unwrap();
        let env = Envelope64::from_fn(g, |t| Complex::new(t, 0.0)).unwrap();
        let ex = excerpt(&env, 2.05, 5.0, 3).unwrap();
        assert!((ex.grid().t_start() - 2.1).abs() < 1e-12);
        assert!((ex.grid().dt() - 0.3).abs() < 1e-12);
        for (k, v) in ex.samples().iter().enumerate() {
            assert!((v.re - ex.grid().time(k)).abs() < 1e-12);
        }
    }

    #[test]
    fn green_and_split_agree_on_a_short_medium() {
        let m = MediumSpec::new(5.0, 7.5, 7.5, 12.5, 0.8);
        let case = Case::new(m, GaussianPulseSpec::new(1.0, 20.0), GaussianPulseSpec::new(1.0, 20.0));
        let split = solve(&case, SolverKind::Numerical).unwrap();
        let green = solve(&case, SolverKind::Analytical).unwrap();
        assert!((split.summary.metrics.eta - green.summary.metrics.eta).abs() < 1e-3);
    }
}
