//! Scenario files: JSON descriptions of a medium, the input pulses and what
//! to compute, plus the compiled-in figure presets.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use slowsfg::analytical::gamma_crit;
use slowsfg::dispersion::{self, ProcessSpec, SellmeierModel, TaylorExpansion};
use slowsfg::{Chirp, GaussianPulseSpec, MediumSpec};

use crate::error::{CliError, CliResult};

/// Environment variable naming a directory that holds the Sellmeier data file.
pub const DATA_DIR_ENV: &str = "SFG_DATA_DIR";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// Wavelengths for Sellmeier-derived slownesses and phase-matching maps.
    #[serde(default)]
    pub process: Option<ProcessSection>,
    #[serde(default)]
    pub medium: Option<MediumSection>,
    #[serde(default = "PulseSection::standard")]
    pub pump: PulseSection,
    #[serde(default = "PulseSection::standard")]
    pub signal: PulseSection,
    #[serde(default)]
    pub gammas: Vec<GammaValue>,
    /// Extra medium lengths (mm); each gamma is run at each length.
    #[serde(default)]
    pub lengths: Vec<f64>,
    #[serde(default)]
    pub solver: Solver,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub phase_map: Option<PhaseMapSection>,
    #[serde(default)]
    pub outputs: Outputs,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessSection {
    pub lambda_s_nm: f64,
    pub lambda_p_nm: f64,
    #[serde(default)]
    pub temperature_c: Option<f64>,
    #[serde(default)]
    pub poling_period_um: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumSection {
    pub length_mm: f64,
    #[serde(default)]
    pub beta_p: Option<f64>,
    #[serde(default)]
    pub beta_s: Option<f64>,
    #[serde(default)]
    pub beta_r: Option<f64>,
    #[serde(default)]
    pub beta2_p: Option<f64>,
    #[serde(default)]
    pub beta2_s: Option<f64>,
    #[serde(default)]
    pub beta2_r: Option<f64>,
    /// Assignments applied in order, e.g. `"beta_s := beta_p"` or `"beta_r := 4 * beta_p"`.
    #[serde(default)]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    pub duration_ps: f64,
    pub center_ps: f64,
    /// Quadratic chirp rate (rad/ps^2).
    #[serde(default)]
    pub chirp_rate: Option<f64>,
}

impl PulseSection {
    fn standard() -> Self {
        Self {
            duration_ps: 1.0,
            center_ps: 20.0,
            chirp_rate: None,
        }
    }

    pub fn spec(&self) -> GaussianPulseSpec {
        let spec = GaussianPulseSpec::new(self.duration_ps, self.center_ps);
        match self.chirp_rate {
            Some(r) if r != 0.0 => spec.with_chirp(Chirp::quadratic(r)),
            _ => spec,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaValue {
    Value(f64),
    Named(NamedGamma),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedGamma {
    Crit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Analytical,
    #[default]
    Numerical,
    Both,
}

impl Solver {
    pub fn analytical(self) -> bool {
        matches!(self, Self::Analytical | Self::Both)
    }

    pub fn numerical(self) -> bool {
        matches!(self, Self::Numerical | Self::Both)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Split-step z steps; automatic when absent.
    #[serde(default)]
    pub n_z: Option<usize>,
    /// Include the quadratic dispersion terms in split-step runs.
    #[serde(default)]
    pub gdd: bool,
    /// Green-function quadrature step (ps); `min(T_p/20, T_r/200)` when absent.
    #[serde(default)]
    pub green_dt_ps: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Gamma,
    Length,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub param: SweepParam,
    pub from: f64,
    pub to: GammaValue,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseMapSection {
    pub length_mm: f64,
    #[serde(default)]
    pub ssgvm_override: bool,
    #[serde(default = "default_map_size")]
    pub rows: usize,
    #[serde(default = "default_map_size")]
    pub cols: usize,
    #[serde(default = "default_sfg_range")]
    pub sfg_nm: (f64, f64),
    #[serde(default = "default_signal_range")]
    pub signal_nm: (f64, f64),
}

fn default_map_size() -> usize {
    512
}

fn default_sfg_range() -> (f64, f64) {
    (573.0, 575.0)
}

fn default_signal_range() -> (f64, f64) {
    (1514.0, 1614.0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "yes")]
    pub temporal: bool,
    #[serde(default = "yes")]
    pub spectrum: bool,
    /// Also write the rectangular-window spectrum for comparison.
    #[serde(default)]
    pub rect_reference: bool,
    #[serde(default)]
    pub snapshots: Option<usize>,
}

fn yes() -> bool {
    true
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            temporal: true,
            spectrum: true,
            rect_reference: false,
            snapshots: None,
        }
    }
}

/// A scenario with every override applied and every named value resolved.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub name: String,
    pub description: String,
    /// Medium with `gamma = 0`; cases set it.
    pub medium: Option<MediumSpec>,
    pub process: Option<ProcessSpec>,
    pub temperature_c: Option<f64>,
    pub pump: PulseSection,
    pub signal: PulseSection,
    pub gammas: Vec<f64>,
    pub lengths: Vec<f64>,
    pub solver: Solver,
    pub grid: GridSection,
    pub sweep: Option<ResolvedSweep>,
    pub phase_map: Option<PhaseMapSection>,
    pub outputs: Outputs,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResolvedSweep {
    pub param: SweepParam,
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl ResolvedSweep {
    pub fn new(param: SweepParam, from: f64, to: f64, points: usize) -> CliResult<Self> {
        if points < 20 {
            return Err(CliError::BadInput(format!("a sweep needs at least 20 points, got {points}")));
        }
        if !(from.is_finite() && to.is_finite()) || from >= to {
            return Err(CliError::BadInput(format!("empty sweep range [{from}, {to}]")));
        }
        if param == SweepParam::Length && from <= 0.0 {
            return Err(CliError::BadInput("length sweep must start above zero".into()));
        }
        if param == SweepParam::Gamma && from < 0.0 {
            return Err(CliError::BadInput("gamma sweep must start at or above zero".into()));
        }
        Ok(Self { param, from, to, points })
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..=n)
            .map(|k| if k == n { self.to } else { self.from + (self.to - self.from) * k as f64 / n as f64 })
            .collect()
    }
}

impl Resolved {
    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("resolved scenario serializes");
        hex::encode(Sha256::digest(json))
    }

    pub fn medium(&self) -> CliResult<MediumSpec> {
        self.medium
            .ok_or_else(|| CliError::BadInput(format!("scenario {} has no medium section", self.name)))
    }

    pub fn pump_spec(&self) -> GaussianPulseSpec {
        self.pump.spec()
    }

    pub fn signal_spec(&self) -> GaussianPulseSpec {
        self.signal.spec()
    }
}

pub fn data_dir() -> Option<PathBuf> {
    std::env::var_os(DATA_DIR_ENV).map(PathBuf::from)
}

pub fn load_model(temperature_c: Option<f64>) -> CliResult<SellmeierModel> {
    let model = SellmeierModel::lithium_niobate(data_dir().as_deref())?;
    Ok(match temperature_c {
        Some(t) => model.at_temperature(t),
        None => model,
    })
}

pub fn load(path: &Path) -> CliResult<Resolved> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text)?.resolve()
}

pub fn parse(text: &str) -> CliResult<ScenarioSpec> {
    serde_json::from_str(text).map_err(|e| CliError::BadInput(format!("scenario: {e}")))
}

impl ScenarioSpec {
    pub fn resolve(&self) -> CliResult<Resolved> {
        let process = self.process.as_ref().map(|p| {
            let spec = ProcessSpec::new(p.lambda_s_nm, p.lambda_p_nm);
            match p.poling_period_um {
                Some(l) => spec.with_poling_period(l),
                None => spec,
            }
        });
        let temperature_c = self.process.as_ref().and_then(|p| p.temperature_c);
        let medium = match &self.medium {
            Some(m) => Some(resolve_medium(m, process.as_ref(), temperature_c)?),
            None => None,
        };
        if medium.is_none() && self.phase_map.is_none() {
            return Err(CliError::BadInput(format!("scenario {} has neither medium nor phase_map", self.name)));
        }
        if self.phase_map.is_some() && process.is_none() {
            return Err(CliError::BadInput("phase_map needs a process section".into()));
        }
        for p in [&self.pump, &self.signal] {
            if !(p.duration_ps > 0.0 && p.center_ps.is_finite()) {
                return Err(CliError::BadInput(format!("invalid pulse {p:?}")));
            }
        }
        let crit = || -> CliResult<f64> {
            let m = medium.ok_or_else(|| CliError::BadInput("\"crit\" needs a medium".into()))?;
            Ok(gamma_crit(&m)?)
        };
        let gammas = self
            .gammas
            .iter()
            .map(|g| match g {
                GammaValue::Value(v) if *v >= 0.0 && v.is_finite() => Ok(*v),
                GammaValue::Value(v) => Err(CliError::BadInput(format!("invalid gamma {v}"))),
                GammaValue::Named(NamedGamma::Crit) => crit(),
            })
            .collect::<CliResult<Vec<_>>>()?;
        if self.lengths.iter().any(|l| !(*l > 0.0)) {
            return Err(CliError::BadInput("lengths must be positive".into()));
        }
        let sweep = match &self.sweep {
            Some(s) => {
                let to = match s.to {
                    GammaValue::Value(v) => v,
                    GammaValue::Named(NamedGamma::Crit) => crit()?,
                };
                Some(ResolvedSweep::new(s.param, s.from, to, s.points)?)
            }
            None => None,
        };
        Ok(Resolved {
            name: self.name.clone(),
            description: self.description.clone(),
            medium,
            process,
            temperature_c,
            pump: self.pump.clone(),
            signal: self.signal.clone(),
            gammas,
            lengths: self.lengths.clone(),
            solver: self.solver,
            grid: self.grid.clone(),
            sweep,
            phase_map: self.phase_map.clone(),
            outputs: self.outputs.clone(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    BetaP,
    BetaS,
    BetaR,
    Beta2P,
    Beta2S,
    Beta2R,
}

impl Slot {
    fn parse(s: &str) -> CliResult<Self> {
        Ok(match s.trim() {
            "beta_p" => Self::BetaP,
            "beta_s" => Self::BetaS,
            "beta_r" => Self::BetaR,
            "beta2_p" => Self::Beta2P,
            "beta2_s" => Self::Beta2S,
            "beta2_r" => Self::Beta2R,
            other => return Err(CliError::BadInput(format!("unknown medium parameter {other:?}"))),
        })
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Parses `target := expr` where `expr` is a number, a parameter name, or
/// `number * name`.
fn apply_override(values: &mut [Option<f64>; 6], text: &str) -> CliResult<()> {
    let bad = || CliError::BadInput(format!("malformed override {text:?}"));
    let (lhs, rhs) = text.split_once(":=").ok_or_else(bad)?;
    let target = Slot::parse(lhs)?;
    let rhs = rhs.trim();
    let value = if let Ok(v) = rhs.parse::<f64>() {
        v
    } else {
        let (factor, name) = match rhs.split_once(['*', '×']) {
            Some((a, b)) => (a.trim().parse::<f64>().map_err(|_| bad())?, b),
            None => (1.0, rhs),
        };
        let source = Slot::parse(name)?;
        let v = values[source.index()]
            .ok_or_else(|| CliError::BadInput(format!("override {text:?} refers to an unset parameter")))?;
        factor * v
    };
    values[target.index()] = Some(value);
    Ok(())
}

fn resolve_medium(
    section: &MediumSection,
    process: Option<&ProcessSpec>,
    temperature_c: Option<f64>,
) -> CliResult<MediumSpec> {
    let mut values = [None; 6];
    if let Some(p) = process {
        let model = load_model(temperature_c)?;
        let t = TaylorExpansion::from_model(&model, p)?;
        values = [
            Some(t.beta_p),
            Some(t.beta_s),
            Some(t.beta_r),
            Some(t.beta2_p),
            Some(t.beta2_s),
            Some(t.beta2_r),
        ];
        // Make sure the process is phase-matchable at all.
        if p.poling_period_um.is_none() {
            dispersion::poling_period(&model, p)?;
        }
    }
    let explicit = [
        section.beta_p,
        section.beta_s,
        section.beta_r,
        section.beta2_p,
        section.beta2_s,
        section.beta2_r,
    ];
    for (v, e) in values.iter_mut().zip(explicit) {
        if e.is_some() {
            *v = e;
        }
    }
    for o in &section.overrides {
        apply_override(&mut values, o)?;
    }
    let need = |slot: Slot, name: &str| {
        values[slot.index()].ok_or_else(|| CliError::BadInput(format!("medium parameter {name} is not set")))
    };
    let m = MediumSpec::new(
        section.length_mm,
        need(Slot::BetaP, "beta_p")?,
        need(Slot::BetaS, "beta_s")?,
        need(Slot::BetaR, "beta_r")?,
        0.0,
    )
    .with_gdd(
        values[Slot::Beta2P.index()].unwrap_or(0.0),
        values[Slot::Beta2S.index()].unwrap_or(0.0),
        values[Slot::Beta2R.index()].unwrap_or(0.0),
    );
    m.validate()?;
    Ok(m)
}

/// Figure presets shipped with the binary.
pub const PRESETS: [(&str, &str); 10] = [
    ("fig2a", include_str!("../scenarios/fig2a.json")),
    ("fig2b", include_str!("../scenarios/fig2b.json")),
    ("fig2c", include_str!("../scenarios/fig2c.json")),
    ("fig3a", include_str!("../scenarios/fig3a.json")),
    ("fig3b", include_str!("../scenarios/fig3b.json")),
    ("fig4", include_str!("../scenarios/fig4.json")),
    ("fig5", include_str!("../scenarios/fig5.json")),
    ("fig6", include_str!("../scenarios/fig6.json")),
    ("fig7", include_str!("../scenarios/fig7.json")),
    ("fig8", include_str!("../scenarios/fig8.json")),
];

pub fn preset(id: &str) -> CliResult<Resolved> {
    let text = PRESETS
        .iter()
        .find(|(name, _)| *name == id)
        .map(|(_, text)| *text)
        .ok_or_else(|| {
            let known: Vec<_> = PRESETS.iter().map(|p| p.0).collect();
            CliError::BadInput(format!("unknown figure {id:?}; known: {}", known.join(", ")))
        })?;
    parse(text)?.resolve()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn explicit(overrides: &[&str]) -> MediumSection {
        MediumSection {
            length_mm: 40.0,
            beta_p: Some(7.534),
            beta_s: Some(8.0),
            beta_r: None,
            beta2_p: None,
            beta2_s: None,
            beta2_r: None,
            overrides: overrides.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn overrides_apply_in_order() {
        let m = resolve_medium(&explicit(&["beta_s := beta_p", "beta_r := 4 * beta_p"]), None, None).unwrap();
        assert_eq!(m.beta_s, 7.534);
        assert!((m.beta_r - 30.136).abs() < 1e-12);
        let m = resolve_medium(&explicit(&["beta_r := 60.2"]), None, None).unwrap();
        assert_eq!(m.beta_r, 60.2);
    }

    #[test]
    fn dangling_parameters_are_rejected() {
        assert!(resolve_medium(&explicit(&[]), None, None).is_err());
        assert!(resolve_medium(&explicit(&["beta_r := 2 * beta2_r"]), None, None).is_err());
        assert!(resolve_medium(&explicit(&["beta_x := 1"]), None, None).is_err());
        assert!(resolve_medium(&explicit(&["beta_r = 1"]), None, None).is_err());
    }

    #[test]
    fn sellmeier_values_fill_missing_slownesses() {
        let section = MediumSection {
            beta_p: None,
            beta_s: None,
            ..explicit(&["beta_s := beta_p"])
        };
        let p = ProcessSpec::new(1560.0, 907.0);
        let m = resolve_medium(&section, Some(&p), None).unwrap();
        assert!((m.beta_p - 7.534).abs() / 7.534 < 0.02);
        assert_eq!(m.beta_s, m.beta_p);
        assert!(m.beta2_r > 0.0);
    }

    #[test]
    fn every_preset_resolves() {
        for (id, _) in PRESETS {
            let r = preset(id).unwrap_or_else(|e| panic!("{id}: {e}"));
            assert!(r.medium.is_some() || r.phase_map.is_some(), "{id}");
            assert_eq!(r.hash().len(), 64);
        }
        assert!(preset("fig9").is_err());
    }

    #[test]
    fn sweep_validation() {
        assert!(ResolvedSweep::new(SweepParam::Gamma, 0.0, 1.0, 19).is_err());
        assert!(ResolvedSweep::new(SweepParam::Gamma, 1.0, 1.0, 20).is_err());
        let s = ResolvedSweep::new(SweepParam::Gamma, 0.0, 1.9, 20).unwrap();
        let v = s.values();
        assert_eq!((v[0], v[19], v.len()), (0.0, 1.9, 20));
    }

    #[test]
    fn hash_changes_with_content() {
        let a = preset("fig6").unwrap();
        let mut b = a.clone();
        b.gammas.push(0.5);
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash(), preset("fig6").unwrap().hash());
    }
}
