//! Phase-matching maps and the dispersion numbers behind them.

use serde::Serialize;
use slowsfg::dispersion::{
    acceptance_width, phase_match_map, poling_period, MapAxes, ProcessSpec, TaylorExpansion,
};

use crate::error::{CliError, CliResult};
use crate::output::Sink;
use crate::scenario::{load_model, PhaseMapSection};

#[derive(Debug, Clone, Serialize)]
pub struct PhaseMatchSummary {
    pub name: String,
    pub lambda_s_nm: f64,
    pub lambda_p_nm: f64,
    pub lambda_r_nm: f64,
    pub temperature_c: f64,
    pub poling_period_um: f64,
    pub beta_p: f64,
    pub beta_s: f64,
    pub beta_r: f64,
    pub beta2_p: f64,
    pub beta2_s: f64,
    pub beta2_r: f64,
    pub length_mm: f64,
    pub ssgvm_override: bool,
    /// `(beta_s - beta_p) / (beta_r - beta_p)` with the override applied.
    pub contour_slope_linear: f64,
    /// Least-squares slope of the `dk = 0` contour found on the map.
    pub contour_slope_map: Option<f64>,
    /// Distance from the centre to the first zero along the SFG axis (rad/ps).
    pub acceptance_half_width_rad_per_ps: f64,
    pub rows: usize,
    pub cols: usize,
    pub max_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum MapFormat {
    #[default]
    Csv,
    Binary,
    Both,
}

pub fn phasematch(
    name: &str,
    process: &ProcessSpec,
    temperature_c: Option<f64>,
    section: &PhaseMapSection,
    format: MapFormat,
    sink: &Sink,
) -> CliResult<PhaseMatchSummary> {
    if !(section.length_mm > 0.0) {
        return Err(CliError::BadInput(format!("length must be positive, got {}", section.length_mm)));
    }
    let model = load_model(temperature_c)?;
    let period = match process.poling_period_um {
        Some(p) => p,
        None => poling_period(&model, process)?,
    };
    let process = process.with_poling_period(period);
    let mut taylor = TaylorExpansion::from_model(&model, &process)?;
    if section.ssgvm_override {
        taylor = taylor.with_matched_signal();
    }
    let axes = MapAxes::from_wavelengths_nm(section.sfg_nm, section.signal_nm, section.rows, section.cols);
    let map = phase_match_map(&model, &process, section.length_mm, section.ssgvm_override, axes)?;
    let slope = map.zero_contour_slope().ok();

    if matches!(format, MapFormat::Csv | MapFormat::Both) {
        let mut body = Vec::new();
        map.write_csv(&mut body).map_err(|e| CliError::io(sink.dir(), e))?;
        sink.csv_text(&format!("{name}_map.csv"), &String::from_utf8(body).expect("ascii csv"))?;
    }
    if matches!(format, MapFormat::Binary | MapFormat::Both) {
        let mut body = Vec::new();
        map.write_binary(&mut body).map_err(|e| CliError::io(sink.dir(), e))?;
        sink.write(&format!("{name}_map.bin"), &body)?;
    }
    let summary = PhaseMatchSummary {
        name: name.to_string(),
        lambda_s_nm: process.lambda_s_nm,
        lambda_p_nm: process.lambda_p_nm,
        lambda_r_nm: process.lambda_r_nm(),
        temperature_c: model.temperature_c,
        poling_period_um: period,
        beta_p: taylor.beta_p,
        beta_s: taylor.beta_s,
        beta_r: taylor.beta_r,
        beta2_p: taylor.beta2_p,
        beta2_s: taylor.beta2_s,
        beta2_r: taylor.beta2_r,
        length_mm: section.length_mm,
        ssgvm_override: section.ssgvm_override,
        contour_slope_linear: taylor.contour_slope(),
        contour_slope_map: slope,
        acceptance_half_width_rad_per_ps: acceptance_width(taylor.beta_r, taylor.beta_p, section.length_mm)?,
        rows: section.rows,
        cols: section.cols,
        max_value: map.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    };
    sink.json(&format!("{name}_summary.json"), &summary)?;
    Ok(summary)
}
