//! Two-dimensional phase-matching function `sinc(dk L / 2)` over an SFG band
//! (rows) and a signal band (columns).

use std::io::{Read, Write};

use rayon::prelude::*;

use super::{delta_k, omega_from_wavelength_nm, poling_period, ProcessSpec, SellmeierModel, TaylorExpansion};
use crate::error::{Result, SfgError};

pub const MAP_MAGIC: [u8; 4] = *b"PMAP";
const MAP_VERSION: u16 = 1;
const FLAG_SSGVM: u16 = 1;

/// Axis ranges in angular frequency (rad/ps) and sample counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapAxes {
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_tilde_min: f64,
    pub omega_tilde_max: f64,
    pub rows: usize,
    pub cols: usize,
}

impl MapAxes {
    /// Axes from wavelength ranges (nm); order of the bounds does not matter.
    pub fn from_wavelengths_nm(sfg_nm: (f64, f64), signal_nm: (f64, f64), rows: usize, cols: usize) -> Self {
        let (a, b) = (omega_from_wavelength_nm(sfg_nm.0), omega_from_wavelength_nm(sfg_nm.1));
        let (c, d) = (omega_from_wavelength_nm(signal_nm.0), omega_from_wavelength_nm(signal_nm.1));
        Self {
            omega_min: a.min(b),
            omega_max: a.max(b),
            omega_tilde_min: c.min(d),
            omega_tilde_max: c.max(d),
            rows,
            cols,
        }
    }

    /// 512 x 512 over 573-575 nm (SFG) and 1514-1614 nm (signal).
    pub fn default_nv() -> Self {
        Self::from_wavelengths_nm((573.0, 575.0), (1514.0, 1614.0), 512, 512)
    }

    fn validate(&self) -> Result<()> {
        if self.rows < 2 || self.cols < 2 {
            return Err(SfgError::InvalidGrid("phase map needs at least 2 x 2 samples".into()));
        }
        if !(self.omega_max > self.omega_min && self.omega_tilde_max > self.omega_tilde_min) {
            return Err(SfgError::InvalidGrid("phase map axes must have positive extent".into()));
        }
        Ok(())
    }

    pub fn omega(&self, row: usize) -> f64 {
        self.omega_min + (self.omega_max - self.omega_min) * row as f64 / (self.rows - 1) as f64
    }

    pub fn omega_tilde(&self, col: usize) -> f64 {
        self.omega_tilde_min + (self.omega_tilde_max - self.omega_tilde_min) * col as f64 / (self.cols - 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMatchMap {
    pub axes: MapAxes,
    pub ssgvm_override: bool,
    /// Row-major `sinc(dk L / 2)`.
    pub values: Vec<f64>,
    /// Row-major `dk` (rad/mm); empty for maps read back from the binary format.
    pub mismatch: Vec<f64>,
}

/// Unnormalized `sin(x) / x`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Phase-matching map for a medium of length `length` (mm).
///
/// Uses the process's poling period, or solves for it when absent. With
/// `ssgvm_override` the mismatch is the second-order expansion with the signal
/// slowness set equal to the pump's.
pub fn phase_match_map(
    model: &SellmeierModel,
    process: &ProcessSpec,
    length: f64,
    ssgvm_override: bool,
    axes: MapAxes,
) -> Result<PhaseMatchMap> {
    axes.validate()?;
    if !(length > 0.0) {
        return Err(SfgError::DegenerateMedium("length must be positive".into()));
    }
    let period = match process.poling_period_um {
        Some(p) if p > 0.0 => p,
        Some(p) => return Err(SfgError::InvalidInput(format!("poling period must be positive, got {p}"))),
        None => poling_period(model, process)?,
    };
    // Corner checks so that an out-of-range axis fails before any work.
    for (w, wt) in [
        (axes.omega_min, axes.omega_tilde_min),
        (axes.omega_min, axes.omega_tilde_max),
        (axes.omega_max, axes.omega_tilde_min),
        (axes.omega_max, axes.omega_tilde_max),
    ] {
        delta_k(model, w, wt, period)?;
    }
    let taylor = if ssgvm_override {
        Some(TaylorExpansion::from_model(model, process)?.with_matched_signal())
    } else {
        None
    };

    let rows: Vec<Result<Vec<f64>>> = (0..axes.rows)
        .into_par_iter()
        .map(|i| {
            let w = axes.omega(i);
            (0..axes.cols)
                .map(|j| {
                    let wt = axes.omega_tilde(j);
                    match &taylor {
                        Some(t) => Ok(t.delta_k(w, wt)),
                        None => delta_k(model, w, wt, period),
                    }
                })
                .collect()
        })
        .collect();
    let mut mismatch = Vec::with_capacity(axes.rows * axes.cols);
    for row in rows {
        mismatch.extend(row?);
    }
    let values = mismatch.iter().map(|dk| sinc(0.5 * dk * length)).collect();
    Ok(PhaseMatchMap {
        axes,
        ssgvm_override,
        values,
        mismatch,
    })
}

impl PhaseMatchMap {
    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.axes.cols + col]
    }

    /// Least-squares slope `d omega / d omega~` of the `dk = 0` contour, from
    /// the sign change of `dk` along each column.
    pub fn zero_contour_slope(&self) -> Result<f64> {
        if self.mismatch.is_empty() {
            return Err(SfgError::InvalidInput("map carries no mismatch grid".into()));
        }
        let (rows, cols) = (self.axes.rows, self.axes.cols);
        let mut pts = Vec::new();
        for j in 0..cols {
            for i in 0..rows - 1 {
                let a = self.mismatch[i * cols + j];
                let b = self.mismatch[(i + 1) * cols + j];
                if a == 0.0 || a.signum() != b.signum() {
                    let f = if a == b { 0.0 } else { a / (a - b) };
                    let w = self.axes.omega(i) + f * (self.axes.omega(i + 1) - self.axes.omega(i));
                    pts.push((self.axes.omega_tilde(j), w));
                    break;
                }
            }
        }
        if pts.len() < 2 {
            return Err(SfgError::InvalidInput("zero contour crosses fewer than two columns".into()));
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Ok(sxy / sxx)
    }

    /// Rows `omega,omega_tilde,value`.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "omega_rad_per_ps,omega_tilde_rad_per_ps,sinc")?;
        for i in 0..self.axes.rows {
            let w = self.axes.omega(i);
            for j in 0..self.axes.cols {
                writeln!(out, "{:.8e},{:.8e},{:.8e}", w, self.axes.omega_tilde(j), self.value(i, j))?;
            }
        }
        Ok(())
    }

    /// 16-byte header (magic, version, flags, rows, cols as little-endian
    /// u16/u32), four f64 axis bounds, then row-major f32 values.
    pub fn write_binary(&self, mut out: impl Write) -> std::io::Result<()> {
        out.write_all(&MAP_MAGIC)?;
        out.write_all(&MAP_VERSION.to_le_bytes())?;
        let flags = if self.ssgvm_override { FLAG_SSGVM } else { 0 };
        out.write_all(&flags.to_le_bytes())?;
        out.write_all(&(self.axes.rows as u32).to_le_bytes())?;
        out.write_all(&(self.axes.cols as u32).to_le_bytes())?;
        for b in [
            self.axes.omega_min,
            self.axes.omega_max,
            self.axes.omega_tilde_min,
            self.axes.omega_tilde_max,
        ] {
            out.write_all(&b.to_le_bytes())?;
        }
        for &v in &self.values {
            out.write_all(&(v as f32).to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(mut input: impl Read) -> Result<Self> {
        let io = |e: std::io::Error| SfgError::Data(e.to_string());
        let mut header = [0u8; 16];
        input.read_exact(&mut header).map_err(io)?;
        if header[..4] != MAP_MAGIC {
            return Err(SfgError::Data("not a phase map file".into()));
        }
        let version = u16::from_le_bytes([header[4], header[5]]);
        if version != MAP_VERSION {
            return Err(SfgError::Data(format!("unsupported phase map version {version}")));
        }
        let flags = u16::from_le_bytes([header[6], header[7]]);
        let rows = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
        let cols = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
        let mut bounds = [0f64; 4];
        for b in &mut bounds {
            let mut buf = [0u8; 8];
            input.read_exact(&mut buf).map_err(io)?;
            *b = f64::from_le_bytes(buf);
        }
        let mut raw = vec![0u8; rows * cols * 4];
        input.read_exact(&mut raw).map_err(io)?;
        let values = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();
        let axes = MapAxes {
            omega_min: bounds[0],
            omega_max: bounds[1],
            omega_tilde_min: bounds[2],
            omega_tilde_max: bounds[3],
            rows,
            cols,
        };
        axes.validate()?;
        Ok(Self {
            axes,
            ssgvm_override: flags & FLAG_SSGVM != 0,
            values,
            mismatch: Vec::new(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::acceptance_width;

    fn model() -> SellmeierModel {
        SellmeierModel::lithium_niobate(None).unwrap()
    }

    fn small_axes() -> MapAxes {
        MapAxes {
            rows: 64,
            cols: 48,
            ..MapAxes::default_nv()
        }
    }

    #[test]
    fn sinc_range_and_parity() {
        let mut lo: f64 = 1.0;
        for i in -20000..=20000 {
            let x = i as f64 * 1e-3;
            assert_eq!(sinc(x), sinc(-x));
            lo = lo.min(sinc(x));
        }
        assert!((lo + 0.2172).abs() < 1e-4);
        assert_eq!(sinc(0.0), 1.0);
    }

    #[test]
    fn unity_at_qpm_center() {
        let m = model();
        let p = ProcessSpec::new(1560.0, 907.0);
        let axes = MapAxes {
            omega_min: p.omega_r() - 1.0,
            omega_max: p.omega_r() + 1.0,
            omega_tilde_min: p.omega_s() - 1.0,
            omega_tilde_max: p.omega_s() + 1.0,
            rows: 3,
            cols: 3,
        };
        let map = phase_match_map(&m, &p, 27.0, false, axes).unwrap();
        assert!((map.value(1, 1) - 1.0).abs() < 1e-12);
        assert!(map.values.iter().all(|v| (-0.2173..=1.0).contains(v)));
    }

    #[test]
    fn first_zero_along_sfg_axis() {
        // At the signal carrier, sinc vanishes where dk L / 2 = pi, i.e. two
        // acceptance widths from the SFG carrier.
        let m = model();
        let p = ProcessSpec::new(1560.0, 907.0);
        let t = TaylorExpansion::from_model(&m, &p).unwrap();
        let l = 1.5;
        let dr = acceptance_width(t.beta_r, t.beta_p, l).unwrap();
        let axes = MapAxes {
            omega_min: p.omega_r() - 4.0 * dr,
            omega_max: p.omega_r() + 4.0 * dr,
            omega_tilde_min: p.omega_s(),
            omega_tilde_max: p.omega_s() + 1e-6,
            rows: 4001,
            cols: 2,
        };
        let map = phase_match_map(&m, &p, l, false, axes).unwrap();
        let col: Vec<f64> = (0..axes.rows).map(|i| map.value(i, 0)).collect();
        let centre = 2000;
        let up = (centre..axes.rows).find(|&i| col[i] <= 0.0).unwrap();
        let down = (0..=centre).rev().find(|&i| col[i] <= 0.0).unwrap();
        let half = 0.5 * (axes.omega(up) - axes.omega(down));
        assert!((half / (2.0 * dr) - 1.0).abs() < 0.01, "half distance {half}, 2 dr {}", 2.0 * dr);
    }

    #[test]
    fn bulk_slope_follows_slowness_law() {
        let m = model();
        let p = ProcessSpec::new(1560.0, 907.0);
        let t = TaylorExpansion::from_model(&m, &p).unwrap();
        let map = phase_match_map(&m, &p, 27.0, false, small_axes()).unwrap();
        let slope = map.zero_contour_slope().unwrap();
        assert!((slope - t.contour_slope()).abs() < 0.02, "{slope} vs {}", t.contour_slope());
    }

    #[test]
    fn override_makes_contour_flat() {
        let m = model();
        let p = ProcessSpec::new(1560.0, 907.0);
        let map = phase_match_map(&m, &p, 27.0, true, small_axes()).unwrap();
        let slope = map.zero_contour_slope().unwrap();
        // Only the quadratic terms tilt the line, by far less than the bulk slope.
        assert!(slope.abs() < 5e-3, "{slope}");
    }

    #[test]
    fn binary_round_trip() {
        let m = model();
        let p = ProcessSpec::new(1560.0, 907.0);
        let map = phase_match_map(&m, &p, 1.5, true, small_axes()).unwrap();
        let mut buf = Vec::new();
        map.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 32 + 4 * 64 * 48);
        let back = PhaseMatchMap::read_binary(buf.as_slice()).unwrap();
        assert_eq!(back.axes, map.axes);
        assert!(back.ssgvm_override);
        for (a, b) in back.values.iter().zip(&map.values) {
            assert!((a - b).abs() < 1e-7);
        }
        assert!(PhaseMatchMap::read_binary(&b"XXXX"[..]).is_err());
    }

    #[test]
    fn csv_has_one_row_per_cell() {
        let m = model();
        let p = ProcessSpec::new(1560.0, 907.0);
        let axes = MapAxes {
            rows: 4,
            cols: 5,
            ..MapAxes::default_nv()
        };
        let map = phase_match_map(&m, &p, 1.5, false, axes).unwrap();
        let mut buf = Vec::new();
        map.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 21);
    }

    #[test]
    fn out_of_range_axes_rejected() {
        let m = model();
        let p = ProcessSpec::new(1560.0, 907.0);
        let axes = MapAxes::from_wavelengths_nm((300.0, 301.0), (1514.0, 1614.0), 4, 4);
        assert!(matches!(
            phase_match_map(&m, &p, 1.5, false, axes),
            Err(SfgError::OutOfRange { .. })
        ));
    }
}
