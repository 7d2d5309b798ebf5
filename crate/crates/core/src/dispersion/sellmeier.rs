//! Temperature-dependent Sellmeier model loaded from a key-value data file.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Result, SfgError};

/// Data file shipped with the crate.
pub const BUNDLED_LINBO3: &str = include_str!("../../data/congruent_linbo3_ne.toml");

/// File name of the bundled coefficient set, for lookups in a data directory.
pub const LINBO3_FILE_NAME: &str = "congruent_linbo3_ne.toml";

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct SellmeierCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    pub a6: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct Validity {
    pub wavelength_min_um: f64,
    pub wavelength_max_um: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct TemperatureLaw {
    pub reference_c: f64,
    pub offset_c: f64,
}

#[derive(Debug, Clone, Deserialize)]
struct SellmeierFile {
    name: String,
    default_temperature_c: f64,
    validity: Validity,
    temperature: TemperatureLaw,
    coefficients: SellmeierCoefficients,
}

/// Extraordinary-index Sellmeier model at a fixed temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct SellmeierModel {
    pub name: String,
    pub coefficients: SellmeierCoefficients,
    pub validity: Validity,
    pub temperature_law: TemperatureLaw,
    /// Crystal temperature (deg C).
    pub temperature_c: f64,
}

impl SellmeierModel {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: SellmeierFile = toml::from_str(text).map_err(|e| SfgError::Data(e.to_string()))?;
        let v = file.validity;
        if !(v.wavelength_min_um > 0.0 && v.wavelength_max_um > v.wavelength_min_um) {
            return Err(SfgError::Data("invalid wavelength validity range".into()));
        }
        Ok(Self {
            name: file.name,
            coefficients: file.coefficients,
            validity: file.validity,
            temperature_law: file.temperature,
            temperature_c: file.default_temperature_c,
        })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| SfgError::Data(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Congruent lithium niobate from `dir` if given, else the bundled copy.
    pub fn lithium_niobate(dir: Option<&Path>) -> Result<Self> {
        match dir {
            Some(dir) => Self::from_file(dir.join(LINBO3_FILE_NAME)),
            None => Self::from_toml_str(BUNDLED_LINBO3),
        }
    }

    pub fn at_temperature(mut self, temperature_c: f64) -> Self {
        self.temperature_c = temperature_c;
        self
    }

    fn temperature_factor(&self) -> f64 {
        let t = self.temperature_c;
        (t - self.temperature_law.reference_c) * (t + self.temperature_law.offset_c)
    }

    pub fn check_wavelength(&self, wavelength_um: f64) -> Result<()> {
        let v = &self.validity;
        if wavelength_um.is_finite() && wavelength_um >= v.wavelength_min_um && wavelength_um <= v.wavelength_max_um {
            Ok(())
        } else {
            Err(SfgError::OutOfRange {
                wavelength_um,
                min_um: v.wavelength_min_um,
                max_um: v.wavelength_max_um,
            })
        }
    }

    /// Refractive index at vacuum wavelength `wavelength_um` (um).
    pub fn refractive_index(&self, wavelength_um: f64) -> Result<f64> {
        self.check_wavelength(wavelength_um)?;
        Ok(self.index_unchecked(wavelength_um))
    }

    pub(crate) fn index_unchecked(&self, wavelength_um: f64) -> f64 {
        let c = &self.coefficients;
        let f = self.temperature_factor();
        let l2 = wavelength_um * wavelength_um;
        let pole1 = c.a3 + c.b3 * f;
        let n2 = c.a1 + c.b1 * f + (c.a2 + c.b2 * f) / (l2 - pole1 * pole1) + (c.a4 + c.b4 * f) / (l2 - c.a5 * c.a5)
            - c.a6 * l2;
        n2.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> SellmeierModel {
        SellmeierModel::lithium_niobate(None).unwrap()
    }

    #[test]
    fn bundled_file_parses() {
        let m = model();
        assert_eq!(m.temperature_c, 300.0);
        assert_eq!(m.coefficients.a4, 100.0);
        assert_eq!(m.validity.wavelength_min_um, 0.4);
    }

    #[test]
    fn index_exceeds_one_over_working_band() {
        let m = model();
        for i in 0..=160 {
            let lambda = 0.4 + 0.01 * i as f64;
            let n = m.refractive_index(lambda).unwrap();
            assert!(n > 1.0 && n < 3.0, "n({lambda}) = {n}");
        }
    }

    #[test]
    fn out_of_range_rejected() {
        let m = model();
        assert!(matches!(m.refractive_index(0.3), Err(SfgError::OutOfRange { .. })));
        assert!(matches!(m.refractive_index(5.5), Err(SfgError::OutOfRange { .. })));
        assert!(m.refractive_index(f64::NAN).is_err());
    }

    #[test]
    fn analytic_derivative_matches_finite_difference() {
        // Closed-form d(n^2)/d(lambda) of the Sellmeier form as the oracle.
        let m = model();
        let c = m.coefficients;
        let f = m.temperature_factor();
        for &lambda in &[0.574, 0.907, 1.2, 1.56, 2.0] {
            let l2: f64 = lambda * lambda;
            let p1 = c.a3 + c.b3 * f;
            let dn2 = -2.0 * lambda * (c.a2 + c.b2 * f) / (l2 - p1 * p1).powi(2)
                - 2.0 * lambda * (c.a4 + c.b4 * f) / (l2 - c.a5 * c.a5).powi(2)
                - 2.0 * c.a6 * lambda;
            let n = m.refractive_index(lambda).unwrap();
            let analytic = dn2 / (2.0 * n);
            let h = 1e-5;
            let fd = (m.refractive_index(lambda + h).unwrap() - m.refractive_index(lambda - h).unwrap()) / (2.0 * h);
            assert!(((fd - analytic) / analytic).abs() < 1e-6, "lambda {lambda}: {fd} vs {analytic}");
        }
    }

    #[test]
    fn malformed_file_is_a_data_error() {
        assert!(matches!(SellmeierModel::from_toml_str("name = 3"), Err(SfgError::Data(_))));
        let missing = SellmeierModel::lithium_niobate(Some(Path::new("/nonexistent")));
        assert!(matches!(missing, Err(SfgError::Data(_))));
    }
}
