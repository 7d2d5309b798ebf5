use crate::error::{Result, SfgError};
use crate::scalar::Real;

/// Propagation constants of the three interacting fields in a medium of
/// length `length` (mm).
///
/// `beta_*` are group slownesses (ps/mm), `beta2_*` half group-delay
/// dispersions (ps^2/mm) and `gamma` the signal-SFG coupling (ps^(1/2)/mm).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MediumSpec<T = f64> {
    pub length: T,
    pub beta_p: T,
    pub beta_s: T,
    pub beta_r: T,
    pub beta2_p: T,
    pub beta2_s: T,
    pub beta2_r: T,
    pub gamma: T,
}

impl<T: Real> MediumSpec<T> {
    /// Dispersionless medium.
    pub fn new(length: T, beta_p: T, beta_s: T, beta_r: T, gamma: T) -> Self {
        Self {
            length,
            beta_p,
            beta_s,
            beta_r,
            beta2_p: T::zero(),
            beta2_s: T::zero(),
            beta2_r: T::zero(),
            gamma,
        }
    }

    pub fn with_gamma(self, gamma: T) -> Self {
        Self { gamma, ..self }
    }

    pub fn with_length(self, length: T) -> Self {
        Self { length, ..self }
    }

    pub fn with_gdd(self, beta2_p: T, beta2_s: T, beta2_r: T) -> Self {
        Self {
            beta2_p,
            beta2_s,
            beta2_r,
            ..self
        }
    }

    pub fn without_gdd(self) -> Self {
        self.with_gdd(T::zero(), T::zero(), T::zero())
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.length,
            self.beta_p,
            self.beta_s,
            self.beta_r,
            self.beta2_p,
            self.beta2_s,
            self.beta2_r,
            self.gamma,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(SfgError::InvalidInput("medium parameters must be finite".into()));
        }
        if !(self.length > T::zero()) {
            return Err(SfgError::DegenerateMedium(format!("length must be positive, got {}", self.length)));
        }
        if [self.beta_p, self.beta_s, self.beta_r].iter().any(|b| !(*b > T::zero())) {
            return Err(SfgError::DegenerateMedium("group slownesses must be positive".into()));
        }
        Ok(())
    }

    /// Additional checks for the single-sideband closed forms: the SFG must be
    /// slower than the signal.
    pub fn validate_sfg_window(&self) -> Result<()> {
        self.validate()?;
        if !(self.beta_r > self.beta_s) {
            return Err(SfgError::DegenerateMedium(format!(
                "beta_r ({}) must exceed beta_s ({})",
                self.beta_r, self.beta_s
            )));
        }
        Ok(())
    }

    /// Duration `(beta_r - beta_s) L` of the SFG generation window (ps).
    pub fn window_duration(&self) -> T {
        (self.beta_r - self.beta_s) * self.length
    }

    /// Coupling divided by the SFG-signal slowness mismatch (ps^(-1/2)).
    pub fn scaled_gain(&self) -> T {
        self.gamma / (self.beta_r - self.beta_s)
    }

    /// Largest transit delay of signal or SFG relative to the pump (ps).
    pub fn max_walkoff(&self) -> T {
        ((self.beta_r - self.beta_p) * self.length)
            .abs()
            .max(((self.beta_s - self.beta_p) * self.length).abs())
    }

    pub fn has_gdd(&self) -> bool {
        self.beta2_p != T::zero() || self.beta2_s != T::zero() || self.beta2_r != T::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_and_gain() {
        let m: MediumSpec = MediumSpec::new(40.0, 7.534, 7.534, 60.2, 1.949);
        assert!((m.window_duration() - 2106.64).abs() < 1e-9);
        assert!((m.scaled_gain() - 1.949 / 52.666).abs() < 1e-15);
        assert!(m.validate_sfg_window().is_ok());
    }

    #[test]
    fn rejects_degenerate_media() {
        assert!(MediumSpec::new(0.0, 7.5, 7.5, 30.0, 1.0).validate().is_err());
        assert!(MediumSpec::new(40.0, -7.5, 7.5, 30.0, 1.0).validate().is_err());
        assert!(MediumSpec::new(40.0, 7.5, 7.5, 7.5, 1.0).validate_sfg_window().is_err());
        assert!(MediumSpec::new(40.0, 7.5, 7.5, 7.5, 1.0).validate().is_ok());
    }
}
