use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical tolerances, seed and retry budget for the pipeline.
///
/// Every field has a default, so a JSON override file only needs to list the
/// values it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    /// Imaginary-part threshold for calling a root real (scaled by `1 + |root|`).
    pub tol_root: f64,
    /// Radius for merging roots into one multiple root (scaled by `1 + |root|`).
    pub tol_cluster: f64,
    /// Normalized discriminant below which a polynomial counts as having a repeated root.
    pub tol_disc: f64,
    /// Residual allowed for intersection points (scaled by `1 + coefficient scale`).
    pub tol_pt: f64,
    /// Separation below which two intersection points coincide.
    pub tol_sep: f64,
    pub tol_van: f64,
    pub tol_noether: f64,
    pub tol_pencil: f64,
    pub tol_pattern: f64,
    pub tol_final: f64,
    /// Agreement demanded between the two forward oracles (relative).
    pub tol_oracle: f64,
    /// First perturbation size is `10^eps_start_exp`.
    pub eps_start_exp: f64,
    /// Decades per perturbation step.
    pub eps_step_decades: f64,
    pub eps_max_steps: usize,
    /// Successive-difference threshold on gauge-invariant weight data.
    pub eps_converge: f64,
    pub max_retries: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 0,
            tol_root: 1e-8,
            tol_cluster: 1e-6,
            tol_disc: 1e-10,
            tol_pt: 1e-8,
            tol_sep: 1e-6,
            tol_van: 1e-7,
            tol_noether: 1e-8,
            tol_pencil: 1e-7,
            tol_pattern: 1e-6,
            tol_final: 1e-6,
            tol_oracle: 1e-9,
            eps_start_exp: -1.0,
            eps_step_decades: 0.5,
            eps_max_steps: 12,
            eps_converge: 1e-5,
            max_retries: 5,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        let tols = [
            ("tol_root", self.tol_root),
            ("tol_cluster", self.tol_cluster),
            ("tol_disc", self.tol_disc),
            ("tol_pt", self.tol_pt),
            ("tol_sep", self.tol_sep),
            ("tol_van", self.tol_van),
            ("tol_noether", self.tol_noether),
            ("tol_pencil", self.tol_pencil),
            ("tol_pattern", self.tol_pattern),
            ("tol_final", self.tol_final),
            ("tol_oracle", self.tol_oracle),
            ("eps_converge", self.eps_converge),
            ("eps_step_decades", self.eps_step_decades),
        ];
        for (name, value) in tols {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {value}")));
            }
        }
        if !self.eps_start_exp.is_finite() || self.eps_start_exp >= 0.0 {
            return Err(Error::InvalidInput("eps_start_exp must be negative".into()));
        }
        if self.eps_max_steps == 0 {
            return Err(Error::InvalidInput("eps_max_steps must be at least 1".into()));
        }
        Ok(())
    }

    /// Perturbation size at schedule step `k`.
    pub fn eps_at(&self, k: usize) -> f64 {
        10f64.powf(self.eps_start_exp - self.eps_step_decades * k as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        Config::default().validate().unwrap();
    }

    #[test]
    fn schedule_matches_half_decade_steps() {
        let cfg = Config::default();
        assert_eq!(cfg.eps_at(0), 0.1);
        assert!((cfg.eps_at(2) - 1e-2).abs() < 1e-17);
        assert!((cfg.eps_at(1) - 10f64.powf(-1.5)).abs() < 1e-17);
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        let cfg = Config { tol_pencil: 0.0, ..Config::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn partial_json_override() {
        let cfg: Config = serde_json::from_str(r#"{"seed": 7, "tol_final": 1e-5}"#).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.tol_final, 1e-5);
        assert_eq!(cfg.tol_van, 1e-7);
    }
}
