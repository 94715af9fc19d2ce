//! JSON run configuration for `simulate`.

use std::path::Path;

use exch::model::{Angle, AngleConfig, OutcomeSelector};
use exch::montecarlo::SimConfig;
use exch::quantum::DetectorParams;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AngleUnit {
    #[serde(alias = "deg")]
    #[value(alias = "deg")]
    Degrees,
    #[serde(alias = "rad")]
    #[value(alias = "rad")]
    Radians,
}

impl AngleUnit {
    pub fn to_radians(self, x: f64) -> f64 {
        match self {
            AngleUnit::Degrees => x.to_radians(),
            AngleUnit::Radians => x,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhiAngles {
    phi: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct ExplicitAngles {
    a: f64,
    b: f64,
    a_prime: f64,
    b_prime: f64,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum AngleSpec {
    Phi(PhiAngles),
    Explicit(ExplicitAngles),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct SimulateConfig {
    detector: DetectorParams,
    angles: AngleSpec,
    angle_unit: AngleUnit,
    events_per_pair: u64,
    seed: u64,
    #[serde(default)]
    selector: OutcomeSelector,
    #[serde(default = "default_z")]
    z_threshold: f64,
}

fn default_z() -> f64 {
    4.0
}

impl SimulateConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: SimulateConfig =
            serde_json::from_str(text).map_err(|e| CliError::Invalid(format!("malformed config: {e}")))?;
        if cfg.events_per_pair == 0 {
            return Err(CliError::Invalid("eventsPerPair must be at least 1".into()));
        }
        if !(cfg.z_threshold.is_finite() && cfg.z_threshold >= 0.0) {
            return Err(CliError::Invalid("zThreshold must be a nonnegative number".into()));
        }
        Ok(cfg)
    }

    pub fn z_threshold(&self) -> f64 {
        self.z_threshold
    }

    pub fn to_sim_config(&self) -> Result<SimConfig, CliError> {
        let unit = self.angle_unit;
        let invalid = |e: exch::Error| CliError::Invalid(e.to_string());
        let angles = match &self.angles {
            AngleSpec::Phi(p) => AngleConfig::from_phi(unit.to_radians(p.phi)).map_err(invalid)?,
            AngleSpec::Explicit(e) => {
                let ang = |x: f64| Angle::new(unit.to_radians(x)).map_err(invalid);
                AngleConfig { a: ang(e.a)?, b: ang(e.b)?, a_prime: ang(e.a_prime)?, b_prime: ang(e.b_prime)? }
            }
        };
        Ok(SimConfig {
            detector: self.detector,
            angles,
            events_per_pair: self.events_per_pair,
            seed: self.seed,
            selector: self.selector,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "detector": {"eta1": 0.8, "eta2": 0.7, "f": 0.9, "F": 0.95},
        "angles": {"phi": 45},
        "angleUnit": "degrees",
        "eventsPerPair": 1000,
        "seed": 1
    }"#;

    #[test]
    fn parses_phi_form() {
        let cfg = SimulateConfig::parse(BASE).unwrap().to_sim_config().unwrap();
        assert!((cfg.angles.a_prime.radians() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert_eq!(cfg.selector, OutcomeSelector::default());
    }

    #[test]
    fn parses_explicit_form() {
        let text = BASE.replace(r#"{"phi": 45}"#, r#"{"a": 0, "b": 0.1, "aPrime": 0.2, "bPrime": 0.3}"#)
            .replace("degrees", "rad");
        let cfg = SimulateConfig::parse(&text).unwrap().to_sim_config().unwrap();
        assert_eq!(cfg.angles.b_prime.radians(), 0.3);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(SimulateConfig::parse(&BASE.replace("1000", "0")).is_err());
        assert!(SimulateConfig::parse(&BASE.replace(r#""seed": 1"#, r#""seed": 1, "extra": true"#)).is_err());
        assert!(SimulateConfig::parse(&BASE.replace("0.95", "1.5")).is_err());
        assert!(SimulateConfig::parse(&BASE.replace(r#"{"phi": 45}"#, r#"{"phi": 45, "a": 1}"#)).is_err());
        assert!(SimulateConfig::parse(&BASE[..40]).is_err());
    }
}
