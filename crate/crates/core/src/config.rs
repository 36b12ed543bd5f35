//! Run configuration file (TOML).
//!
//! ```toml
//! feeder = "feeder36.toml"
//! strategy = "pursuit"
//! seed = 7
//! output_dir = "out"
//!
//! [scenario.generate]
//! kind = "cloud_transient"
//!
//! [params]
//! alpha = 0.2
//! ```
//!
//! Relative paths are resolved against the directory of the config file.
//! Every section other than `feeder` and `scenario` may be omitted.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baseline::DroopCurve;
use crate::controller::{ControllerParams, CostParams};
use crate::sim::{Plant, ScenarioKind, ScenarioSpec, SimConfig, Start, Strategy};
use crate::IoError;

pub const DEFAULT_DECIMATION: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioSource {
    /// A scenario CSV file.
    File { path: PathBuf },
    /// A synthetic trace drawn with the run seed.
    Generate {
        kind: ScenarioKind,
        #[serde(default)]
        spec: ScenarioSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub feeder: PathBuf,
    pub scenario: ScenarioSource,
    #[serde(default = "default_strategy")]
    pub strategy: Strategy,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Oracle every this many steps in tracking reports; 1 is full density.
    #[serde(default = "default_decimation")]
    pub report_decimation: usize,
    #[serde(default)]
    pub actuation_lag: f64,
    #[serde(default)]
    pub plant: Plant,
    #[serde(default)]
    pub start: Start,
    #[serde(default)]
    pub params: ControllerParams,
    /// Shared by every DER.
    #[serde(default)]
    pub cost: CostParams,
    #[serde(default)]
    pub droop: DroopCurve,
}

fn default_strategy() -> Strategy {
    Strategy::Pursuit
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_decimation() -> usize {
    DEFAULT_DECIMATION
}

impl RunConfig {
    pub fn new(feeder: impl Into<PathBuf>, scenario: ScenarioSource) -> Self {
        Self {
            feeder: feeder.into(),
            scenario,
            strategy: default_strategy(),
            seed: 0,
            output_dir: default_output_dir(),
            report_decimation: DEFAULT_DECIMATION,
            actuation_lag: 0.0,
            plant: Plant::Ac,
            start: Start::Available,
            params: ControllerParams::default(),
            cost: CostParams::default(),
            droop: DroopCurve::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, IoError> {
        toml::from_str(text).map_err(|e| IoError::Parse(e.to_string()))
    }

    /// Reads a config and resolves its relative paths against its directory.
    pub fn read(path: impl AsRef<Path>) -> Result<Self, IoError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::parse(&text)?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.feeder);
        join(&mut self.output_dir);
        if let ScenarioSource::File { path } = &mut self.scenario {
            join(path);
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            params: self.params,
            cost: self.cost,
            droop: self.droop,
            actuation_lag: self.actuation_lag,
            plant: self.plant,
            start: self.start,
            ..SimConfig::default()
        }
    }

    /// Checks everything that does not need the referenced files.
    pub fn check(&self) -> Result<(), String> {
        self.params.validate().map_err(|e| e.to_string())?;
        if !(self.cost.c_p >= 0.0 && self.cost.c_q >= 0.0) {
            return Err(format!(
                "cost coefficients must be non-negative, got {:?}",
                self.cost
            ));
        }
        if !self.droop.is_valid() {
            return Err(format!("invalid droop curve {:?}", self.droop));
        }
        if !(0.0..1.0).contains(&self.actuation_lag) {
            return Err(format!(
                "actuation_lag must lie in [0, 1), got {}",
                self.actuation_lag
            ));
        }
        if self.report_decimation == 0 {
            return Err("report_decimation must be at least 1".into());
        }
        if let ScenarioSource::Generate { spec, .. } = &self.scenario {
            if !(spec.tau > 0.0 && spec.horizon_s > 0.0) {
                return Err(format!(
                    "scenario needs tau > 0 and horizon_s > 0, got {} and {}",
                    spec.tau, spec.horizon_s
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
feeder = "tb1.toml"

[scenario.generate]
kind = "static"
"#;

    #[test]
    fn minimal_config_gets_field_defaults() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.strategy, Strategy::Pursuit);
        assert_eq!(c.params, ControllerParams::default());
        assert_eq!(c.report_decimation, 10);
        assert_eq!(
            c.scenario,
            ScenarioSource::Generate {
                kind: ScenarioKind::Static,
                spec: ScenarioSpec::default()
            }
        );
        assert!(c.check().is_ok());
    }

    #[test]
    fn partial_sections_fill_in() {
        let c = RunConfig::parse(&format!("{MINIMAL}\n[params]\nalpha = 0.5\n")).unwrap();
        assert_eq!(c.params.alpha, 0.5);
        assert_eq!(c.params.epsilon, 1e-4);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse(&format!("colour = 1\n{MINIMAL}")).is_err());
        assert!(RunConfig::parse(&format!("{MINIMAL}\n[params]\nbeta = 0.5\n")).is_err());
    }

    #[test]
    fn round_trip_is_idempotent() {
        let mut c = RunConfig::parse(MINIMAL).unwrap();
        c.seed = 42;
        c.params.alpha = 0.05;
        let once = c.to_toml();
        let back = RunConfig::parse(&once).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_toml(), once);
    }

    #[test]
    fn relative_paths_follow_the_config() {
        let mut c = RunConfig::new(
            "f.toml",
            ScenarioSource::File {
                path: "s.csv".into(),
            },
        );
        c.resolve_paths(Path::new("/data"));
        assert_eq!(c.feeder, PathBuf::from("/data/f.toml"));
        assert_eq!(
            c.scenario,
            ScenarioSource::File {
                path: "/data/s.csv".into()
            }
        );
    }

    #[test]
    fn bad_values_fail_the_check() {
        let mut c = RunConfig::parse(MINIMAL).unwrap();
        c.params.alpha = -1.0;
        assert!(c.check().is_err());
        let mut c = RunConfig::parse(MINIMAL).unwrap();
        c.report_decimation = 0;
        assert!(c.check().is_err());
    }
}
