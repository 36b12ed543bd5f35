//! TOML feeder description.
//!
//! ```toml
//! n_nodes = 1
//! base_power_va = 1.0e6
//! monitored_nodes = [1]
//!
//! [slack]
//! magnitude = 1.0
//! angle_deg = 0.0
//!
//! [[line]]
//! from = 0
//! to = 1
//! r = 0.01
//! x = 0.01
//! b_shunt = 0.0   # optional, total line charging susceptance
//!
//! [[der]]
//! node = 1
//! rating = 1.2    # apparent power rating, pu
//! kind = "joint"  # optional: "joint" | "reactive_only" | "real_only"
//! ```
//!
//! Every table rejects unknown keys.

use std::path::Path;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use super::{BusId, Der, FeederModel, LineSegment};
use crate::controller::RegionKind;
use crate::IoError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlackEntry {
    pub magnitude: f64,
    #[serde(default)]
    pub angle_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineEntry {
    pub from: usize,
    pub to: usize,
    pub r: f64,
    pub x: f64,
    #[serde(default)]
    pub b_shunt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerEntry {
    pub node: usize,
    pub rating: f64,
    #[serde(default)]
    pub kind: RegionKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeederFile {
    pub n_nodes: usize,
    #[serde(default = "default_base")]
    pub base_power_va: f64,
    pub monitored_nodes: Vec<usize>,
    pub slack: SlackEntry,
    #[serde(rename = "line", default)]
    pub lines: Vec<LineEntry>,
    #[serde(rename = "der", default)]
    pub ders: Vec<DerEntry>,
}

fn default_base() -> f64 {
    1.0e6
}

impl FeederFile {
    pub fn parse(text: &str) -> Result<Self, IoError> {
        toml::from_str(text).map_err(|e| IoError::Parse(e.to_string()))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, IoError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| IoError::Read {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("feeder file is always serializable")
    }

    pub fn into_model(self) -> FeederModel {
        FeederModel::from(self)
    }
}

impl From<FeederFile> for FeederModel {
    fn from(f: FeederFile) -> Self {
        let theta = f.slack.angle_deg.to_radians();
        FeederModel {
            n_nodes: f.n_nodes,
            lines: f
                .lines
                .iter()
                .map(|l| {
                    LineSegment::new(l.from, l.to, Complex::new(l.r, l.x))
                        .with_shunt(Complex::new(0.0, l.b_shunt))
                })
                .collect(),
            slack_voltage: Complex::from_polar(f.slack.magnitude, theta),
            ders: f
                .ders
                .iter()
                .map(|d| Der {
                    node: BusId(d.node),
                    rating: d.rating,
                    kind: d.kind,
                })
                .collect(),
            monitored_nodes: f.monitored_nodes.into_iter().map(BusId).collect(),
            base_power: f.base_power_va,
        }
    }
}

impl From<&FeederModel> for FeederFile {
    fn from(m: &FeederModel) -> Self {
        FeederFile {
            n_nodes: m.n_nodes,
            base_power_va: m.base_power,
            monitored_nodes: m.monitored_nodes.iter().map(|b| b.0).collect(),
            slack: SlackEntry {
                magnitude: m.slack_voltage.norm(),
                angle_deg: m.slack_voltage.arg().to_degrees(),
            },
            lines: m
                .lines
                .iter()
                .map(|l| LineEntry {
                    from: l.from.0,
                    to: l.to.0,
                    r: l.series_impedance.re,
                    x: l.series_impedance.im,
                    b_shunt: l.shunt_admittance.im,
                })
                .collect(),
            ders: m
                .ders
                .iter()
                .map(|d| DerEntry {
                    node: d.node.0,
                    rating: d.rating,
                    kind: d.kind,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TB1: &str = r#"
n_nodes = 1
monitored_nodes = [1]

[slack]
magnitude = 1.0

[[line]]
from = 0
to = 1
r = 0.01
x = 0.01

[[der]]
node = 1
rating = 1.2
"#;

    #[test]
    fn parses_minimal_file() {
        let f = FeederFile::parse(TB1).unwrap();
        let m = f.into_model();
        assert_eq!(m.n_nodes, 1);
        assert_eq!(m.ders[0].kind, RegionKind::Joint);
        assert_eq!(m.slack_voltage, Complex::new(1.0, 0.0));
        assert_eq!(m.base_power, 1.0e6);
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = TB1.replace("x = 0.01", "x = 0.01\nlength_ft = 300");
        let err = FeederFile::parse(&text).unwrap_err();
        assert!(err.to_string().contains("length_ft"), "{err}");
        let text = TB1.replace("n_nodes = 1", "n_nodes = 1\ncolor = \"red\"");
        assert!(FeederFile::parse(&text).is_err());
    }

    #[test]
    fn model_round_trip() {
        let model = crate::cases::feeder36();
        let text = FeederFile::from(&model).to_toml();
        let back = FeederFile::parse(&text).unwrap().into_model();
        assert_eq!(back.lines, model.lines);
        assert_eq!(back.ders, model.ders);
        assert_eq!(back.monitored_nodes, model.monitored_nodes);
        assert!((back.slack_voltage - model.slack_voltage).norm() < 1e-15);
    }
}
