//! Synthetic load / irradiance / voltage-limit traces and their CSV form.
//!
//! Every generator evaluates a continuous-time trace at `t_k = k τ`, so
//! sampling the same trace more densely only changes `τ` and the step count.
//! The diurnal kinds map the horizon onto a compressed 6:00–18:00 day.

use std::f64::consts::PI;
use std::io::{Read, Write};

use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feeder::FeederModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Static,
    Ramp,
    CloudTransient,
    VmaxSteps,
}

/// Generator settings. Power levels are fractions of the DER ratings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSpec {
    pub tau: f64,
    /// Length of the trace in seconds; the step count is `horizon_s / τ`.
    pub horizon_s: f64,
    /// `P_av / S` for `static`, and the starting level for `ramp`.
    pub irradiance: f64,
    /// Change of `P_av / S` per second for `ramp`.
    pub ramp_rate: f64,
    /// Peak total load as a fraction of the total DER rating.
    pub load_fraction: f64,
    pub load_power_factor: f64,
    /// Number of irradiance dips for `cloud_transient`.
    pub dips: usize,
    /// Maximum relative depth of a dip.
    pub dip_depth: f64,
    /// Typical Gaussian width of a dip in seconds; each dip draws from
    /// half to one and a half times this.
    pub dip_width_s: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub noise_amp: f64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            tau: 0.33,
            horizon_s: 6600.0,
            irradiance: 0.9,
            ramp_rate: 1e-3,
            load_fraction: 0.6,
            load_power_factor: 0.95,
            dips: 6,
            dip_depth: 0.5,
            dip_width_s: 120.0,
            v_min: 0.95,
            v_max: 1.05,
            noise_amp: 0.0,
        }
    }
}

impl ScenarioSpec {
    pub fn n_steps(&self) -> usize {
        ((self.horizon_s / self.tau).round() as usize).max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub tau: f64,
    /// `(P_ℓ, Q_ℓ)` over buses `1..=N`, one vector per step.
    pub load_p: Vec<DVector<f64>>,
    pub load_q: Vec<DVector<f64>>,
    /// `P_av` per DER, one vector per step.
    pub p_av: Vec<DVector<f64>>,
    pub v_min: Vec<f64>,
    pub v_max: Vec<f64>,
    pub noise_amp: f64,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("inconsistent scenario: {0}")]
    Inconsistent(String),
    #[error("scenario file: {0}")]
    Format(String),
    #[error("scenario file: {0}")]
    Io(#[from] std::io::Error),
}

impl Scenario {
    pub fn n_steps(&self) -> usize {
        self.v_max.len()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.tau
    }

    /// Checks lengths against `feeder` and the basic invariants.
    pub fn check(&self, feeder: &FeederModel) -> Result<(), ScenarioError> {
        let n = self.n_steps();
        let bad = |m: String| Err(ScenarioError::Inconsistent(m));
        if n == 0 {
            return bad("no steps".into());
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if [
            self.load_p.len(),
            self.load_q.len(),
            self.p_av.len(),
            self.v_min.len(),
        ]
        .iter()
        .any(|&l| l != n)
        {
            return bad("series have different lengths".into());
        }
        if !(self.noise_amp.is_finite() && self.noise_amp >= 0.0) {
            return bad(format!(
                "noise amplitude must be non-negative, got {}",
                self.noise_amp
            ));
        }
        for k in 0..n {
            if self.load_p[k].len() != feeder.n_nodes || self.load_q[k].len() != feeder.n_nodes {
                return bad(format!(
                    "step {k}: load vectors must have {} entries",
                    feeder.n_nodes
                ));
            }
            if self.p_av[k].len() != feeder.n_ders() {
                return bad(format!(
                    "step {k}: P_av must have {} entries",
                    feeder.n_ders()
                ));
            }
            if self.p_av[k].iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
                return bad(format!("step {k}: P_av must be finite and non-negative"));
            }
            if !(self.v_min[k] < self.v_max[k]) {
                return bad(format!("step {k}: v_min must be below v_max"));
            }
        }
        Ok(())
    }

    /// Writes the scenario as CSV with a header row.
    pub fn write_csv<W: Write>(&self, feeder: &FeederModel, out: W) -> Result<(), ScenarioError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["time_s".to_string()];
        header.extend((1..=feeder.n_nodes).map(|n| format!("p_load_{n}")));
        header.extend((1..=feeder.n_nodes).map(|n| format!("q_load_{n}")));
        header.extend(feeder.ders.iter().map(|d| format!("p_av_{}", d.node)));
        header.push("v_min".into());
        header.push("v_max".into());
        w.write_record(&header).map_err(csv_err)?;
        for k in 0..self.n_steps() {
            let mut row = vec![fmt(self.time(k))];
            row.extend(self.load_p[k].iter().map(|&v| fmt(v)));
            row.extend(self.load_q[k].iter().map(|&v| fmt(v)));
            row.extend(self.p_av[k].iter().map(|&v| fmt(v)));
            row.push(fmt(self.v_min[k]));
            row.push(fmt(self.v_max[k]));
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a scenario written by [`Scenario::write_csv`] (columns may come
    /// in any order). Unknown and missing columns are errors. `τ` is taken
    /// from the first two timestamps, or `default_tau` for a single row.
    pub fn read_csv<R: Read>(
        feeder: &FeederModel,
        input: R,
        default_tau: f64,
    ) -> Result<Self, ScenarioError> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers().map_err(csv_err)?.clone();
        let n = feeder.n_nodes;
        let g = feeder.n_ders();

        #[derive(Clone, Copy)]
        enum Col {
            Time,
            PLoad(usize),
            QLoad(usize),
            PAv(usize),
            VMin,
            VMax,
        }
        let der_pos = |node: usize| feeder.ders.iter().position(|d| d.node.0 == node);
        let mut cols = Vec::with_capacity(headers.len());
        let mut seen = std::collections::HashSet::new();
        for h in headers.iter() {
            let h = h.trim();
            let parse_idx =
                |prefix: &str| -> Option<usize> { h.strip_prefix(prefix)?.parse().ok() };
            let col = if h == "time_s" {
                Col::Time
            } else if h == "v_min" {
                Col::VMin
            } else if h == "v_max" {
                Col::VMax
            } else if let Some(i) = parse_idx("p_load_").filter(|&i| (1..=n).contains(&i)) {
                Col::PLoad(i - 1)
            } else if let Some(i) = parse_idx("q_load_").filter(|&i| (1..=n).contains(&i)) {
                Col::QLoad(i - 1)
            } else if let Some(i) = parse_idx("p_av_").and_then(der_pos) {
                Col::PAv(i)
            } else {
                return Err(ScenarioError::Format(format!("unknown column '{h}'")));
            };
            if !seen.insert(h.to_string()) {
                return Err(ScenarioError::Format(format!("duplicate column '{h}'")));
            }
            cols.push(col);
        }
        if seen.len() != 3 + 2 * n + g {
            let mut missing = Vec::new();
            for name in ["time_s", "v_min", "v_max"] {
                if !seen.contains(name) {
                    missing.push(name.to_string());
                }
            }
            for i in 1..=n {
                for p in ["p_load_", "q_load_"] {
                    if !seen.contains(&format!("{p}{i}")) {
                        missing.push(format!("{p}{i}"));
                    }
                }
            }
            for d in &feeder.ders {
                if !seen.contains(&format!("p_av_{}", d.node)) {
                    missing.push(format!("p_av_{}", d.node));
                }
            }
            return Err(ScenarioError::Format(format!(
                "missing columns: {}",
                missing.join(", ")
            )));
        }

        let mut s = Scenario {
            tau: default_tau,
            load_p: Vec::new(),
            load_q: Vec::new(),
            p_av: Vec::new(),
            v_min: Vec::new(),
            v_max: Vec::new(),
            noise_amp: 0.0,
        };
        let mut times = Vec::new();
        for (row, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let mut lp = DVector::zeros(n);
            let mut lq = DVector::zeros(n);
            let mut pav = DVector::zeros(g);
            let (mut vmin, mut vmax, mut t) = (0.0, 0.0, 0.0);
            for (field, col) in rec.iter().zip(&cols) {
                let v: f64 = field.trim().parse().map_err(|_| {
                    ScenarioError::Format(format!("row {}: cannot parse '{field}'", row + 1))
                })?;
                match *col {
                    Col::Time => t = v,
                    Col::PLoad(i) => lp[i] = v,
                    Col::QLoad(i) => lq[i] = v,
                    Col::PAv(i) => pav[i] = v,
                    Col::VMin => vmin = v,
                    Col::VMax => vmax = v,
                }
            }
            times.push(t);
            s.load_p.push(lp);
            s.load_q.push(lq);
            s.p_av.push(pav);
            s.v_min.push(vmin);
            s.v_max.push(vmax);
        }
        if times.len() >= 2 {
            s.tau = times[1] - times[0];
        }
        s.check(feeder)?;
        Ok(s)
    }
}

fn fmt(v: f64) -> String {
    // shortest representation that round-trips
    format!("{v:?}")
}

fn csv_err(e: csv::Error) -> ScenarioError {
    ScenarioError::Format(e.to_string())
}

/// Clear-sky irradiance shape over the 6:00–18:00 window, `x ∈ [0, 1]`.
fn bell(x: f64) -> f64 {
    (PI * x).sin().max(0.0).powf(1.2)
}

/// Residential-style demand shape over the same window, peaking late.
fn load_shape(x: f64) -> f64 {
    0.55 + 0.15 * (PI * x).sin() + 0.3 * x * x
}

struct Dip {
    center: f64,
    width: f64,
    depth: f64,
}

pub fn generate_scenario(
    kind: ScenarioKind,
    feeder: &FeederModel,
    seed: u64,
    spec: &ScenarioSpec,
) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = feeder.n_nodes;
    let steps = spec.n_steps();
    let ratings: Vec<f64> = feeder.ders.iter().map(|d| d.rating).collect();
    let total_rating: f64 = ratings.iter().sum();

    // Peak load per bus, scattered around an even split of the total.
    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let wsum: f64 = weights.iter().sum();
    let peak_p: Vec<f64> = weights
        .iter()
        .map(|w| spec.load_fraction * total_rating * w / wsum)
        .collect();
    let tan_phi = (1.0 / (spec.load_power_factor * spec.load_power_factor) - 1.0)
        .max(0.0)
        .sqrt();
    // Slow per-bus demand wiggle: (amplitude, cycles over the horizon, phase).
    let wiggle: Vec<(f64, f64, f64)> = (0..n)
        .map(|_| {
            (
                rng.random_range(0.0..0.05),
                rng.random_range(1.0..4.0),
                rng.random_range(0.0..2.0 * PI),
            )
        })
        .collect();
    let dips: Vec<Dip> = (0..spec.dips)
        .map(|_| Dip {
            center: rng.random_range(0.1..0.9),
            width: rng.random_range(0.5..1.5) * spec.dip_width_s / spec.horizon_s,
            depth: rng.random_range(0.3..1.0) * spec.dip_depth,
        })
        .collect();
    // Small spatial spread of the clouds: each DER sees a dip slightly shifted.
    let shifts: Vec<f64> = ratings
        .iter()
        .map(|_| rng.random_range(-0.25..0.25) * spec.dip_width_s / spec.horizon_s)
        .collect();

    let horizon = spec.horizon_s;
    let mut s = Scenario {
        tau: spec.tau,
        load_p: Vec::with_capacity(steps),
        load_q: Vec::with_capacity(steps),
        p_av: Vec::with_capacity(steps),
        v_min: vec![spec.v_min; steps],
        v_max: vec![spec.v_max; steps],
        noise_amp: spec.noise_amp,
    };
    for k in 0..steps {
        let t = k as f64 * spec.tau;
        let x = t / horizon;
        let diurnal = matches!(kind, ScenarioKind::CloudTransient | ScenarioKind::VmaxSteps);
        let level = |i: usize| match kind {
            ScenarioKind::Static => spec.irradiance,
            ScenarioKind::Ramp => (spec.irradiance + spec.ramp_rate * t).clamp(0.0, 1.0),
            ScenarioKind::VmaxSteps => bell(x),
            ScenarioKind::CloudTransient => {
                let xi = x + shifts[i];
                let cover: f64 = dips
                    .iter()
                    .map(|d| 1.0 - d.depth * (-0.5 * ((xi - d.center) / d.width).powi(2)).exp())
                    .product();
                bell(x) * cover
            }
        };
        let lf = if diurnal { load_shape(x) } else { 1.0 };
        let lp = DVector::from_fn(n, |b, _| {
            let (a, f, ph) = wiggle[b];
            let w = if diurnal {
                1.0 + a * (2.0 * PI * f * x + ph).sin()
            } else {
                1.0
            };
            peak_p[b] * lf * w
        });
        let lq = &lp * tan_phi;
        s.p_av.push(DVector::from_fn(ratings.len(), |i, _| {
            (ratings[i] * level(i)).max(0.0)
        }));
        s.load_p.push(lp);
        s.load_q.push(lq);
        if kind == ScenarioKind::VmaxSteps {
            // 6:00–13:00, 13:00–14:00, after 14:00
            s.v_max[k] = if x < 7.0 / 12.0 {
                1.05
            } else if x < 8.0 / 12.0 {
                1.035
            } else {
                1.02
            };
        }
    }
    s
}
