//! Trajectory CSV and run summary JSON.

use std::io::Write;

use serde::Serialize;

use super::{Network, TrackingReport, Trajectory};
use crate::controller::ConvergenceConstants;

/// Headline numbers of one run. Field order is the serialization order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub strategy: String,
    pub seed: u64,
    pub n_steps: usize,
    pub tau: f64,
    pub constants: ConvergenceConstants,
    pub alpha_within_guarantee: bool,
    pub max_voltage: f64,
    pub max_violation: f64,
    pub final_max_violation: f64,
    pub total_cost: f64,
    pub max_pf_residual: f64,
    pub diagnostics: Vec<String>,
    pub tracking: Option<TrackingReport>,
}

pub fn summarize(
    traj: &Trajectory,
    tau: f64,
    constants: ConvergenceConstants,
    tracking: Option<TrackingReport>,
) -> RunSummary {
    let recs = &traj.records;
    let fold_max = |f: &dyn Fn(&super::StepRecord) -> f64| {
        recs.iter().map(f).fold(f64::NEG_INFINITY, f64::max)
    };
    RunSummary {
        strategy: traj.strategy.name().to_string(),
        seed: traj.seed,
        n_steps: recs.len(),
        tau,
        constants,
        alpha_within_guarantee: constants.contracts(),
        max_voltage: fold_max(&|r| r.max_voltage()),
        max_violation: fold_max(&|r| r.max_violation),
        final_max_violation: recs.last().map_or(0.0, |r| r.max_violation),
        total_cost: recs.iter().map(|r| r.cost).sum(),
        max_pf_residual: fold_max(&|r| r.pf_residual),
        diagnostics: traj.diagnostics.clone(),
        tracking,
    }
}

pub fn summary_json(summary: &RunSummary) -> String {
    let mut s = serde_json::to_string_pretty(summary).expect("summary is always serializable");
    s.push('\n');
    s
}

/// One row per step: time, scalars, then per-bus magnitudes, measurements,
/// per-DER command and applied setpoints, and the multipliers.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, net: &Network, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let f = &net.feeder;
    let mut header: Vec<String> = [
        "k",
        "time_s",
        "v_min",
        "v_max",
        "cost",
        "max_violation",
        "pf_residual",
        "pf_iterations",
        "model_error",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((1..=f.n_nodes).map(|n| format!("v_{n}")));
    header.extend(f.monitored_nodes.iter().map(|n| format!("y_{n}")));
    for d in &f.ders {
        header.push(format!("p_cmd_{}", d.node));
        header.push(format!("q_cmd_{}", d.node));
    }
    for d in &f.ders {
        header.push(format!("p_{}", d.node));
        header.push(format!("q_{}", d.node));
    }
    header.extend(f.monitored_nodes.iter().map(|n| format!("gamma_{n}")));
    header.extend(f.monitored_nodes.iter().map(|n| format!("mu_{n}")));
    w.write_record(&header)?;

    for r in &traj.records {
        let mut row = vec![r.k.to_string()];
        row.extend(
            [
                r.time_s,
                r.v_min,
                r.v_max,
                r.cost,
                r.max_violation,
                r.pf_residual,
            ]
            .iter()
            .map(|v| format!("{v:?}")),
        );
        row.push(r.pf_iterations.to_string());
        row.push(format!("{:?}", r.model_error));
        row.extend(r.voltages.iter().map(|v| format!("{v:?}")));
        row.extend(r.y.iter().map(|v| format!("{v:?}")));
        for s in &r.command {
            row.push(format!("{:?}", s.p));
            row.push(format!("{:?}", s.q));
        }
        for s in &r.applied {
            row.push(format!("{:?}", s.p));
            row.push(format!("{:?}", s.q));
        }
        row.extend(r.duals.gamma.iter().map(|v| format!("{v:?}")));
        row.extend(r.duals.mu.iter().map(|v| format!("{v:?}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
