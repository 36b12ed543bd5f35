//! Certification of the asymptotic tracking bound
//! `limsup ‖z^k − z*^k‖ ≤ (√2 α e + σ_z) / (1 − ρ(α))`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Network, Scenario, SimConfig, SimError, Trajectory};
use crate::controller::{
    convergence_constants, solve_saddle_oracle, ControllerState, ConvergenceConstants,
    OracleOptions,
};

/// Saddle point of the surrogate at step `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSample {
    pub k: usize,
    pub state: ControllerState,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingReport {
    pub constants: ConvergenceConstants,
    /// Largest per-step drift of the saddle point, `max_k ‖z*^{k+1} − z*^k‖₂`.
    /// With decimated oracles, the drift between samples divided by the gap.
    pub sigma_z_measured: f64,
    /// Largest dual-gradient error `max_k ‖y^k − ŷ(u^k)‖₂`.
    pub e_measured: f64,
    /// `(√2 α e + σ_z) / (1 − ρ(α))`, or `None` without contraction.
    pub bound_rhs: Option<f64>,
    /// `max ‖z^k − z*^k‖₂` over the last quarter of the sampled steps.
    pub tracking_error_tail: f64,
    pub bound_satisfied: Option<bool>,
    /// Steps at which the oracle was evaluated.
    pub oracle_steps: usize,
    pub decimation: usize,
    pub note: Option<String>,
}

/// Computes the saddle point at every `decimation`-th step (and the last
/// one), in parallel.
pub fn oracle_sweep(
    net: &Network,
    scenario: &Scenario,
    cfg: &SimConfig,
    decimation: usize,
    opts: &OracleOptions,
) -> Result<Vec<OracleSample>, SimError> {
    let n = scenario.n_steps();
    let step = decimation.max(1);
    let mut ks: Vec<usize> = (0..n).step_by(step).collect();
    if ks.last() != Some(&(n - 1)) {
        ks.push(n - 1);
    }
    ks.par_iter()
        .map(|&k| {
            let p = net.problem(scenario, k, cfg);
            solve_saddle_oracle(&p, opts)
                .map(|s| OracleSample {
                    k,
                    state: s.state,
                    residual: s.residual,
                })
                .map_err(|source| SimError::Oracle { step: k, source })
        })
        .collect()
}

/// Compares a trajectory with the per-step saddle points.
pub fn measure_tracking(
    traj: &Trajectory,
    oracles: &[OracleSample],
    constants: ConvergenceConstants,
    decimation: usize,
) -> TrackingReport {
    let alpha = constants.alpha;
    let e = traj
        .records
        .iter()
        .map(|r| r.model_error)
        .fold(0.0, f64::max);
    let sigma = oracles
        .windows(2)
        .map(|w| w[0].state.distance(&w[1].state) / (w[1].k - w[0].k) as f64)
        .fold(0.0, f64::max);
    let errors: Vec<f64> = oracles
        .iter()
        .map(|o| traj.records[o.k].state().distance(&o.state))
        .collect();
    let tail_start = traj.records.len() - traj.records.len() / 4;
    let tail = oracles
        .iter()
        .zip(&errors)
        .filter(|(o, _)| o.k >= tail_start)
        .map(|(_, &err)| err)
        .fold(0.0, f64::max);

    let (bound_rhs, bound_satisfied, note) = if constants.contracts() {
        let rhs = (2f64.sqrt() * alpha * e + sigma) / (1.0 - constants.rho_alpha);
        (Some(rhs), Some(tail <= rhs), None)
    } else {
        (
            None,
            None,
            Some(format!(
                "no contraction guarantee: rho(alpha) = {:.6} >= 1 (alpha = {alpha}, alpha_max = {:e})",
                constants.rho_alpha, constants.alpha_max
            )),
        )
    };
    TrackingReport {
        constants,
        sigma_z_measured: sigma,
        e_measured: e,
        bound_rhs,
        tracking_error_tail: tail,
        bound_satisfied,
        oracle_steps: oracles.len(),
        decimation: decimation.max(1),
        note,
    }
}

/// Oracle sweep followed by [`measure_tracking`].
pub fn track(
    net: &Network,
    scenario: &Scenario,
    cfg: &SimConfig,
    traj: &Trajectory,
    decimation: usize,
) -> Result<TrackingReport, SimError> {
    let oracles = oracle_sweep(net, scenario, cfg, decimation, &OracleOptions::default())?;
    let costs = vec![cfg.cost; net.der_nodes.len()];
    let constants = convergence_constants(&costs, &net.sens, &cfg.params);
    Ok(measure_tracking(traj, &oracles, constants, decimation))
}
