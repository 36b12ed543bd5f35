//! Closed-loop simulation: controller ↔ AC power-flow plant.
//!
//! Step `k`:
//! 1. project the commanded setpoints (after the optional actuation lag)
//!    onto the current operating regions and apply them with the step's
//!    loads;
//! 2. solve the plant and read the magnitudes at the monitored buses, plus
//!    bounded uniform noise;
//! 3. record the step;
//! 4. update the controller: feedback dual step, then primal step with the
//!    old multipliers (or the droop rule, or nothing).

mod io;
mod scenario;
mod tracking;

pub use io::{summarize, summary_json, write_trajectory_csv, RunSummary};
pub use scenario::{generate_scenario, Scenario, ScenarioError, ScenarioKind, ScenarioSpec};
pub use tracking::{measure_tracking, oracle_sweep, track, OracleSample, TrackingReport};

use std::sync::Arc;

use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baseline::{droop_setpoint, DroopCurve};
use crate::controller::{
    project_region, solve_saddle_oracle, ControllerParams, ControllerState, CostParams, DerCost,
    DualState, OperatingRegion, OracleError, OracleOptions, Sensitivities, Setpoint,
    SurrogateProblem, DUAL_BLOWUP,
};
use crate::feeder::{build_admittance, AdmittanceMatrix, BusId, FeederError, FeederModel};
use crate::powerflow::{
    build_linear_model, constraint_offsets, LinearModel, LoadProfile, PowerFlowError,
    PowerInjection, VoltageProfile, ZBusSolver,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Pursuit,
    Droop,
    None,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Pursuit => "pursuit",
            Strategy::Droop => "droop",
            Strategy::None => "none",
        }
    }
}

/// What stands in for the physical network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Plant {
    #[default]
    Ac,
    /// The linear model itself; measurements then carry no model error.
    Linear,
}

/// Initial controller state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    /// `u_i = (P_av,i, 0)`, zero multipliers.
    #[default]
    Available,
    /// The saddle point of the first step's surrogate.
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub params: ControllerParams,
    pub cost: CostParams,
    pub droop: DroopCurve,
    /// Actuation lag `β`: `u_applied ← u_applied + (1 − β)(u_cmd − u_applied)`.
    pub actuation_lag: f64,
    pub plant: Plant,
    pub start: Start,
    pub pf_tol: f64,
    pub pf_max_iter: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            params: ControllerParams::default(),
            cost: CostParams::default(),
            droop: DroopCurve::default(),
            actuation_lag: 0.0,
            plant: Plant::Ac,
            start: Start::Available,
            pf_tol: 1e-9,
            pf_max_iter: 1000,
        }
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Feeder(#[from] FeederError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("plant failure at step {step}: {source}")]
    Plant { step: usize, source: PowerFlowError },
    #[error("oracle failure at step {step}: {source}")]
    Oracle { step: usize, source: OracleError },
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Feeder with its admittance matrix, plant solver and linear model.
#[derive(Debug, Clone)]
pub struct Network {
    pub feeder: FeederModel,
    pub admittance: AdmittanceMatrix,
    pub solver: ZBusSolver,
    pub linear: LinearModel,
    pub sens: Arc<Sensitivities>,
    pub der_nodes: Vec<BusId>,
}

impl Network {
    pub fn new(feeder: FeederModel) -> Result<Self, SimError> {
        let admittance = build_admittance(&feeder)?;
        let v0 = feeder.slack_voltage;
        let plant_err = |source| SimError::Plant { step: 0, source };
        let solver = ZBusSolver::new(&admittance, v0).map_err(plant_err)?;
        let linear = build_linear_model(&admittance, v0).map_err(plant_err)?;
        let der_nodes = feeder.der_nodes();
        let sens = Arc::new(Sensitivities::from_model(
            &linear,
            &der_nodes,
            &feeder.monitored_nodes,
        ));
        Ok(Self {
            feeder,
            admittance,
            solver,
            linear,
            sens,
            der_nodes,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.feeder.n_nodes
    }

    pub fn regions(&self, p_av: &DVector<f64>) -> Vec<OperatingRegion> {
        self.feeder
            .ders
            .iter()
            .zip(p_av.iter())
            .map(|(d, &p)| OperatingRegion::new(d.kind, d.rating, p))
            .collect()
    }

    /// Surrogate problem at step `k` of `scenario`.
    pub fn problem(&self, scenario: &Scenario, k: usize, cfg: &SimConfig) -> SurrogateProblem {
        let loads = LoadProfile {
            p: scenario.load_p[k].clone(),
            q: scenario.load_q[k].clone(),
        };
        let c = constraint_offsets(
            &self.linear,
            &loads,
            &self.der_nodes,
            &self.feeder.monitored_nodes,
        );
        let der_loads = self
            .der_nodes
            .iter()
            .map(|b| Setpoint::new(loads.p[b.reduced_index()], loads.q[b.reduced_index()]))
            .collect();
        SurrogateProblem {
            sens: Arc::clone(&self.sens),
            c,
            der_loads,
            regions: self.regions(&scenario.p_av[k]),
            costs: vec![cfg.cost; self.der_nodes.len()],
            params: cfg.params.with_limits(scenario.v_min[k], scenario.v_max[k]),
        }
    }

    /// Net nodal injections for DER outputs `u` and loads.
    pub fn injections(
        &self,
        u: &[Setpoint],
        load_p: &DVector<f64>,
        load_q: &DVector<f64>,
    ) -> PowerInjection {
        let mut inj = PowerInjection::new(-load_p, -load_q);
        for (b, s) in self.der_nodes.iter().zip(u) {
            inj.p[b.reduced_index()] += s.p;
            inj.q[b.reduced_index()] += s.q;
        }
        inj
    }

    fn monitored(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.feeder.monitored_nodes.len(),
            self.feeder
                .monitored_nodes
                .iter()
                .map(|b| v[b.reduced_index()]),
        )
    }
}

/// Everything observed at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub k: usize,
    pub time_s: f64,
    /// Measured magnitudes at the monitored buses (noise included).
    pub y: DVector<f64>,
    /// Controller iterate `u^k`.
    pub command: Vec<Setpoint>,
    /// Setpoints actually applied to the plant.
    pub applied: Vec<Setpoint>,
    /// Multipliers `γ^k, μ^k`.
    pub duals: DualState,
    /// Plant magnitudes at every non-slack bus.
    pub voltages: DVector<f64>,
    pub v_min: f64,
    pub v_max: f64,
    /// Objective at the applied setpoints.
    pub cost: f64,
    /// Largest excursion of the monitored plant magnitudes outside
    /// `[v_min, v_max]`, zero when inside.
    pub max_violation: f64,
    /// Power-flow mismatch of the plant solution.
    pub pf_residual: f64,
    pub pf_iterations: usize,
    /// `‖y − (linear prediction at u^k)‖₂`, the dual-gradient error.
    pub model_error: f64,
}

impl StepRecord {
    pub fn max_voltage(&self) -> f64 {
        self.voltages.max()
    }

    pub fn state(&self) -> ControllerState {
        ControllerState {
            u: self.command.clone(),
            duals: self.duals.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub strategy: Strategy,
    pub seed: u64,
    pub records: Vec<StepRecord>,
    pub diagnostics: Vec<String>,
}

/// Simulates `scenario` on `net` under `strategy`.
pub fn run_closed_loop(
    net: &Network,
    scenario: &Scenario,
    strategy: Strategy,
    cfg: &SimConfig,
    seed: u64,
) -> Result<Trajectory, SimError> {
    scenario.check(&net.feeder)?;
    cfg.params
        .validate()
        .map_err(|e| SimError::Config(e.to_string()))?;
    if !(0.0..1.0).contains(&cfg.actuation_lag) {
        return Err(SimError::Config(format!(
            "actuation lag must lie in [0, 1), got {}",
            cfg.actuation_lag
        )));
    }
    if !cfg.droop.is_valid() {
        return Err(SimError::Config("droop curve needs v_zero < v_sat".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = net.n_nodes();
    let m = net.feeder.n_monitored();
    let v0 = net.feeder.slack_voltage;

    let mut state = match cfg.start {
        Start::Available => ControllerState::at_available(&net.regions(&scenario.p_av[0]), m),
        Start::Oracle => {
            let p0 = net.problem(scenario, 0, cfg);
            solve_saddle_oracle(&p0, &OracleOptions::default())
                .map_err(|source| SimError::Oracle { step: 0, source })?
                .state
        }
    };
    let mut applied_prev: Option<Vec<Setpoint>> = None;
    let mut v_prev = VoltageProfile::flat(n, v0);
    let mut records = Vec::with_capacity(scenario.n_steps());
    let mut diagnostics = Vec::new();
    let mut warned_clip = false;

    for k in 0..scenario.n_steps() {
        let problem = net.problem(scenario, k, cfg);
        if !warned_clip && problem.regions.iter().any(|r| r.was_clipped()) {
            diagnostics.push(format!("step {k}: P_av clipped to the inverter rating"));
            warned_clip = true;
        }

        let lagged: Vec<Setpoint> = match &applied_prev {
            Some(prev) if cfg.actuation_lag > 0.0 => prev
                .iter()
                .zip(&state.u)
                .map(|(a, c)| {
                    let w = 1.0 - cfg.actuation_lag;
                    Setpoint::new(a.p + w * (c.p - a.p), a.q + w * (c.q - a.q))
                })
                .collect(),
            _ => state.u.clone(),
        };
        let applied: Vec<Setpoint> = lagged
            .iter()
            .zip(&problem.regions)
            .map(|(u, r)| project_region(*u, r))
            .collect();

        let inj = net.injections(&applied, &scenario.load_p[k], &scenario.load_q[k]);
        let (magnitudes, pf_residual, pf_iterations) = match cfg.plant {
            Plant::Ac => {
                let sol = net
                    .solver
                    .solve(&inj, &v_prev, cfg.pf_tol, cfg.pf_max_iter)
                    .map_err(|source| SimError::Plant { step: k, source })?;
                let out = (sol.voltages.rho.clone(), sol.residual, sol.iterations);
                v_prev = sol.voltages;
                out
            }
            Plant::Linear => (
                crate::powerflow::predict_voltage_magnitude(&net.linear, &inj),
                0.0,
                0,
            ),
        };
        let measured = if scenario.noise_amp > 0.0 {
            let a = scenario.noise_amp;
            magnitudes.map(|v| v + rng.random_range(-a..=a))
        } else {
            magnitudes.clone()
        };
        let y = net.monitored(&measured);
        let true_monitored = net.monitored(&magnitudes);
        let (v_min, v_max) = (scenario.v_min[k], scenario.v_max[k]);
        let max_violation = true_monitored
            .iter()
            .map(|&v| (v - v_max).max(v_min - v).max(0.0))
            .fold(0.0, f64::max);
        let model_error = (&y - problem.predicted_magnitudes(&state.u)).norm();
        let cost = step_cost(strategy, &applied, &problem);

        if state.duals.max_entry() > DUAL_BLOWUP
            && !diagnostics.iter().any(|d| d.contains("multiplier"))
        {
            diagnostics.push(format!(
                "step {k}: multiplier above {DUAL_BLOWUP:e}; the voltage limits may be infeasible"
            ));
        }

        records.push(StepRecord {
            k,
            time_s: scenario.time(k),
            y: y.clone(),
            command: state.u.clone(),
            applied: applied.clone(),
            duals: state.duals.clone(),
            voltages: magnitudes,
            v_min,
            v_max,
            cost,
            max_violation,
            pf_residual,
            pf_iterations,
            model_error,
        });

        state = match strategy {
            Strategy::Pursuit => problem.feedback_step(&state, &y),
            Strategy::Droop => ControllerState {
                u: net
                    .der_nodes
                    .iter()
                    .zip(&problem.regions)
                    .map(|(b, r)| droop_setpoint(measured[b.reduced_index()], r, &cfg.droop))
                    .collect(),
                duals: state.duals,
            },
            Strategy::None => ControllerState::at_available(&problem.regions, m),
        };
        applied_prev = Some(applied);
    }

    Ok(Trajectory {
        strategy,
        seed,
        records,
        diagnostics,
    })
}

fn step_cost(strategy: Strategy, applied: &[Setpoint], problem: &SurrogateProblem) -> f64 {
    match strategy {
        // Reactive provisioning only, the usual way droop is charged.
        Strategy::Droop => applied
            .iter()
            .zip(&problem.costs)
            .map(|(u, c)| c.c_q * u.q * u.q)
            .sum(),
        _ => applied
            .iter()
            .zip(&problem.costs)
            .zip(&problem.regions)
            .map(|((u, c), r)| c.value(*u, r.p_available))
            .sum(),
    }
}

/// Per-step objective of a trajectory: `Σ c_p (P_av − P)² + c_q Q²`, or
/// `Σ c_q Q²` for droop.
pub fn eval_cost(traj: &Trajectory) -> Vec<f64> {
    traj.records.iter().map(|r| r.cost).collect()
}

/// `Σ c_p (P_av − P)² + c_q Q²` for explicit setpoints.
pub fn setpoint_cost(u: &[Setpoint], p_av: &[f64], cost: &CostParams) -> f64 {
    u.iter().zip(p_av).map(|(s, &p)| cost.value(*s, p)).sum()
}
