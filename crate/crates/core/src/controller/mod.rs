//! Primal-dual controllers on the Tikhonov-regularized Lagrangian
//!
//! ```text
//! L_{ν,ε}(u, γ, μ) = Σ_i f̄_i(u_i) + γᵀ g(u) + μᵀ ḡ(u) + ν/2 ‖u‖² − ε/2 (‖γ‖² + ‖μ‖²)
//! ```
//!
//! with the linearized voltage constraints
//!
//! ```text
//! g_n(u) = V_min − c_n − Σ_i [r_{n,i}(P_i − P_ℓ,i) + b_{n,i}(Q_i − Q_ℓ,i)]
//! ḡ_n(u) = Σ_i [r_{n,i}(P_i − P_ℓ,i) + b_{n,i}(Q_i − Q_ℓ,i)] + c_n − V_max
//! ```
//!
//! The model-based iteration uses `g`, `ḡ` in the dual step; the feedback
//! iteration replaces the predicted magnitudes with measurements `y`.

mod constants;
mod oracle;
mod region;

pub use constants::{convergence_constants, ConvergenceConstants};
pub use oracle::{
    best_response_duals, solve_saddle_oracle, solve_saddle_oracle_from, OracleError, OracleMethod,
    OracleOptions, SaddlePoint,
};
pub use region::{project_region, OperatingRegion, RegionKind};

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, DVectorView};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feeder::BusId;
use crate::powerflow::LinearModel;

/// Dual entries above this are reported as a likely infeasible instance.
pub const DUAL_BLOWUP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Setpoint {
    pub p: f64,
    pub q: f64,
}

impl Setpoint {
    pub fn new(p: f64, q: f64) -> Self {
        Self { p, q }
    }
}

/// Per-DER objective with a declared gradient Lipschitz constant.
pub trait DerCost {
    fn value(&self, u: Setpoint, p_available: f64) -> f64;
    fn gradient(&self, u: Setpoint, p_available: f64) -> (f64, f64);
    fn lipschitz(&self) -> f64;
}

/// `f̄(u) = c_p (P_av − P)² + c_q Q²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostParams {
    pub c_p: f64,
    pub c_q: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        Self { c_p: 3.0, c_q: 1.0 }
    }
}

impl DerCost for CostParams {
    fn value(&self, u: Setpoint, p_available: f64) -> f64 {
        let dp = p_available - u.p;
        self.c_p * dp * dp + self.c_q * u.q * u.q
    }

    fn gradient(&self, u: Setpoint, p_available: f64) -> (f64, f64) {
        (-2.0 * self.c_p * (p_available - u.p), 2.0 * self.c_q * u.q)
    }

    fn lipschitz(&self) -> f64 {
        2.0 * self.c_p.max(self.c_q)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("alpha must be positive and finite, got {0}")]
    Alpha(f64),
    #[error("nu must be positive and finite, got {0}")]
    Nu(f64),
    #[error("epsilon must be positive and finite, got {0}")]
    Epsilon(f64),
    #[error("voltage limits must satisfy v_min < v_max, got [{0}, {1}]")]
    Limits(f64, f64),
    #[error("cost coefficients must be non-negative, got c_p={0}, c_q={1}")]
    Cost(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerParams {
    pub alpha: f64,
    pub nu: f64,
    pub epsilon: f64,
    pub v_min: f64,
    pub v_max: f64,
}

impl Default for ControllerParams {
    fn default() -> Self {
        Self {
            alpha: 0.2,
            nu: 1e-3,
            epsilon: 1e-4,
            v_min: 0.95,
            v_max: 1.05,
        }
    }
}

impl ControllerParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.alpha) {
            return Err(ParamError::Alpha(self.alpha));
        }
        if !pos(self.nu) {
            return Err(ParamError::Nu(self.nu));
        }
        if !pos(self.epsilon) {
            return Err(ParamError::Epsilon(self.epsilon));
        }
        if !(self.v_min < self.v_max) {
            return Err(ParamError::Limits(self.v_min, self.v_max));
        }
        Ok(())
    }

    pub fn with_limits(mut self, v_min: f64, v_max: f64) -> Self {
        self.v_min = v_min;
        self.v_max = v_max;
        self
    }
}

/// Multipliers of the lower (`γ`) and upper (`μ`) voltage constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub gamma: DVector<f64>,
    pub mu: DVector<f64>,
}

impl DualState {
    pub fn zeros(m: usize) -> Self {
        Self {
            gamma: DVector::zeros(m),
            mu: DVector::zeros(m),
        }
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn max_entry(&self) -> f64 {
        self.gamma
            .iter()
            .chain(self.mu.iter())
            .copied()
            .fold(0.0, f64::max)
    }

    /// `μ − γ`, the weight each constraint row puts on the primal gradient.
    pub fn net(&self) -> DVector<f64> {
        &self.mu - &self.gamma
    }
}

/// Voltage sensitivities of the monitored buses to DER injections:
/// column `i` of `r` and `b` holds `ř_i` and `b̌_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sensitivities {
    pub r: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

impl Sensitivities {
    pub fn new(r: DMatrix<f64>, b: DMatrix<f64>) -> Self {
        assert_eq!(r.shape(), b.shape());
        Self { r, b }
    }

    pub fn from_model(lm: &LinearModel, der_nodes: &[BusId], monitored: &[BusId]) -> Self {
        let (r, b) = lm.submatrices(monitored, der_nodes);
        Self { r, b }
    }

    pub fn n_monitored(&self) -> usize {
        self.r.nrows()
    }

    pub fn n_ders(&self) -> usize {
        self.r.ncols()
    }

    pub fn r_col(&self, i: usize) -> DVectorView<'_, f64> {
        self.r.column(i)
    }

    pub fn b_col(&self, i: usize) -> DVectorView<'_, f64> {
        self.b.column(i)
    }

    /// `M × 2N_𝒢` matrix `[ř_1 b̌_1 ř_2 b̌_2 …]`, the Jacobian of `ḡ` in `u`.
    pub fn stacked(&self) -> DMatrix<f64> {
        let (m, g) = self.r.shape();
        DMatrix::from_fn(m, 2 * g, |row, col| {
            if col % 2 == 0 {
                self.r[(row, col / 2)]
            } else {
                self.b[(row, col / 2)]
            }
        })
    }

    /// `Σ_i r_{n,i}(P_i − P_ℓ,i) + b_{n,i}(Q_i − Q_ℓ,i)` for every monitored `n`.
    pub fn net_injection_effect(&self, u: &[Setpoint], der_loads: &[Setpoint]) -> DVector<f64> {
        let mut out = DVector::zeros(self.n_monitored());
        for (i, (ui, li)) in u.iter().zip(der_loads).enumerate() {
            out.axpy(ui.p - li.p, &self.r.column(i), 1.0);
            out.axpy(ui.q - li.q, &self.b.column(i), 1.0);
        }
        out
    }
}

/// `(g, ḡ)` at `u`.
pub fn eval_constraints(
    sens: &Sensitivities,
    c: &DVector<f64>,
    u: &[Setpoint],
    der_loads: &[Setpoint],
    params: &ControllerParams,
) -> (DVector<f64>, DVector<f64>) {
    let effect = sens.net_injection_effect(u, der_loads);
    let g = effect.map(|e| -e) - c + DVector::from_element(c.len(), params.v_min);
    let g_bar = effect + c - DVector::from_element(c.len(), params.v_max);
    (g, g_bar)
}

/// `∇_{u_i} L_{ν,ε}` for one DER.
pub fn grad_primal<C: DerCost + ?Sized>(
    u_i: Setpoint,
    p_available: f64,
    duals: &DualState,
    cost: &C,
    r_i: DVectorView<'_, f64>,
    b_i: DVectorView<'_, f64>,
    params: &ControllerParams,
) -> (f64, f64) {
    let (fp, fq) = cost.gradient(u_i, p_available);
    let mut wp = 0.0;
    let mut wq = 0.0;
    for n in 0..duals.len() {
        let w = duals.mu[n] - duals.gamma[n];
        wp += r_i[n] * w;
        wq += b_i[n] * w;
    }
    (fp + wp + params.nu * u_i.p, fq + wq + params.nu * u_i.q)
}

/// Feedback dual update driven by measured magnitudes `y`.
pub fn dual_step_feedback(
    duals: &DualState,
    y: &DVector<f64>,
    params: &ControllerParams,
) -> DualState {
    let a = params.alpha;
    let e = params.epsilon;
    DualState {
        gamma: duals
            .gamma
            .zip_map(y, |g, yn| (g + a * (params.v_min - yn - e * g)).max(0.0)),
        mu: duals
            .mu
            .zip_map(y, |m, yn| (m + a * (yn - params.v_max - e * m)).max(0.0)),
    }
}

/// Model-based dual update from evaluated constraints `(g, ḡ)`.
pub fn dual_step_model(
    duals: &DualState,
    g: &DVector<f64>,
    g_bar: &DVector<f64>,
    params: &ControllerParams,
) -> DualState {
    let a = params.alpha;
    let e = params.epsilon;
    DualState {
        gamma: duals
            .gamma
            .zip_map(g, |gm, gn| (gm + a * (gn - e * gm)).max(0.0)),
        mu: duals
            .mu
            .zip_map(g_bar, |m, gn| (m + a * (gn - e * m)).max(0.0)),
    }
}

/// Primal and dual iterates of the controller.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    pub u: Vec<Setpoint>,
    pub duals: DualState,
}

impl ControllerState {
    /// `u_i = (P_av,i, 0)` with zero multipliers.
    pub fn at_available(regions: &[OperatingRegion], m: usize) -> Self {
        Self {
            u: regions
                .iter()
                .map(|r| project_region(Setpoint::new(r.p_available, 0.0), r))
                .collect(),
            duals: DualState::zeros(m),
        }
    }

    /// Stacked `z = [P_1, Q_1, …, γ, μ]`.
    pub fn to_vector(&self) -> DVector<f64> {
        let g = self.u.len();
        let m = self.duals.len();
        let mut z = DVector::zeros(2 * g + 2 * m);
        for (i, ui) in self.u.iter().enumerate() {
            z[2 * i] = ui.p;
            z[2 * i + 1] = ui.q;
        }
        z.rows_mut(2 * g, m).copy_from(&self.duals.gamma);
        z.rows_mut(2 * g + m, m).copy_from(&self.duals.mu);
        z
    }

    pub fn distance(&self, other: &ControllerState) -> f64 {
        (self.to_vector() - other.to_vector()).norm()
    }
}

/// Convex surrogate of the OPF at one time step.
#[derive(Debug, Clone)]
pub struct SurrogateProblem {
    pub sens: Arc<Sensitivities>,
    /// Offsets `c_n` for every monitored bus.
    pub c: DVector<f64>,
    /// `(P_ℓ, Q_ℓ)` at each DER bus.
    pub der_loads: Vec<Setpoint>,
    pub regions: Vec<OperatingRegion>,
    pub costs: Vec<CostParams>,
    pub params: ControllerParams,
}

impl SurrogateProblem {
    pub fn n_ders(&self) -> usize {
        self.regions.len()
    }

    pub fn n_monitored(&self) -> usize {
        self.c.len()
    }

    pub fn constraints(&self, u: &[Setpoint]) -> (DVector<f64>, DVector<f64>) {
        eval_constraints(&self.sens, &self.c, u, &self.der_loads, &self.params)
    }

    /// Linear-model magnitude prediction at the monitored buses.
    pub fn predicted_magnitudes(&self, u: &[Setpoint]) -> DVector<f64> {
        self.sens.net_injection_effect(u, &self.der_loads) + &self.c
    }

    /// `Σ_i f̄_i(u_i)`.
    pub fn cost(&self, u: &[Setpoint]) -> f64 {
        u.iter()
            .zip(&self.costs)
            .zip(&self.regions)
            .map(|((ui, c), r)| c.value(*ui, r.p_available))
            .sum()
    }

    pub fn lagrangian(&self, u: &[Setpoint], duals: &DualState) -> f64 {
        let (g, g_bar) = self.constraints(u);
        let nu = self.params.nu;
        let eps = self.params.epsilon;
        let u_sq: f64 = u.iter().map(|s| s.p * s.p + s.q * s.q).sum();
        self.cost(u) + duals.gamma.dot(&g) + duals.mu.dot(&g_bar) + 0.5 * nu * u_sq
            - 0.5 * eps * (duals.gamma.norm_squared() + duals.mu.norm_squared())
    }

    pub fn primal_gradient(&self, i: usize, u_i: Setpoint, duals: &DualState) -> (f64, f64) {
        grad_primal(
            u_i,
            self.regions[i].p_available,
            duals,
            &self.costs[i],
            self.sens.r_col(i),
            self.sens.b_col(i),
            &self.params,
        )
    }

    /// `(∇_γ L, ∇_μ L) = (g − εγ, ḡ − εμ)`.
    pub fn dual_gradient(&self, u: &[Setpoint], duals: &DualState) -> (DVector<f64>, DVector<f64>) {
        let (g, g_bar) = self.constraints(u);
        let eps = self.params.epsilon;
        (g - &duals.gamma * eps, g_bar - &duals.mu * eps)
    }

    /// Monotone operator `Φ(z) = [∇_u L; −∇_γ L; −∇_μ L]` stacked like
    /// [`ControllerState::to_vector`].
    pub fn operator(&self, z: &ControllerState) -> DVector<f64> {
        let g = self.n_ders();
        let m = self.n_monitored();
        let mut out = DVector::zeros(2 * g + 2 * m);
        for (i, ui) in z.u.iter().enumerate() {
            let (dp, dq) = self.primal_gradient(i, *ui, &z.duals);
            out[2 * i] = dp;
            out[2 * i + 1] = dq;
        }
        let (dg, dm) = self.dual_gradient(&z.u, &z.duals);
        out.rows_mut(2 * g, m).copy_from(&(-dg));
        out.rows_mut(2 * g + m, m).copy_from(&(-dm));
        out
    }

    /// Projection of a stacked vector onto `𝒴 × ℝ₊ᴹ × ℝ₊ᴹ`.
    pub fn project(&self, z: &DVector<f64>) -> ControllerState {
        let g = self.n_ders();
        let m = self.n_monitored();
        ControllerState {
            u: (0..g)
                .map(|i| project_region(Setpoint::new(z[2 * i], z[2 * i + 1]), &self.regions[i]))
                .collect(),
            duals: DualState {
                gamma: z.rows(2 * g, m).map(|v| v.max(0.0)),
                mu: z.rows(2 * g + m, m).map(|v| v.max(0.0)),
            },
        }
    }

    /// Projected-stationarity residual `‖z − Π(z − Φ(z))‖_∞`; zero exactly at
    /// the saddle point.
    pub fn stationarity_residual(&self, z: &ControllerState) -> f64 {
        let zv = z.to_vector();
        let next = self.project(&(&zv - self.operator(z))).to_vector();
        (zv - next).amax()
    }

    /// One error-free primal-dual iteration with model-evaluated constraints.
    pub fn model_step(&self, z: &ControllerState) -> ControllerState {
        let (g, g_bar) = self.constraints(&z.u);
        ControllerState {
            u: primal_step(&z.u, &z.duals, self),
            duals: dual_step_model(&z.duals, &g, &g_bar, &self.params),
        }
    }

    /// One feedback iteration given measured magnitudes at the monitored
    /// buses.
    pub fn feedback_step(&self, z: &ControllerState, y: &DVector<f64>) -> ControllerState {
        ControllerState {
            u: primal_step(&z.u, &z.duals, self),
            duals: dual_step_feedback(&z.duals, y, &self.params),
        }
    }
}

/// `u_i ← proj_{𝒴_i}(u_i − α ∇_{u_i} L)` for every DER, all using the same
/// (old) multipliers.
pub fn primal_step(u: &[Setpoint], duals: &DualState, problem: &SurrogateProblem) -> Vec<Setpoint> {
    let alpha = problem.params.alpha;
    u.iter()
        .enumerate()
        .map(|(i, ui)| {
            let (dp, dq) = problem.primal_gradient(i, *ui, duals);
            project_region(
                Setpoint::new(ui.p - alpha * dp, ui.q - alpha * dq),
                &problem.regions[i],
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn single_der(
        r: f64,
        b: f64,
        region: OperatingRegion,
        cost: CostParams,
        params: ControllerParams,
    ) -> SurrogateProblem {
        SurrogateProblem {
            sens: Arc::new(Sensitivities::new(
                DMatrix::from_element(1, 1, r),
                DMatrix::from_element(1, 1, b),
            )),
            c: DVector::from_element(1, 1.0),
            der_loads: vec![Setpoint::default()],
            regions: vec![region],
            costs: vec![cost],
            params,
        }
    }

    #[test]
    fn primal_gradient_arithmetic() {
        let params = ControllerParams {
            nu: 1e-3,
            ..Default::default()
        };
        let duals = DualState {
            gamma: DVector::zeros(1),
            mu: DVector::from_element(1, 0.002),
        };
        let r = DVector::from_element(1, 0.01);
        let (dp, dq) = grad_primal(
            Setpoint::new(1.0, 0.0),
            1.0,
            &duals,
            &CostParams { c_p: 3.0, c_q: 1.0 },
            r.column(0),
            r.column(0),
            &params,
        );
        assert!((dp - 0.00102).abs() < 1e-15);
        assert!((dq - 2e-5).abs() < 1e-15);
    }

    #[test]
    fn primal_step_interior() {
        let params = ControllerParams {
            alpha: 0.2,
            nu: 1e-3,
            ..Default::default()
        };
        let p = single_der(
            0.01,
            0.01,
            OperatingRegion::joint(1.2, 1.0),
            CostParams::default(),
            params,
        );
        let duals = DualState {
            gamma: DVector::zeros(1),
            mu: DVector::from_element(1, 0.002),
        };
        let u = primal_step(&[Setpoint::new(1.0, 0.0)], &duals, &p);
        assert!((u[0].p - 0.999796).abs() < 1e-15);
        assert!((u[0].q + 4e-6).abs() < 1e-15);

        let mut zero = p.clone();
        zero.params.alpha = 0.0;
        let start = [Setpoint::new(0.3, -0.2)];
        assert_eq!(primal_step(&start, &duals, &zero), start.to_vec());
    }

    #[test]
    fn dual_step_examples() {
        let params = ControllerParams {
            alpha: 0.2,
            epsilon: 1e-4,
            ..Default::default()
        };
        let d0 = DualState::zeros(1);
        let y = DVector::from_element(1, 1.0);
        assert_eq!(dual_step_feedback(&d0, &y, &params).gamma[0], 0.0);
        let y = DVector::from_element(1, 1.06);
        assert!((dual_step_feedback(&d0, &y, &params).mu[0] - 0.002).abs() < 1e-15);

        // stationary point of the μ update
        let mu = 3.0;
        let d = DualState {
            gamma: DVector::zeros(1),
            mu: DVector::from_element(1, mu),
        };
        let y = DVector::from_element(1, params.v_max + params.epsilon * mu);
        assert!((dual_step_feedback(&d, &y, &params).mu[0] - mu).abs() < 1e-15);

        let zero = DVector::zeros(1);
        assert_eq!(dual_step_model(&d0, &zero, &zero, &params).gamma[0], 0.0);
        let g = DVector::from_element(1, 0.01);
        assert!((dual_step_model(&d0, &g, &zero, &params).gamma[0] - 0.002).abs() < 1e-15);
    }

    #[test]
    fn constraints_at_load_balance() {
        let params = ControllerParams::default();
        let sens = Sensitivities::new(
            DMatrix::from_element(1, 1, 0.01),
            DMatrix::from_element(1, 1, 0.01),
        );
        let load = Setpoint::new(0.3, 0.1);
        let (g, gb) = eval_constraints(
            &sens,
            &DVector::from_element(1, 1.0),
            &[load],
            &[load],
            &params,
        );
        assert!((g[0] + 0.05).abs() < 1e-15);
        assert!((gb[0] + 0.05).abs() < 1e-15);
    }

    #[test]
    fn feedback_equals_model_with_exact_measurements() {
        let p = single_der(
            0.03,
            0.02,
            OperatingRegion::joint(1.0, 0.9),
            CostParams::default(),
            ControllerParams::default(),
        );
        let z = ControllerState {
            u: vec![Setpoint::new(0.7, -0.1)],
            duals: DualState {
                gamma: DVector::from_element(1, 0.1),
                mu: DVector::from_element(1, 0.4),
            },
        };
        let y = p.predicted_magnitudes(&z.u);
        let a = p.feedback_step(&z, &y);
        let b = p.model_step(&z);
        assert!(a.distance(&b) < 1e-15);
    }

    #[test]
    fn params_validation() {
        assert!(ControllerParams::default().validate().is_ok());
        let bad = ControllerParams {
            v_min: 1.1,
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(ParamError::Limits(..))));
        let bad = ControllerParams {
            epsilon: 0.0,
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(ParamError::Epsilon(_))));
    }
}
