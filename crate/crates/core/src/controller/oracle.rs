//! Ground-truth saddle point of the regularized surrogate.
//!
//! For fixed `u` the inner maximization over `γ, μ ≥ 0` is explicit,
//! `γ = [g(u)]₊ / ε`, `μ = [ḡ(u)]₊ / ε`, which leaves the strongly convex
//! primal problem
//!
//! ```text
//! min_{u ∈ 𝒴}  Σ f̄_i(u_i) + ν/2 ‖u‖² + 1/(2ε) (‖[g(u)]₊‖² + ‖[ḡ(u)]₊‖²)
//! ```
//!
//! [`OracleMethod::Accelerated`] solves it with restarted accelerated
//! projected gradient. [`OracleMethod::PrimalDual`] runs the plain
//! model-based primal-dual iteration at `α = η / L_reg²`, which is only
//! practical when `η` is not tiny.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    convergence_constants, project_region, ControllerState, DualState, Setpoint, SurrogateProblem,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    #[default]
    Accelerated,
    PrimalDual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleOptions {
    pub method: OracleMethod,
    /// Stopping threshold: projected-stationarity residual for the
    /// accelerated method (raised to the rounding floor of ill-conditioned
    /// instances), successive-iterate ∞-norm for the primal-dual one.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            method: OracleMethod::Accelerated,
            tol: 1e-11,
            max_iter: 1_000_000,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("oracle did not converge in {iterations} iterations (residual {residual:e})")]
    MaxIter { iterations: usize, residual: f64 },
    #[error("oracle produced non-finite iterates")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaddlePoint {
    pub state: ControllerState,
    /// Projected-stationarity residual of the full saddle operator.
    pub residual: f64,
    pub iterations: usize,
}

pub fn solve_saddle_oracle(
    problem: &SurrogateProblem,
    opts: &OracleOptions,
) -> Result<SaddlePoint, OracleError> {
    let start = ControllerState::at_available(&problem.regions, problem.n_monitored());
    solve_saddle_oracle_from(problem, opts, &start)
}

/// As [`solve_saddle_oracle`], starting from `start` (projected first).
pub fn solve_saddle_oracle_from(
    problem: &SurrogateProblem,
    opts: &OracleOptions,
    start: &ControllerState,
) -> Result<SaddlePoint, OracleError> {
    let start = problem.project(&start.to_vector());
    match opts.method {
        OracleMethod::Accelerated => accelerated(problem, opts, start),
        OracleMethod::PrimalDual => primal_dual(problem, opts, start),
    }
}

/// Multipliers that maximize the regularized Lagrangian at `u`.
pub fn best_response_duals(problem: &SurrogateProblem, u: &[Setpoint]) -> DualState {
    let (g, g_bar) = problem.constraints(u);
    let eps = problem.params.epsilon;
    DualState {
        gamma: g.map(|v| v.max(0.0) / eps),
        mu: g_bar.map(|v| v.max(0.0) / eps),
    }
}

fn reduced_gradient(problem: &SurrogateProblem, u: &[Setpoint]) -> Vec<(f64, f64)> {
    let duals = best_response_duals(problem, u);
    (0..u.len())
        .map(|i| problem.primal_gradient(i, u[i], &duals))
        .collect()
}

#[cfg(test)]
fn reduced_objective(problem: &SurrogateProblem, u: &[Setpoint]) -> f64 {
    let (g, g_bar) = problem.constraints(u);
    let eps = problem.params.epsilon;
    let pen: f64 = g
        .iter()
        .chain(g_bar.iter())
        .map(|v| v.max(0.0).powi(2))
        .sum();
    let u_sq: f64 = u.iter().map(|s| s.p * s.p + s.q * s.q).sum();
    problem.cost(u) + 0.5 * problem.params.nu * u_sq + 0.5 * pen / eps
}

fn is_finite(u: &[Setpoint]) -> bool {
    u.iter().all(|s| s.p.is_finite() && s.q.is_finite())
}

fn accelerated(
    problem: &SurrogateProblem,
    opts: &OracleOptions,
    start: ControllerState,
) -> Result<SaddlePoint, OracleError> {
    let constants = convergence_constants(&problem.costs, &problem.sens, &problem.params);
    let l_smooth =
        constants.l + problem.params.nu + constants.g * constants.g / problem.params.epsilon;
    let step = 1.0 / l_smooth;

    let finish = |u: Vec<Setpoint>, iterations: usize| {
        let state = ControllerState {
            duals: best_response_duals(problem, &u),
            u,
        };
        let residual = problem.stationarity_residual(&state);
        SaddlePoint {
            state,
            residual,
            iterations,
        }
    };

    let mut x = start.u;
    let mut y = x.clone();
    let mut t = 1.0_f64;
    let mut last_residual = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        let grad = reduced_gradient(problem, &y);
        let x_next: Vec<Setpoint> = y
            .iter()
            .zip(&grad)
            .zip(&problem.regions)
            .map(|((yi, (gp, gq)), r)| {
                project_region(Setpoint::new(yi.p - step * gp, yi.q - step * gq), r)
            })
            .collect();
        if !is_finite(&x_next) {
            return Err(OracleError::NonFinite);
        }

        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        // Gradient restart: drop the momentum once it points uphill. Unlike a
        // function-value test it does not trip on rounding near the optimum.
        let uphill: f64 = y
            .iter()
            .zip(&x_next)
            .zip(&x)
            .map(|((yi, xn), xi)| (yi.p - xn.p) * (xn.p - xi.p) + (yi.q - xn.q) * (xn.q - xi.q))
            .sum();
        if uphill > 0.0 && t > 1.0 {
            y = x.clone();
            t = 1.0;
            continue;
        }
        let beta = (t - 1.0) / t_next;
        y = x_next
            .iter()
            .zip(&x)
            .map(|(a, b)| Setpoint::new(a.p + beta * (a.p - b.p), a.q + beta * (a.q - b.q)))
            .collect();
        let moved = x_next
            .iter()
            .zip(&x)
            .map(|(a, b)| (a.p - b.p).abs().max((a.q - b.q).abs()))
            .fold(0.0, f64::max);
        x = x_next;
        t = t_next;

        // The stationarity check costs about one gradient evaluation.
        if iter % 16 == 0 || moved == 0.0 {
            let candidate = finish(x.clone(), iter);
            last_residual = candidate.residual;
            if candidate.residual <= opts.tol.max(rounding_floor(l_smooth, &x)) {
                return Ok(candidate);
            }
        }
    }
    Err(OracleError::MaxIter {
        iterations: opts.max_iter,
        residual: last_residual,
    })
}

/// Smallest residual that rounding lets the accelerated method certify:
/// a one-ulp change of `u` moves the reduced gradient by about
/// `L_f · ulp(‖u‖∞)`, and `L_f` carries the `G²/ε` penalty curvature.
fn rounding_floor(l_smooth: f64, u: &[Setpoint]) -> f64 {
    let scale = u
        .iter()
        .map(|s| s.p.abs().max(s.q.abs()))
        .fold(1.0, f64::max);
    16.0 * f64::EPSILON * l_smooth * scale
}

fn primal_dual(
    problem: &SurrogateProblem,
    opts: &OracleOptions,
    start: ControllerState,
) -> Result<SaddlePoint, OracleError> {
    let constants = convergence_constants(&problem.costs, &problem.sens, &problem.params);
    let mut stepped = problem.clone();
    stepped.params.alpha = constants.alpha_best();

    let mut z = start;
    for iter in 1..=opts.max_iter {
        let next = stepped.model_step(&z);
        let diff = (next.to_vector() - z.to_vector()).amax();
        if !diff.is_finite() {
            return Err(OracleError::NonFinite);
        }
        z = next;
        if diff <= opts.tol {
            let residual = problem.stationarity_residual(&z);
            return Ok(SaddlePoint {
                state: z,
                residual,
                iterations: iter,
            });
        }
    }
    Err(OracleError::MaxIter {
        iterations: opts.max_iter,
        residual: problem.stationarity_residual(&z),
    })
}
