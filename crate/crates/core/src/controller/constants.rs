use serde::{Deserialize, Serialize};

use super::{ControllerParams, CostParams, DerCost, Sensitivities};

/// Strong-monotonicity and Lipschitz constants of the regularized saddle
/// operator, and the resulting contraction factor at the configured `α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConstants {
    /// Lipschitz constant of the cost gradients.
    #[serde(rename = "L")]
    pub l: f64,
    /// Spectral norm of the stacked sensitivity matrix `[ř | b̌]`.
    #[serde(rename = "G")]
    pub g: f64,
    pub eta: f64,
    pub l_reg: f64,
    pub alpha: f64,
    pub rho_alpha: f64,
    pub alpha_max: f64,
}

impl ConvergenceConstants {
    pub fn contracts(&self) -> bool {
        self.rho_alpha < 1.0
    }

    /// `ρ` at another stepsize.
    pub fn rho_at(&self, alpha: f64) -> f64 {
        contraction_factor(self.eta, self.l_reg, alpha)
    }

    /// Stepsize minimizing `ρ`, `η / L_reg²`.
    pub fn alpha_best(&self) -> f64 {
        self.eta / (self.l_reg * self.l_reg)
    }
}

fn contraction_factor(eta: f64, l_reg: f64, alpha: f64) -> f64 {
    (1.0 - 2.0 * eta * alpha + alpha * alpha * l_reg * l_reg)
        .max(0.0)
        .sqrt()
}

pub fn convergence_constants(
    costs: &[CostParams],
    sens: &Sensitivities,
    params: &ControllerParams,
) -> ConvergenceConstants {
    let l = costs.iter().map(|c| c.lipschitz()).fold(0.0, f64::max);
    let g = spectral_norm(sens);
    let nu = params.nu;
    let eps = params.epsilon;
    let eta = nu.min(eps);
    let l_reg = ((l + nu + 2.0 * g).powi(2) + 2.0 * (g + eps).powi(2)).sqrt();
    ConvergenceConstants {
        l,
        g,
        eta,
        l_reg,
        alpha: params.alpha,
        rho_alpha: contraction_factor(eta, l_reg, params.alpha),
        alpha_max: 2.0 * eta / (l_reg * l_reg),
    }
}

fn spectral_norm(sens: &Sensitivities) -> f64 {
    let a = sens.stacked();
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().max()
}
