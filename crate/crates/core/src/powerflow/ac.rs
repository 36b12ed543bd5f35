use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use super::{PowerInjection, VoltageProfile};
use crate::feeder::AdmittanceMatrix;
use crate::C64;

/// Lower edge of the admissible voltage band; below it the solve is declared
/// a collapse.
pub const COLLAPSE_LOW: f64 = 0.3;
/// Upper edge of the admissible voltage band.
pub const COLLAPSE_HIGH: f64 = 3.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PowerFlowError {
    #[error("singular Y: network admittance matrix cannot be inverted")]
    Singular,
    #[error("dimension mismatch: expected {expected} buses, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("initial voltage magnitude {magnitude} at bus {bus} is below {COLLAPSE_LOW} pu")]
    BadInit { bus: usize, magnitude: f64 },
    #[error("non-finite injection")]
    NonFinite,
    #[error("collapse: |V| = {magnitude} at bus {bus} after {iterations} iterations")]
    Collapse {
        bus: usize,
        magnitude: f64,
        iterations: usize,
    },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PFSolution {
    pub voltages: VoltageProfile,
    pub iterations: usize,
    /// ∞-norm of the complex power mismatch, pu.
    pub residual: f64,
}

/// Fixed-point AC power-flow solver with `Y⁻¹` precomputed.
///
/// Each iteration applies `v ← Y⁻¹ (conj(s ./ v) − ȳ V₀)`, which is the
/// nodal balance `s = diag(v) conj(Y v + ȳ V₀)` solved for the linear term.
#[derive(Debug, Clone)]
pub struct ZBusSolver {
    y: DMatrix<C64>,
    z: DMatrix<C64>,
    ybar: DVector<C64>,
    v0: C64,
    /// `−Y⁻¹ ȳ V₀`, the no-load profile.
    vbar: DVector<C64>,
}

impl ZBusSolver {
    pub fn new(adm: &AdmittanceMatrix, v0: C64) -> Result<Self, PowerFlowError> {
        let z = adm
            .y
            .clone()
            .try_inverse()
            .ok_or(PowerFlowError::Singular)?;
        let vbar = -(&z * &adm.ybar) * v0;
        Ok(Self {
            y: adm.y.clone(),
            z,
            ybar: adm.ybar.clone(),
            v0,
            vbar,
        })
    }

    pub fn n(&self) -> usize {
        self.vbar.len()
    }

    pub fn no_load(&self) -> &DVector<C64> {
        &self.vbar
    }

    /// Complex power drawn out of the network at each bus for voltages `v`.
    pub fn power_balance(&self, v: &DVector<C64>) -> DVector<C64> {
        let current = &self.y * v + &self.ybar * self.v0;
        v.zip_map(&current, |vi, ii| vi * ii.conj())
    }

    /// ∞-norm of `s(v) − s`.
    pub fn mismatch(&self, v: &DVector<C64>, s: &DVector<C64>) -> f64 {
        (self.power_balance(v) - s)
            .iter()
            .map(|d| d.norm())
            .fold(0.0, f64::max)
    }

    pub fn solve(
        &self,
        inj: &PowerInjection,
        init: &VoltageProfile,
        tol: f64,
        max_iter: usize,
    ) -> Result<PFSolution, PowerFlowError> {
        let n = self.n();
        if inj.len() != n {
            return Err(PowerFlowError::Dimension {
                expected: n,
                got: inj.len(),
            });
        }
        if init.v.len() != n {
            return Err(PowerFlowError::Dimension {
                expected: n,
                got: init.v.len(),
            });
        }
        if !inj.is_finite() {
            return Err(PowerFlowError::NonFinite);
        }
        if let Some((bus, m)) = init
            .v
            .iter()
            .map(|z| z.norm())
            .enumerate()
            .find(|(_, m)| !(*m >= COLLAPSE_LOW))
        {
            return Err(PowerFlowError::BadInit {
                bus: bus + 1,
                magnitude: m,
            });
        }

        let s = inj.complex();
        let mut v = init.v.clone();
        let mut residual = f64::INFINITY;
        for iter in 1..=max_iter {
            let rhs = s.zip_map(&v, |si, vi| (si / vi).conj());
            v = &self.vbar + &self.z * rhs;

            if let Some((bus, m)) = v
                .iter()
                .map(|z| z.norm())
                .enumerate()
                .find(|(_, m)| !(*m >= COLLAPSE_LOW && *m <= COLLAPSE_HIGH))
            {
                return Err(PowerFlowError::Collapse {
                    bus: bus + 1,
                    magnitude: m,
                    iterations: iter,
                });
            }
            residual = self.mismatch(&v, &s);
            if residual <= tol {
                return Ok(PFSolution {
                    voltages: VoltageProfile::new(v),
                    iterations: iter,
                    residual,
                });
            }
        }
        Err(PowerFlowError::NotConverged {
            iterations: max_iter,
            residual,
        })
    }
}

/// One-shot AC power flow. See [`ZBusSolver`] for repeated solves on one
/// network.
pub fn solve_ac(
    adm: &AdmittanceMatrix,
    inj: &PowerInjection,
    v0: C64,
    init: &VoltageProfile,
    tol: f64,
    max_iter: usize,
) -> Result<PFSolution, PowerFlowError> {
    ZBusSolver::new(adm, v0)?.solve(inj, init, tol, max_iter)
}
