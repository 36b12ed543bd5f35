//! AC power flow (the simulated plant) and its linear approximation around
//! the no-load voltage profile.

mod ac;
mod linear;

pub use ac::{solve_ac, PFSolution, PowerFlowError, ZBusSolver, COLLAPSE_HIGH, COLLAPSE_LOW};
pub use linear::{
    build_linear_model, constraint_offsets, no_load_voltage, predict_voltage_magnitude, LinearModel,
};

use nalgebra::{Complex, DVector};

use crate::C64;

/// Net nodal injections over buses `1..=N`, per unit.
///
/// Injection is positive, consumption negative.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerInjection {
    pub p: DVector<f64>,
    pub q: DVector<f64>,
}

impl PowerInjection {
    pub fn zeros(n: usize) -> Self {
        Self {
            p: DVector::zeros(n),
            q: DVector::zeros(n),
        }
    }

    pub fn new(p: DVector<f64>, q: DVector<f64>) -> Self {
        assert_eq!(p.len(), q.len(), "p and q must have the same length");
        Self { p, q }
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn complex(&self) -> DVector<C64> {
        self.p.zip_map(&self.q, Complex::new)
    }

    pub fn is_finite(&self) -> bool {
        self.p.iter().chain(self.q.iter()).all(|v| v.is_finite())
    }
}

/// Nodal demands `(P_ℓ, Q_ℓ)` over buses `1..=N`; positive means consumption.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadProfile {
    pub p: DVector<f64>,
    pub q: DVector<f64>,
}

impl LoadProfile {
    pub fn zeros(n: usize) -> Self {
        Self {
            p: DVector::zeros(n),
            q: DVector::zeros(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoltageProfile {
    pub v: DVector<C64>,
    pub rho: DVector<f64>,
}

impl VoltageProfile {
    pub fn new(v: DVector<C64>) -> Self {
        let rho = v.map(|z| z.norm());
        Self { v, rho }
    }

    /// Every bus at the slack phasor.
    pub fn flat(n: usize, v0: C64) -> Self {
        Self::new(DVector::from_element(n, v0))
    }
}
