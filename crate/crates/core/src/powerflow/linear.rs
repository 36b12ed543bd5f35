use nalgebra::{Complex, DMatrix, DVector};

use super::{LoadProfile, PowerFlowError, PowerInjection};
use crate::feeder::{AdmittanceMatrix, BusId};
use crate::C64;

/// Linear voltage-magnitude model `ρ ≈ R p + B q + a` built around the
/// no-load profile `v̄ = −Y⁻¹ ȳ V₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub r: DMatrix<f64>,
    pub b: DMatrix<f64>,
    /// No-load magnitudes `ρ̄`.
    pub a: DVector<f64>,
    pub vbar: DVector<C64>,
    pub zr: DMatrix<f64>,
    pub zi: DMatrix<f64>,
    /// `cos θ̄`.
    pub xi_bar: DVector<f64>,
    /// `sin θ̄`.
    pub theta_bar: DVector<f64>,
}

impl LinearModel {
    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// Complex-voltage coefficient of `p`: `H = R + jB`.
    pub fn h(&self) -> DMatrix<C64> {
        self.r.zip_map(&self.b, Complex::new)
    }

    /// Complex-voltage coefficient of `q`: `J = B − jR`.
    pub fn j(&self) -> DMatrix<C64> {
        self.b.zip_map(&self.r, |b, r| Complex::new(b, -r))
    }

    /// Complex-voltage offset, equal to `v̄`.
    pub fn offset(&self) -> &DVector<C64> {
        &self.vbar
    }

    /// Rows of `R` (resp. `B`) at `rows`, columns at `cols`, both given as
    /// buses.
    pub fn submatrices(&self, rows: &[BusId], cols: &[BusId]) -> (DMatrix<f64>, DMatrix<f64>) {
        let r = DMatrix::from_fn(rows.len(), cols.len(), |m, i| {
            self.r[(rows[m].reduced_index(), cols[i].reduced_index())]
        });
        let b = DMatrix::from_fn(rows.len(), cols.len(), |m, i| {
            self.b[(rows[m].reduced_index(), cols[i].reduced_index())]
        });
        (r, b)
    }
}

/// No-load voltage profile `v̄ = −Y⁻¹ ȳ V₀`.
pub fn no_load_voltage(adm: &AdmittanceMatrix, v0: C64) -> Result<DVector<C64>, PowerFlowError> {
    let rhs = -&adm.ybar * v0;
    adm.y
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or(PowerFlowError::Singular)
}

pub fn build_linear_model(adm: &AdmittanceMatrix, v0: C64) -> Result<LinearModel, PowerFlowError> {
    let z = adm
        .y
        .clone()
        .try_inverse()
        .ok_or(PowerFlowError::Singular)?;
    let vbar = no_load_voltage(adm, v0)?;
    let zr = z.map(|c| c.re);
    let zi = z.map(|c| c.im);
    let rho = vbar.map(|c| c.norm());
    let xi_bar = vbar.map(|c| c.arg().cos());
    let theta_bar = vbar.map(|c| c.arg().sin());

    // Column scaling by cos θ̄ / ρ̄ and sin θ̄ / ρ̄.
    let cos_over_rho = xi_bar.component_div(&rho);
    let sin_over_rho = theta_bar.component_div(&rho);
    let scale_cols = |m: &DMatrix<f64>, s: &DVector<f64>| {
        let mut out = m.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            col *= s[j];
        }
        out
    };
    let r = scale_cols(&zr, &cos_over_rho) - scale_cols(&zi, &sin_over_rho);
    let b = scale_cols(&zi, &cos_over_rho) + scale_cols(&zr, &sin_over_rho);

    Ok(LinearModel {
        r,
        b,
        a: rho,
        vbar,
        zr,
        zi,
        xi_bar,
        theta_bar,
    })
}

/// `R p + B q + a`.
pub fn predict_voltage_magnitude(lm: &LinearModel, inj: &PowerInjection) -> DVector<f64> {
    &lm.r * &inj.p + &lm.b * &inj.q + &lm.a
}

/// Offsets `c_n = ρ̄_n − Σ_{i ∉ 𝒢} (r_{n,i} P_ℓ,i + b_{n,i} Q_ℓ,i)` for every
/// monitored bus. Loads at DER buses are excluded from the sum.
pub fn constraint_offsets(
    lm: &LinearModel,
    loads: &LoadProfile,
    der_nodes: &[BusId],
    monitored: &[BusId],
) -> DVector<f64> {
    let n = lm.n();
    let mut is_der = vec![false; n];
    for d in der_nodes {
        is_der[d.reduced_index()] = true;
    }
    DVector::from_iterator(
        monitored.len(),
        monitored.iter().map(|m| {
            let row = m.reduced_index();
            let sum: f64 = (0..n)
                .filter(|&i| !is_der[i])
                .map(|i| lm.r[(row, i)] * loads.p[i] + lm.b[(row, i)] * loads.q[i])
                .sum();
            lm.a[row] - sum
        }),
    )
}
