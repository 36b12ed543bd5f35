//! Inverter operating regions and their Euclidean projections.

use serde::{Deserialize, Serialize};

use super::Setpoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    /// `0 ≤ P ≤ P_av`, `Q = 0`.
    RealOnly,
    /// `P = P_av`, `|Q| ≤ √(S² − P_av²)`.
    ReactiveOnly,
    /// `0 ≤ P ≤ P_av`, `P² + Q² ≤ S²`.
    #[default]
    Joint,
}

/// Feasible `(P, Q)` set of one inverter at one time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingRegion {
    pub kind: RegionKind,
    pub s_rating: f64,
    pub p_available: f64,
    /// Optional minimum power factor as `tan θ`, enforcing `|Q| ≤ tan θ · P`.
    /// Projection onto the restricted set is iterative and approximate.
    pub pf_tan: Option<f64>,
    clipped: bool,
}

impl OperatingRegion {
    /// Builds a region, clipping `p_available` into `[0, S]` where the kind
    /// requires it. [`OperatingRegion::was_clipped`] reports whether that
    /// happened.
    pub fn new(kind: RegionKind, s_rating: f64, p_available: f64) -> Self {
        let s_rating = s_rating.max(0.0);
        let mut p = p_available.max(0.0);
        let mut clipped = p != p_available;
        if kind != RegionKind::RealOnly && p > s_rating {
            p = s_rating;
            clipped = true;
        }
        Self {
            kind,
            s_rating,
            p_available: p,
            pf_tan: None,
            clipped,
        }
    }

    pub fn joint(s_rating: f64, p_available: f64) -> Self {
        Self::new(RegionKind::Joint, s_rating, p_available)
    }

    pub fn with_power_factor_limit(mut self, tan_theta: f64) -> Self {
        self.pf_tan = Some(tan_theta.max(0.0));
        self
    }

    pub fn was_clipped(&self) -> bool {
        self.clipped
    }

    /// Reactive headroom at full real output, `√(S² − P_av²)`.
    pub fn q_headroom(&self) -> f64 {
        (self.s_rating * self.s_rating - self.p_available * self.p_available)
            .max(0.0)
            .sqrt()
    }

    pub fn contains(&self, u: Setpoint, tol: f64) -> bool {
        let inside = match self.kind {
            RegionKind::RealOnly => {
                u.p >= -tol && u.p <= self.p_available + tol && u.q.abs() <= tol
            }
            RegionKind::ReactiveOnly => {
                (u.p - self.p_available).abs() <= tol && u.q.abs() <= self.q_headroom() + tol
            }
            RegionKind::Joint => {
                u.p >= -tol
                    && u.p <= self.p_available + tol
                    && u.p.hypot(u.q) <= self.s_rating + tol
            }
        };
        inside && self.pf_tan.map_or(true, |t| u.q.abs() <= t * u.p + tol)
    }
}

/// Euclidean projection of `u` onto `region`.
pub fn project_region(u: Setpoint, region: &OperatingRegion) -> Setpoint {
    match region.pf_tan {
        None => project_base(u, region),
        Some(t) => project_with_pf_limit(u, region, t),
    }
}

fn project_base(u: Setpoint, region: &OperatingRegion) -> Setpoint {
    let p_av = region.p_available;
    match region.kind {
        RegionKind::RealOnly => Setpoint::new(u.p.min(p_av).max(0.0), 0.0),
        RegionKind::ReactiveOnly => {
            let qmax = region.q_headroom();
            Setpoint::new(p_av, u.q.clamp(-qmax, qmax))
        }
        RegionKind::Joint => project_joint(u, region.s_rating, p_av),
    }
}

fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Disk of radius `s` intersected with the strip `0 ≤ P ≤ p_av`, with
/// `p_av ≤ s`.
///
/// The plane outside the set splits into five normal-cone regions:
///
/// * A: radial scaling onto the arc, `‖û‖ > S` and `S P̂ / ‖û‖ ≤ P_av`, `P̂ ≥ 0`;
/// * B: the corners `(P_av, ±√(S² − P_av²))`;
/// * C: the edge `P = P_av`;
/// * D: the edge `P = 0`;
/// * E: the corners `(0, ±S)`.
fn project_joint(u: Setpoint, s: f64, p_av: f64) -> Setpoint {
    let (p, q) = (u.p, u.q);
    let norm = p.hypot(q);
    let q_corner = (s * s - p_av * p_av).max(0.0).sqrt();

    if p <= 0.0 {
        // D or E (or the P = 0 edge of the set itself).
        return if q.abs() <= s {
            Setpoint::new(0.0, q)
        } else {
            Setpoint::new(0.0, sign(q) * s)
        };
    }
    if p <= p_av && norm <= s {
        return u;
    }
    if p > p_av && q.abs() <= q_corner {
        return Setpoint::new(p_av, q);
    }
    // Outside the disk with P̂ > 0: radial point unless it overshoots P_av.
    if s * p <= p_av * norm {
        let scale = s / norm;
        Setpoint::new(p * scale, q * scale)
    } else {
        Setpoint::new(p_av, sign(q) * q_corner)
    }
}

/// Projection onto `{|Q| ≤ t P}`.
fn project_pf_cone(u: Setpoint, t: f64) -> Setpoint {
    if u.q.abs() <= t * u.p {
        return u;
    }
    if u.p + t * u.q.abs() <= 0.0 {
        return Setpoint::new(0.0, 0.0);
    }
    let norm = (1.0 + t * t).sqrt();
    let (dp, dq) = (1.0 / norm, sign(u.q) * t / norm);
    let dot = u.p * dp + u.q * dq;
    Setpoint::new(dot * dp, dot * dq)
}

/// Dykstra's alternating projections between the base region and the
/// power-factor cone.
fn project_with_pf_limit(u: Setpoint, region: &OperatingRegion, t: f64) -> Setpoint {
    const MAX_ITER: usize = 10_000;
    const TOL: f64 = 1e-13;
    let mut x = u;
    let (mut pa, mut qa) = (0.0, 0.0);
    let (mut pc, mut qc) = (0.0, 0.0);
    for _ in 0..MAX_ITER {
        let y = project_base(Setpoint::new(x.p + pa, x.q + qa), region);
        pa = x.p + pa - y.p;
        qa = x.q + qa - y.q;
        let next = project_pf_cone(Setpoint::new(y.p + pc, y.q + qc), t);
        pc = y.p + pc - next.p;
        qc = y.q + qc - next.q;
        let change = (next.p - x.p).abs().max((next.q - x.q).abs());
        x = next;
        if change <= TOL && (x.p - y.p).abs().max((x.q - y.q).abs()) <= TOL {
            break;
        }
    }
    x
}
