//! Local Volt/VAr droop without deadband.

use serde::{Deserialize, Serialize};

use crate::controller::{OperatingRegion, Setpoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DroopCurve {
    /// Magnitude at which `Q = 0`.
    pub v_zero: f64,
    /// Magnitude at which absorption saturates at `−√(S² − P_av²)`.
    pub v_sat: f64,
    /// Mirror the curve around `v_zero` so undervoltage injects `Q`.
    pub symmetric: bool,
}

impl Default for DroopCurve {
    fn default() -> Self {
        Self {
            v_zero: 1.0,
            v_sat: 1.05,
            symmetric: true,
        }
    }
}

impl DroopCurve {
    pub fn is_valid(&self) -> bool {
        self.v_zero.is_finite() && self.v_sat.is_finite() && self.v_zero < self.v_sat
    }
}

/// Reactive setpoint for a measured magnitude `v`.
pub fn droop_q(v: f64, region: &OperatingRegion, curve: &DroopCurve) -> f64 {
    let q_max = region.q_headroom();
    let slope = (v - curve.v_zero) / (curve.v_sat - curve.v_zero);
    if slope >= 0.0 {
        -q_max * slope.min(1.0)
    } else if curve.symmetric {
        q_max * (-slope).min(1.0)
    } else {
        0.0
    }
}

/// Full droop setpoint: real power is never curtailed.
pub fn droop_setpoint(v: f64, region: &OperatingRegion, curve: &DroopCurve) -> Setpoint {
    Setpoint::new(region.p_available, droop_q(v, region, curve))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_points() {
        let r = OperatingRegion::joint(1.0, 0.6);
        let d = DroopCurve::default();
        assert_eq!(droop_q(1.0, &r, &d), 0.0);
        assert!((droop_q(1.05, &r, &d) + 0.8).abs() < 1e-12);
        assert!((droop_q(1.025, &r, &d) + 0.4).abs() < 1e-12);
        assert!((droop_q(1.2, &r, &d) + 0.8).abs() < 1e-12);
        assert!((droop_q(0.95, &r, &d) - 0.8).abs() < 1e-12);
        let one_sided = DroopCurve {
            symmetric: false,
            ..d
        };
        assert_eq!(droop_q(0.95, &r, &one_sided), 0.0);
    }

    #[test]
    fn monotone_and_inside_region() {
        let d = DroopCurve::default();
        for pav in [0.0, 0.3, 0.9, 1.0] {
            let r = OperatingRegion::new(crate::controller::RegionKind::ReactiveOnly, 1.0, pav);
            let mut prev = f64::INFINITY;
            for k in 0..=200 {
                let v = 0.9 + k as f64 * 1e-3;
                let q = droop_q(v, &r, &d);
                assert!(q <= prev);
                assert!(r.contains(droop_setpoint(v, &r, &d), 1e-12));
                prev = q;
            }
        }
    }
}
