//! Projects a few setpoints onto each inverter operating region.
//!
//! ```text
//! cargo run --example projection
//! ```

use opf_pursuit::controller::{project_region, OperatingRegion, RegionKind, Setpoint};

fn main() {
    let points = [
        Setpoint::new(1.5, 0.0),
        Setpoint::new(0.9, 0.9),
        Setpoint::new(-0.3, -0.2),
        Setpoint::new(0.2, -2.0),
    ];
    let regions = [
        ("joint", OperatingRegion::new(RegionKind::Joint, 1.0, 0.8)),
        (
            "real only",
            OperatingRegion::new(RegionKind::RealOnly, 1.0, 0.8),
        ),
        (
            "reactive only",
            OperatingRegion::new(RegionKind::ReactiveOnly, 1.0, 0.8),
        ),
        (
            "joint, pf >= 0.9",
            OperatingRegion::joint(1.0, 0.8).with_power_factor_limit(0.4843),
        ),
    ];
    for (name, r) in &regions {
        println!("{name} (S = {}, P_av = {}):", r.s_rating, r.p_available);
        for u in points {
            let pu = project_region(u, r);
            println!(
                "  ({:>5.2}, {:>5.2}) -> ({:>7.4}, {:>7.4})",
                u.p, u.q, pu.p, pu.q
            );
        }
    }
}
