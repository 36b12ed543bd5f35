//! Built-in test networks.

use nalgebra::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::controller::RegionKind;
use crate::feeder::{BusId, Der, FeederModel, LineSegment};
use crate::C64;

/// VA base of [`feeder36`].
pub const FEEDER36_BASE_VA: f64 = 12.0e6;

/// Nodes hosting the 18 PV inverters of [`feeder36`].
pub const FEEDER36_DER_NODES: [usize; 18] = [
    4, 7, 10, 13, 17, 20, 22, 23, 26, 28, 29, 30, 31, 32, 33, 34, 35, 36,
];

fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// One line `0–1` with `z = 0.01 + j0.01`, a joint-control DER at bus 1
/// rated 1.2 pu, bus 1 monitored, `V₀ = 1∠0`.
pub fn two_bus() -> FeederModel {
    FeederModel {
        n_nodes: 1,
        lines: vec![LineSegment::new(0, 1, c(0.01, 0.01))],
        slack_voltage: c(1.0, 0.0),
        ders: vec![Der {
            node: BusId(1),
            rating: 1.2,
            kind: RegionKind::Joint,
        }],
        monitored_nodes: vec![BusId(1)],
        base_power: 1.0e6,
    }
}

/// [`two_bus`] with a 6 pu inverter, large enough to push bus 1 above
/// 1.05 pu when it injects most of its rating.
pub fn two_bus_der() -> FeederModel {
    let mut f = two_bus();
    f.ders[0].rating = 6.0;
    f
}

/// `0 – 1 – 2` with equal impedances, DER at bus 2, both buses monitored.
pub fn three_bus_chain(z: C64) -> FeederModel {
    FeederModel {
        n_nodes: 2,
        lines: vec![LineSegment::new(0, 1, z), LineSegment::new(1, 2, z)],
        slack_voltage: c(1.0, 0.0),
        ders: vec![Der {
            node: BusId(2),
            rating: 1.0,
            kind: RegionKind::Joint,
        }],
        monitored_nodes: vec![BusId(1), BusId(2)],
        base_power: 1.0e6,
    }
}

/// Inverter rating of the `i`-th PV system (0-based) of [`feeder36`], in kVA.
pub fn feeder36_rating_kva(i: usize) -> f64 {
    match i {
        2 => 300.0,
        14 | 15 => 350.0,
        _ => 200.0,
    }
}

/// Synthetic 36-bus radial feeder: a 12-bus trunk with four laterals, PV
/// inverters at the nodes of [`FEEDER36_DER_NODES`], every bus monitored.
pub fn feeder36() -> FeederModel {
    let trunk = c(0.036, 0.024);
    let lateral = c(0.042, 0.0264);
    let mut lines = Vec::new();
    for n in 1..=12 {
        lines.push(LineSegment::new(n - 1, n, trunk));
    }
    // (attachment bus, first bus, last bus)
    for (root, first, last) in [(3, 13, 17), (6, 18, 23), (9, 24, 30), (12, 31, 36)] {
        lines.push(LineSegment::new(root, first, lateral));
        for n in first + 1..=last {
            lines.push(LineSegment::new(n - 1, n, lateral));
        }
    }
    let ders = FEEDER36_DER_NODES
        .iter()
        .enumerate()
        .map(|(i, &node)| Der {
            node: BusId(node),
            rating: feeder36_rating_kva(i) * 1e3 / FEEDER36_BASE_VA,
            kind: RegionKind::Joint,
        })
        .collect();
    FeederModel {
        n_nodes: 36,
        lines,
        slack_voltage: c(1.0, 0.0),
        ders,
        monitored_nodes: (1..=36).map(BusId).collect(),
        base_power: FEEDER36_BASE_VA,
    }
}

/// Random radial feeder with `n` non-slack buses: bus `k` attaches to a
/// uniformly chosen earlier bus, `|z| ∈ [0.005, 0.05]` with `X/R ∈ [0.5, 2]`.
/// A joint DER sits at every third bus and every bus is monitored.
pub fn random_radial(seed: u64, n: usize) -> FeederModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lines = Vec::with_capacity(n);
    for k in 1..=n {
        let parent = rng.random_range(0..k);
        let mag = rng.random_range(0.005..=0.05);
        let angle = rng.random_range(0.5f64..=2.0).atan();
        lines.push(LineSegment::new(parent, k, Complex::from_polar(mag, angle)));
    }
    let ders = (1..=n)
        .filter(|k| k % 3 == 0 || n < 3)
        .map(|k| Der {
            node: BusId(k),
            rating: 1.0,
            kind: RegionKind::Joint,
        })
        .collect();
    FeederModel {
        n_nodes: n,
        lines,
        slack_voltage: c(1.0, 0.0),
        ders,
        monitored_nodes: (1..=n).map(BusId).collect(),
        base_power: 1.0e6,
    }
}
