//! Cloud transient on the 36-bus feeder under no control, local Volt/VAr
//! droop and the primal-dual pursuit controller.
//!
//! ```text
//! cargo run --release --example closed_loop [seed]
//! ```

use opf_pursuit::cases;
use opf_pursuit::sim::{
    generate_scenario, run_closed_loop, Network, ScenarioKind, ScenarioSpec, SimConfig, Strategy,
};

fn main() {
    let seed: u64 = std::env::args()
        .nth(1)
        .map_or(0, |s| s.parse().expect("seed"));
    let net = Network::new(cases::feeder36()).unwrap();
    let spec = ScenarioSpec::default();
    let sc = generate_scenario(ScenarioKind::CloudTransient, &net.feeder, seed, &spec);
    // inverters reach half of a new setpoint per step
    let cfg = SimConfig {
        actuation_lag: 0.5,
        ..Default::default()
    };
    println!(
        "{} steps of {} s, limits [{}, {}]",
        sc.n_steps(),
        spec.tau,
        spec.v_min,
        spec.v_max
    );
    println!(
        "{:>8} {:>10} {:>14} {:>12} {:>12}",
        "strategy", "max |V|", "steps > v_max", "curtailed", "cost"
    );
    for strategy in [Strategy::None, Strategy::Droop, Strategy::Pursuit] {
        let traj = run_closed_loop(&net, &sc, strategy, &cfg, seed).unwrap();
        let max_v = traj
            .records
            .iter()
            .map(|r| r.max_voltage())
            .fold(0.0, f64::max);
        let over = traj
            .records
            .iter()
            .filter(|r| r.max_voltage() > r.v_max + 5e-4)
            .count();
        let curtailed: f64 = traj
            .records
            .iter()
            .zip(&sc.p_av)
            .map(|(r, p_av)| {
                r.applied
                    .iter()
                    .zip(p_av.iter())
                    .map(|(u, p)| p - u.p)
                    .sum::<f64>()
            })
            .sum::<f64>()
            * spec.tau
            / 3600.0;
        let cost: f64 = traj.records.iter().map(|r| r.cost).sum();
        println!(
            "{:>8} {max_v:>10.5} {over:>14} {curtailed:>9.4} puh {cost:>12.2}",
            strategy.name()
        );
    }
}
