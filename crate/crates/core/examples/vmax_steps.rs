//! Steps the upper voltage limit down twice in the afternoon and prints how
//! quickly the pursuit controller brings the feeder under each new limit.
//!
//! ```text
//! cargo run --release --example vmax_steps
//! ```

use opf_pursuit::cases;
use opf_pursuit::sim::{
    generate_scenario, run_closed_loop, Network, ScenarioKind, ScenarioSpec, SimConfig, Strategy,
};

fn main() {
    let net = Network::new(cases::feeder36()).unwrap();
    let sc = generate_scenario(
        ScenarioKind::VmaxSteps,
        &net.feeder,
        0,
        &ScenarioSpec::default(),
    );
    let traj = run_closed_loop(&net, &sc, Strategy::Pursuit, &SimConfig::default(), 0).unwrap();

    let steps: Vec<usize> = (1..sc.n_steps())
        .filter(|&k| sc.v_max[k] != sc.v_max[k - 1])
        .collect();
    for k in steps {
        let excess = |j: usize| traj.records[j].max_voltage() - sc.v_max[j];
        let settle = (k..sc.n_steps()).find(|&j| excess(j) <= 5e-4);
        println!(
            "t = {:.0} s: v_max {:.3} -> {:.3}, excess {:.4} at the step, within 5e-4 after {:?} steps",
            sc.time(k),
            sc.v_max[k - 1],
            sc.v_max[k],
            excess(k),
            settle.map(|j| j - k)
        );
        for j in [k, k + 1, k + 2, k + 5, k + 20] {
            let r = &traj.records[j];
            println!(
                "    k+{:<3} max |V| {:.5}, max mu {:.3}",
                j - k,
                r.max_voltage(),
                r.duals.mu.max()
            );
        }
    }
}
