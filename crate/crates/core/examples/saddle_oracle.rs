//! Solves the regularized saddle-point problem at one step of a cloud
//! transient on the 36-bus feeder, with both oracle methods.
//!
//! ```text
//! cargo run --release --example saddle_oracle [step]
//! ```

use std::time::Instant;

use opf_pursuit::cases;
use opf_pursuit::controller::{solve_saddle_oracle, OracleMethod, OracleOptions};
use opf_pursuit::sim::{generate_scenario, Network, ScenarioKind, ScenarioSpec, SimConfig};

fn main() {
    let step: usize = std::env::args()
        .nth(1)
        .map_or(10_000, |s| s.parse().expect("step index"));
    let net = Network::new(cases::feeder36()).unwrap();
    let sc = generate_scenario(
        ScenarioKind::CloudTransient,
        &net.feeder,
        0,
        &ScenarioSpec::default(),
    );
    let cfg = SimConfig::default();
    let problem = net.problem(&sc, step, &cfg);

    for method in [OracleMethod::Accelerated, OracleMethod::PrimalDual] {
        // the plain primal-dual iteration contracts at rho ~ 1 - 1e-8 with
        // these parameters, so it is capped and expected to stop short
        let opts = OracleOptions {
            method,
            max_iter: 200_000,
            ..Default::default()
        };
        let t = Instant::now();
        match solve_saddle_oracle(&problem, &opts) {
            Ok(sp) => {
                let y = problem.predicted_magnitudes(&sp.state.u);
                let curtailed: f64 = sp
                    .state
                    .u
                    .iter()
                    .zip(&problem.regions)
                    .map(|(u, r)| r.p_available - u.p)
                    .sum();
                let absorbed: f64 = sp.state.u.iter().map(|u| -u.q.min(0.0)).sum();
                println!(
                    "{method:?}: {} iterations in {:.2?}, residual {:.1e}",
                    sp.iterations,
                    t.elapsed(),
                    sp.residual
                );
                println!(
                    "  curtailed {curtailed:.4} pu, absorbed {absorbed:.4} pu, predicted max |V| {:.5}, max mu {:.3}",
                    y.max(),
                    sp.state.duals.mu.max()
                );
            }
            Err(e) => println!("{method:?}: {e}"),
        }
    }
}
