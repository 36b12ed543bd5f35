//! Compares the linear magnitude model with the AC power flow on the
//! 36-bus feeder as the injections grow.
//!
//! ```text
//! cargo run --example linearization
//! ```

use nalgebra::DVector;
use opf_pursuit::cases;
use opf_pursuit::feeder::build_admittance;
use opf_pursuit::powerflow::{
    build_linear_model, predict_voltage_magnitude, solve_ac, PowerInjection, VoltageProfile,
};

fn main() {
    let feeder = cases::feeder36();
    let adm = build_admittance(&feeder).unwrap();
    let v0 = feeder.slack_voltage;
    let lm = build_linear_model(&adm, v0).unwrap();
    let n = adm.n();

    println!(
        "no-load magnitudes: min {:.5}, max {:.5}",
        lm.a.min(),
        lm.a.max()
    );
    println!("{:>8} {:>12} {:>12}", "scale", "max |error|", "max |V| ac");
    // uniform generation at unity power factor with a lagging load pattern
    let p_shape = DVector::from_fn(n, |i, _| if i % 3 == 0 { 1.0 } else { -0.4 });
    let q_shape = DVector::from_fn(n, |i, _| if i % 3 == 0 { 0.0 } else { -0.15 });
    for scale in [0.005, 0.01, 0.02, 0.05, 0.1] {
        let inj = PowerInjection::new(&p_shape * scale, &q_shape * scale);
        let ac = solve_ac(&adm, &inj, v0, &VoltageProfile::flat(n, v0), 1e-12, 1000).unwrap();
        let lin = predict_voltage_magnitude(&lm, &inj);
        let err = (&lin - &ac.voltages.rho).amax();
        println!("{scale:>8} {err:>12.3e} {:>12.5}", ac.voltages.rho.max());
    }
}
