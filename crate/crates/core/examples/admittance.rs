//! Assembles the admittance matrix of the 36-bus feeder and prints its
//! partition and conditioning.
//!
//! ```text
//! cargo run --example admittance
//! ```

use opf_pursuit::cases;
use opf_pursuit::feeder::{build_admittance, validate_feeder};

fn main() {
    let feeder = cases::feeder36();
    assert!(validate_feeder(&feeder).is_empty());
    let adm = build_admittance(&feeder).expect("feeder is well formed");

    println!("buses: slack + {}", adm.n());
    println!("lines: {}", feeder.lines.len());
    println!("y00 = {:.3}", adm.y00);
    println!("rcond(Y) = {:.3e}", adm.rcond);

    let full = adm.full();
    let worst_row_sum = full
        .row_iter()
        .map(|r| r.iter().sum::<opf_pursuit::C64>().norm())
        .fold(0.0, f64::max);
    println!("largest |row sum| (shunt only): {worst_row_sum:.2e}");

    println!("first rows of Y:");
    for i in 0..4 {
        let row: Vec<String> = (0..4).map(|j| format!("{:>18.2}", adm.y[(i, j)])).collect();
        println!("  {}", row.join(" "));
    }
}
