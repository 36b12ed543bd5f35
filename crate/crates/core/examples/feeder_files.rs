//! Writes the built-in feeders and a generated scenario to disk, reads them
//! back and checks that nothing changed.
//!
//! ```text
//! cargo run --example feeder_files [dir]
//! ```

use std::fs::File;
use std::path::PathBuf;

use opf_pursuit::cases;
use opf_pursuit::feeder::{build_admittance, FeederFile};
use opf_pursuit::sim::{generate_scenario, Scenario, ScenarioKind, ScenarioSpec};

fn main() {
    let dir: PathBuf = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("opfp-files"), PathBuf::from);
    std::fs::create_dir_all(&dir).unwrap();

    for (name, model) in [
        ("tb1.toml", cases::two_bus()),
        ("feeder36.toml", cases::feeder36()),
    ] {
        let path = dir.join(name);
        std::fs::write(&path, FeederFile::from(&model).to_toml()).unwrap();
        let back = FeederFile::read(&path).unwrap().into_model();
        let diff = (build_admittance(&model).unwrap().full()
            - build_admittance(&back).unwrap().full())
        .camax();
        println!(
            "{}: {} buses, admittance difference {diff:.1e}",
            path.display(),
            back.n_nodes
        );
    }

    let feeder = cases::feeder36();
    let spec = ScenarioSpec {
        horizon_s: 60.0,
        ..Default::default()
    };
    let sc = generate_scenario(ScenarioKind::CloudTransient, &feeder, 1, &spec);
    let path = dir.join("cloud.csv");
    sc.write_csv(&feeder, File::create(&path).unwrap()).unwrap();
    let back = Scenario::read_csv(&feeder, File::open(&path).unwrap(), spec.tau).unwrap();
    println!(
        "{}: {} steps, identical after reading back: {}",
        path.display(),
        back.n_steps(),
        back == sc
    );
}
