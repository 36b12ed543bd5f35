use std::path::Path;

use opf_pursuit::cases;
use opf_pursuit::feeder::{build_admittance, FeederError, FeederFile, FeederModel};

/// Lossless line whose charging cancels the series admittance at bus 1.
const CANCELLING_SHUNT: &str = r#"
n_nodes = 1
monitored_nodes = [1]

[slack]
magnitude = 1.0

[[line]]
from = 0
to = 1
r = 0.0
x = 0.01
b_shunt = 200.0

[[der]]
node = 1
rating = 1.0
"#;

#[test]
fn cancelling_shunt_is_a_degenerate_network() {
    let model = FeederFile::parse(CANCELLING_SHUNT).unwrap().into_model();
    let err = build_admittance(&model).unwrap_err();
    assert!(matches!(err, FeederError::Degenerate { .. }));
    assert!(err.to_string().contains("degenerate network"));
}

#[test]
fn slightly_off_cancellation_is_fine() {
    let text = CANCELLING_SHUNT.replace("b_shunt = 200.0", "b_shunt = 199.0");
    let model = FeederFile::parse(&text).unwrap().into_model();
    assert!(build_admittance(&model).is_ok());
}

#[test]
fn cli_reports_degenerate_network() {
    let dir = tempfile::TempDir::new().unwrap();
    let path = dir.path().join("degenerate.toml");
    std::fs::write(&path, CANCELLING_SHUNT).unwrap();
    let o = std::process::Command::new(env!("CARGO_BIN_EXE_opfp"))
        .args(["validate", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("degenerate network"));
}

fn round_trip(model: &FeederModel) {
    let text = FeederFile::from(model).to_toml();
    let back = FeederFile::parse(&text).unwrap().into_model();
    let a = build_admittance(model).unwrap();
    let b = build_admittance(&back).unwrap();
    assert_eq!(back.n_nodes, model.n_nodes);
    assert_eq!(back.ders, model.ders);
    assert_eq!(back.monitored_nodes, model.monitored_nodes);
    assert!((a.full() - b.full()).camax() <= 1e-9 * a.full().camax());
}

#[test]
fn built_in_feeders_survive_a_file_round_trip() {
    round_trip(&cases::two_bus());
    round_trip(&cases::feeder36());
    for seed in 0..20 {
        round_trip(&cases::random_radial(seed, 12));
    }
}

#[test]
fn shipped_files_match_the_built_in_feeders() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    for (name, model) in [
        ("tb1.toml", cases::two_bus()),
        ("feeder36.toml", cases::feeder36()),
    ] {
        let file = FeederFile::read(dir.join(name)).unwrap().into_model();
        let a = build_admittance(&model).unwrap().full();
        let b = build_admittance(&file).unwrap().full();
        assert!((a - b).camax() <= 1e-9, "{name}");
    }
}
