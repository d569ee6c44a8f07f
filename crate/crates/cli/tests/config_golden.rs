//! Canonical config form against a checked-in golden file. Set
//! `ADIABAT_BLESS=1` to rewrite the golden file after an intended change.

use std::path::PathBuf;

use adiabat_cli::config::{parse_config, to_canonical};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

#[test]
fn canonical_form_matches_golden() {
    let text = std::fs::read_to_string(fixture("acceptance.toml")).unwrap();
    let cfg = parse_config(&text).unwrap();
    let canonical = to_canonical(&cfg);
    let golden = fixture("acceptance.canonical.toml");
    if std::env::var_os("ADIABAT_BLESS").is_some() {
        std::fs::write(&golden, &canonical).unwrap();
    }
    assert_eq!(canonical, std::fs::read_to_string(&golden).unwrap());
}

#[test]
fn canonical_form_round_trips() {
    let text = std::fs::read_to_string(fixture("acceptance.canonical.toml")).unwrap();
    let cfg = parse_config(&text).unwrap();
    assert_eq!(to_canonical(&cfg), text);
    let original =
        parse_config(&std::fs::read_to_string(fixture("acceptance.toml")).unwrap()).unwrap();
    assert_eq!(cfg, original);
}

#[test]
fn bundled_config_is_the_fixture() {
    let bundled = parse_config(adiabat_cli::suites::ACCEPTANCE_TOML).unwrap();
    let fixture =
        parse_config(&std::fs::read_to_string(fixture("acceptance.toml")).unwrap()).unwrap();
    assert_eq!(bundled, fixture);
}
