use metspec::catalog::{check_example, CATALOG};
use metspec::config::{ExperimentConfig, ExperimentKind, Format};
use metspec::error::CliError;
use metspec::experiments;

fn parse_err(text: &str) -> String {
    match ExperimentConfig::parse(text) {
        Err(CliError::Usage(msg)) => msg,
        Err(other) => panic!("expected a usage error, got {other:?}"),
        Ok(_) => panic!("config should be rejected:\n{text}"),
    }
}

const DRIFT: &str = r#"
schema = 1
experiment = "drift"
# top
[space]
kind = "euclidean"
dim = 2
[[maps]]
kind = "translation"
offset = [3.0, 4.0]
"#;

/// `DRIFT` with extra top-level keys.
fn drift_with(top: &str) -> String {
    DRIFT.replace("# top", top)
}

#[test]
fn catalog_covers_every_experiment_once() {
    let kinds: Vec<_> = CATALOG.iter().map(|e| e.kind).collect();
    assert_eq!(kinds, ExperimentKind::ALL.to_vec());
    for entry in &CATALOG {
        let cfg = check_example(entry).unwrap_or_else(|e| panic!("{}: {e}", entry.kind.name()));
        assert_eq!(cfg.experiment, entry.kind);
    }
}

#[test]
fn defaults_fill_by_experiment() {
    let cfg = ExperimentConfig::parse(DRIFT).unwrap();
    assert_eq!(cfg.horizon, Some(1000));
    assert_eq!(cfg.samples, Some(1000));
    assert_eq!(cfg.seed, 0);
    let eps = cfg.eps_schedule.clone().unwrap();
    assert!(eps.windows(2).all(|w| w[1] < w[0]));
    assert_eq!(cfg.output.formats, vec![Format::Csv, Format::Json]);

    let thurston = ExperimentConfig::parse("schema = 1\nexperiment = \"thurston\"\n").unwrap();
    assert_eq!(thurston.horizon, None);
    let t = thurston.thurston.unwrap();
    assert_eq!((t.bound, t.pairs), (50, 100));
}

#[test]
fn unknown_keys_report_their_path() {
    let msg = parse_err(&DRIFT.replace("dim = 2", "dim = 2\nradius = 1.0"));
    assert!(msg.contains("space"), "{msg}");
    assert!(msg.contains("radius"), "{msg}");

    let msg = parse_err(&format!("{DRIFT}\n[tolerances]\nalgebra = 1e-9\n"));
    assert!(msg.contains("tolerances"), "{msg}");
}

#[test]
fn schema_version_is_enforced() {
    let msg = parse_err(&DRIFT.replace("schema = 1", "schema = 2"));
    assert!(msg.contains("schema"), "{msg}");
}

#[test]
fn invalid_values_are_rejected() {
    assert!(parse_err(&drift_with("horizon = 0")).contains("horizon"));
    assert!(parse_err(&drift_with("eps_schedule = [0.1, 0.2]")).contains("eps_schedule"));
    assert!(parse_err("schema = 1\nexperiment = \"drift\"\n").contains("space"));
    assert!(parse_err(&DRIFT.replace("\"drift\"", "\"wolff-denjoy\"")).contains("poincare-disk"));
    assert!(parse_err(&format!("{DRIFT}[expect]\nlyapunov = 1.0\n")).contains("lyapunov"));
    let no_matrices = "schema = 1\nexperiment = \"lyapunov\"\n[driver]\nprocess = { kind = \"iid\", weights = [1.0] }\n";
    assert!(parse_err(no_matrices).contains("driver.matrices"));
}

#[test]
fn maps_must_act_on_the_space() {
    let cfg = ExperimentConfig::parse(&DRIFT.replace(
        "\"translation\"\noffset = [3.0, 4.0]",
        "\"disk-rotation\"\nangle = 1.0",
    ))
    .unwrap();
    match experiments::validate(&cfg) {
        Err(CliError::Usage(msg)) => assert!(msg.contains("maps[0]"), "{msg}"),
        other => panic!("expected a usage error, got {other:?}"),
    }
}

#[test]
fn drift_of_a_translation_is_its_length() {
    let mut cfg = ExperimentConfig::parse(DRIFT).unwrap();
    cfg.horizon = Some(50);
    let out = experiments::run(&cfg).unwrap();
    assert!(out.passed());
    let tau = out
        .estimates
        .iter()
        .find(|e| e.name.ends_with("tau_hat"))
        .unwrap();
    assert!((tau.value - 5.0).abs() < 1e-12);
    let table = &out.tables[0];
    assert_eq!(
        table.header,
        ["k", "a_k", "a_k_over_k", "b_k", "record", "h_k"]
    );
    assert_eq!(table.rows.len(), 51);
}

#[test]
fn failing_expectation_fails_the_run() {
    let cfg = ExperimentConfig::parse(&drift_with("horizon = 50\n[expect]\ntau = 4.0")).unwrap();
    let out = experiments::run(&cfg).unwrap();
    assert!(!out.passed());
    assert!(out
        .checks
        .iter()
        .any(|c| !c.check.passed && c.check.name.contains("expect.tau")));
}

#[test]
fn invariants_on_the_disk_pass() {
    let entry = CATALOG
        .iter()
        .find(|e| e.kind == ExperimentKind::Invariants)
        .unwrap();
    let cfg = check_example(entry).unwrap();
    let out = experiments::run(&cfg).unwrap();
    let failed: Vec<_> = out
        .checks
        .iter()
        .filter(|c| !c.check.passed)
        .map(|c| &c.check.name)
        .collect();
    assert!(failed.is_empty(), "{failed:?}");
}

#[test]
fn wolff_denjoy_finds_the_attracting_point() {
    let entry = CATALOG
        .iter()
        .find(|e| e.kind == ExperimentKind::WolffDenjoy)
        .unwrap();
    let cfg = check_example(entry).unwrap();
    let out = experiments::run(&cfg).unwrap();
    assert!(out.passed());
    let get = |name: &str| out.estimates.iter().find(|e| e.name == name).unwrap().value;
    // z -> (z + 1/2)/(z/2 + 1) fixes 1 with derivative 1/3 there
    assert!((get("maps[0] mobius: zeta re") - 1.0).abs() < 1e-9);
    assert!(get("maps[0] mobius: zeta im").abs() < 1e-9);
    assert!((get("maps[0] mobius: tau_hat") - 3f64.ln()).abs() < 1e-3);
}
