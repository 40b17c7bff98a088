use whitham::config::RunConfig;
use whitham::verify::{instance_hash, run_checks, run_suite, CheckKind, CheckParams, SuiteReport};

const RESIDUE: &str = r#"{
    "M": 1,
    "charts": [{ "q": [2.0, 0.0], "r": [1.0, 0.0] }],
    "H": [[{ "j": 1, "k": 1, "c": [1.0, 0.0] }]]
}"#;

/// `z_0 = p + c/(p-q)`, `z_1 = s/(p-q) + k` with `H_1 = z_0 z_1` solves the
/// string equations exactly.
const MONOMIAL: &str = r#"{
    "M": 1,
    "charts": [{ "q": [0.03, 0.02], "rho": 0.4, "r": [0.7, 0.07],
                 "u": [[0.2, -0.1]], "tail": [[0.0015, 0.001]] }],
    "H": [[{ "j": 1, "k": 1, "c": [1.0, 0.0] }]]
}"#;

fn with_checks(base: &str, checks: &[CheckKind]) -> RunConfig {
    let mut cfg = RunConfig::from_json(base).unwrap();
    cfg.checks = checks.iter().map(|k| k.name().to_string()).collect();
    cfg
}

#[test]
fn empty_check_list_passes_trivially() {
    let report = run_suite(&with_checks(RESIDUE, &[])).unwrap();
    assert!(report.overall);
    assert!(report.checks.is_empty());
    let json = serde_json::to_value(&report).unwrap();
    assert_eq!(json["checks"], serde_json::json!([]));
}

#[test]
fn t00_constraint_on_the_residue_instance() {
    let report = run_suite(&with_checks(RESIDUE, &[CheckKind::T00Constraint])).unwrap();
    assert!(report.checks[0].max_error < 1e-10);
    assert!(report.overall);
}

#[test]
fn identity_chart_has_symmetric_grunsky_block() {
    let report = run_suite(&with_checks(RESIDUE, &[CheckKind::GrunskySymmetry])).unwrap();
    assert_eq!(report.checks[0].max_error, 0.0);
}

#[test]
fn every_check_passes_on_an_exact_monomial_solution() {
    let cfg = with_checks(MONOMIAL, &CheckKind::ALL);
    let report = run_suite(&cfg).unwrap();
    let failed: Vec<_> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| (c.name.clone(), c.max_error, c.error.clone()))
        .collect();
    assert!(failed.is_empty(), "{failed:?}");
    assert_eq!(report.checks.len(), 15);
}

#[test]
fn degenerate_generating_function_is_reported_not_raised() {
    let text = RESIDUE.replace(r#""j": 1, "k": 1"#, r#""j": 0, "k": 1"#);
    let cfg = with_checks(&text, &[CheckKind::T00Constraint, CheckKind::StringResidual]);
    let report = run_suite(&cfg).unwrap();
    assert!(!report.overall);
    assert!(report
        .checks
        .iter()
        .any(|c| c.error.as_deref().is_some_and(|e| e.starts_with("DegenerateH"))));
}

#[test]
fn unknown_check_names_are_rejected() {
    let mut cfg = RunConfig::from_json(RESIDUE).unwrap();
    cfg.checks = vec!["NoSuchCheck".into()];
    assert!(run_suite(&cfg).unwrap_err().to_string().contains("NoSuchCheck"));
}

#[test]
fn checks_leave_the_instance_untouched() {
    let cfg = RunConfig::from_json(MONOMIAL).unwrap();
    let inst = cfg.instance().unwrap();
    let params = CheckParams::default();
    let before = instance_hash(&inst.lax, &inst.h, &params);
    let kinds = [CheckKind::LocalCoords, CheckKind::StringResidual, CheckKind::ClosedFormF];
    let report = run_checks(&kinds, &inst.lax, &inst.h, &params);
    assert_eq!(report.instance, before);
    assert_eq!(instance_hash(&inst.lax, &inst.h, &params), before);
}

#[test]
fn reports_round_trip_through_json_exactly() {
    let cfg = with_checks(MONOMIAL, &[CheckKind::T00Constraint, CheckKind::LocalCoords]);
    let report = run_suite(&cfg).unwrap();
    let back: SuiteReport = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(back, report);
}
