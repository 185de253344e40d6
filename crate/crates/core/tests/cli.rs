use std::path::PathBuf;
use std::process::Command as Process;

use frobkit::cli::{run, run_source, Command, Flags, Outcome, Verdict};
use frobkit::manifest::{Manifest, ManifestError, Value};
use proptest::prelude::*;

fn manifest(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/manifests").join(name)
}

fn run_file(cmd: Command, name: &str) -> Outcome {
    run(cmd, &manifest(name), &Flags::default())
}

fn check<'a>(out: &'a Outcome, title: &str, name: &str) -> &'a frobkit::report::Check {
    let r = out.document.reports.iter().find(|r| r.title == title).unwrap_or_else(|| panic!("no report {title}"));
    r.checks.iter().find(|c| c.name == name).unwrap_or_else(|| panic!("no check {name} in {title}"))
}

/// Re-run `cmd` on the manifest emitted by `out`.
fn recheck(out: &Outcome, cmd: Command) -> Outcome {
    let m = out.emitted.as_ref().expect("construction emits a manifest");
    run_source(cmd, &m.to_string(), &Flags::default())
}

#[test]
fn check_frobenius_on_the_cubic_is_exact() {
    let out = run_file(Command::CheckFrobenius, "cubic.fk");
    assert_eq!(out.document.exit_code(), 0, "{}", out.document);
    assert_eq!(check(&out, "wdvv", "wdvv").residual, 0.0);
    let text = out.document.to_string();
    assert!(text.contains(r#"["wdvv", "vanish", "0e0", "1e-9", "pass"]"#), "{text}");
    assert!(text.contains(r#"tool = "frobkit 0.1.0""#));
    assert!(text.contains(r#"verdict = "pass""#));
}

#[test]
fn curved_bundle_fails_condition_two() {
    let out = run_file(Command::BundleCheck, "curved_bundle.fk");
    assert_eq!(out.document.exit_code(), 1);
    let c = check(&out, "conditions_multiplication", "condition 2");
    assert!(!c.pass && c.residual > 1e-3);
    assert!(check(&out, "conditions_multiplication", "condition 1").pass);
    assert!(out.document.to_string().contains(r#"["condition 2", "vanish", "1e0", "1e-9", "fail"]"#));
}

#[test]
fn violated_relation_coefficients_are_an_input_error() {
    let out = run_file(Command::Iterate, "bad_coefficients.fk");
    assert_eq!(out.document.verdict(), Verdict::Error);
    assert_eq!(out.document.exit_code(), 2);
    let err = out.document.error.as_deref().unwrap();
    assert!(err.contains("g_ij = g_ji = g_(min(i,j),r)"), "{err}");
    assert!(out.emitted.is_none());
}

#[test]
fn add_variable_output_is_frobenius() {
    let out = run_file(Command::AddVariable, "cubic_extensions.fk");
    assert_eq!(out.document.exit_code(), 0);
    let m = out.emitted.as_ref().unwrap();
    assert_eq!(m.kind().unwrap(), "structure");
    assert_eq!(m.top["chart"], Value::list(["t", "tau1"]));
    let again = recheck(&out, Command::CheckFrobenius);
    assert_eq!(again.document.exit_code(), 0, "{}", again.document);
}

#[test]
fn iterate_matches_the_closed_form_and_rechecks() {
    let out = run_file(Command::Iterate, "cubic_extensions.fk");
    assert_eq!(out.document.exit_code(), 0, "{}", out.document);
    assert_eq!(check(&out, "closed_form", "metric").residual, 0.0);
    assert_eq!(check(&out, "closed_form", "multiplication").residual, 0.0);
    let m = out.emitted.as_ref().unwrap();
    assert_eq!(m.top["chart"], Value::list(["t", "tau1", "tau2"]));
    assert_eq!(recheck(&out, Command::CheckFrobenius).document.exit_code(), 0);
}

#[test]
fn extend_trivial_output_rechecks_with_its_euler_field() {
    let out = run_file(Command::ExtendTrivial, "plane_extension.fk");
    assert_eq!(out.document.exit_code(), 0, "{}", out.document);
    let m = out.emitted.as_ref().unwrap();
    assert!(m.sections.contains_key("euler"));
    assert_eq!(recheck(&out, Command::CheckFrobenius).document.exit_code(), 0);
    assert_eq!(recheck(&out, Command::CheckEuler).document.exit_code(), 0);
}

#[test]
fn legendre_with_the_unit_gives_a_frobenius_metric() {
    let out = run_file(Command::Legendre, "cubic_extensions.fk");
    assert_eq!(out.document.exit_code(), 0, "{}", out.document);
    assert_eq!(recheck(&out, Command::CheckFrobenius).document.exit_code(), 0);
}

#[test]
fn saito_request_round_trips_through_reconstruction() {
    let out = run_file(Command::SaitoCheck, "saito_request.fk");
    assert_eq!(out.document.exit_code(), 0, "{}", out.document);
    let again = recheck(&out, Command::SaitoCheck);
    assert_eq!(again.document.exit_code(), 0);
    let rec = recheck(&out, Command::SaitoReconstruct);
    assert_eq!(rec.document.exit_code(), 0, "{}", rec.document);
    assert_eq!(recheck(&rec, Command::CheckFrobenius).document.exit_code(), 0);
}

#[test]
fn detailed_example_request_emits_a_rechecked_instance() {
    let out = run_file(Command::MainTheorem, "detailed_example.fk");
    assert_eq!(out.document.exit_code(), 0, "{}", out.document);
    assert!(check(&out, "main_theorem", "agreement").pass);
    let m = out.emitted.as_ref().unwrap();
    assert_eq!(m.kind().unwrap(), "ttstar");
    let again = recheck(&out, Command::MainTheorem);
    assert_eq!(again.document.exit_code(), 0, "{}", again.document);
    let names = |o: &Outcome| o.document.reports.iter().flat_map(|r| r.checks.iter().map(|c| c.name.clone())).collect::<Vec<_>>();
    assert_eq!(names(&out), names(&again));
}

#[test]
fn semisimple_tt_instance_defaults_to_the_diagonal_real_structure() {
    let out = run_file(Command::TtstarCheck, "semisimple_tt.fk");
    assert_eq!(out.document.exit_code(), 0, "{}", out.document);
    assert!(check(&out, "tt_star", "second").pass);
}

#[test]
fn flat_bundle_passes_bundle_flatness_and_corectat() {
    for cmd in [Command::BundleCheck, Command::FlatnessConditions, Command::Corectat] {
        let out = run_file(cmd, "flat_bundle.fk");
        assert_eq!(out.document.exit_code(), 0, "{:?}: {}", cmd, out.document);
    }
}

#[test]
fn wrong_kind_and_missing_keys_are_named() {
    let out = run_file(Command::BundleCheck, "cubic.fk");
    assert_eq!(out.document.exit_code(), 2);
    assert!(out.document.error.as_deref().unwrap().contains("kind bundle"));
    let src = "kind = \"potential\"\nchart = [\"t\"]\n[potential]\nmetric = [[\"1\"]]\nunit = \"t\"\n";
    let out = run_source(Command::CheckFrobenius, src, &Flags::default());
    assert_eq!(out.document.error.as_deref(), Some("[potential] is missing `potential`"));
    let out = run(Command::CheckFrobenius, &manifest("absent.fk"), &Flags::default());
    assert_eq!(out.document.exit_code(), 2);
}

#[test]
fn expression_errors_name_the_entry() {
    let src = "kind = \"potential\"\nchart = [\"t\"]\n[potential]\nmetric = [[\"1\"]]\npotential = \"t^3/6 + s\"\nunit = \"t\"\n";
    let out = run_source(Command::CheckFrobenius, src, &Flags::default());
    let err = out.document.error.unwrap();
    assert!(err.starts_with("[potential] potential:"), "{err}");
}

#[test]
fn precondition_failures_exit_two() {
    let src = "kind = \"extension-request\"\nchart = [\"u1\", \"u2\"]\n[options]\ndomain = \"complex\"\n\
               [request]\nconstruction = \"detailed-example\"\neta = \"u1+u2\"\nk0 = 1\n";
    let out = run_source(Command::MainTheorem, src, &Flags::default());
    assert_eq!(out.document.exit_code(), 2);
    assert!(out.document.error.unwrap().contains("k0 = 1"));
}

#[test]
fn syntax_errors_carry_line_and_column() {
    let src = "kind = \"potential\"\nchart = [\"t\"\n\n[potential]\n";
    let out = run_source(Command::CheckFrobenius, src, &Flags::default());
    assert_eq!(out.document.exit_code(), 2);
    let err = out.document.error.unwrap();
    assert!(err.starts_with("4:1:"), "{err}");
    match Manifest::parse("kind = \"a\"\nx = 1 2\n") {
        Err(ManifestError::Syntax { line: 2, col: 7, .. }) => {}
        other => panic!("{other:?}"),
    }
    assert!(matches!(Manifest::parse("a = 1\na = 2\n"), Err(ManifestError::Syntax { line: 2, .. })));
    assert!(matches!(Manifest::parse("[s]\n[s]\n"), Err(ManifestError::Syntax { line: 2, .. })));
    assert!(matches!(Manifest::parse("a = \"x\\n\"\n"), Err(ManifestError::Syntax { line: 1, .. })));
    assert!(matches!(Manifest::parse("a = 1.5\n"), Err(ManifestError::Syntax { line: 1, .. })));
}

#[test]
fn emitted_manifests_print_canonically() {
    for (cmd, name) in [
        (Command::AddVariable, "cubic_extensions.fk"),
        (Command::ExtendTrivial, "plane_extension.fk"),
        (Command::SaitoCheck, "saito_request.fk"),
        (Command::MainTheorem, "detailed_example.fk"),
    ] {
        let out = run_file(cmd, name);
        let first = out.emitted.unwrap().to_string();
        let second = Manifest::parse(&first).unwrap().to_string();
        assert_eq!(first, second, "{name}");
    }
    let text = std::fs::read_to_string(manifest("curved_bundle.fk")).unwrap();
    let once = Manifest::parse(&text).unwrap().to_string();
    assert_eq!(Manifest::parse(&once).unwrap().to_string(), once);
}

#[test]
fn reports_are_deterministic_and_follow_the_seed() {
    let a = run_file(Command::TtstarCheck, "semisimple_tt.fk").document.to_string();
    let b = run_file(Command::TtstarCheck, "semisimple_tt.fk").document.to_string();
    assert_eq!(a, b);
    let flags = Flags { seed: Some(7), ..Flags::default() };
    let c = run(Command::TtstarCheck, &manifest("semisimple_tt.fk"), &flags).document.to_string();
    assert_ne!(a, c);
    assert!(c.contains("seed = 7"));
}

#[test]
fn flags_override_manifest_options() {
    let src = "kind = \"potential\"\nchart = [\"t\"]\n[options]\npoints = 3\ntol = \"1e-12\"\n\
               [potential]\nmetric = [[\"1\"]]\npotential = \"t^3/6\"\nunit = \"t\"\n";
    let out = run_source(Command::CheckFrobenius, src, &Flags::default());
    assert_eq!(out.document.opts.points, 3);
    assert_eq!(out.document.opts.tol, 1e-12);
    assert_eq!(out.document.reports[0].points.len(), 3);
    let out = run_source(Command::CheckFrobenius, src, &Flags { points: Some(5), ..Flags::default() });
    assert_eq!(out.document.reports[0].points.len(), 5);
}

#[test]
fn binary_exit_codes_and_output_files() {
    let exe = env!("CARGO_BIN_EXE_frobkit");
    let status = |args: &[&str]| Process::new(exe).args(args).output().unwrap();
    let path = |n: &str| manifest(n).to_string_lossy().into_owned();

    let ok = status(&["check-frobenius", &path("cubic.fk")]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).starts_with("kind = \"report\""));
    assert_eq!(status(&["bundle-check", &path("curved_bundle.fk")]).status.code(), Some(1));
    let bad = status(&["iterate", &path("bad_coefficients.fk")]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("coefficient constraint"));

    let dir = tempfile::tempdir().unwrap();
    let emitted = dir.path().join("out.fk");
    let report = dir.path().join("report.txt");
    let e = emitted.to_string_lossy().into_owned();
    let r = report.to_string_lossy().into_owned();
    let run1 = status(&["add-variable", &path("cubic_extensions.fk"), "--emit", &e, "--report", &r, "--points", "8"]);
    assert_eq!(run1.status.code(), Some(0));
    assert!(run1.stdout.is_empty());
    let first = std::fs::read_to_string(&report).unwrap();
    assert!(first.contains("points = 8"));
    assert_eq!(status(&["check-frobenius", &e]).status.code(), Some(0));
    status(&["add-variable", &path("cubic_extensions.fk"), "--emit", &e, "--report", &r, "--points", "8"]);
    assert_eq!(std::fs::read_to_string(&report).unwrap(), first);
}

fn value_strategy() -> impl Strategy<Value = Value> {
    let leaf = prop_oneof![
        any::<i64>().prop_map(Value::Int),
        "[ -~]{0,12}".prop_map(Value::Str),
        "[a-z0-9^*/+()\"\\\\-]{0,10}".prop_map(Value::Str),
    ];
    leaf.prop_recursive(3, 24, 4, |inner| prop::collection::vec(inner, 0..4).prop_map(Value::List))
}

fn manifest_strategy() -> impl Strategy<Value = Manifest> {
    let key = "[a-z_][a-z0-9_.-]{0,6}";
    let section = || prop::collection::btree_map(key, value_strategy(), 0..4);
    (section(), prop::collection::btree_map(key, section(), 0..3)).prop_map(|(top, sections)| Manifest { top, sections })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn printing_then_parsing_is_the_identity(m in manifest_strategy()) {
        let text = m.to_string();
        let back = Manifest::parse(&text).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(back.to_string(), text);
    }
}
