use std::path::Path;
use std::process::{Command, Output};

use wavesrc_core::scenario::{builtin, point3, GridSpec, SourceSpec};
use wavesrc::scenario_file::{load_scenario, scenario_json};

fn wavesrc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavesrc")).args(args).output().unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn repo_root() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR")).parent().unwrap().parent().unwrap()
}

/// One slowly moving point source on a coarse grid over a short horizon.
fn small_scenario(dir: &Path) -> String {
    let mut scn = point3();
    scn.name = "small".into();
    scn.horizon = 16.0;
    scn.grid = GridSpec { radius: 2.0, n_polar: 10, n_azimuth: 20 };
    scn.sources = vec![SourceSpec::point("0.4", "-0.3", "0.3*sin(0.2*t)", "eta((t-1.0)/3.0)").unwrap()];
    scn.recon.t_end = Some(12.0);
    let path = dir.join("small.json");
    std::fs::write(&path, scenario_json(&scn)).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn shipped_scenarios_match_builtins() {
    for name in ["point3", "dipole3"] {
        let loaded = load_scenario(&repo_root().join(format!("scenarios/{name}.json"))).unwrap();
        assert_eq!(loaded, builtin(name).unwrap(), "{name}");
    }
}

#[test]
fn unknown_scenario_is_an_error() {
    let out = wavesrc(&["simulate", "--scenario", "no_such_scenario", "--out", "/dev/null"]);
    assert!(!out.status.success());
    assert!(text(&out.stderr).contains("error:"), "{}", text(&out.stderr));
}

#[test]
fn invalid_override_is_rejected() {
    let out = wavesrc(&["simulate", "--scenario", "point3", "--noise", "-0.1", "--out", "/dev/null"]);
    assert!(!out.status.success());
    let out = wavesrc(&["simulate", "--scenario", "point3", "--step4", "sideways", "--out", "/dev/null"]);
    assert!(!out.status.success());
    assert!(text(&out.stderr).contains("step4"), "{}", text(&out.stderr));
}

#[test]
fn verify_reports_every_suite() {
    let out = wavesrc(&["verify", "--quick"]);
    let stdout = text(&out.stdout);
    let lines: Vec<&str> = stdout.lines().collect();
    for name in ["quadrature", "retarded-time", "image-series", "synthetic-exactness", "determinant-identity", "source-count"] {
        assert!(lines.iter().any(|l| l.contains(name)), "{name} missing from\n{stdout}");
    }
    assert!(lines.iter().all(|l| l.starts_with("PASS ") || l.starts_with("FAIL ")));
    assert_eq!(out.status.success(), lines.iter().all(|l| l.starts_with("PASS ")));
}

#[test]
fn staged_commands_match_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let scn = small_scenario(dir.path());
    let d = |s: &str| dir.path().join(s).to_string_lossy().into_owned();

    let out = wavesrc(&["pipeline", "--scenario", &scn, "--out", &d("all"), "--threads", "1"]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert!(stdout.contains("is 0.000e0"), "march not causal:\n{stdout}");
    assert!(stdout.contains("(K=1)"), "{stdout}");

    let field = d("field.csv");
    assert!(wavesrc(&["simulate", "--scenario", &scn, "--out", &field]).status.success());
    let out = wavesrc(&["reconstruct", "--scenario", &scn, "--field", &field, "--out", &d("staged")]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(text(&out.stderr).is_empty(), "unexpected warning: {}", text(&out.stderr));
    let out = wavesrc(&["report", "--scenario", &scn, "--out", &d("staged")]);
    assert!(out.status.success(), "{}", text(&out.stderr));

    for f in ["frames.csv", "tracks.csv", "errors.txt", "errors.csv", "series.csv", "dets.csv", "counts.csv"] {
        let a = std::fs::read(dir.path().join("all").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("staged").join(f)).unwrap();
        assert!(a == b, "{f} differs");
    }
    assert_eq!(std::fs::read(&field).unwrap(), std::fs::read(dir.path().join("all/field.csv")).unwrap());

    // The same field under a different scenario triggers the provenance warning.
    let out = wavesrc(&["reconstruct", "--scenario", &scn, "--noise", "0.01", "--field", &field, "--out", &d("other")]);
    assert!(out.status.success());
    assert!(text(&out.stderr).contains("warning"), "{}", text(&out.stderr));
}
