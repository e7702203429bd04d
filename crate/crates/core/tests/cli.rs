//! End-to-end runs of the `triad-lab` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use proptest::prelude::*;
use triad_lab::cli::config::{parse_config, Command as Cmd, Settings};
use triad_lab::triad::FormulaVariant;

const REFERENCE: &str = "gamma1 = -2.0\ngamma2 = 1.0\ngamma3 = 1.0\n\
                         psi02_re = 1.0\npsi03_re = 0.6\ndelta1 = 1.0\n";

fn run(dir: &Path, command: &str, config: &str, extra: &[&str]) -> (Output, PathBuf) {
    let cfg = dir.join(format!("{command}.toml"));
    fs::write(&cfg, config).unwrap();
    let prefix = dir.join(command);
    let output = Command::new(env!("CARGO_BIN_EXE_triad-lab"))
        .arg(command)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&prefix)
        .args(extra)
        .output()
        .unwrap();
    (output, prefix)
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn report(prefix: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(with_suffix(prefix, ".report.json")).unwrap()).unwrap()
}

#[test]
fn verify_passes_for_the_consistent_constants() {
    let dir = tempfile::tempdir().unwrap();
    let (out, prefix) = run(dir.path(), "verify", REFERENCE, &[]);
    let r = report(&prefix);
    assert_eq!(out.status.code(), Some(0), "{r:#}");
    assert_eq!(r["pass"], true);
    for key in [
        "max_rel_amp_err",
        "measured_period",
        "predicted_period_as_printed",
        "predicted_period_oracle_consistent",
        "period_ratio",
        "hamiltonian_drift",
        "manley_rowe_drift",
    ] {
        assert!(r[key].is_number(), "{key} missing");
    }
    let ratio = r["period_ratio"].as_f64().unwrap();
    assert!((ratio - 2f64.sqrt()).abs() < 1e-6, "{ratio}");
    assert!(r["max_rel_amp_err"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn verify_fails_for_the_printed_constants() {
    let dir = tempfile::tempdir().unwrap();
    let (out, prefix) = run(dir.path(), "verify", REFERENCE, &["--variant", "as-printed"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&prefix);
    assert_eq!(r["pass"], false);
    assert!(r["max_rel_amp_err"].as_f64().unwrap() > 0.1);
}

#[test]
fn verify_with_grid_checks_the_simulator() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!(
        "{REFERENCE}alpha1 = 1.0\nalpha2 = 0.5\nalpha3 = 0.5\nn = 64\nlength = {}\ndt = 0.001\n",
        4.0 * std::f64::consts::PI
    );
    let (out, prefix) = run(dir.path(), "verify", &config, &[]);
    let r = report(&prefix);
    assert_eq!(out.status.code(), Some(0), "{r:#}");
    assert!(r["pde_max_rel_err"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn closed_form_with_no_samples_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!("{REFERENCE}t_end = 1.0\nsample_count = 0\n");
    let (out, prefix) = run(dir.path(), "closed-form", &config, &[]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(with_suffix(&prefix, ".csv")).unwrap();
    assert_eq!(csv, "t,f1_sq,f2_sq,f3_sq,nonphysical\n");
}

#[test]
fn closed_form_flags_nonphysical_samples() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!("{REFERENCE}t_end = 2.0\nsample_count = 101\nvariant = \"as-printed\"\n");
    let (out, prefix) = run(dir.path(), "closed-form", &config, &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(report(&prefix)["nonphysical_samples"].as_u64().unwrap() > 0);
}

#[test]
fn integrate_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!("{REFERENCE}t_end = 3.0\nsample_count = 31\ntol = 1e-11\n");
    let (out, prefix) = run(dir.path(), "integrate", &config, &[]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(with_suffix(&prefix, ".trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,re_f1,im_f1,re_f2,im_f2,re_f3,im_f3,H_re,H_im"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 31);
    assert!(rows[0].starts_with("0.0000000000000000e0,"));
}

#[test]
fn simulate_rejects_incommensurate_domain() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!("{REFERENCE}n = 32\nlength = 10.0\ndt = 0.01\nt_end = 0.1\n");
    let (out, prefix) = run(dir.path(), "simulate", &config, &[]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&prefix);
    assert_eq!(r["pass"], false);
    assert!(r["error"].as_str().unwrap().contains("multiple"));
}

#[test]
fn simulate_writes_snapshots_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!(
        "{REFERENCE}alpha1 = 1.0\nn = 32\nlength = {}\ndt = 0.01\nt_end = 0.1\nsnapshot_every = 5\n",
        4.0 * std::f64::consts::PI
    );
    let (out, prefix) = run(dir.path(), "simulate", &config, &[]);
    assert_eq!(out.status.code(), Some(0));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(with_suffix(&prefix, ".manifest.json")).unwrap()).unwrap();
    let files = manifest["files"].as_array().unwrap();
    assert_eq!(files.len(), 3);
    assert_eq!(manifest["times"].as_array().unwrap().len(), 3);
    let snap = fs::read_to_string(dir.path().join(files[2].as_str().unwrap())).unwrap();
    assert!(snap.starts_with("x,re_psi1,im_psi1,re_psi2,im_psi2,re_psi3,im_psi3\n"));
    assert_eq!(snap.lines().count(), 33);
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!("{REFERENCE}t_end = 1.0\ngamma4 = 0.5\n");
    let (out, prefix) = run(dir.path(), "closed-form", &config, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma4"));
    assert!(report(&prefix)["error"].as_str().unwrap().contains("gamma4"));
}

#[test]
fn acoustic_gravity_reports_printed_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let (out, prefix) = run(dir.path(), "acoustic-gravity", "h = 4000.0\nphi0_g1 = 1.0\nphi0_g2 = 0.5\n", &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&prefix);
    let printed = r["printed_rate_coefficient"].as_f64().unwrap();
    let built = r["as_printed_rate_coefficient"].as_f64().unwrap();
    assert!(((printed - built) / printed).abs() <= 1e-14);
    assert!((r["solution"]["k"].as_f64().unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn acoustic_gravity_off_resonance_fails() {
    let dir = tempfile::tempdir().unwrap();
    let config = "h = 4000.0\nomega = 0.02\nphi0_g1 = 1.0\nphi0_g2 = 0.5\n";
    let (out, prefix) = run(dir.path(), "acoustic-gravity", config, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(report(&prefix)["error"].as_str().unwrap().contains("omega = 0.0350"));
}

#[test]
fn convergence_reports_orders() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!(
        "{REFERENCE}alpha1 = 1.0\nalpha2 = 0.5\nalpha3 = 0.5\nn = 32\nlength = {}\ndt = 0.05\nt_end = 1.0\n",
        4.0 * std::f64::consts::PI
    );
    let (_, prefix) = run(dir.path(), "convergence", &config, &[]);
    let r = report(&prefix);
    assert_eq!(r["errors"].as_array().unwrap().len(), 3);
    assert_eq!(r["orders"].as_array().unwrap().len(), 2);
}

#[test]
fn identical_configs_give_identical_bytes() {
    let config = format!(
        "{REFERENCE}alpha1 = 1.0\nn = 32\nlength = {}\ndt = 0.01\nt_end = 0.5\nsnapshot_every = 10\nsample_count = 17\nseed = 9\n",
        4.0 * std::f64::consts::PI
    );
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for cmd in ["closed-form", "integrate", "simulate", "verify"] {
        run(a.path(), cmd, &config, &[]);
        run(b.path(), cmd, &config, &[]);
    }
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() > 10);
    for name in names {
        assert_eq!(
            fs::read(a.path().join(&name)).unwrap(),
            fs::read(b.path().join(&name)).unwrap(),
            "{name:?}"
        );
    }
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, any::<f64>().prop_filter("finite", |x| x.is_finite())]
}

prop_compose! {
    fn settings()(
        reals in proptest::collection::vec(proptest::option::of(finite()), 21),
        counts in proptest::collection::vec(proptest::option::of(0usize..100_000), 3),
        variant in proptest::option::of(prop_oneof![
            Just(FormulaVariant::AsPrinted),
            Just(FormulaVariant::OracleConsistent)
        ]),
        seed in proptest::option::of(0..=i64::MAX as u64),
    ) -> Settings {
        let mut r = reals.into_iter();
        let mut next = || r.next().unwrap();
        Settings {
            gamma1: next(), gamma2: next(), gamma3: next(),
            alpha1: next(), alpha2: next(), alpha3: next(),
            delta1: next(),
            psi02_re: next(), psi02_im: next(), psi03_re: next(), psi03_im: next(),
            t_end: next(), tol: next(),
            n: counts[0],
            length: next(), dt: next(),
            snapshot_every: counts[1],
            c: next(), omega: next(), h: next(), g: next(),
            phi0_g1: next(), phi0_g2: next(),
            variant,
            seed,
            sample_count: counts[2],
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn settings_round_trip(s in settings()) {
        let text = s.to_toml();
        let back = Settings::parse(&text).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(back.to_toml(), text);
    }
}

#[test]
fn run_config_round_trip() {
    let text = format!("{REFERENCE}t_end = 2.5\nvariant = \"as-printed\"\nseed = 3\n");
    let cfg = parse_config(&text, Cmd::ClosedForm).unwrap();
    let again = parse_config(&cfg.settings.to_toml(), Cmd::ClosedForm).unwrap();
    assert_eq!(cfg, again);
}
