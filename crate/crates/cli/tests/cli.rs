use std::path::Path;
use std::process::{Command, Output};

use tridot_core::calibration::{upup_decay, CalibrationContext};
use tridot_core::{ChargeNoise, HubbardParams};

fn tridot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tridot")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn field(report: &str, key: &str) -> f64 {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("{key} missing in {report}"))
        .parse()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn spectrum_lists_six_exact_eigenpairs() {
    let text = stdout(&tridot(&["spectrum"]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "vector,analytic,numeric,residual");
    assert_eq!(lines.len(), 7);
    for row in &lines[1..] {
        let cols: Vec<f64> = row.split(',').skip(1).map(|c| c.parse().unwrap()).collect();
        assert!((cols[0] - cols[1]).abs() < 1e-10, "{row}");
        assert!(cols[2] < 1e-10, "{row}");
    }
}

#[test]
fn spectrum_without_exchange_is_pure_hopping() {
    let text = stdout(&tridot(&["spectrum", "--j", "0"]));
    let values: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(values.iter().any(|v| (v + 2.0).abs() < 1e-12));
    assert!(values.iter().any(|v| (v - 2.0).abs() < 1e-12));
}

#[test]
fn noiseless_figure_has_expected_columns() {
    let text = stdout(&tridot(&["fig", "2"]));
    let header = text.lines().next().unwrap();
    assert_eq!(
        header,
        "time_scaled,time_ns,upup_self,updown_target_analytic,updown_target_numeric"
    );
    assert!(!text.contains('\r'));
    let first: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert_eq!(first[2], 1.0);
}

#[test]
fn noisy_figure_is_reproducible_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "o.toml", "tau_max = 2.0\nrecord_stride = 10\n[charge]\namplitude = 0.01\n");
    let run = |workers: &str| stdout(&tridot(&["fig", "3", "--config", &cfg, "--mc", "9", "--seed", "4", "--workers", workers]));
    let one = run("1");
    assert_eq!(one, run("1"));
    assert_eq!(one, run("3"));
    assert!(one.lines().next().unwrap().ends_with("upup_self_stderr,updown_target_stderr"));
    let other = stdout(&tridot(&["fig", "3", "--config", &cfg, "--mc", "9", "--seed", "5"]));
    assert_ne!(one, other);
}

#[test]
fn calibration_record_replays() {
    let dir = tempfile::tempdir().unwrap();
    let record = dir.path().join("cal.toml");
    let out = tridot(&["calibrate", "--target", "10", "--seed", "1", "--out", record.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table: toml::Table = std::fs::read_to_string(&record).unwrap().parse().unwrap();
    let get = |k: &str| table[k].as_float().unwrap();
    let hubbard: HubbardParams = table["hubbard"].clone().try_into().unwrap();
    let ctx = CalibrationContext {
        dt: get("dt"),
        n_mc: table["n_mc"].as_integer().unwrap() as usize,
        ..CalibrationContext::new(hubbard, table["seed"].as_integer().unwrap() as u64)
    };
    let fit = upup_decay(get("amplitude"), &ChargeNoise::default(), &ctx, get("window")).unwrap();
    assert_eq!(fit.decay, get("achieved_decay"));
    assert!((fit.decay - 10.0).abs() < 1.0, "{}", fit.decay);

    let cfg = write(dir.path(), "o.toml", "tau_max = 1.0\nrecord_stride = 10\n");
    let fig = stdout(&tridot(&[
        "fig", "3", "--config", &cfg, "--mc", "2", "--calibration", record.to_str().unwrap(),
    ]));
    assert!(fig.lines().count() > 2);
}

#[test]
fn calibration_rejects_non_positive_targets() {
    for target in ["0", "-1"] {
        let out = tridot(&["calibrate", "--target", target]);
        assert_eq!(out.status.code(), Some(2), "{target}");
    }
}

#[test]
fn gate_time_defaults() {
    let report = stdout(&tridot(&["gate-time"]));
    assert!((field(&report, "tau_star") - 6.2773).abs() < 1e-3, "{report}");
    assert!((field(&report, "joint") - 0.9757).abs() < 1e-3, "{report}");
    assert!(report.contains("reached_threshold = false"));
}

#[test]
fn gate_time_wide_window_finds_full_fidelity() {
    let report = stdout(&tridot(&["gate-time", "--window", "0", "50"]));
    assert!((field(&report, "tau_star") - 15.0 * std::f64::consts::PI).abs() < 1e-3, "{report}");
    assert!(report.contains("reached_threshold = true"));
}

#[test]
fn gate_time_models_agree_to_leading_order() {
    let hub = stdout(&tridot(&["gate-time", "--model", "hubbard"]));
    let eff = stdout(&tridot(&["gate-time", "--model", "effective"]));
    assert!((field(&hub, "tau_star") - field(&eff, "tau_star")).abs() < 0.1);
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["gate-time", "--window", "8", "0"][..],
        &["fig", "7"],
        &["evolve"],
        &["spectrum", "--t", "-1"],
    ] {
        assert_eq!(tridot(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn unknown_config_key_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "tau_mx = 1.0\n");
    assert_eq!(tridot(&["fig", "2", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn evolve_runs_a_free_form_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "exp.toml",
        r#"initial = "up_down"
targets = ["gate", "partial_swap"]
dt = 0.01
tau_max = 1.0
n_mc = 3
seed = 2
workers = 1
record_stride = 20
b_nuc = 0.05

[hubbard]
e = [0.0, 0.0, 0.0]
t_ac = 1.4142135623730951
t_cb = 1.4142135623730951
u = [20.0, 20.0, 20.0]
"#,
    );
    let out_path = dir.path().join("trace.csv");
    let out = tridot(&["evolve", "--config", &cfg, "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(out_path).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "time_scaled,time_ns,target,partial_swap,target_stderr,partial_swap_stderr"
    );
    assert_eq!(text.lines().count(), 7);
}
