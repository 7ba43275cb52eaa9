use std::path::Path;
use std::process::{Command, Output};

use ofdm_secrecy::harness::ExperimentConfig;

fn cli(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ofdm-secrecy"))
        .args(args)
        .current_dir(dir)
        .env_remove("OFDM_SECRECY_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn print_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&["print-config"], dir.path());
    assert!(out.status.success());
    let cfg = ExperimentConfig::from_toml(&stdout(&out)).unwrap();
    assert_eq!(cfg, ExperimentConfig::default());
}

#[test]
fn config_error_is_machine_readable() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "[channel]\nkind = \"iid-rayleigh\"\nn_carriers = 0\n").unwrap();
    let out = cli(&["compare", "--config", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let line = String::from_utf8_lossy(&out.stderr);
    let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    assert_eq!(v["error"], "config");
    assert!(v["message"].as_str().unwrap().contains("channel.n_carriers"));

    let missing = cli(&["solve", "--config", "nope.toml"], dir.path());
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn rate_sweep_honours_out_dir_env() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ofdm-secrecy"))
        .args(["rate-sweep", "--points", "5"])
        .current_dir(dir.path())
        .env("OFDM_SECRECY_OUT_DIR", "elsewhere")
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("elsewhere/rate_qpsk.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("p,i_legit,i_eave,secrecy_rate"));
    assert_eq!(lines.count(), 5);
}

#[test]
fn solve_emits_json_and_allocation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "budgets = [2.0]\n[channel]\nkind = \"iid-rayleigh\"\nn_carriers = 8\nseed = 3\n";
    std::fs::write(dir.path().join("c.toml"), cfg).unwrap();
    let out = cli(&["solve", "--config", "c.toml", "--out-dir", "o"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let json: serde_json::Value = serde_json::from_str(&text[text.find('{').unwrap()..]).unwrap();
    assert_eq!(json["powers"].as_array().unwrap().len(), 8);
    assert!(json["gap"].as_f64().unwrap() >= -1e-9);
    let csv = std::fs::read_to_string(dir.path().join("o/allocation.csv")).unwrap();
    assert!(csv.starts_with("carrier,h_gain,g_gain,power\n"));
}

#[test]
fn mi_sweep_and_bad_arguments() {
    let dir = tempfile::tempdir().unwrap();
    let ok = cli(&["mi-sweep", "--constellation", "qam16", "--points", "4", "--order", "80"], dir.path());
    assert!(ok.status.success());
    assert!(dir.path().join("out/mi_qam16.csv").is_file());
    let bad = cli(&["mi-sweep", "--gamma-min=-1"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    let unknown = cli(&["mi-sweep", "--constellation", "qam9"], dir.path());
    assert_eq!(unknown.status.code(), Some(1));
}

#[test]
fn bars_and_oracle_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "budgets = [0.1, 10.0]\n[channel]\nkind = \"iid-rayleigh\"\nn_carriers = 4\nseed = 2\n";
    std::fs::write(dir.path().join("c.toml"), cfg).unwrap();
    let out = cli(&["bars", "--config", "c.toml"], dir.path());
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("out/bars.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 4);

    let oracle = cli(&["oracle-check"], dir.path());
    assert!(oracle.status.success());
    assert!(stdout(&oracle).contains("31 of 31 passed"));
}
