use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_quasifree"));
    c.env_remove("QUASIFREE_WORKERS");
    c
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("quasifree-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("-o").arg(out).output().unwrap()
}

fn read(p: PathBuf) -> String {
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    PathBuf::from(format!("{}.{ext}", stem.display()))
}

#[test]
fn spectrum_writes_csv_and_sidecar() {
    let stem = scratch("spectrum").join("spec");
    let o = run(&["spectrum", "--n", "6", "--field", "0:4:3", "--g", "0.05"], &stem);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(with_ext(&stem, "csv"));
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("B,adr,"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    let adr = rows[0].split(',').nth(1).unwrap();
    let mantissa = adr.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "17 significant digits in {adr}");
    let meta: serde_json::Value = serde_json::from_str(&read(with_ext(&stem, "meta.json"))).unwrap();
    assert_eq!(meta["task"], "spectrum");
    assert_eq!(meta["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(meta["config"]["model"]["n"], 6);
    assert_eq!(meta["config"]["channel"]["g"], 0.05);
}

#[test]
fn gapless_field_reports_degenerate_unperturbed_kernel() {
    let stem = scratch("degenerate").join("b0");
    let o = run(&["spectrum", "--n", "10", "--field", "0", "--format", "json"], &stem);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&read(with_ext(&stem, "json"))).unwrap();
    let at_zero = v[0]["hamiltonian_kernel"].as_u64().unwrap();
    let o = run(&["spectrum", "--n", "10", "--field", "1", "--format", "json"], &stem);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&read(with_ext(&stem, "json"))).unwrap();
    let at_one = v[0]["hamiltonian_kernel"].as_u64().unwrap();
    assert!(at_zero > at_one, "kernel at B = 0: {at_zero}, at B = 1: {at_one}");
}

#[test]
fn identical_seed_gives_identical_output() {
    let dir = scratch("determinism");
    let args = ["stochastic", "--n", "2", "--field", "1", "--n-traj", "64", "--t-end", "1", "--seed", "4"];
    let a = dir.join("a");
    let b = dir.join("b");
    assert_eq!(run(&args, &a).status.code(), Some(0));
    let o = bin().args(args).arg("-o").arg(&b).env("QUASIFREE_WORKERS", "1").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read(with_ext(&a, "csv")), read(with_ext(&b, "csv")));
}

#[test]
fn config_file_and_flag_overrides() {
    let dir = scratch("config");
    let cfg = dir.join("run.json");
    std::fs::write(
        &cfg,
        r#"{"task": "analytics", "model": {"kind": "xy", "n": 40, "gamma": 0.5}, "field": [0.5, 3.0],
            "channel": {"preset": "loss-gain", "g": 0.01, "mu": 1.0, "nu": 0.0}}"#,
    )
    .unwrap();
    let stem = dir.join("an");
    let o = bin().args(["analytics", "--config"]).arg(&cfg).args(["--gamma", "1"]).arg("-o").arg(&stem).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let meta: serde_json::Value = serde_json::from_str(&read(with_ext(&stem, "meta.json"))).unwrap();
    assert_eq!(meta["config"]["model"]["n"], 40);
    assert_eq!(meta["config"]["model"]["gamma"], 1.0);
    assert_eq!(read(with_ext(&stem, "csv")).lines().count(), 3);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = scratch("errors");
    let stem = dir.join("x");
    let o = run(&["sweep-adr", "--field", "0:6:0"], &stem);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["spectrum", "--preset", "nonsense"], &stem);
    assert_eq!(o.status.code(), Some(2));

    let cfg = dir.join("bad.json");
    std::fs::write(&cfg, r#"{"model": {"kind": "xy", "n": 4, "jj": 1.0}}"#).unwrap();
    let o = bin().args(["spectrum", "--config"]).arg(&cfg).arg("-o").arg(&stem).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("model"), "{}", String::from_utf8_lossy(&o.stderr));

    std::fs::write(&cfg, r#"{"task": "steady"}"#).unwrap();
    let o = bin().args(["spectrum", "--config"]).arg(&cfg).arg("-o").arg(&stem).output().unwrap();
    assert_eq!(o.status.code(), Some(2));

    let o = bin().args(["spectrum", "--n", "4"]).arg("-o").arg(&stem).env("QUASIFREE_WORKERS", "0").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_three() {
    // B = 2J closes the gap, so the ground state is not unique.
    let stem = scratch("numerical").join("x");
    let o = run(&["evolve", "--n", "8", "--gamma", "1", "--field", "2"], &stem);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn oracle_subcommand_passes_for_small_chain() {
    let stem = scratch("oracle").join("o");
    let o = run(&["oracle", "--n", "2", "--field", "1.5", "--preset", "paired", "--nu", "0.4"], &stem);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(read(with_ext(&stem, "csv")).contains("passed,true"));
}
