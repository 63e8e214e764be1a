use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ffrelay"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ffrelay-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn small_config(dir: &std::path::Path) -> PathBuf {
    let mut cfg = ffrelay::Config::reference().with_relay_taps(2);
    cfg.n = 4;
    let p = dir.join("cfg.json");
    std::fs::write(&p, cfg.to_json().unwrap()).unwrap();
    p
}

#[test]
fn run_writes_csv_and_sidecar() {
    let dir = scratch("run");
    let cfg = small_config(&dir);
    let out = dir.join("taps.csv");
    let o = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--experiment", "mse_vs_taps", "--sweep", "1,2", "--trials", "2", "--seed", "4", "--max-iters", "3", "--out"])
        .arg(&out)
        .env("FFRELAY_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "experiment,trial,sweep_value,l_r,metric_name,metric_value,iterations,seed");
    assert_eq!(lines.count(), 2 * 2 * 5);
    let sidecar: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("taps.config.json")).unwrap()).unwrap();
    assert_eq!(sidecar["config"]["n"], 4);
    assert_eq!(sidecar["experiment"], "mse_vs_taps");
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("sum_mse") && stdout.contains("std_err"));
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let dir = scratch("det");
    let cfg = small_config(&dir);
    let mut outs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.join(format!("conv{threads}.csv"));
        let st = bin()
            .args(["run", "--config"])
            .arg(&cfg)
            .args(["--experiment", "convergence", "--sweep", "10,20", "--trials", "3", "--seed", "9", "--max-iters", "4", "--out"])
            .arg(&out)
            .env("FFRELAY_THREADS", threads)
            .status()
            .unwrap();
        assert!(st.success());
        outs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn usage_errors_exit_2() {
    let dir = scratch("usage");
    let out = dir.join("x.csv");
    let cases: Vec<Vec<&str>> = vec![
        vec!["run", "--experiment", "nope", "--sweep", "1"],
        vec!["run", "--experiment", "mse_vs_taps", "--sweep", "0"],
        vec!["run", "--experiment", "mse_vs_relay_power", "--sweep", "20", "--trials", "0"],
        vec!["run", "--experiment", "mse_vs_relay_power", "--sweep", "abc"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let st = bin().args(&args).arg("--out").arg(&out).status().unwrap();
        assert_eq!(st.code(), Some(2), "{args:?}");
    }
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"n\": 4}").unwrap();
    let st = bin().args(["run", "--experiment", "convergence", "--sweep", "20", "--config"]).arg(&bad).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn unwritable_output_exits_1() {
    let st = bin()
        .args(["run", "--experiment", "convergence", "--sweep", "20", "--trials", "1", "--max-iters", "1", "--out", "/nonexistent-dir/x.csv"])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(1));
}

#[test]
fn validate_passes() {
    let o = bin().args(["validate", "--seed", "3"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.lines().count() >= 9 && !text.contains("FAIL"));
}
