use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn msqg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msqg-wn"))
        .current_dir(dir)
        .env("MSQG_WN_JOBS", "1")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn rejects_out_of_range_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    let o = msqg(dir.path(), &["kernel", "eval", "--epsilon", "1.2", "--point", "0.3,0.4", "--out", "k.csv"]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("epsilon") && msg.contains("(0, 1)"), "{msg}");
    assert!(!dir.path().join("k.csv").exists());
}

#[test]
fn rejects_out_of_range_epsilon_in_config() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.json"), r#"{"params": {"epsilon": 1.2, "seed": 3}}"#).unwrap();
    let o = msqg(dir.path(), &["dyn", "vortex", "--config", "c.json", "--out", "v.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("epsilon = 1.2"));
}

#[test]
fn stochastic_commands_need_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let o = msqg(dir.path(), &["noise", "sample", "--out", "s.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"));
    // smooth initial data draws nothing
    let o = msqg(
        dir.path(),
        &["dyn", "galerkin", "--initial", "two-mode", "--N", "4", "--steps", "4", "--out", "g.csv"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn unknown_config_parameters_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.json"), r#"{"params": {"epsilonn": 0.5}}"#).unwrap();
    let o = msqg(dir.path(), &["kernel", "eval", "--config", "c.json", "--out", "k.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("epsilonn"));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("c.json"),
        r#"{"command": "noise sample", "params": {"side": 4.0, "cutoff": 1, "seed": 5}}"#,
    )
    .unwrap();
    let o = msqg(dir.path(), &["noise", "sample", "--config", "c.json", "--N", "2", "--out", "s.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let echo: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("s.config.json")).unwrap()).unwrap();
    assert_eq!(echo["params"]["cutoff"], 2);
    assert_eq!(echo["params"]["side"], 4.0);
    assert_eq!(echo["params"]["seed"], 5);
    // 25 modes for cutoff 2, plus the header
    assert_eq!(fs::read_to_string(dir.path().join("s.csv")).unwrap().lines().count(), 26);
}

#[test]
fn config_echo_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = msqg(
        dir.path(),
        &["noise", "covariance-test", "--draws", "500", "--seed", "11", "--out", "a.csv"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let first = fs::read(dir.path().join("a.csv")).unwrap();
    fs::rename(dir.path().join("a.csv"), dir.path().join("a0.csv")).unwrap();
    let o = msqg(dir.path(), &["noise", "covariance-test", "--config", "a.config.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(fs::read(dir.path().join("a.csv")).unwrap(), first);
}

#[test]
fn csv_headers() {
    let dir = tempfile::tempdir().unwrap();
    let o = msqg(dir.path(), &["kernel", "eval", "--epsilon", "0.5", "--point", "0.3,0.4", "--out", "k.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("k.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("x,y,kx,ky,norm,shell_change,converged"));
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn dump_writes_wnf1() {
    let dir = tempfile::tempdir().unwrap();
    let o = msqg(
        dir.path(),
        &["noise", "dump", "--M", "4", "--N", "3", "--grid", "8", "--seed", "1", "--out", "f.wnf"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let bytes = fs::read(dir.path().join("f.wnf")).unwrap();
    assert_eq!(&bytes[..4], b"WNF1");
    assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 8);
    assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 8);
    assert_eq!(f64::from_le_bytes(bytes[12..20].try_into().unwrap()), 4.0);
    assert_eq!(bytes.len(), 20 + 8 * 64);
}

#[test]
fn galerkin_trajectory_is_ndjson() {
    let dir = tempfile::tempdir().unwrap();
    let o = msqg(
        dir.path(),
        &[
            "dyn", "galerkin", "--N", "4", "--dt", "0.01", "--steps", "10", "--sample-every", "5",
            "--seed", "2", "--out", "g.csv",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("g.ndjson")).unwrap();
    let records: Vec<serde_json::Value> =
        text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 3);
    assert_eq!(records[2]["t"].as_f64().unwrap(), 0.1);
    let e0 = records[0]["l2_norm_sq"].as_f64().unwrap();
    let e1 = records[2]["l2_norm_sq"].as_f64().unwrap();
    assert!((e1 - e0).abs() < 1e-9 * e0);
}

#[test]
fn verify_invariance_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let o = msqg(
        dir.path(),
        &[
            "verify", "invariance", "--N", "6", "--ensemble", "300", "--t-final", "0.2", "--dt",
            "0.01", "--panel", "6", "--seed", "20240601", "--out", "inv.csv",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("inv.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], true);
    let csv = fs::read_to_string(dir.path().join("inv.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 18);
}

#[test]
fn failing_verification_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // an unreachable tolerance
    let o = msqg(dir.path(), &["verify", "residual", "--tolerance", "1e-30", "--out", "r.csv"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], false);
}

#[test]
fn jobs_do_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec![
            "verify", "vortex-marginals", "--N", "16", "--ensemble", "120", "--t-final", "0.02",
            "--dt", "0.01", "--panel", "3", "--seed", "9", "--out", out,
        ]
    };
    let o = msqg(dir.path(), &args("a.csv"));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut with_jobs = vec!["--jobs", "3"];
    with_jobs.extend(args("b.csv"));
    let o = msqg(dir.path(), &with_jobs);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        fs::read(dir.path().join("a.csv")).unwrap(),
        fs::read(dir.path().join("b.csv")).unwrap()
    );
}
