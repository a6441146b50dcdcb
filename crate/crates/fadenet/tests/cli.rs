use std::path::Path;
use std::process::{Command, Output};

fn fadenet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fadenet"))
        .args(args)
        .env_remove("FADENET_OUTPUT_DIR")
        .output()
        .expect("run fadenet")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV with the `#` block and column line stripped.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn columns(text: &str) -> String {
    text.lines()
        .find(|l| !l.starts_with('#'))
        .unwrap()
        .to_owned()
}

#[test]
fn solve_threshold_reports_root_and_residual() {
    let o = fadenet(&["solve-threshold", "--n", "1000"]);
    assert!(o.status.success());
    let r = &rows(&stdout(&o))[0];
    let delta: f64 = r[1].parse().unwrap();
    let residual: f64 = r[2].parse().unwrap();
    assert!((delta - 4.300).abs() < 5e-3, "{delta}");
    assert!(residual.abs() < 1e-9);
}

#[test]
fn asymptotics_row() {
    let o = fadenet(&["asymptotics", "--n", "22026"]);
    assert!(o.status.success());
    let r = &rows(&stdout(&o))[0];
    let delta: f64 = r[1].parse().unwrap();
    let k: f64 = r[3].parse().unwrap();
    let rbar: f64 = r[4].parse().unwrap();
    assert!((delta - 6.0879).abs() < 1e-3);
    assert!((k - 50.0).abs() < 0.5);
    assert!((rbar - 0.2).abs() < 1e-3);
}

#[test]
fn oracle_size_guard_is_runtime_error() {
    let o = fadenet(&["oracle", "--n", "25"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("20 links"));
}

#[test]
fn oracle_rows() {
    let o = fadenet(&["oracle", "--n", "8", "--trials", "3", "--seed", "2"]);
    assert!(o.status.success());
    let rs = rows(&stdout(&o));
    assert_eq!(rs.len(), 3);
    for r in rs {
        let ratio: f64 = r[9].parse().unwrap();
        assert!(ratio > 0.0 && ratio <= 1.0);
        assert_eq!(r[6], "256");
    }
}

#[test]
fn config_errors_exit_two() {
    for args in [
        vec!["simulate", "--n", "0"],
        vec![
            "simulate",
            "--n",
            "100",
            "--delta",
            "2",
            "--threshold",
            "optimize",
        ],
        vec!["simulate", "--n", "100", "--threshold", "fixed"],
        vec!["simulate", "--n", "100", "--mode", "sparse"],
        vec!["simulate", "--n", "100", "--xi", "lots"],
        vec!["simulate"],
        vec!["sweep", "--trials", "10"],
        vec!["simulate", "--n", "40000", "--mode", "dense"],
    ] {
        let o = fadenet(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn minimal_config_file_gets_documented_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(
        &path,
        r#"{"subcommand": "simulate", "n": 1000, "trials": 100, "seed": 1}"#,
    )
    .unwrap();
    let o = fadenet(&["run", "--config", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let echo = text.lines().nth(1).unwrap();
    for needle in [
        r#""snr":1.0"#,
        r#""fading":"rayleigh""#,
        r#""threshold":"optimize""#,
        r#""mode":"virtual""#,
    ] {
        assert!(echo.contains(needle), "{echo}");
    }
    assert_eq!(rows(&text).len(), 100);
    assert_eq!(
        columns(&text),
        "n,seed,stream,delta,k_active,throughput_nats,rate_per_link_nats,bound_Ta,bound_satisfied"
    );
}

#[test]
fn unknown_config_key_and_subcommand_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"subcommand": "simulate", "n": 10, "sed": 3}"#).unwrap();
    let o = fadenet(&["simulate", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sed"));

    let other = dir.path().join("other.json");
    std::fs::write(&other, r#"{"subcommand": "sweep"}"#).unwrap();
    let o = fadenet(&["simulate", "--config", other.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flags_override_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(
        &path,
        r#"{"subcommand": "simulate", "n": 500, "trials": 4, "seed": 1}"#,
    )
    .unwrap();
    let o = fadenet(&[
        "simulate",
        "--config",
        path.to_str().unwrap(),
        "--seed",
        "9",
        "--trials",
        "2",
    ]);
    let rs = rows(&stdout(&o));
    assert_eq!(rs.len(), 2);
    assert!(rs.iter().all(|r| r[1] == "9"));
}

#[test]
fn bits_flag_converts_at_output() {
    let nats = stdout(&fadenet(&[
        "simulate", "--n", "300", "--trials", "5", "--seed", "4",
    ]));
    let bits = stdout(&fadenet(&[
        "simulate", "--n", "300", "--trials", "5", "--seed", "4", "--bits",
    ]));
    assert!(columns(&bits).contains("throughput_bits"));
    for (a, b) in rows(&nats).iter().zip(rows(&bits)) {
        let t: f64 = a[5].parse().unwrap();
        let tb: f64 = b[5].parse().unwrap();
        assert!((tb - t / std::f64::consts::LN_2).abs() < 1e-12);
    }
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_fadenet"))
        .args(["solve-threshold", "--n", "100,1000"])
        .env("FADENET_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(dir.path().join("solve-threshold.csv")).unwrap();
    assert_eq!(rows(&text).len(), 2);
}

#[test]
fn explicit_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nested").join("t.csv");
    let o = fadenet(&[
        "optimize-threshold",
        "--n",
        "1000",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(Path::new(&out)).unwrap();
    assert!(text.starts_with("# fadenet "));
    assert_eq!(
        columns(&text),
        "n,method,delta,Ta_nats,predicted_active,predicted_rate_per_link_nats"
    );
}

#[test]
fn simulate_output_is_byte_identical_across_threads() {
    let args = |t: &'static str| {
        vec![
            "simulate",
            "--n",
            "2000,20000",
            "--trials",
            "40",
            "--seed",
            "6",
            "--threads",
            t,
        ]
    };
    let a = fadenet(&args("1")).stdout;
    let b = fadenet(&args("3")).stdout;
    let c = fadenet(&args("8")).stdout;
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn sweep_columns_and_header() {
    let o = fadenet(&["sweep", "--n", "100,1000", "--trials", "30", "--seed", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().next().unwrap().starts_with("# fadenet "));
    assert!(text.lines().nth(1).unwrap().starts_with("# config {"));
    assert_eq!(
        columns(&text),
        "n,trials,mean_T,sd_T,mean_k,sd_k,mean_rbar,ratio_T,ratio_k,ratio_rbar,ci95_T"
    );
    assert_eq!(rows(&text).len(), 2);
}

#[test]
fn verify_bounds_reports_every_check() {
    let o = fadenet(&[
        "verify-bounds",
        "--n",
        "2000",
        "--trials",
        "300",
        "--samples",
        "20000",
        "--seed",
        "1",
    ]);
    let code = o.status.code().unwrap();
    assert!(
        code == 0 || code == 3,
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let rs = rows(&stdout(&o));
    assert_eq!(rs.len(), 11);
    let any_failed = rs.iter().any(|r| r[1] == "false");
    assert_eq!(code == 3, any_failed);
}
