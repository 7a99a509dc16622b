use std::path::Path;
use std::process::{Command, Output};

use fwlds::analysis::power_descent_oracle;
use fwlds::solver::downsample_grid;
use fwlds::trace::{write_rows, TraceRow};
use serde_json::Value;

fn fwlds(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fwlds"))
        .args(args)
        .env("FWLDS_OUTPUT_ROOT", out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: {}\n{}",
            String::from_utf8_lossy(&o.stdout),
            String::from_utf8_lossy(&o.stderr)
        )
    })
}

fn write_csv(path: &Path, series: impl Iterator<Item = (u64, f64)>) {
    let rows: Vec<TraceRow> = series
        .map(|(t, f)| TraceRow {
            t,
            primal_gap: Some(f),
            fw_gap: f,
            dist: 1.0,
            gamma: 0.0,
            delta: None,
            h: None,
        })
        .collect();
    write_rows(std::fs::File::create(path).unwrap(), &rows).unwrap();
}

#[test]
fn run_scenario_writes_traces_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = fwlds(
        dir.path(),
        &["run", "--scenario", "stadium-fig1", "--t-max", "2000"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&o);
    assert_eq!(report["clean"], true);
    assert_eq!(report["runs"].as_array().unwrap().len(), 3);
    let run_dir = dir.path().join("stadium-fig1");
    for rule in ["ss", "ls", "ol-2"] {
        let csv = std::fs::read_to_string(run_dir.join(format!("stadium-fig1_{rule}_seed0.csv")))
            .unwrap();
        assert!(csv.starts_with("t,F,g,d,gamma,delta,h\n0,"));
        assert!(run_dir
            .join(format!("stadium-fig1_{rule}_seed0.iterates.csv"))
            .exists());
    }
    let on_disk: Value =
        serde_json::from_str(&std::fs::read_to_string(run_dir.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(on_disk, report);
}

#[test]
fn identical_runs_write_identical_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = fwlds(
            d.path(),
            &[
                "run",
                "--scenario",
                "heb-r2-ball",
                "--t-max",
                "5000",
                "--step",
                "ls",
            ],
        );
        assert_eq!(code(&o), 0);
    }
    let name = "heb-r2-ball/heb-r2-ball_ls_seed0.csv";
    let (x, y) = (
        std::fs::read(a.path().join(name)).unwrap(),
        std::fs::read(b.path().join(name)).unwrap(),
    );
    assert_eq!(x, y);
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ball.toml");
    std::fs::write(
        &cfg,
        r#"
name = "ball"
rules = ["ss"]
t_max = 100
seeds = [1, 2]

[set]
kind = "l2-ball"
center = [0.0, 0.0]
radius = 1.0

[objective]
kind = "anchored-quadratic"
anchor = [0.0, -2.0]
"#,
    )
    .unwrap();
    let o = fwlds(
        dir.path(),
        &[
            "run",
            cfg.to_str().unwrap(),
            "--step",
            "ol:3",
            "--step",
            "ls",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let runs = json(&o)["runs"].as_array().unwrap().clone();
    let keys: Vec<(u64, String)> = runs
        .iter()
        .map(|r| {
            (
                r["seed"].as_u64().unwrap(),
                r["rule"].as_str().unwrap().to_string(),
            )
        })
        .collect();
    assert_eq!(
        keys,
        vec![
            (1, "ls".into()),
            (1, "ol:3".into()),
            (2, "ls".into()),
            (2, "ol:3".into())
        ]
    );
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&fwlds(dir.path(), &["run", "--scenario", "nope"])), 1);
    assert_eq!(
        code(&fwlds(
            dir.path(),
            &["run", "--scenario", "lp4-lbg", "--step", "ol:1"]
        )),
        1
    );
    assert_eq!(code(&fwlds(dir.path(), &["run", "--bogus-flag"])), 1);
    let cfg = dir.path().join("bad.toml");
    std::fs::write(
        &cfg,
        "name = \"x\"\nrules = [\"ss\"]\nt_max = 10\n[set]\nkind = \"l2-ball\"\n",
    )
    .unwrap();
    let o = fwlds(dir.path(), &["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(!o.stderr.is_empty());
    assert_eq!(code(&fwlds(dir.path(), &["--help"])), 0);
}

#[test]
fn violated_checks_exit_two() {
    // The declared diameter understates the curvature, so the smoothness
    // constant is too small for the progress and envelope bounds.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tight.toml");
    std::fs::write(
        &cfg,
        r#"
name = "tight"
rules = ["ol:2"]
t_max = 200
x0 = [1.0, 0.0]

[set]
kind = "l2-ball"
center = [0.0, 0.0]
radius = 1.0

[objective]
kind = "distance-power"
center = [0.0, -1.0]
r = 3.0
diameter = 0.001
"#,
    )
    .unwrap();
    let o = fwlds(dir.path(), &["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&o);
    assert_eq!(report["clean"], false);
    assert!(
        report["runs"][0]["violations"]["envelope"]
            .as_u64()
            .unwrap()
            > 0
    );
}

#[test]
fn empty_neighborhood_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = fwlds(
        dir.path(),
        &[
            "lds-check",
            "--set",
            "l2ball",
            "--rho",
            "0.1",
            "--shell",
            "1.0",
            "--n-x",
            "10",
        ],
    );
    assert_eq!(code(&o), 3);
}

#[test]
fn rate_fit_on_exact_power_law() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("synthetic.csv");
    write_csv(
        &path,
        (1..=100_000u64)
            .step_by(7)
            .map(|t| (t, (t as f64).powi(-2))),
    );
    let o = fwlds(dir.path(), &["rate-fit", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let slope = json(&o)["fit"]["slope"].as_f64().unwrap();
    assert!((slope + 2.0).abs() < 1e-6, "slope {slope}");
}

#[test]
fn rate_fit_on_recursion_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("oracle.csv");
    let a = power_descent_oracle(0.5, 0.5, 0.5, 1_000_000).unwrap();
    write_csv(
        &path,
        downsample_grid(1_000_000)
            .into_iter()
            .filter(|&t| t >= 1)
            .map(|t| (t, a[t as usize])),
    );
    let o = fwlds(dir.path(), &["rate-fit", path.to_str().unwrap()]);
    let slope = json(&o)["fit"]["slope"].as_f64().unwrap();
    assert!((slope + 2.0).abs() < 0.05, "slope {slope}");
}

#[test]
fn rate_fit_rejects_foreign_schema() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("foreign.csv");
    std::fs::write(&path, "t,F\n1,0.5\n").unwrap();
    assert_eq!(
        code(&fwlds(dir.path(), &["rate-fit", path.to_str().unwrap()])),
        1
    );
}

#[test]
fn lds_check_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = fwlds(
        dir.path(),
        &[
            "lds-check",
            "--set",
            "stadium",
            "--M",
            "cap-point",
            "--q",
            "2",
        ],
    );
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert!(r["estimates"][0]["a_hat"].as_f64().unwrap() > 0.0);
    assert!(r["estimates"][0]["witness"]["x"].is_array());

    let o = fwlds(
        dir.path(),
        &[
            "lds-check",
            "--set",
            "superflat",
            "--q",
            "6",
            "--rho-sweep",
            "--shell",
            "0.5",
        ],
    );
    let r = json(&o);
    let a: Vec<f64> = r["estimates"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["a_hat"].as_f64().unwrap())
        .collect();
    assert_eq!(a.len(), 3);
    assert!(a[0] > 0.0);
    assert!(a[1] <= a[0] / 10.0 && a[2] <= a[1] / 10.0, "{a:?}");

    let o = fwlds(
        dir.path(),
        &["lds-check", "--set", "l2ball", "--uc-bruteforce"],
    );
    let r = json(&o);
    let alpha = r["uc"]["alpha_hat"].as_f64().unwrap();
    assert!((alpha - 0.5).abs() < 0.02, "alpha {alpha}");
    assert_eq!(r["uc"]["check"]["holds"], true);
}

#[test]
fn reproduce_stadium_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = fwlds(dir.path(), &["reproduce", "stadium-fig1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let verdicts = json(&o)["verdicts"].as_array().unwrap().clone();
    assert_eq!(verdicts.len(), 3);
    assert!(verdicts.iter().all(|v| v["pass"] == true));
}

#[test]
fn sweep_merges_in_sorted_order() {
    let dir = tempfile::tempdir().unwrap();
    let o = fwlds(
        dir.path(),
        &[
            "sweep",
            "--scenario",
            "openloop-family",
            "--scenario",
            "heb-r2-ball",
            "--t-max",
            "1000",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let names: Vec<String> = json(&o)["runs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            format!(
                "{}/{}",
                r["scenario"].as_str().unwrap(),
                r["rule"].as_str().unwrap()
            )
        })
        .collect();
    assert_eq!(
        names,
        [
            "heb-r2-ball/ls",
            "heb-r2-ball/ol:2",
            "heb-r2-ball/ss",
            "openloop-family/ol:2",
            "openloop-family/ol:3",
            "openloop-family/ol:4"
        ]
    );
    assert!(dir.path().join("summary.json").exists());
}
