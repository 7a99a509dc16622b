//! Trace CSV contract shared with downstream plotting tools.
//!
//! The fixtures under `tests/golden/` are the files the plotting side parses.
//! Set `FWLDS_BLESS=1` to regenerate them after an intentional change.

use std::path::{Path, PathBuf};

use fwlds::analysis::rates::gap_series_from_rows;
use fwlds::analysis::{check_h_decay, fit_exponent, gap_series, WindowPolicy};
use fwlds::geometry::FeasibleSet;
use fwlds::objectives::Objective;
use fwlds::solver::{run, RunOptions, Trace};
use fwlds::stepping::StepRule;
use fwlds::trace::{self, read_rows, write_rows, HEADER};
use fwlds::Vector;

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn stadium_trace(with_minimizer: bool, rule: StepRule, t_max: u64) -> Trace {
    let set = FeasibleSet::stadium(1.0).unwrap();
    let mut obj = Objective::stadium_psi(2.0).unwrap();
    if with_minimizer {
        obj = obj
            .with_minimizer(Vector::from_vec(vec![2.0, 0.0]))
            .unwrap();
    }
    let x0 = Vector::from_vec(vec![0.0, 1.0]);
    run(&set, &obj, &rule, &x0, &RunOptions::new(t_max)).unwrap()
}

fn cases() -> Vec<(&'static str, Trace)> {
    vec![
        (
            "stadium_ls.csv",
            stadium_trace(true, StepRule::line_search_default(), 300),
        ),
        (
            "stadium_ss_no_optimum.csv",
            stadium_trace(false, StepRule::short_step(1.0).unwrap(), 40),
        ),
    ]
}

fn encode(trace: &Trace) -> String {
    let mut buf = Vec::new();
    write_rows(&mut buf, &trace::rows(trace)).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn fixtures_round_trip_byte_for_byte() {
    if std::env::var_os("FWLDS_BLESS").is_some() {
        for (name, trace) in cases() {
            std::fs::write(golden(name), encode(&trace)).unwrap();
        }
    }
    for (name, _) in cases() {
        let text = std::fs::read_to_string(golden(name)).unwrap();
        assert_eq!(text.lines().next().unwrap(), HEADER.join(","));
        let rows = read_rows(text.as_bytes()).unwrap();
        let mut again = Vec::new();
        write_rows(&mut again, &rows).unwrap();
        assert_eq!(String::from_utf8(again).unwrap(), text, "{name}");
    }
}

#[test]
fn fresh_runs_match_fixtures() {
    for (name, trace) in cases() {
        let frozen = read_rows(std::fs::File::open(golden(name)).unwrap()).unwrap();
        let fresh = trace::rows(&trace);
        assert_eq!(frozen.len(), fresh.len(), "{name}");
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300);
        for (a, b) in frozen.iter().zip(&fresh) {
            assert_eq!(a.t, b.t);
            assert!(
                close(a.fw_gap, b.fw_gap) && close(a.dist, b.dist) && close(a.gamma, b.gamma),
                "{name} t={}",
                a.t
            );
            assert_eq!(a.primal_gap.is_some(), b.primal_gap.is_some());
            assert_eq!(a.delta.is_some(), b.delta.is_some());
            if let (Some(x), Some(y)) = (a.primal_gap, b.primal_gap) {
                assert!(close(x, y), "{name} t={}", a.t);
            }
        }
    }
}

#[test]
fn missing_optimum_leaves_empty_fields() {
    let text = std::fs::read_to_string(golden("stadium_ss_no_optimum.csv")).unwrap();
    let second = text.lines().nth(1).unwrap();
    let fields: Vec<&str> = second.split(',').collect();
    assert_eq!(fields.len(), 7);
    assert_eq!((fields[1], fields[5], fields[6]), ("", "", ""));
}

#[test]
fn written_traces_give_the_same_verdicts() {
    let trace = stadium_trace(true, StepRule::line_search_default(), 20_000);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ls.csv");
    trace::write_trace(&path, &trace).unwrap();
    let rows = trace::read_trace_file(&path).unwrap();
    assert_eq!(rows, trace::rows(&trace));
    let (mem, disk) = (gap_series(&trace), gap_series_from_rows(&rows));
    assert_eq!(
        fit_exponent(&mem, WindowPolicy::LastDecade).unwrap(),
        fit_exponent(&disk, WindowPolicy::LastDecade).unwrap()
    );
    assert_eq!(
        check_h_decay(&mem, 2).unwrap(),
        check_h_decay(&disk, 2).unwrap()
    );
    let iterates = std::fs::read_to_string(trace::iterates_path(&path)).unwrap();
    assert!(iterates.starts_with("t,x0,x1\n0,0.0,1.0\n"));
}
