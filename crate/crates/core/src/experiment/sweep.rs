use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::analysis::{check_h_decay, fit_exponent, gap_series, ExponentFit, HDecay};
use crate::solver::{run, Termination, Trace};
use crate::{trace, Result};

/// Outcome of one `(config, rule, seed)` run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub scenario: String,
    pub rule: String,
    pub seed: u64,
    pub final_t: u64,
    pub termination: Termination,
    pub final_primal_gap: Option<f64>,
    pub final_fw_gap: f64,
    /// Violation counts keyed by kind.
    pub violations: BTreeMap<String, usize>,
    pub fit: Option<ExponentFit>,
    /// Why no fit is reported, if so.
    pub fit_note: Option<String>,
    pub h_decay: Option<HDecay>,
    pub trace_path: Option<PathBuf>,
}

impl RunSummary {
    pub fn clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Stable file stem for a run, e.g. `stadium-fig1_ol-2_seed0`.
pub fn run_label(scenario: &str, rule: &str, seed: u64) -> String {
    format!("{scenario}_{}_seed{seed}", rule.replace(':', "-"))
}

pub fn summarize(
    cfg: &ExperimentConfig,
    rule: &str,
    seed: u64,
    trace: &Trace,
    trace_path: Option<PathBuf>,
) -> RunSummary {
    let mut violations = BTreeMap::new();
    for v in &trace.violations {
        let key = serde_json::to_value(v.kind)
            .ok()
            .and_then(|k| k.as_str().map(str::to_string))
            .unwrap_or_default();
        *violations.entry(key).or_insert(0) += 1;
    }
    let series = gap_series(trace);
    let (fit, fit_note) = if series.is_empty() {
        (None, Some("no optimal value".to_string()))
    } else {
        match fit_exponent(&series, cfg.analysis.window) {
            Ok(fit) => (Some(fit), None),
            Err(e) => (None, Some(e.to_string())),
        }
    };
    let h_decay = if cfg.analysis.h_decay && !series.is_empty() {
        check_h_decay(&series, trace.metadata.ell).ok()
    } else {
        None
    };
    let last = trace.last();
    RunSummary {
        scenario: cfg.name.clone(),
        rule: rule.to_string(),
        seed,
        final_t: last.t,
        termination: trace.termination,
        final_primal_gap: last.primal_gap,
        final_fw_gap: last.fw_gap,
        violations,
        fit,
        fit_note,
        h_decay,
        trace_path,
    }
}

/// Runs one rule with one seed; writes `<out_dir>/<label>.csv` when asked.
pub fn run_job(
    cfg: &ExperimentConfig,
    rule: &str,
    seed: u64,
    out_dir: Option<&Path>,
) -> Result<(Trace, RunSummary)> {
    let inst = cfg.instance()?;
    let step = cfg.rule(rule, &inst.objective)?;
    let x0 = cfg.start(inst.set.as_ref(), seed);
    let trace = run(
        inst.set.as_ref(),
        &inst.objective,
        &step,
        &x0,
        &cfg.run_options(seed),
    )?;
    let path = match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(format!("{}.csv", run_label(&cfg.name, rule, seed)));
            trace::write_trace(&path, &trace)?;
            Some(path)
        }
        None => None,
    };
    let summary = summarize(cfg, rule, seed, &trace, path);
    Ok((trace, summary))
}

/// Runs every `(config, rule, seed)` combination in parallel.
///
/// Summaries come back sorted by scenario name, seed and rule regardless of
/// scheduling; the first error (in that order) is returned.
pub fn sweep(configs: &[ExperimentConfig], out_dir: Option<&Path>) -> Result<Vec<RunSummary>> {
    let mut jobs: Vec<(&ExperimentConfig, &str, u64)> = configs
        .iter()
        .flat_map(|c| {
            c.seeds
                .iter()
                .flat_map(move |&s| c.rules.iter().map(move |r| (c, r.as_str(), s)))
        })
        .collect();
    jobs.sort_by(|a, b| (&a.0.name, a.2, a.1).cmp(&(&b.0.name, b.2, b.1)));
    let results: Vec<Result<RunSummary>> = jobs
        .par_iter()
        .map(|(cfg, rule, seed)| run_job(cfg, rule, *seed, out_dir).map(|(_, s)| s))
        .collect();
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::scenario;

    #[test]
    fn sweep_is_sorted_and_deterministic() {
        let mut a = scenario("stadium-fig1").unwrap();
        a.t_max = 200;
        let mut b = scenario("l2-lbg-anchor").unwrap();
        b.t_max = 200;
        b.seeds = vec![3, 1];
        let first = sweep(&[b.clone(), a.clone()], None).unwrap();
        let order: Vec<_> = first
            .iter()
            .map(|s| (s.scenario.as_str(), s.seed, s.rule.as_str()))
            .collect();
        assert_eq!(
            order,
            vec![
                ("l2-lbg-anchor", 1, "ss"),
                ("l2-lbg-anchor", 3, "ss"),
                ("stadium-fig1", 0, "ls"),
                ("stadium-fig1", 0, "ol:2"),
                ("stadium-fig1", 0, "ss"),
            ]
        );
        let second = sweep(&[a, b], None).unwrap();
        assert_eq!(
            serde_json::to_string(&first).unwrap(),
            serde_json::to_string(&second).unwrap()
        );
    }

    #[test]
    fn labels_are_filesystem_safe() {
        assert_eq!(
            run_label("openloop-family", "ol:3", 0),
            "openloop-family_ol-3_seed0"
        );
    }
}
