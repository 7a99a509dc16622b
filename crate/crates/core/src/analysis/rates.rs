use serde::{Deserialize, Serialize};

use crate::solver::Trace;
use crate::trace::TraceRow;
use crate::{Error, Result};

/// Minimum number of records a fit window must contain.
pub const MIN_WINDOW_RECORDS: usize = 50;

/// Number of logarithmic bins used to thin a window before fitting.
const FIT_BINS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WindowPolicy {
    /// `[t_end / 10, t_end]` where `t_end` is the last recorded iteration.
    #[default]
    LastDecade,
    Range {
        t_lo: u64,
        t_hi: u64,
    },
}

/// Least-squares line through `(log t, log F)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub window: [u64; 2],
    /// Largest absolute log-log deviation from the fitted line.
    pub residual: f64,
    pub points: usize,
}

/// `(t, F_t)` pairs of a trace; records without a primal gap are skipped.
pub fn gap_series(trace: &Trace) -> Vec<(u64, f64)> {
    trace
        .records
        .iter()
        .filter_map(|r| r.primal_gap.map(|f| (r.t, f)))
        .collect()
}

pub fn gap_series_from_rows(rows: &[TraceRow]) -> Vec<(u64, f64)> {
    rows.iter()
        .filter_map(|r| r.primal_gap.map(|f| (r.t, f)))
        .collect()
}

/// Fits `log F = slope log t + intercept` over the window.
///
/// The window is thinned to one point per logarithmic bin so that densely
/// recorded tails do not dominate. Fails with [`Error::ExactConvergence`] if
/// any gap in the window is zero.
pub fn fit_exponent(series: &[(u64, f64)], policy: WindowPolicy) -> Result<ExponentFit> {
    let t_end = series
        .iter()
        .map(|p| p.0)
        .max()
        .ok_or_else(|| Error::InsufficientData("empty series".into()))?;
    let (t_lo, t_hi) = match policy {
        WindowPolicy::LastDecade => ((t_end / 10).max(1), t_end),
        WindowPolicy::Range { t_lo, t_hi } => (t_lo.max(1), t_hi),
    };
    if t_lo >= t_hi {
        return Err(Error::InsufficientData(format!(
            "empty window [{t_lo}, {t_hi}]"
        )));
    }
    let window: Vec<(u64, f64)> = series
        .iter()
        .copied()
        .filter(|&(t, _)| t >= t_lo && t <= t_hi)
        .collect();
    if let Some(&(t, _)) = window.iter().find(|p| !(p.1 > 0.0)) {
        return Err(Error::ExactConvergence { t });
    }
    if window.len() < MIN_WINDOW_RECORDS {
        return Err(Error::InsufficientData(format!(
            "{} records in [{t_lo}, {t_hi}], need {MIN_WINDOW_RECORDS}",
            window.len()
        )));
    }
    let (l_lo, l_hi) = ((t_lo as f64).ln(), (t_hi as f64).ln());
    let width = (l_hi - l_lo) / FIT_BINS as f64;
    let mut last_bin = None;
    let mut pts = Vec::new();
    for &(t, f) in &window {
        let lt = (t as f64).ln();
        let bin = (((lt - l_lo) / width) as usize).min(FIT_BINS - 1);
        if last_bin != Some(bin) {
            last_bin = Some(bin);
            pts.push((lt, f.ln()));
        }
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).abs())
        .fold(0.0, f64::max);
    Ok(ExponentFit {
        slope,
        intercept,
        window: [t_lo, t_hi],
        residual,
        points: pts.len(),
    })
}

/// Simulates `a_{t+1} = a_t - eta a_t^{1+r}` for `steps` steps (returns
/// `steps + 1` values starting with `a0`).
pub fn power_descent_oracle(a0: f64, eta: f64, r: f64, steps: usize) -> Result<Vec<f64>> {
    if !((0.0..=1.0).contains(&a0) && eta > 0.0 && eta <= 1.0 && r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need a0 in [0, 1], eta in (0, 1], r in (0, 1] (got a0={a0}, eta={eta}, r={r})"
        )));
    }
    let mut out = Vec::with_capacity(steps + 1);
    let mut a = a0;
    out.push(a);
    for _ in 0..steps {
        a -= eta * a.powf(1.0 + r);
        out.push(a);
    }
    Ok(out)
}

/// Verdict on `h_t = (t + ell) F_t` over the last two decades.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HDecay {
    pub t_ref: u64,
    pub t_end: u64,
    pub h_ref: f64,
    pub h_end: f64,
    /// `h_end / h_ref` (0 when both vanish).
    pub ratio: f64,
    /// `h_end <= h_ref / 2`.
    pub o_one_over_t: bool,
}

/// Compares `h` at the last recorded iteration `T` with `h` at the latest
/// record not after `T / 100`. Requires `T >= 10^4`.
pub fn check_h_decay(series: &[(u64, f64)], ell: u32) -> Result<HDecay> {
    let &(t_end, f_end) = series
        .iter()
        .max_by_key(|p| p.0)
        .ok_or_else(|| Error::InsufficientData("empty series".into()))?;
    if t_end < 10_000 {
        return Err(Error::InsufficientData(format!(
            "h decay needs t >= 10^4, trace ends at {t_end}"
        )));
    }
    let target = t_end / 100;
    let &(t_ref, f_ref) = series
        .iter()
        .filter(|p| p.0 <= target)
        .max_by_key(|p| p.0)
        .ok_or_else(|| Error::InsufficientData(format!("no record at or before t={target}")))?;
    let h = |t: u64, f: f64| (t as f64 + ell as f64) * f;
    let (h_ref, h_end) = (h(t_ref, f_ref), h(t_end, f_end));
    let ratio = if h_ref > 0.0 {
        h_end / h_ref
    } else if h_end == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(HDecay {
        t_ref,
        t_end,
        h_ref,
        h_end,
        ratio,
        o_one_over_t: h_end <= 0.5 * h_ref,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(power: f64, t_max: u64) -> Vec<(u64, f64)> {
        (1..=t_max).map(|t| (t, (t as f64).powf(-power))).collect()
    }

    #[test]
    fn exact_power_law_slope() {
        let fit = fit_exponent(&synthetic(2.0, 10_000), WindowPolicy::LastDecade).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-6);
        assert!(fit.residual < 1e-9);
        assert_eq!(fit.window, [1000, 10_000]);
    }

    #[test]
    fn zero_gap_in_window_reports_exact_convergence() {
        let mut s = synthetic(1.0, 1000);
        s[950].1 = 0.0;
        assert!(matches!(
            fit_exponent(&s, WindowPolicy::LastDecade),
            Err(Error::ExactConvergence { t: 951 })
        ));
    }

    #[test]
    fn short_window_is_rejected() {
        let s = synthetic(1.0, 40);
        assert!(matches!(
            fit_exponent(&s, WindowPolicy::LastDecade),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn oracle_from_zero_stays_zero() {
        assert!(power_descent_oracle(0.0, 0.5, 1.0, 10)
            .unwrap()
            .iter()
            .all(|&a| a == 0.0));
        assert!(power_descent_oracle(1.0, 0.0, 1.0, 10).is_err());
    }

    #[test]
    fn h_decay_verdicts() {
        let fast = check_h_decay(&synthetic(2.0, 10_000), 2).unwrap();
        assert!(fast.o_one_over_t);
        assert_eq!(fast.t_ref, 100);
        let slow = check_h_decay(&synthetic(1.0, 10_000), 2).unwrap();
        assert!(!slow.o_one_over_t);
        assert!(check_h_decay(&synthetic(2.0, 5000), 2).is_err());
    }
}
