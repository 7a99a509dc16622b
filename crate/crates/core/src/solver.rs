//! The vanilla Frank-Wolfe loop.
//!
//! Every step evaluates the classical progress bounds and records a
//! [`Violation`] instead of aborting, so a trace always runs to termination
//! and the caller decides what a violation means. Non-finite iterates abort
//! with [`Error::NumericBreakdown`].

use serde::{Deserialize, Serialize};

use crate::geometry::ConvexSet;
use crate::objectives::{Objective, Provenance};
use crate::stepping::StepRule;
use crate::{check_dim, check_finite, Error, Result, Vector};

/// Which iterations are kept in the trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RecordPolicy {
    /// Every `t <= 1000`, then the rounded powers of 1.02, the powers of ten
    /// and the final iteration.
    #[default]
    Downsampled,
    Full,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunOptions {
    pub t_max: u64,
    /// Stop as soon as the Frank-Wolfe gap drops to this value.
    pub gap_tol: Option<f64>,
    pub record: RecordPolicy,
    /// Membership is re-checked every this many steps.
    pub feasibility_every: u64,
    pub feasibility_tol: f64,
    /// Slack for the per-step progress and envelope checks.
    pub check_tol: f64,
    pub seed: Option<u64>,
}

impl RunOptions {
    pub fn new(t_max: u64) -> Self {
        Self {
            t_max,
            gap_tol: None,
            record: RecordPolicy::Downsampled,
            feasibility_every: 1000,
            feasibility_tol: 1e-9,
            check_tol: 1e-9,
            seed: None,
        }
    }

    pub fn full(mut self) -> Self {
        self.record = RecordPolicy::Full;
        self
    }

    pub fn with_gap_tol(mut self, tol: f64) -> Self {
        self.gap_tol = Some(tol);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// State of iteration `t`: the iterate, its atom and the step taken from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub t: u64,
    pub x: Vector,
    pub s: Vector,
    pub gamma: f64,
    pub value: f64,
    /// `F_t = f(x_t) - f_star`, when the optimal value is known.
    pub primal_gap: Option<f64>,
    /// `g_t = <grad f(x_t), x_t - s_t>`.
    pub fw_gap: f64,
    /// `d_t = ||x_t - s_t||`.
    pub dist: f64,
    /// `delta_t = dist(x_t, M)`, when the minimizer set is known.
    pub delta: Option<f64>,
    /// `h_t = (t + ell) F_t`.
    pub h: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// `F_{t+1} <= F_t - gamma g + (L/2) gamma^2 d^2`.
    ProgressBound,
    /// `F_{t+1} <= F_t - min{g, g^2 / (L d^2)} / 2` for adaptive rules.
    HalfMinProgress,
    /// `F_t <= 2 L D^2 / (t + 2)` for `t >= 1`.
    Envelope,
    /// `0 <= F_t <= g_t`.
    GapOrdering,
    /// `d_t <= D`.
    Displacement,
    Feasibility,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub t: u64,
    pub kind: ViolationKind,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum Termination {
    MaxIterations,
    GapTolerance {
        t: u64,
    },
    /// The Frank-Wolfe gap vanished exactly, so `x_t` is optimal.
    Stationary {
        t: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub set: String,
    pub objective: String,
    pub rule: String,
    pub rule_label: String,
    pub ell: u32,
    pub seed: Option<u64>,
    pub t_max: u64,
    pub gap_tol: Option<f64>,
    pub feasibility_tol: f64,
    pub check_tol: f64,
    pub line_search_tol: Option<f64>,
    pub smoothness: f64,
    pub diameter: f64,
    pub f_star: Option<f64>,
    pub f_star_provenance: Option<Provenance>,
    pub x0: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub records: Vec<IterateRecord>,
    pub metadata: TraceMetadata,
    pub violations: Vec<Violation>,
    pub termination: Termination,
}

impl Trace {
    pub fn last(&self) -> &IterateRecord {
        self.records.last().expect("trace has at least one record")
    }

    /// Index of the last executed iteration.
    pub fn final_t(&self) -> u64 {
        self.last().t
    }

    pub fn record_at(&self, t: u64) -> Option<&IterateRecord> {
        self.records
            .binary_search_by_key(&t, |r| r.t)
            .ok()
            .map(|i| &self.records[i])
    }

    pub fn count_violations(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

/// Iteration indices kept under [`RecordPolicy::Downsampled`], ascending.
pub fn downsample_grid(t_max: u64) -> Vec<u64> {
    let mut grid: Vec<u64> = (0..=t_max.min(1000)).collect();
    let mut p = 1000.0_f64;
    while p <= t_max as f64 {
        let t = p.round() as u64;
        if t > 1000 && t <= t_max {
            grid.push(t);
        }
        p *= 1.02;
    }
    let mut ten = 10_000u64;
    while ten <= t_max {
        grid.push(ten);
        ten = ten.saturating_mul(10);
    }
    grid.push(t_max);
    grid.sort_unstable();
    grid.dedup();
    grid
}

struct Checker<'a> {
    tol: f64,
    l: f64,
    diameter: f64,
    adaptive: bool,
    out: &'a mut Vec<Violation>,
}

impl Checker<'_> {
    fn flag(&mut self, t: u64, kind: ViolationKind, lhs: f64, rhs: f64) {
        if lhs > rhs + self.tol || lhs.is_nan() {
            self.out.push(Violation { t, kind, lhs, rhs });
        }
    }

    fn at_iterate(&mut self, t: u64, f_gap: Option<f64>, g: f64, d: f64) {
        self.flag(t, ViolationKind::Displacement, d, self.diameter);
        if let Some(f) = f_gap {
            self.flag(t, ViolationKind::GapOrdering, f, g);
            if t >= 1 {
                let env = 2.0 * self.l * self.diameter * self.diameter / (t as f64 + 2.0);
                self.flag(t, ViolationKind::Envelope, f, env);
            }
        }
    }

    /// `decrease` is `F_{t+1} - F_t` (equivalently `f(x_{t+1}) - f(x_t)`).
    fn at_step(&mut self, t: u64, decrease: f64, gamma: f64, g: f64, d: f64) {
        let model = -gamma * g + 0.5 * self.l * gamma * gamma * d * d;
        self.flag(t, ViolationKind::ProgressBound, decrease, model);
        if self.adaptive {
            let guaranteed = if d > 0.0 {
                g.min(g * g / (self.l * d * d))
            } else {
                g
            };
            self.flag(
                t,
                ViolationKind::HalfMinProgress,
                decrease,
                -0.5 * guaranteed,
            );
        }
    }
}

/// Runs Frank-Wolfe from `x0` for at most `opts.t_max` steps.
///
/// Records cover iterations `0..=T` where `T` is the last iterate computed;
/// the record at `T` carries the step the rule would take next.
pub fn run<S: ConvexSet + ?Sized>(
    set: &S,
    obj: &Objective,
    rule: &StepRule,
    x0: &Vector,
    opts: &RunOptions,
) -> Result<Trace> {
    let dim = set.dim();
    check_dim(dim, x0)?;
    check_dim(dim, &Vector::zeros(obj.dim()))?;
    check_finite("starting point", x0)?;
    if opts.t_max < 1 {
        return Err(Error::InvalidParameter("t_max must be >= 1".into()));
    }
    if !set.contains(x0, opts.feasibility_tol)? {
        return Err(Error::InfeasibleStart {
            tol: opts.feasibility_tol,
        });
    }

    let truth = obj.ground_truth();
    let has_f_star = truth.is_some();
    let has_minimizers = truth.is_some_and(|g| g.minimizers.is_some());
    let l = obj.smoothness();
    let diameter = set.diameter();
    let ell = rule.ell() as f64;
    let metadata = TraceMetadata {
        set: set.describe(),
        objective: obj.describe(),
        rule: rule.to_string(),
        rule_label: rule.label(),
        ell: rule.ell(),
        seed: opts.seed,
        t_max: opts.t_max,
        gap_tol: opts.gap_tol,
        feasibility_tol: opts.feasibility_tol,
        check_tol: opts.check_tol,
        line_search_tol: match rule {
            StepRule::LineSearch { tol } => Some(*tol),
            _ => None,
        },
        smoothness: l,
        diameter,
        f_star: truth.map(|g| g.f_star),
        f_star_provenance: truth.map(|g| g.provenance.clone()),
        x0: x0.as_slice().to_vec(),
    };

    let grid = match opts.record {
        RecordPolicy::Downsampled => Some(downsample_grid(opts.t_max)),
        RecordPolicy::Full => None,
    };
    let mut next_grid = 0usize;

    let mut violations = Vec::new();
    let mut checker = Checker {
        tol: opts.check_tol,
        l,
        diameter,
        adaptive: rule.is_monotone(),
        out: &mut violations,
    };
    let mut records = Vec::new();

    let mut x = x0.clone();
    let mut grad = Vector::zeros(dim);
    let mut probe = Vector::zeros(dim);
    let mut probe_grad = Vector::zeros(dim);
    let mut dir = Vector::zeros(dim);
    // (F_t or f(x_t), gamma_t, g_t, d_t) of the previous step.
    let mut previous: Option<(f64, f64, f64, f64)> = None;
    let mut termination = Termination::MaxIterations;

    for t in 0..=opts.t_max {
        if x.iter().any(|c| !c.is_finite()) {
            return Err(Error::NumericBreakdown { t });
        }
        obj.grad_into(&x, &mut grad)?;
        let s = set.lmo(&grad)?;
        dir.copy_from(&s);
        dir -= &x;
        let g = -grad.dot(&dir);
        let d = dir.norm();
        let value = obj.value(&x)?;
        let f_gap = if has_f_star {
            Some(obj.primal_gap(&x)?)
        } else {
            None
        };
        if !g.is_finite() || !value.is_finite() {
            return Err(Error::NumericBreakdown { t });
        }

        let level = f_gap.unwrap_or(value);
        if let Some((prev_level, gamma, pg, pd)) = previous {
            checker.at_step(t - 1, level - prev_level, gamma, pg, pd);
        }
        checker.at_iterate(t, f_gap, g, d);
        if t > 0
            && (t % opts.feasibility_every == 0 || t == opts.t_max)
            && !set.contains(&x, opts.feasibility_tol)?
        {
            checker.out.push(Violation {
                t,
                kind: ViolationKind::Feasibility,
                lhs: f64::NAN,
                rhs: opts.feasibility_tol,
            });
        }

        let mut line = |gamma: f64| -> Result<f64> {
            probe.copy_from(&x);
            probe.axpy(gamma, &dir, 1.0);
            obj.grad_into(&probe, &mut probe_grad)?;
            Ok(probe_grad.dot(&dir))
        };
        let gamma = rule.step_size(t, g, d, &mut line)?;

        let stop = if g <= 0.0 {
            Some(Termination::Stationary { t })
        } else if opts.gap_tol.is_some_and(|tol| g <= tol) {
            Some(Termination::GapTolerance { t })
        } else {
            None
        };
        let last = stop.is_some() || t == opts.t_max;

        let keep = match &grid {
            None => true,
            Some(grid) => {
                while next_grid < grid.len() && grid[next_grid] < t {
                    next_grid += 1;
                }
                last || grid.get(next_grid) == Some(&t)
            }
        };
        if keep {
            records.push(IterateRecord {
                t,
                x: x.clone(),
                s: s.clone(),
                gamma,
                value,
                primal_gap: f_gap,
                fw_gap: g,
                dist: d,
                delta: if has_minimizers {
                    Some(obj.dist_to_minimizers(&x)?)
                } else {
                    None
                },
                h: f_gap.map(|f| (t as f64 + ell) * f),
            });
        }
        if let Some(reason) = stop {
            termination = reason;
            break;
        }
        if last {
            break;
        }

        if gamma == 1.0 {
            x.copy_from(&s);
        } else {
            x.zip_apply(&s, |xi, si| *xi += gamma * (si - *xi));
        }
        previous = Some((level, gamma, g, d));
    }

    Ok(Trace {
        records,
        metadata,
        violations,
        termination,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ReferenceOptions {
    pub budget: u64,
    pub gap_tol: f64,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        Self {
            budget: 10_000_000,
            gap_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReferenceSolution {
    /// `f(x_T)`, an upper bound on `f_star`.
    pub f_star_est: f64,
    pub minimizer_est: Vector,
    /// `g_T`; `f_star >= f_star_est - gap_certificate`.
    pub gap_certificate: f64,
    pub iterations: u64,
}

/// High-accuracy line-search run used when no closed-form optimum exists.
///
/// Stops at the first iterate with Frank-Wolfe gap at most `opts.gap_tol`.
pub fn reference_solve<S: ConvexSet + ?Sized>(
    set: &S,
    obj: &Objective,
    opts: &ReferenceOptions,
) -> Result<ReferenceSolution> {
    let dim = set.dim();
    let mut x = set.interior_point();
    let mut grad = Vector::zeros(dim);
    let mut probe = Vector::zeros(dim);
    let mut probe_grad = Vector::zeros(dim);
    let mut dir = Vector::zeros(dim);
    let rule = StepRule::line_search_default();
    let mut best_gap = f64::INFINITY;
    for t in 0..=opts.budget {
        obj.grad_into(&x, &mut grad)?;
        let s = set.lmo(&grad)?;
        dir.copy_from(&s);
        dir -= &x;
        let g = (-grad.dot(&dir)).max(0.0);
        if !g.is_finite() {
            return Err(Error::NumericBreakdown { t });
        }
        best_gap = best_gap.min(g);
        if g <= opts.gap_tol {
            return Ok(ReferenceSolution {
                f_star_est: obj.value(&x)?,
                minimizer_est: x,
                gap_certificate: g,
                iterations: t,
            });
        }
        let mut line = |gamma: f64| -> Result<f64> {
            probe.copy_from(&x);
            probe.axpy(gamma, &dir, 1.0);
            obj.grad_into(&probe, &mut probe_grad)?;
            Ok(probe_grad.dot(&dir))
        };
        let gamma = rule.step_size(t, g, dir.norm(), &mut line)?;
        if gamma == 1.0 {
            x.copy_from(&s);
        } else {
            x.zip_apply(&s, |xi, si| *xi += gamma * (si - *xi));
        }
    }
    Err(Error::NonConvergence {
        budget: opts.budget,
        best_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::FeasibleSet;

    fn v(c: &[f64]) -> Vector {
        Vector::from_row_slice(c)
    }

    #[test]
    fn downsample_grid_shape() {
        let grid = downsample_grid(100_000);
        assert_eq!(&grid[..3], &[0, 1, 2]);
        assert!(grid.contains(&1000) && grid.contains(&10_000) && grid.contains(&100_000));
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
        assert!(grid.len() < 1300);
    }

    #[test]
    fn linear_over_ball_solved_in_one_step() {
        let ball = FeasibleSet::l2_ball(Vector::zeros(2), 1.0).unwrap();
        let c = v(&[3.0, 4.0]);
        let obj = Objective::linear(c.clone())
            .unwrap()
            .with_minimizer(v(&[-0.6, -0.8]))
            .unwrap();
        for rule in [
            StepRule::line_search_default(),
            StepRule::short_step(1e-3).unwrap(),
        ] {
            let trace = run(&ball, &obj, &rule, &Vector::zeros(2), &RunOptions::new(10)).unwrap();
            assert_eq!(trace.records[1].primal_gap, Some(0.0));
            assert!(trace.violations.is_empty());
            assert_eq!(trace.termination, Termination::Stationary { t: 1 });
        }
    }

    #[test]
    fn infeasible_start_rejected() {
        let ball = FeasibleSet::l2_ball(Vector::zeros(2), 1.0).unwrap();
        let obj = Objective::half_squared_norm(2).unwrap();
        let err = run(
            &ball,
            &obj,
            &StepRule::line_search_default(),
            &v(&[2.0, 0.0]),
            &RunOptions::new(5),
        );
        assert!(matches!(err, Err(Error::InfeasibleStart { .. })));
    }

    #[test]
    fn full_policy_records_every_step() {
        let ball = FeasibleSet::l2_ball(Vector::zeros(2), 1.0).unwrap();
        let obj = Objective::distance_power(v(&[0.0, -1.0]), 2.0, 2.0).unwrap();
        let trace = run(
            &ball,
            &obj,
            &StepRule::open_loop(2).unwrap(),
            &v(&[1.0, 0.0]),
            &RunOptions::new(50).full(),
        )
        .unwrap();
        assert_eq!(trace.records.len(), 51);
        assert!(trace
            .records
            .iter()
            .enumerate()
            .all(|(i, r)| r.t == i as u64));
        assert!(trace.violations.is_empty());
        assert_eq!(trace.metadata.rule_label, "ol:2");
    }

    #[test]
    fn reference_solve_on_simplex() {
        let simplex = FeasibleSet::simplex(3).unwrap();
        let obj = Objective::half_squared_norm(3).unwrap();
        let sol = reference_solve(&simplex, &obj, &ReferenceOptions::default()).unwrap();
        assert!((sol.f_star_est - 1.0 / 6.0).abs() < 1e-10);
    }

    #[test]
    fn reference_solve_linear_on_ball() {
        let ball = FeasibleSet::l2_ball(Vector::zeros(2), 1.0).unwrap();
        let obj = Objective::linear(v(&[3.0, 4.0])).unwrap();
        let sol = reference_solve(&ball, &obj, &ReferenceOptions::default()).unwrap();
        assert!((sol.f_star_est + 5.0).abs() < 1e-12);
    }

    #[test]
    fn reference_solve_reports_budget_exhaustion() {
        let disk = FeasibleSet::truncated_disk(0.5).unwrap();
        let obj = Objective::stadium_psi(2.0).unwrap();
        let err = reference_solve(
            &disk,
            &obj,
            &ReferenceOptions {
                budget: 5,
                gap_tol: 1e-14,
            },
        );
        assert!(matches!(err, Err(Error::NonConvergence { budget: 5, .. })));
    }
}
