//! Step-size rules for the Frank-Wolfe update.

use std::fmt;

use crate::{Error, Result};

/// Bracket width used by [`StepRule::line_search_default`].
pub const DEFAULT_LINE_SEARCH_TOL: f64 = 1e-12;

/// Frank-Wolfe gaps above `-GAP_ROUNDOFF` are treated as zero.
pub const GAP_ROUNDOFF: f64 = 1e-12;

/// Restriction of the objective to the segment `[x_t, s_t]`.
pub trait LineRestriction {
    /// `phi'(gamma) = <grad f(x + gamma (s - x)), s - x>`.
    fn derivative(&mut self, gamma: f64) -> Result<f64>;
}

impl<F: FnMut(f64) -> Result<f64>> LineRestriction for F {
    fn derivative(&mut self, gamma: f64) -> Result<f64> {
        self(gamma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// `min{g / (L d^2), 1}`.
    ShortStep { l: f64 },
    /// Exact minimization over `[0, 1]` by bisection on `phi'` down to a
    /// bracket of width `tol`.
    LineSearch { tol: f64 },
    /// `ell / (t + ell)`.
    OpenLoop { ell: u32 },
}

impl StepRule {
    pub fn short_step(l: f64) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "smoothness constant must be positive, got {l}"
            )));
        }
        Ok(StepRule::ShortStep { l })
    }

    pub fn line_search(tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol <= 1e-6) {
            return Err(Error::InvalidParameter(format!(
                "line-search tolerance must lie in (0, 1e-6], got {tol}"
            )));
        }
        Ok(StepRule::LineSearch { tol })
    }

    pub fn line_search_default() -> Self {
        StepRule::LineSearch {
            tol: DEFAULT_LINE_SEARCH_TOL,
        }
    }

    pub fn open_loop(ell: u32) -> Result<Self> {
        if ell < 2 {
            return Err(Error::InvalidParameter(format!(
                "open-loop offset must be >= 2, got {ell}"
            )));
        }
        Ok(StepRule::OpenLoop { ell })
    }

    /// Parses `ss`, `ls` or `ol:<ell>`; short steps use `smoothness`.
    pub fn parse(label: &str, smoothness: f64) -> Result<Self> {
        match label.trim() {
            "ss" => Self::short_step(smoothness),
            "ls" => Ok(Self::line_search_default()),
            other => {
                let ell = other
                    .strip_prefix("ol:")
                    .and_then(|e| e.parse::<u32>().ok())
                    .ok_or_else(|| {
                        Error::Config(format!(
                            "unknown step rule '{other}' (expected ss, ls or ol:<ell>)"
                        ))
                    })?;
                Self::open_loop(ell)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            StepRule::ShortStep { .. } => "ss".into(),
            StepRule::LineSearch { .. } => "ls".into(),
            StepRule::OpenLoop { ell } => format!("ol:{ell}"),
        }
    }

    /// Offset used in the rescaled gap `h_t = (t + ell) F_t`; 2 for the
    /// adaptive rules.
    pub fn ell(&self) -> u32 {
        match self {
            StepRule::OpenLoop { ell } => *ell,
            _ => 2,
        }
    }

    /// True for rules that never increase the objective.
    pub fn is_monotone(&self) -> bool {
        !matches!(self, StepRule::OpenLoop { .. })
    }

    /// Step size for iteration `t` given the Frank-Wolfe gap `g` and the
    /// displacement length `d = ||x_t - s_t||`.
    pub fn step_size<R: LineRestriction + ?Sized>(
        &self,
        t: u64,
        g: f64,
        d: f64,
        line: &mut R,
    ) -> Result<f64> {
        if g.is_nan() || d.is_nan() {
            return Err(Error::NumericBreakdown { t });
        }
        if g < -GAP_ROUNDOFF {
            return Err(Error::NegativeFwGap { t, gap: g });
        }
        let g = g.max(0.0);
        match *self {
            StepRule::OpenLoop { ell } => Ok(ell as f64 / (t as f64 + ell as f64)),
            StepRule::ShortStep { l } => {
                if d == 0.0 {
                    return Ok(1.0);
                }
                Ok((g / (l * d * d)).min(1.0))
            }
            StepRule::LineSearch { tol } => {
                if d == 0.0 {
                    return Ok(1.0);
                }
                if g == 0.0 {
                    return Ok(0.0);
                }
                if line.derivative(1.0)? <= 0.0 {
                    return Ok(1.0);
                }
                let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
                while hi - lo > tol {
                    let mid = 0.5 * (lo + hi);
                    let slope = line.derivative(mid)?;
                    if slope.is_nan() {
                        return Err(Error::NumericBreakdown { t });
                    }
                    if slope < 0.0 {
                        lo = mid;
                    } else if slope > 0.0 {
                        hi = mid;
                    } else {
                        return Ok(mid);
                    }
                }
                Ok(0.5 * (lo + hi))
            }
        }
    }
}

impl fmt::Display for StepRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepRule::ShortStep { l } => write!(f, "short-step(L={l})"),
            StepRule::LineSearch { tol } => write!(f, "line-search(tol={tol:e})"),
            StepRule::OpenLoop { ell } => write!(f, "open-loop({ell}/(t+{ell}))"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_line(_: f64) -> Result<f64> {
        panic!("line restriction not expected")
    }

    #[test]
    fn short_step_example() {
        let rule = StepRule::short_step(1.0).unwrap();
        assert_eq!(rule.step_size(0, 2.0, 1.0, &mut no_line).unwrap(), 1.0);
        assert_eq!(rule.step_size(0, 0.25, 1.0, &mut no_line).unwrap(), 0.25);
        assert_eq!(rule.step_size(0, 0.0, 0.0, &mut no_line).unwrap(), 1.0);
    }

    #[test]
    fn open_loop_examples() {
        let rule = StepRule::open_loop(2).unwrap();
        assert_eq!(rule.step_size(0, 1.0, 1.0, &mut no_line).unwrap(), 1.0);
        assert_eq!(rule.step_size(2, 1.0, 1.0, &mut no_line).unwrap(), 0.5);
        assert_eq!(
            StepRule::open_loop(4)
                .unwrap()
                .step_size(4, 0.0, 1.0, &mut no_line)
                .unwrap(),
            0.5
        );
    }

    #[test]
    fn line_search_on_shifted_parabola() {
        // phi(gamma) = (gamma - 0.3)^2, so g = -phi'(0) = 0.6
        let rule = StepRule::line_search_default();
        let mut line = |gamma: f64| Ok(2.0 * (gamma - 0.3));
        let gamma = rule.step_size(0, 0.6, 1.0, &mut line).unwrap();
        assert!((gamma - 0.3).abs() <= 1e-12);
    }

    #[test]
    fn line_search_boundary_cases() {
        let rule = StepRule::line_search_default();
        let mut decreasing = |_: f64| Ok(-1.0);
        assert_eq!(rule.step_size(0, 1.0, 1.0, &mut decreasing).unwrap(), 1.0);
        assert_eq!(rule.step_size(0, 0.0, 1.0, &mut no_line).unwrap(), 0.0);
    }

    #[test]
    fn negative_gap_is_rejected() {
        let rule = StepRule::short_step(1.0).unwrap();
        assert!(matches!(
            rule.step_size(7, -1e-6, 1.0, &mut no_line),
            Err(Error::NegativeFwGap { t: 7, .. })
        ));
        assert_eq!(rule.step_size(0, -1e-13, 1.0, &mut no_line).unwrap(), 0.0);
    }

    #[test]
    fn parse_and_validate() {
        assert_eq!(
            StepRule::parse("ol:3", 1.0).unwrap(),
            StepRule::OpenLoop { ell: 3 }
        );
        assert_eq!(
            StepRule::parse("ss", 2.0).unwrap(),
            StepRule::ShortStep { l: 2.0 }
        );
        assert!(StepRule::parse("ol:1", 1.0).is_err());
        assert!(StepRule::parse("newton", 1.0).is_err());
        assert!(StepRule::line_search(1e-3).is_err());
        assert!(StepRule::short_step(0.0).is_err());
        assert_eq!(StepRule::open_loop(3).unwrap().label(), "ol:3");
    }
}
