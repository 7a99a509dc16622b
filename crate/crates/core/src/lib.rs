//! Projection-free convex optimization with the vanilla Frank-Wolfe method.
//!
//! The crate is organized bottom-up:
//!
//! * [`geometry`] - feasible sets with exact linear minimization oracles
//!   (LMOs), a deterministic atom-selection rule, membership tests and
//!   diameters. Includes the stadium, the truncated disk and a strictly convex
//!   but superflat probe body.
//! * [`objectives`] - smooth convex objectives with gradients, smoothness
//!   constants and optional ground truth (optimal value, minimizer set, Hölder
//!   error bound certificate).
//! * [`stepping`] - short steps, exact line search and the open-loop family
//!   `ell / (t + ell)`.
//! * [`solver`] - the Frank-Wolfe loop with per-iteration traces and runtime
//!   checks of the classical progress bounds.
//! * [`analysis`] - local dual sharpness and uniform convexity estimators,
//!   patch certificates, log-log exponent fits and the power-descent recursion.
//! * [`experiment`] - configs, the named scenario registry and sweep execution
//!   used by the `fwlds` command line tool.
//!
//! ```
//! use fwlds::{geometry::FeasibleSet, objectives::Objective, solver::{run, RunOptions}};
//! use fwlds::stepping::StepRule;
//! use fwlds::Vector;
//!
//! let set = FeasibleSet::stadium(1.0).unwrap();
//! let obj = Objective::stadium_psi(2.0).unwrap().with_minimizer(Vector::from_vec(vec![2.0, 0.0])).unwrap();
//! let x0 = Vector::from_vec(vec![0.0, 1.0]);
//! let trace = run(&set, &obj, &StepRule::line_search_default(), &x0, &RunOptions::new(200)).unwrap();
//! assert!(trace.violations.is_empty());
//! assert!(trace.last().primal_gap.unwrap() < 1e-4);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod objectives;
pub mod solver;
pub mod stepping;
pub mod trace;

pub use error::{Error, Result};

/// Dense column vector used for points, gradients and atoms.
pub type Vector = nalgebra::DVector<f64>;

pub use geometry::{ConvexSet, FeasibleSet, SuperflatBody, TieBreak, UcParams};
pub use objectives::{GroundTruth, HebCertificate, MinimizerSet, Objective};
pub use solver::{run, IterateRecord, RunOptions, Trace};
pub use stepping::StepRule;

pub(crate) fn check_dim(expected: usize, v: &Vector) -> Result<()> {
    if v.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: v.len(),
        });
    }
    Ok(())
}

pub(crate) fn check_finite(what: &'static str, v: &Vector) -> Result<()> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}
