//! Feasible regions exposed through a linear minimization oracle.
//!
//! Every set answers three questions: which atom minimizes a linear
//! functional (`lmo`), whether a point belongs to it up to a Euclidean
//! tolerance (`contains`), and how far apart two of its points can be
//! (`diameter`). The LMO uses a fixed deterministic atom-selection rule: the
//! linear value is minimized first and exact ties are broken
//! lexicographically (see [`TieBreak`]). Local dual sharpness is a property of
//! the atom map, so the rule is part of the set's identity.

mod sets;
mod superflat;

pub use sets::{FeasibleSet, SetKind};
pub use superflat::SuperflatBody;

use std::cmp::Ordering;

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vector};

/// Rule used to pick one atom when the minimizing face of the LMO is not a
/// single point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    /// Lexicographically smallest coordinate vector among the minimizers.
    #[default]
    LexMin,
    /// Lexicographically largest coordinate vector among the minimizers.
    LexMax,
}

impl TieBreak {
    /// `true` if `candidate` should replace `current` under this rule.
    pub fn prefers(self, candidate: &Vector, current: &Vector) -> bool {
        matches!(
            (self, lex_cmp(candidate, current)),
            (TieBreak::LexMin, Ordering::Less) | (TieBreak::LexMax, Ordering::Greater)
        )
    }
}

/// Lexicographic order on coordinates (total order on floats).
pub fn lex_cmp(a: &Vector, b: &Vector) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

/// Power-type uniform convexity parameters `(alpha, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UcParams {
    pub alpha: f64,
    pub q: f64,
}

impl UcParams {
    pub fn new(alpha: f64, q: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        if !(q >= 2.0 && q.is_finite()) {
            return Err(Error::InvalidParameter(format!("q must be >= 2, got {q}")));
        }
        Ok(Self { alpha, q })
    }
}

/// A compact convex set accessed through its linear minimization oracle.
///
/// Implementations are immutable after construction, so every method is safe
/// to call concurrently.
pub trait ConvexSet: Send + Sync {
    /// Ambient dimension.
    fn dim(&self) -> usize;

    /// Returns the selected minimizer of `y -> <g, y>` over the set.
    ///
    /// Fails on a dimension mismatch or a non-finite direction. For `g = 0`
    /// the canonical atom of the set is returned.
    fn lmo(&self, g: &Vector) -> Result<Vector>;

    /// `true` iff `x` lies within Euclidean distance `tol` of the set.
    ///
    /// Sets without a closed-form distance document the conservative test
    /// they use instead.
    fn contains(&self, x: &Vector, tol: f64) -> Result<bool>;

    /// Upper bound on `max ||x - y||` over the set; exact for closed-form
    /// kinds.
    fn diameter(&self) -> f64;

    /// A point of the relative interior used as the origin of radial probes.
    fn interior_point(&self) -> Vector;

    /// Draws a member point. The distribution is kind-specific and only
    /// guaranteed to charge the whole set.
    fn sample_point(&self, rng: &mut dyn RngCore) -> Vector;

    /// Directions that expose flat faces or corners of the set.
    /// Boundary point reached from [`interior_point`](Self::interior_point)
    /// along `dir`.
    fn boundary_toward(&self, dir: &Vector) -> Vector {
        boundary_point(self, dir)
    }

    fn special_directions(&self) -> Vec<Vector> {
        Vec::new()
    }

    fn describe(&self) -> String;
}

/// Largest `t >= 0` such that `origin + t * dir` is a member (bisection on
/// membership). `origin` must be a member.
pub fn ray_exit<S: ConvexSet + ?Sized>(set: &S, origin: &Vector, dir: &Vector) -> f64 {
    let norm = dir.norm();
    if norm == 0.0 {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = (set.diameter() + 1.0) / norm;
    let mut probe = origin.clone();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        probe.copy_from(origin);
        probe.axpy(mid, dir, 1.0);
        if set.contains(&probe, 0.0).unwrap_or(false) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Boundary point reached from the set's interior point along `dir`.
pub fn boundary_point<S: ConvexSet + ?Sized>(set: &S, dir: &Vector) -> Vector {
    let origin = set.interior_point();
    let t = ray_exit(set, &origin, dir);
    let mut p = origin;
    p.axpy(t, dir, 1.0);
    p
}

/// Uniformly distributed unit vector.
pub fn random_unit(dim: usize, rng: &mut dyn RngCore) -> Vector {
    loop {
        let v = Vector::from_fn(dim, |_, _| StandardNormal.sample(rng));
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// Euclidean distance from `x` to the closest point of a finite reference set.
pub fn dist_to_points(x: &Vector, points: &[Vector]) -> f64 {
    points
        .iter()
        .map(|p| (x - p).norm())
        .fold(f64::INFINITY, f64::min)
}
