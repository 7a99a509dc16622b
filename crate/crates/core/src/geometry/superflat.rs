use rand::{Rng, RngCore};

use super::{lex_cmp, ConvexSet};
use crate::{check_dim, check_finite, Error, Result, Vector};

const CAP_HEIGHT: f64 = 0.1;
const CAP_RADIUS: f64 = 1.0;
const BOUNDARY_SAMPLES: usize = 2048;

/// `exp(-1/x^2)`, extended by 0 at the origin.
fn flat(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        (-1.0 / (x * x)).exp()
    }
}

fn flat_slope(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        2.0 / (x * x * x) * (-1.0 / (x * x)).exp()
    }
}

/// Strictly convex planar body whose lower boundary near the origin is the
/// graph `y = exp(-1/x^2)`.
///
/// At unit scale the body is `{y >= exp(-1/x^2)}` intersected with the disk
/// of radius 1 centred at `(0, -0.9)`; the two curves cross at `|x| = x_e`,
/// well inside the region `|x| < sqrt(2/3)` where the graph is convex. The
/// origin is the support point for the normal `(0, 1)` and every boundary
/// point `(u, exp(-1/u^2))` has support gap `exp(-1/u^2)` in that direction,
/// so no power-type sharpness inequality holds around the origin.
///
/// The LMO bisects the monotone derivative of `x -> g_1 x + g_2 exp(-1/x^2)`
/// to parameter resolution `1e-12` (relative) and compares the result with
/// the cap's closed-form minimizer and the two corners.
#[derive(Debug, Clone)]
pub struct SuperflatBody {
    scale: f64,
    corner_x: f64,
    diameter: f64,
}

impl SuperflatBody {
    pub fn new(scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "scale must be positive, got {scale}"
            )));
        }
        let mut body = Self {
            scale,
            corner_x: corner_abscissa(),
            diameter: 0.0,
        };
        body.diameter = body.boundary_diameter();
        Ok(body)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Point of the flat lower boundary with abscissa `u` (unscaled parameter).
    pub fn flat_point(&self, u: f64) -> Vector {
        let u = u.clamp(-self.corner_x, self.corner_x);
        Vector::from_vec(vec![self.scale * u, self.scale * flat(u)])
    }

    /// Support gap `<g, x - lmo(g)>`.
    pub fn support_gap(&self, x: &Vector, g: &Vector) -> Result<f64> {
        let s = self.lmo(g)?;
        Ok(g.dot(&(x - s)))
    }

    fn cap_y(x: f64) -> f64 {
        CAP_HEIGHT - CAP_RADIUS + (CAP_RADIUS * CAP_RADIUS - x * x).max(0.0).sqrt()
    }

    fn unit_contains(&self, x: f64, y: f64, tol: f64) -> bool {
        let centre_y = CAP_HEIGHT - CAP_RADIUS;
        let in_disk = (x * x + (y - centre_y).powi(2)).sqrt() <= CAP_RADIUS + tol;
        let above = x.abs() <= CAP_RADIUS && y >= flat(x) - tol;
        in_disk && above
    }

    fn unit_lmo(&self, g1: f64, g2: f64) -> (f64, f64) {
        let xe = self.corner_x;
        let ye = flat(xe);
        let mut candidates = vec![(-xe, ye), (xe, ye)];
        if g2 > 0.0 {
            candidates.push(self.flat_minimizer(g1, g2));
        }
        let norm = g1.hypot(g2);
        let cap = (
            -CAP_RADIUS * g1 / norm,
            CAP_HEIGHT - CAP_RADIUS - CAP_RADIUS * g2 / norm,
        );
        if cap.1 >= flat(cap.0) {
            candidates.push(cap);
        }
        let value = |p: &(f64, f64)| g1 * p.0 + g2 * p.1;
        let mut best = candidates[0];
        for c in &candidates[1..] {
            let (vc, vb) = (value(c), value(&best));
            let tie_wins = vc == vb
                && lex_cmp(
                    &Vector::from_vec(vec![c.0, c.1]),
                    &Vector::from_vec(vec![best.0, best.1]),
                )
                .is_lt();
            if vc < vb || tie_wins {
                best = *c;
            }
        }
        best
    }

    /// Minimizer of `g1 x + g2 exp(-1/x^2)` over `[-x_e, x_e]` for `g2 > 0`.
    fn flat_minimizer(&self, g1: f64, g2: f64) -> (f64, f64) {
        if g1 == 0.0 {
            return (0.0, 0.0);
        }
        let xe = self.corner_x;
        let deriv = |x: f64| g1 + g2 * flat_slope(x);
        if deriv(-xe) >= 0.0 {
            return (-xe, flat(xe));
        }
        if deriv(xe) <= 0.0 {
            return (xe, flat(xe));
        }
        let (mut lo, mut hi) = (-xe, xe);
        while hi - lo > 1e-12 * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if deriv(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x = 0.5 * (lo + hi);
        (x, flat(x))
    }

    fn boundary_sample(&self) -> Vec<(f64, f64)> {
        let xe = self.corner_x;
        let half = BOUNDARY_SAMPLES / 2;
        let mut pts = Vec::with_capacity(BOUNDARY_SAMPLES);
        for i in 0..half {
            let x = -xe + 2.0 * xe * i as f64 / (half - 1) as f64;
            pts.push((x, flat(x)));
        }
        for i in 0..half {
            let x = xe - 2.0 * xe * i as f64 / (half - 1) as f64;
            pts.push((x, Self::cap_y(x)));
        }
        pts
    }

    fn boundary_diameter(&self) -> f64 {
        let pts = self.boundary_sample();
        let dist = |a: &(f64, f64), b: &(f64, f64)| (a.0 - b.0).hypot(a.1 - b.1);
        let mut best: f64 = 0.0;
        let mut spacing: f64 = 0.0;
        for (i, a) in pts.iter().enumerate() {
            spacing = spacing.max(dist(a, &pts[(i + 1) % pts.len()]));
            for b in &pts[i + 1..] {
                best = best.max(dist(a, b));
            }
        }
        // Every boundary point is within half a spacing of a sample point.
        self.scale * (best + spacing)
    }
}

fn corner_abscissa() -> f64 {
    let (mut lo, mut hi) = (0.0_f64, (2.0_f64 / 3.0).sqrt());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if flat(mid) < SuperflatBody::cap_y(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

impl ConvexSet for SuperflatBody {
    fn dim(&self) -> usize {
        2
    }

    fn lmo(&self, g: &Vector) -> Result<Vector> {
        check_dim(2, g)?;
        check_finite("LMO direction", g)?;
        let (x, y) = if g[0] == 0.0 && g[1] == 0.0 {
            self.unit_lmo(1.0, 0.0)
        } else {
            self.unit_lmo(g[0], g[1])
        };
        Ok(Vector::from_vec(vec![self.scale * x, self.scale * y]))
    }

    /// Accepts points inside the cap disk (Euclidean tolerance) that lie at
    /// most `tol` below the flat graph. The vertical violation bounds the
    /// Euclidean distance to the epigraph, so the test is exact up to `tol`
    /// away from the two corners.
    fn contains(&self, x: &Vector, tol: f64) -> Result<bool> {
        check_dim(2, x)?;
        if tol < 0.0 || tol.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be >= 0, got {tol}"
            )));
        }
        if !x[0].is_finite() || !x[1].is_finite() {
            return Ok(false);
        }
        Ok(self.unit_contains(x[0] / self.scale, x[1] / self.scale, tol / self.scale))
    }

    fn diameter(&self) -> f64 {
        self.diameter
    }

    fn interior_point(&self) -> Vector {
        Vector::from_vec(vec![0.0, 0.5 * CAP_HEIGHT * self.scale])
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> Vector {
        let xe = self.corner_x;
        loop {
            let x = xe * (2.0 * rng.random::<f64>() - 1.0);
            let y = CAP_HEIGHT * rng.random::<f64>();
            if self.unit_contains(x, y, 0.0) {
                return Vector::from_vec(vec![self.scale * x, self.scale * y]);
            }
        }
    }

    /// Snaps exits through the flat piece onto the graph, whose height is far
    /// below the resolution of a ray bisection near the origin.
    fn boundary_toward(&self, dir: &Vector) -> Vector {
        let p = super::boundary_point(self, dir);
        let (x, y) = (p[0] / self.scale, p[1] / self.scale);
        if x.abs() <= self.corner_x && y < 0.5 * CAP_HEIGHT {
            self.flat_point(x)
        } else {
            p
        }
    }

    fn special_directions(&self) -> Vec<Vector> {
        vec![
            Vector::from_vec(vec![0.0, 1.0]),
            Vector::from_vec(vec![0.0, -1.0]),
        ]
    }

    fn describe(&self) -> String {
        format!("superflat(scale={})", self.scale)
    }
}
