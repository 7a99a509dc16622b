use nalgebra::{Cholesky, DMatrix, Dyn, SymmetricEigen};
use rand::{Rng, RngCore};
use rand_distr::{Distribution, Exp1};

use super::{random_unit, ConvexSet, TieBreak};
use crate::{check_dim, check_finite, Error, Result, Vector};

/// `center - radius * g / ||g||`, evaluated so that coordinates next to the
/// poles `center -+ radius e_i` keep full relative accuracy.
fn ball_atom(center: &Vector, radius: f64, g: &Vector) -> Vector {
    let norm = g.norm();
    // At most three coordinates can exceed half the norm, so the O(d) sums
    // below stay cheap.
    let rest = |i: usize| -> f64 {
        g.iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, v)| v * v)
            .sum()
    };
    Vector::from_fn(g.len(), |i, _| {
        let gi = g[i];
        if gi > 0.5 * norm {
            (center[i] - radius) + radius * rest(i) / (norm * (norm + gi))
        } else if gi < -0.5 * norm {
            (center[i] + radius) - radius * rest(i) / (norm * (norm - gi))
        } else {
            center[i] - radius * gi / norm
        }
    })
}

/// Catalog of feasible regions with closed-form LMOs.
#[derive(Debug, Clone)]
pub enum SetKind {
    L2Ball {
        center: Vector,
        radius: f64,
    },
    /// `{x : ||x - center||_p <= radius}` with `p >= 2`.
    LpBall {
        center: Vector,
        radius: f64,
        p: f64,
    },
    /// Probability simplex `{x >= 0, sum x = 1}`.
    Simplex {
        dim: usize,
    },
    Box {
        lo: Vector,
        hi: Vector,
    },
    /// `{x : (x - center)^T shape^{-1} (x - center) <= 1}`.
    Ellipsoid {
        center: Vector,
        shape: DMatrix<f64>,
    },
    /// `([-a, a] x {0}) + B(0, 1)` in the plane.
    Stadium {
        half_length: f64,
    },
    /// Segment `[start, end]` thickened by `radius`, any dimension.
    Capsule {
        start: Vector,
        end: Vector,
        radius: f64,
    },
    /// `B(0, 1) ∩ {x_1 <= cut}` in the plane.
    TruncatedDisk {
        cut: f64,
    },
    /// Convex hull of a finite vertex list.
    VertexPolytope {
        vertices: Vec<Vector>,
    },
}

#[derive(Debug, Clone)]
struct EllipsoidCache {
    chol: Cholesky<f64, Dyn>,
    lambda_min: f64,
    lambda_max: f64,
}

/// A catalog set together with its atom-selection rule.
#[derive(Debug, Clone)]
pub struct FeasibleSet {
    kind: SetKind,
    tie_break: TieBreak,
    dim: usize,
    ellipsoid: Option<EllipsoidCache>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn nonempty(name: &str, v: &Vector) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "{name} must have dimension >= 1"
        )));
    }
    check_finite("set parameter", v)
}

impl FeasibleSet {
    fn from_kind(kind: SetKind) -> Self {
        let dim = match &kind {
            SetKind::L2Ball { center, .. }
            | SetKind::LpBall { center, .. }
            | SetKind::Ellipsoid { center, .. } => center.len(),
            SetKind::Simplex { dim } => *dim,
            SetKind::Box { lo, .. } => lo.len(),
            SetKind::Stadium { .. } | SetKind::TruncatedDisk { .. } => 2,
            SetKind::Capsule { start, .. } => start.len(),
            SetKind::VertexPolytope { vertices } => vertices[0].len(),
        };
        Self {
            kind,
            tie_break: TieBreak::default(),
            dim,
            ellipsoid: None,
        }
    }

    pub fn l2_ball(center: Vector, radius: f64) -> Result<Self> {
        nonempty("center", &center)?;
        positive("radius", radius)?;
        Ok(Self::from_kind(SetKind::L2Ball { center, radius }))
    }

    pub fn lp_ball(center: Vector, radius: f64, p: f64) -> Result<Self> {
        nonempty("center", &center)?;
        positive("radius", radius)?;
        if !(p >= 2.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "p must be finite and >= 2, got {p}"
            )));
        }
        Ok(Self::from_kind(SetKind::LpBall { center, radius, p }))
    }

    pub fn simplex(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "simplex dimension must be >= 1".into(),
            ));
        }
        Ok(Self::from_kind(SetKind::Simplex { dim }))
    }

    pub fn unit_box(dim: usize) -> Result<Self> {
        Self::cube(Vector::zeros(dim), Vector::from_element(dim, 1.0))
    }

    pub fn cube(lo: Vector, hi: Vector) -> Result<Self> {
        nonempty("lo", &lo)?;
        check_dim(lo.len(), &hi)?;
        check_finite("hi", &hi)?;
        if lo.iter().zip(hi.iter()).any(|(l, h)| l > h) {
            return Err(Error::InvalidParameter("box requires lo <= hi".into()));
        }
        Ok(Self::from_kind(SetKind::Box { lo, hi }))
    }

    pub fn ellipsoid(center: Vector, shape: DMatrix<f64>) -> Result<Self> {
        nonempty("center", &center)?;
        let d = center.len();
        if shape.nrows() != d || shape.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: shape.nrows(),
            });
        }
        if (&shape - shape.transpose()).amax() > 1e-12 * (1.0 + shape.amax()) {
            return Err(Error::InvalidParameter(
                "ellipsoid shape must be symmetric".into(),
            ));
        }
        let eig = SymmetricEigen::new(shape.clone());
        let lambda_min = eig.eigenvalues.min();
        let lambda_max = eig.eigenvalues.max();
        if !(lambda_min > 0.0) {
            return Err(Error::InvalidParameter(
                "ellipsoid shape must be positive definite".into(),
            ));
        }
        let chol = Cholesky::new(shape.clone()).ok_or_else(|| {
            Error::InvalidParameter("ellipsoid shape must be positive definite".into())
        })?;
        let mut set = Self::from_kind(SetKind::Ellipsoid { center, shape });
        set.ellipsoid = Some(EllipsoidCache {
            chol,
            lambda_min,
            lambda_max,
        });
        Ok(set)
    }

    /// The planar stadium with cap radius 1.
    pub fn stadium(half_length: f64) -> Result<Self> {
        positive("half_length", half_length)?;
        Ok(Self::from_kind(SetKind::Stadium { half_length }))
    }

    pub fn capsule(start: Vector, end: Vector, radius: f64) -> Result<Self> {
        nonempty("start", &start)?;
        check_dim(start.len(), &end)?;
        check_finite("end", &end)?;
        positive("radius", radius)?;
        Ok(Self::from_kind(SetKind::Capsule { start, end, radius }))
    }

    pub fn truncated_disk(cut: f64) -> Result<Self> {
        if !(cut > 0.0 && cut < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cut level must lie in (0, 1), got {cut}"
            )));
        }
        Ok(Self::from_kind(SetKind::TruncatedDisk { cut }))
    }

    pub fn vertex_polytope(vertices: Vec<Vector>) -> Result<Self> {
        let first = vertices
            .first()
            .ok_or_else(|| Error::InvalidParameter("vertex list is empty".into()))?;
        nonempty("vertex", first)?;
        let d = first.len();
        for v in &vertices {
            check_dim(d, v)?;
            check_finite("vertex", v)?;
        }
        Ok(Self::from_kind(SetKind::VertexPolytope { vertices }))
    }

    pub fn with_tie_break(mut self, rule: TieBreak) -> Self {
        self.tie_break = rule;
        self
    }

    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    pub fn tie_break(&self) -> TieBreak {
        self.tie_break
    }

    fn canonical_atom(&self) -> Vector {
        match &self.kind {
            SetKind::Simplex { dim } => unit(*dim, 0),
            SetKind::Box { lo, .. } => lo.clone(),
            SetKind::VertexPolytope { vertices } => vertices[0].clone(),
            _ => self.atom(&unit(self.dim, 0)),
        }
    }

    /// LMO for a validated, nonzero direction.
    fn atom(&self, g: &Vector) -> Vector {
        let tie = self.tie_break;
        match &self.kind {
            SetKind::L2Ball { center, radius } => ball_atom(center, *radius, g),
            SetKind::LpBall { center, radius, p } => {
                let scaled = g / g.amax();
                let dual = p / (p - 1.0);
                let expo = 1.0 / (p - 1.0);
                let dual_norm = scaled
                    .iter()
                    .map(|c| c.abs().powf(dual))
                    .sum::<f64>()
                    .powf(1.0 / dual);
                let denom = dual_norm.powf(expo);
                Vector::from_fn(g.len(), |i, _| {
                    let c = scaled[i];
                    center[i]
                        - radius * c.signum() * c.abs().powf(expo) / denom * f64::from(c != 0.0)
                })
            }
            SetKind::Simplex { dim } => {
                let min = g.min();
                let tied = (0..*dim).filter(|&i| g[i] == min);
                // e_j is lexicographically smaller than e_i whenever j > i.
                let pick = match tie {
                    TieBreak::LexMin => tied.max(),
                    TieBreak::LexMax => tied.min(),
                };
                unit(*dim, pick.unwrap_or(0))
            }
            SetKind::Box { lo, hi } => Vector::from_fn(g.len(), |i, _| {
                if g[i] > 0.0 {
                    lo[i]
                } else if g[i] < 0.0 {
                    hi[i]
                } else {
                    match tie {
                        TieBreak::LexMin => lo[i],
                        TieBreak::LexMax => hi[i],
                    }
                }
            }),
            SetKind::Ellipsoid { center, shape } => {
                let sg = shape * g;
                let scale = g.dot(&sg).sqrt();
                center - sg / scale
            }
            SetKind::Stadium { half_length } => {
                let a = *half_length;
                capsule_atom(
                    &Vector::from_vec(vec![-a, 0.0]),
                    &Vector::from_vec(vec![a, 0.0]),
                    1.0,
                    g,
                    tie,
                )
            }
            SetKind::Capsule { start, end, radius } => capsule_atom(start, end, *radius, g, tie),
            SetKind::TruncatedDisk { cut } => {
                let b = *cut;
                let u = g / g.norm();
                if -u[0] <= b {
                    -u
                } else {
                    let h = (1.0 - b * b).sqrt();
                    let t = if u[1] > 0.0 {
                        -h
                    } else if u[1] < 0.0 {
                        h
                    } else {
                        match tie {
                            TieBreak::LexMin => -h,
                            TieBreak::LexMax => h,
                        }
                    };
                    Vector::from_vec(vec![b, t])
                }
            }
            SetKind::VertexPolytope { vertices } => {
                let mut best = &vertices[0];
                let mut best_val = g.dot(best);
                for v in &vertices[1..] {
                    let val = g.dot(v);
                    if val < best_val || (val == best_val && tie.prefers(v, best)) {
                        best = v;
                        best_val = val;
                    }
                }
                best.clone()
            }
        }
    }

    fn distance(&self, x: &Vector) -> Option<f64> {
        match &self.kind {
            SetKind::L2Ball { center, radius } => Some(((x - center).norm() - radius).max(0.0)),
            SetKind::Box { lo, hi } => Some(
                x.iter()
                    .enumerate()
                    .map(|(i, &c)| {
                        let e = (lo[i] - c).max(c - hi[i]).max(0.0);
                        e * e
                    })
                    .sum::<f64>()
                    .sqrt(),
            ),
            SetKind::Simplex { .. } => Some((x - project_simplex(x)).norm()),
            SetKind::Stadium { half_length } => {
                let a = *half_length;
                let px = x[0].clamp(-a, a);
                Some((((x[0] - px).powi(2) + x[1] * x[1]).sqrt() - 1.0).max(0.0))
            }
            SetKind::Capsule { start, end, radius } => {
                Some((segment_distance(x, start, end) - radius).max(0.0))
            }
            SetKind::TruncatedDisk { cut } => Some(truncated_disk_distance(x, *cut)),
            _ => None,
        }
    }
}

fn unit(dim: usize, i: usize) -> Vector {
    let mut e = Vector::zeros(dim);
    e[i] = 1.0;
    e
}

fn capsule_atom(start: &Vector, end: &Vector, radius: f64, g: &Vector, tie: TieBreak) -> Vector {
    let axis = end - start;
    let slope = g.dot(&axis);
    let endpoint = if slope < 0.0 || (slope == 0.0 && tie.prefers(end, start)) {
        end
    } else {
        start
    };
    endpoint - g * (radius / g.norm())
}

fn segment_distance(x: &Vector, start: &Vector, end: &Vector) -> f64 {
    let axis = end - start;
    let len2 = axis.norm_squared();
    let t = if len2 > 0.0 {
        ((x - start).dot(&axis) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (x - start - axis * t).norm()
}

fn truncated_disk_distance(x: &Vector, b: f64) -> f64 {
    let r = x.norm();
    if r <= 1.0 && x[0] <= b {
        return 0.0;
    }
    let h = (1.0 - b * b).sqrt();
    let mut best = f64::INFINITY;
    if r > 1.0 && x[0] / r <= b {
        best = best.min(r - 1.0);
    }
    if x[0] > b && b * b + x[1] * x[1] <= 1.0 {
        best = best.min(x[0] - b);
    }
    for corner in [[b, h], [b, -h]] {
        best = best.min(((x[0] - corner[0]).powi(2) + (x[1] - corner[1]).powi(2)).sqrt());
    }
    best
}

/// Euclidean projection onto the probability simplex (sort-based).
fn project_simplex(x: &Vector) -> Vector {
    let mut sorted: Vec<f64> = x.iter().copied().collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cumsum += v;
        let candidate = (cumsum - 1.0) / (k as f64 + 1.0);
        if v - candidate > 0.0 {
            theta = candidate;
        }
    }
    x.map(|c| (c - theta).max(0.0))
}

/// L1 distance from `x` to the hull of `vertices`, by linear programming.
fn hull_l1_residual(x: &Vector, vertices: &[Vector]) -> Result<f64> {
    use minilp::{ComparisonOp, OptimizationDirection, Problem};
    let d = x.len();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let weights: Vec<_> = vertices
        .iter()
        .map(|_| lp.add_var(0.0, (0.0, f64::INFINITY)))
        .collect();
    let slack_pos: Vec<_> = (0..d)
        .map(|_| lp.add_var(1.0, (0.0, f64::INFINITY)))
        .collect();
    let slack_neg: Vec<_> = (0..d)
        .map(|_| lp.add_var(1.0, (0.0, f64::INFINITY)))
        .collect();
    for i in 0..d {
        let mut row: Vec<_> = vertices
            .iter()
            .zip(&weights)
            .map(|(v, &w)| (w, v[i]))
            .collect();
        row.push((slack_pos[i], 1.0));
        row.push((slack_neg[i], -1.0));
        lp.add_constraint(row.as_slice(), ComparisonOp::Eq, x[i]);
    }
    let sum: Vec<_> = weights.iter().map(|&w| (w, 1.0)).collect();
    lp.add_constraint(sum.as_slice(), ComparisonOp::Eq, 1.0);
    let solution = lp
        .solve()
        .map_err(|e| Error::LinearProgram(e.to_string()))?;
    Ok(solution.objective().max(0.0))
}

fn sample_in_box(lo: &[f64], hi: &[f64], rng: &mut dyn RngCore) -> Vector {
    Vector::from_fn(lo.len(), |i, _| {
        lo[i] + (hi[i] - lo[i]) * rng.random::<f64>()
    })
}

fn sample_unit_ball(dim: usize, rng: &mut dyn RngCore) -> Vector {
    let r = rng.random::<f64>().powf(1.0 / dim as f64);
    random_unit(dim, rng) * r
}

fn dirichlet_weights(n: usize, rng: &mut dyn RngCore) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

impl ConvexSet for FeasibleSet {
    fn dim(&self) -> usize {
        self.dim
    }

    fn lmo(&self, g: &Vector) -> Result<Vector> {
        check_dim(self.dim, g)?;
        check_finite("LMO direction", g)?;
        if g.iter().all(|&c| c == 0.0) {
            return Ok(self.canonical_atom());
        }
        Ok(self.atom(g))
    }

    /// Exact Euclidean test for balls, boxes, the simplex, stadium, capsule
    /// and truncated disk. The remaining kinds use sufficient conditions that
    /// accept every point within `tol`:
    /// `||x - c||_p <= R + tol` for l_p balls, gauge `<= 1 + tol / sqrt(lambda_min)`
    /// for ellipsoids, and an L1 hull residual `<= tol` for polytopes.
    fn contains(&self, x: &Vector, tol: f64) -> Result<bool> {
        check_dim(self.dim, x)?;
        if tol < 0.0 || tol.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be >= 0, got {tol}"
            )));
        }
        if x.iter().any(|c| !c.is_finite()) {
            return Ok(false);
        }
        if let Some(dist) = self.distance(x) {
            return Ok(dist <= tol);
        }
        match &self.kind {
            SetKind::LpBall { center, radius, p } => {
                let diff = x - center;
                let amax = diff.amax();
                let norm = if amax == 0.0 {
                    0.0
                } else {
                    amax * diff
                        .iter()
                        .map(|c| (c.abs() / amax).powf(*p))
                        .sum::<f64>()
                        .powf(1.0 / p)
                };
                Ok(norm <= radius + tol)
            }
            SetKind::Ellipsoid { center, .. } => {
                let cache = self.ellipsoid.as_ref().expect("ellipsoid cache");
                let diff = x - center;
                let gauge = diff.dot(&cache.chol.solve(&diff)).max(0.0).sqrt();
                Ok(gauge <= 1.0 + tol / cache.lambda_min.sqrt())
            }
            SetKind::VertexPolytope { vertices } => {
                Ok(hull_l1_residual(x, vertices)? <= tol + 1e-12)
            }
            _ => unreachable!("closed-form distance handled above"),
        }
    }

    fn diameter(&self) -> f64 {
        match &self.kind {
            SetKind::L2Ball { radius, .. } => 2.0 * radius,
            SetKind::LpBall { radius, p, .. } => {
                2.0 * radius * (self.dim as f64).powf(0.5 - 1.0 / p)
            }
            SetKind::Simplex { dim } => {
                if *dim > 1 {
                    std::f64::consts::SQRT_2
                } else {
                    0.0
                }
            }
            SetKind::Box { lo, hi } => (hi - lo).norm(),
            SetKind::Ellipsoid { .. } => {
                2.0 * self.ellipsoid.as_ref().expect("cache").lambda_max.sqrt()
            }
            SetKind::Stadium { half_length } => 2.0 * half_length + 2.0,
            SetKind::Capsule { start, end, radius } => (end - start).norm() + 2.0 * radius,
            SetKind::TruncatedDisk { .. } => 2.0,
            SetKind::VertexPolytope { vertices } => {
                let mut best: f64 = 0.0;
                for (i, u) in vertices.iter().enumerate() {
                    for v in &vertices[i + 1..] {
                        best = best.max((u - v).norm());
                    }
                }
                best
            }
        }
    }

    fn interior_point(&self) -> Vector {
        match &self.kind {
            SetKind::L2Ball { center, .. }
            | SetKind::LpBall { center, .. }
            | SetKind::Ellipsoid { center, .. } => center.clone(),
            SetKind::Simplex { dim } => Vector::from_element(*dim, 1.0 / *dim as f64),
            SetKind::Box { lo, hi } => (lo + hi) * 0.5,
            SetKind::Stadium { .. } => Vector::zeros(2),
            SetKind::Capsule { start, end, .. } => (start + end) * 0.5,
            SetKind::TruncatedDisk { cut } => Vector::from_vec(vec![0.5 * (cut - 1.0), 0.0]),
            SetKind::VertexPolytope { vertices } => {
                vertices
                    .iter()
                    .fold(Vector::zeros(self.dim), |acc, v| acc + v)
                    / vertices.len() as f64
            }
        }
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> Vector {
        match &self.kind {
            SetKind::L2Ball { center, radius } => {
                center + sample_unit_ball(self.dim, rng) * *radius
            }
            SetKind::LpBall { center, radius, p } => {
                // Uniform direction rescaled to the l_p sphere, then a radial draw.
                let v = random_unit(self.dim, rng);
                let amax = v.amax();
                let pnorm = amax
                    * v.iter()
                        .map(|c| (c.abs() / amax).powf(*p))
                        .sum::<f64>()
                        .powf(1.0 / p);
                let r = rng.random::<f64>().powf(1.0 / self.dim as f64);
                center + v * (radius * r / pnorm)
            }
            SetKind::Simplex { dim } => Vector::from_vec(dirichlet_weights(*dim, rng)),
            SetKind::Box { lo, hi } => sample_in_box(lo.as_slice(), hi.as_slice(), rng),
            SetKind::Ellipsoid { center, .. } => {
                let cache = self.ellipsoid.as_ref().expect("cache");
                center + cache.chol.l() * sample_unit_ball(self.dim, rng)
            }
            SetKind::Stadium { half_length } => {
                let a = *half_length;
                loop {
                    let x = sample_in_box(&[-a - 1.0, -1.0], &[a + 1.0, 1.0], rng);
                    if self.distance(&x) == Some(0.0) {
                        return x;
                    }
                }
            }
            SetKind::Capsule { start, end, radius } => {
                let t = rng.random::<f64>();
                let along = start + (end - start) * t;
                along + sample_unit_ball(self.dim, rng) * *radius
            }
            SetKind::TruncatedDisk { cut } => loop {
                let x = sample_in_box(&[-1.0, -1.0], &[*cut, 1.0], rng);
                if x.norm() <= 1.0 {
                    return x;
                }
            },
            SetKind::VertexPolytope { vertices } => {
                let w = dirichlet_weights(vertices.len(), rng);
                vertices
                    .iter()
                    .zip(w)
                    .fold(Vector::zeros(self.dim), |acc, (v, wi)| acc + v * wi)
            }
        }
    }

    fn special_directions(&self) -> Vec<Vector> {
        let axes = |dim: usize| -> Vec<Vector> {
            (0..dim)
                .flat_map(|i| [unit(dim, i), -unit(dim, i)])
                .collect()
        };
        match &self.kind {
            SetKind::Box { .. }
            | SetKind::Simplex { .. }
            | SetKind::VertexPolytope { .. }
            | SetKind::Stadium { .. }
            | SetKind::Capsule { .. } => axes(self.dim),
            SetKind::TruncatedDisk { cut } => {
                let h = (1.0 - cut * cut).sqrt();
                let mut dirs = axes(2);
                for (x, y) in [(*cut, h), (*cut, -h), (-cut, h), (-cut, -h)] {
                    dirs.push(Vector::from_vec(vec![x, y]));
                }
                dirs
            }
            _ => Vec::new(),
        }
    }

    fn describe(&self) -> String {
        let v = |x: &Vector| format!("{:?}", x.as_slice());
        match &self.kind {
            SetKind::L2Ball { center, radius } => {
                format!("l2-ball(center={}, radius={radius})", v(center))
            }
            SetKind::LpBall { center, radius, p } => {
                format!("lp-ball(center={}, radius={radius}, p={p})", v(center))
            }
            SetKind::Simplex { dim } => format!("simplex(dim={dim})"),
            SetKind::Box { lo, hi } => format!("box(lo={}, hi={})", v(lo), v(hi)),
            SetKind::Ellipsoid { center, .. } => {
                format!("ellipsoid(center={}, dim={})", v(center), self.dim)
            }
            SetKind::Stadium { half_length } => format!("stadium(half_length={half_length})"),
            SetKind::Capsule { start, end, radius } => {
                format!(
                    "capsule(start={}, end={}, radius={radius})",
                    v(start),
                    v(end)
                )
            }
            SetKind::TruncatedDisk { cut } => format!("truncated-disk(cut={cut})"),
            SetKind::VertexPolytope { vertices } => {
                format!("polytope(vertices={})", vertices.len())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::random_unit;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(c: &[f64]) -> Vector {
        Vector::from_row_slice(c)
    }

    #[test]
    fn l2_ball_atom_is_antipodal() {
        let ball = FeasibleSet::l2_ball(Vector::zeros(2), 1.0).unwrap();
        assert_eq!(ball.lmo(&v(&[0.0, 1.0])).unwrap(), v(&[0.0, -1.0]));
    }

    #[test]
    fn stadium_atom_for_horizontal_direction() {
        let stadium = FeasibleSet::stadium(1.0).unwrap();
        let s = stadium.lmo(&v(&[1.0, 0.0])).unwrap();
        assert_eq!(s, v(&[-2.0, 0.0]));
        assert_eq!(s.dot(&v(&[1.0, 0.0])), -2.0);
    }

    #[test]
    fn stadium_vertical_tie_picks_left_end_of_flat_side() {
        let stadium = FeasibleSet::stadium(1.0).unwrap();
        assert_eq!(stadium.lmo(&v(&[0.0, 3.0])).unwrap(), v(&[-1.0, -1.0]));
        let flipped = stadium.clone().with_tie_break(TieBreak::LexMax);
        assert_eq!(flipped.lmo(&v(&[0.0, 3.0])).unwrap(), v(&[1.0, -1.0]));
    }

    #[test]
    fn truncated_disk_facet_atom() {
        let disk = FeasibleSet::truncated_disk(0.5).unwrap();
        let s = disk.lmo(&v(&[-2.0, -1.0])).unwrap();
        assert_eq!(s[0], 0.5);
        assert!((s[1] - 0.75f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn lp_ball_atom_lies_on_sphere() {
        let ball = FeasibleSet::lp_ball(Vector::zeros(2), 1.0, 4.0).unwrap();
        let s = ball.lmo(&v(&[1.0, 1.0])).unwrap();
        let expected = -(0.5f64).powf(0.25);
        assert!((s[0] - expected).abs() < 1e-15 && (s[1] - expected).abs() < 1e-15);
        assert!((s[0].powi(4) + s[1].powi(4) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn simplex_ties_use_lexicographic_rule() {
        let simplex = FeasibleSet::simplex(3).unwrap();
        assert_eq!(
            simplex.lmo(&v(&[1.0, 0.0, 0.0])).unwrap(),
            v(&[0.0, 0.0, 1.0])
        );
        assert_eq!(simplex.lmo(&Vector::zeros(3)).unwrap(), v(&[1.0, 0.0, 0.0]));
        let lexmax = simplex.with_tie_break(TieBreak::LexMax);
        assert_eq!(
            lexmax.lmo(&v(&[1.0, 0.0, 0.0])).unwrap(),
            v(&[0.0, 1.0, 0.0])
        );
    }

    #[test]
    fn zero_direction_returns_canonical_atom() {
        let ball = FeasibleSet::l2_ball(v(&[1.0, 1.0]), 2.0).unwrap();
        assert_eq!(ball.lmo(&Vector::zeros(2)).unwrap(), v(&[-1.0, 1.0]));
        let cube = FeasibleSet::unit_box(2).unwrap();
        assert_eq!(cube.lmo(&Vector::zeros(2)).unwrap(), Vector::zeros(2));
    }

    #[test]
    fn lmo_rejects_bad_inputs() {
        let ball = FeasibleSet::l2_ball(Vector::zeros(2), 1.0).unwrap();
        assert!(matches!(
            ball.lmo(&Vector::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            ball.lmo(&v(&[f64::NAN, 0.0])),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn constructors_reject_invalid_parameters() {
        assert!(FeasibleSet::lp_ball(Vector::zeros(2), 1.0, 1.5).is_err());
        assert!(FeasibleSet::l2_ball(Vector::zeros(2), 0.0).is_err());
        assert!(FeasibleSet::truncated_disk(1.0).is_err());
        assert!(FeasibleSet::truncated_disk(0.0).is_err());
        assert!(FeasibleSet::vertex_polytope(vec![]).is_err());
        assert!(FeasibleSet::stadium(-1.0).is_err());
        assert!(FeasibleSet::ellipsoid(
            Vector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])
        )
        .is_err());
    }

    #[test]
    fn membership_examples() {
        let ball = FeasibleSet::l2_ball(Vector::zeros(2), 1.0).unwrap();
        assert!(ball.contains(&Vector::zeros(2), 0.0).unwrap());
        let stadium = FeasibleSet::stadium(1.0).unwrap();
        assert!(stadium.contains(&v(&[2.0, 0.0]), 0.0).unwrap());
        assert!(!stadium.contains(&v(&[2.0, 0.1]), 0.0).unwrap());
        let disk = FeasibleSet::truncated_disk(0.5).unwrap();
        assert!(!disk.contains(&v(&[0.6, 0.0]), 0.0).unwrap());
        assert!(disk.contains(&v(&[0.6, 0.0]), 0.1 + 1e-12).unwrap());
        assert!(matches!(
            ball.contains(&Vector::zeros(3), 0.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn polytope_membership_uses_hull() {
        let tri =
            FeasibleSet::vertex_polytope(vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0])])
                .unwrap();
        assert!(tri.contains(&v(&[0.25, 0.25]), 0.0).unwrap());
        assert!(!tri.contains(&v(&[0.75, 0.75]), 0.0).unwrap());
        assert!(tri.contains(&v(&[0.5, 0.5]), 0.0).unwrap());
    }

    #[test]
    fn truncated_disk_distance_cases() {
        // outside the facet, inside the disk strip
        assert!((truncated_disk_distance(&v(&[0.7, 0.0]), 0.5) - 0.2).abs() < 1e-15);
        // outside the disk, below the cut
        assert!((truncated_disk_distance(&v(&[0.0, -2.0]), 0.5) - 1.0).abs() < 1e-15);
        // closest point is a corner
        let h = 0.75f64.sqrt();
        let d = truncated_disk_distance(&v(&[1.0, 1.0]), 0.5);
        assert!((d - ((0.5f64).powi(2) + (1.0 - h).powi(2)).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn closed_form_diameters() {
        assert_eq!(
            FeasibleSet::l2_ball(Vector::zeros(3), 1.5)
                .unwrap()
                .diameter(),
            3.0
        );
        assert_eq!(FeasibleSet::stadium(1.0).unwrap().diameter(), 4.0);
        assert!((FeasibleSet::unit_box(4).unwrap().diameter() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn samples_and_boundary_points_are_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sets = vec![
            FeasibleSet::l2_ball(v(&[0.5, -1.0]), 2.0).unwrap(),
            FeasibleSet::lp_ball(Vector::zeros(3), 1.0, 4.0).unwrap(),
            FeasibleSet::simplex(4).unwrap(),
            FeasibleSet::unit_box(3).unwrap(),
            FeasibleSet::ellipsoid(
                Vector::zeros(2),
                DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]),
            )
            .unwrap(),
            FeasibleSet::stadium(1.0).unwrap(),
            FeasibleSet::capsule(v(&[0.0, 0.0, 0.0]), v(&[1.0, 1.0, 0.0]), 0.5).unwrap(),
            FeasibleSet::truncated_disk(0.3).unwrap(),
        ];
        for set in &sets {
            for _ in 0..200 {
                let x = set.sample_point(&mut rng);
                assert!(set.contains(&x, 1e-12).unwrap(), "{}", set.describe());
                let dir = random_unit(set.dim(), &mut rng);
                if matches!(set.kind(), SetKind::Simplex { .. }) {
                    continue;
                }
                let b = set.boundary_toward(&dir);
                assert!(set.contains(&b, 1e-12).unwrap());
                assert!(
                    !set.contains(&(b + dir * 1e-6), 0.0).unwrap(),
                    "{}",
                    set.describe()
                );
            }
        }
    }
}
