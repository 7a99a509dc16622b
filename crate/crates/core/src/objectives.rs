//! Smooth convex objectives with optional ground truth.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::ConvexSet;
use crate::{check_dim, check_finite, Error, Result, Vector};

/// Largest negative primal gap accepted as round-off (clipped to zero).
pub const PRIMAL_GAP_ROUNDOFF: f64 = 1e-12;

#[derive(Debug, Clone)]
pub enum ObjectiveKind {
    /// `0.5 x^T q x + c^T x` with `q` symmetric positive semidefinite.
    Quadratic {
        q: DMatrix<f64>,
        c: Vector,
    },
    Linear {
        c: Vector,
    },
    /// `||x - center||^r` with `r >= 2`.
    DistancePower {
        center: Vector,
        r: f64,
    },
    /// `0.5 x_2^2 + psi(c - x_1)` with `psi(u) = u - atan(u)`.
    StadiumPsi {
        c: f64,
    },
}

/// Closed-form minimizer sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MinimizerSet {
    Point { point: Vec<f64> },
    Segment { start: Vec<f64>, end: Vec<f64> },
}

impl MinimizerSet {
    pub fn point(p: &Vector) -> Self {
        MinimizerSet::Point {
            point: p.as_slice().to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            MinimizerSet::Point { point } => point.len(),
            MinimizerSet::Segment { start, .. } => start.len(),
        }
    }

    /// Euclidean distance from `x` to the set.
    pub fn distance(&self, x: &Vector) -> f64 {
        match self {
            MinimizerSet::Point { point } => x
                .iter()
                .zip(point)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt(),
            MinimizerSet::Segment { start, end } => {
                let a = Vector::from_column_slice(start);
                let axis = Vector::from_column_slice(end) - &a;
                let len2 = axis.norm_squared();
                let t = if len2 > 0.0 {
                    ((x - &a).dot(&axis) / len2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                (x - a - axis * t).norm()
            }
        }
    }

    /// A representative point of the set.
    pub fn witness(&self) -> Vector {
        match self {
            MinimizerSet::Point { point } => Vector::from_column_slice(point),
            MinimizerSet::Segment { start, .. } => Vector::from_column_slice(start),
        }
    }
}

/// Where a ground-truth optimal value comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    /// Closed form; the minimizer witness attains `f_star` exactly.
    Analytic,
    /// Upper estimate from a long reference run with the recorded dual-gap
    /// certificate.
    Reference {
        iterations: u64,
        gap_certificate: f64,
    },
}

/// Local Hölder error bound `dist(x, M)^r <= b (f(x) - f_star)` for
/// `dist(x, M) < rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HebCertificate {
    pub b: f64,
    pub r: f64,
    pub rho: f64,
}

/// Outcome of a sampled error-bound check.
#[derive(Debug, Clone, Serialize)]
pub struct HebReport {
    pub holds: bool,
    pub samples_in_neighborhood: usize,
    /// Largest `dist^r - b F` seen (nonpositive when the bound holds).
    pub worst_excess: f64,
    pub worst_point: Vec<f64>,
}

impl HebCertificate {
    pub fn new(b: f64, r: f64, rho: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite() && r >= 2.0 && r.is_finite() && rho > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "error bound needs b > 0, r >= 2, rho > 0 (got b={b}, r={r}, rho={rho})"
            )));
        }
        Ok(Self { b, r, rho })
    }

    /// Checks the bound on `samples` random members of `set` that fall within
    /// `rho` of the minimizer set, with additive slack `1e-9`.
    pub fn validate<S: ConvexSet + ?Sized>(
        &self,
        set: &S,
        obj: &Objective,
        samples: usize,
        seed: u64,
    ) -> Result<HebReport> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut report = HebReport {
            holds: true,
            samples_in_neighborhood: 0,
            worst_excess: f64::NEG_INFINITY,
            worst_point: Vec::new(),
        };
        for _ in 0..samples {
            let x = set.sample_point(&mut rng);
            let dist = obj.dist_to_minimizers(&x)?;
            if dist >= self.rho {
                continue;
            }
            report.samples_in_neighborhood += 1;
            let excess = dist.powf(self.r) - self.b * obj.primal_gap(&x)?;
            if excess > report.worst_excess {
                report.worst_excess = excess;
                report.worst_point = x.as_slice().to_vec();
            }
            if excess > 1e-9 {
                report.holds = false;
            }
        }
        if report.samples_in_neighborhood == 0 {
            return Err(Error::EmptyNeighborhood { rho: self.rho });
        }
        Ok(report)
    }
}

/// Known optimal value and, optionally, the minimizer set and an error bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub f_star: f64,
    pub minimizers: Option<MinimizerSet>,
    pub heb: Option<HebCertificate>,
    pub provenance: Provenance,
}

/// A smooth convex objective with its smoothness constant on the feasible set.
#[derive(Debug, Clone)]
pub struct Objective {
    kind: ObjectiveKind,
    dim: usize,
    smoothness: f64,
    ground_truth: Option<GroundTruth>,
}

/// `u - atan(u)`, evaluated by its Taylor series near zero to avoid
/// cancellation.
pub fn psi(u: f64) -> f64 {
    if u.abs() < 0.1 {
        let u2 = u * u;
        let mut term = u * u2;
        let mut sum = 0.0;
        for k in 1..=10 {
            sum += term / (2 * k + 1) as f64;
            term *= -u2;
        }
        sum
    } else {
        u - u.atan()
    }
}

/// `psi'(u) = u^2 / (1 + u^2)`.
pub fn psi_prime(u: f64) -> f64 {
    let u2 = u * u;
    u2 / (1.0 + u2)
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

impl Objective {
    fn build(kind: ObjectiveKind, dim: usize, smoothness: f64) -> Result<Self> {
        positive("smoothness constant", smoothness)?;
        Ok(Self {
            kind,
            dim,
            smoothness,
            ground_truth: None,
        })
    }

    /// `0.5 x^T q x + c^T x`; the smoothness constant is `lambda_max(q)`
    /// (or 1 if `q = 0`).
    pub fn quadratic(q: DMatrix<f64>, c: Vector) -> Result<Self> {
        check_finite("linear term", &c)?;
        let d = c.len();
        if d == 0 || q.nrows() != d || q.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: q.nrows(),
            });
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("quadratic term"));
        }
        let scale = 1.0 + q.amax();
        if (&q - q.transpose()).amax() > 1e-12 * scale {
            return Err(Error::InvalidParameter(
                "quadratic term must be symmetric".into(),
            ));
        }
        let eig = SymmetricEigen::new(q.clone()).eigenvalues;
        if eig.min() < -1e-12 * scale {
            return Err(Error::InvalidParameter(
                "quadratic term must be positive semidefinite".into(),
            ));
        }
        let l = if eig.max() > 0.0 { eig.max() } else { 1.0 };
        Self::build(ObjectiveKind::Quadratic { q, c }, d, l)
    }

    /// `0.5 ||x||^2`.
    pub fn half_squared_norm(dim: usize) -> Result<Self> {
        Self::quadratic(DMatrix::identity(dim, dim), Vector::zeros(dim))
    }

    /// `<c, x>`. A linear function is `L`-smooth for every `L > 0`; the
    /// default constant is 1 and can be replaced with [`Self::with_smoothness`].
    pub fn linear(c: Vector) -> Result<Self> {
        check_finite("linear term", &c)?;
        if c.is_empty() {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        let d = c.len();
        Self::build(ObjectiveKind::Linear { c }, d, 1.0)
    }

    /// `||x - center||^r` with smoothness constant `r (r-1) diameter^(r-2)`.
    ///
    /// `diameter` must bound `||x - center||` over the feasible set. The
    /// attached ground truth (`f_star = 0`, `M = {center}`, error bound
    /// `(1, r, diameter + 1)`) assumes `center` is feasible.
    pub fn distance_power(center: Vector, r: f64, diameter: f64) -> Result<Self> {
        check_finite("center", &center)?;
        if center.is_empty() {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if !(r >= 2.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("r must be >= 2, got {r}")));
        }
        positive("diameter", diameter)?;
        let l = r * (r - 1.0) * diameter.powf(r - 2.0);
        let d = center.len();
        let truth = GroundTruth {
            f_star: 0.0,
            minimizers: Some(MinimizerSet::point(&center)),
            heb: Some(HebCertificate::new(1.0, r, diameter + 1.0)?),
            provenance: Provenance::Analytic,
        };
        let mut obj = Self::build(ObjectiveKind::DistancePower { center, r }, d, l)?;
        obj.ground_truth = Some(truth);
        Ok(obj)
    }

    /// `0.5 x_2^2 + psi(c - x_1)` in the plane, 1-smooth. Requires `c >= 2`.
    pub fn stadium_psi(c: f64) -> Result<Self> {
        if !(c >= 2.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("c must be >= 2, got {c}")));
        }
        Self::build(ObjectiveKind::StadiumPsi { c }, 2, 1.0)
    }

    pub fn with_smoothness(mut self, l: f64) -> Result<Self> {
        positive("smoothness constant", l)?;
        self.smoothness = l;
        Ok(self)
    }

    /// Attaches `x_star` as an exact minimizer with `f_star = f(x_star)`.
    pub fn with_minimizer(mut self, x_star: Vector) -> Result<Self> {
        check_dim(self.dim, &x_star)?;
        check_finite("minimizer", &x_star)?;
        let f_star = self.value(&x_star)?;
        let heb = self.ground_truth.as_ref().and_then(|g| g.heb);
        self.ground_truth = Some(GroundTruth {
            f_star,
            minimizers: Some(MinimizerSet::point(&x_star)),
            heb,
            provenance: Provenance::Analytic,
        });
        Ok(self)
    }

    pub fn with_ground_truth(mut self, truth: GroundTruth) -> Result<Self> {
        if !truth.f_star.is_finite() {
            return Err(Error::InvalidParameter(
                "optimal value must be finite".into(),
            ));
        }
        if let Some(m) = &truth.minimizers {
            if m.dim() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    got: m.dim(),
                });
            }
        }
        self.ground_truth = Some(truth);
        Ok(self)
    }

    pub fn kind(&self) -> &ObjectiveKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn smoothness(&self) -> f64 {
        self.smoothness
    }

    pub fn ground_truth(&self) -> Option<&GroundTruth> {
        self.ground_truth.as_ref()
    }

    pub fn f_star(&self) -> Option<f64> {
        self.ground_truth.as_ref().map(|g| g.f_star)
    }

    pub fn value(&self, x: &Vector) -> Result<f64> {
        check_dim(self.dim, x)?;
        check_finite("point", x)?;
        Ok(self.eval(x))
    }

    fn eval(&self, x: &Vector) -> f64 {
        match &self.kind {
            ObjectiveKind::Quadratic { q, c } => 0.5 * x.dot(&(q * x)) + c.dot(x),
            ObjectiveKind::Linear { c } => c.dot(x),
            ObjectiveKind::DistancePower { center, r } => (x - center).norm().powf(*r),
            ObjectiveKind::StadiumPsi { c } => 0.5 * x[1] * x[1] + psi(c - x[0]),
        }
    }

    pub fn grad(&self, x: &Vector) -> Result<Vector> {
        let mut out = Vector::zeros(self.dim);
        self.grad_into(x, &mut out)?;
        Ok(out)
    }

    /// Gradient written into `out` without allocating.
    pub fn grad_into(&self, x: &Vector, out: &mut Vector) -> Result<()> {
        check_dim(self.dim, x)?;
        check_dim(self.dim, out)?;
        check_finite("point", x)?;
        match &self.kind {
            ObjectiveKind::Quadratic { q, c } => {
                out.copy_from(c);
                out.gemv(1.0, q, x, 1.0);
            }
            ObjectiveKind::Linear { c } => out.copy_from(c),
            ObjectiveKind::DistancePower { center, r } => {
                out.copy_from(x);
                *out -= center;
                let n = out.norm();
                let factor = if *r == 2.0 {
                    2.0
                } else if n == 0.0 {
                    0.0
                } else {
                    r * n.powf(r - 2.0)
                };
                *out *= factor;
            }
            ObjectiveKind::StadiumPsi { c } => {
                out[0] = -psi_prime(c - x[0]);
                out[1] = x[1];
            }
        }
        Ok(())
    }

    /// `f(x) - f_star`, clipped to zero for negative round-off down to
    /// `-1e-12`.
    ///
    /// With an analytic point minimizer the gap is evaluated from the
    /// expansion around that point rather than by subtracting two values.
    pub fn primal_gap(&self, x: &Vector) -> Result<f64> {
        check_dim(self.dim, x)?;
        check_finite("point", x)?;
        let truth = self
            .ground_truth
            .as_ref()
            .ok_or(Error::MissingOptimalValue)?;
        let gap = match (&truth.provenance, &truth.minimizers) {
            (Provenance::Analytic, Some(MinimizerSet::Point { point })) => {
                let xs = Vector::from_column_slice(point);
                self.gap_around(x, &xs)
                    .unwrap_or_else(|| self.eval(x) - truth.f_star)
            }
            _ => self.eval(x) - truth.f_star,
        };
        if gap >= 0.0 {
            Ok(gap)
        } else if gap >= -PRIMAL_GAP_ROUNDOFF {
            Ok(0.0)
        } else {
            Err(Error::NegativePrimalGap(gap))
        }
    }

    fn gap_around(&self, x: &Vector, xs: &Vector) -> Option<f64> {
        let diff = x - xs;
        match &self.kind {
            ObjectiveKind::Quadratic { q, c } => {
                let grad = q * xs + c;
                Some(grad.dot(&diff) + 0.5 * diff.dot(&(q * &diff)))
            }
            ObjectiveKind::Linear { c } => Some(c.dot(&diff)),
            ObjectiveKind::DistancePower { center, r } if center == xs => {
                Some(diff.norm().powf(*r))
            }
            ObjectiveKind::StadiumPsi { c } => {
                Some(0.5 * (x[1] - xs[1]) * (x[1] + xs[1]) + (psi(c - x[0]) - psi(c - xs[0])))
            }
            _ => None,
        }
    }

    /// Euclidean distance to the recorded minimizer set.
    pub fn dist_to_minimizers(&self, x: &Vector) -> Result<f64> {
        check_dim(self.dim, x)?;
        let m = self
            .ground_truth
            .as_ref()
            .and_then(|g| g.minimizers.as_ref())
            .ok_or(Error::MissingMinimizer)?;
        Ok(m.distance(x))
    }

    pub fn describe(&self) -> String {
        let v = |x: &Vector| format!("{:?}", x.as_slice());
        match &self.kind {
            ObjectiveKind::Quadratic { c, .. } => {
                format!("quadratic(dim={}, c={})", self.dim, v(c))
            }
            ObjectiveKind::Linear { c } => format!("linear(c={})", v(c)),
            ObjectiveKind::DistancePower { center, r } => {
                format!("distance-power(center={}, r={r})", v(center))
            }
            ObjectiveKind::StadiumPsi { c } => format!("stadium-psi(c={c})"),
        }
    }
}
