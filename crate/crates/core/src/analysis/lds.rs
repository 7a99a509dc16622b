use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{random_unit, ray_exit, ConvexSet, UcParams};
use crate::objectives::MinimizerSet;
use crate::{Error, Result, Vector};

/// Displacements shorter than this are left out of the sharpness ratio.
pub const MIN_DISPLACEMENT: f64 = 1e-12;

/// Pairs whose `<g, x - s>` carries a larger relative round-off than this are
/// left out of the sharpness ratio.
const MAX_RELATIVE_ROUNDOFF: f64 = 1e-8;

/// Slack used when checking a certificate against sampled estimates.
pub const CERTIFICATE_SLACK: f64 = 1e-6;

const DIRECTION_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LdsProvenance {
    AnalyticFromUc {
        alpha: f64,
    },
    AnalyticFromPatch {
        alpha: f64,
        beta: f64,
        diameter: f64,
    },
    Sampled {
        n_x: usize,
        n_g: usize,
        seed: u64,
    },
}

/// Constants `(A, q)` of `A ||g|| ||x - s||^q <= <g, x - s>` for
/// `dist(x, M) < rho`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdsCertificate {
    pub a: f64,
    pub q: f64,
    pub rho: f64,
    pub provenance: LdsProvenance,
}

impl LdsCertificate {
    fn checked(a: f64, q: f64, rho: f64, provenance: LdsProvenance) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && q >= 2.0 && rho > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "certificate needs A > 0, q >= 2, rho > 0 (got A={a}, q={q}, rho={rho})"
            )));
        }
        Ok(Self {
            a,
            q,
            rho,
            provenance,
        })
    }
}

/// Certificate `(alpha / 2, q)` implied by uniform convexity, valid around
/// any reference set (`rho = 1` is recorded for definiteness).
pub fn lds_from_uc(uc: &UcParams) -> LdsCertificate {
    LdsCertificate {
        a: uc.alpha / 2.0,
        q: uc.q,
        rho: 1.0,
        provenance: LdsProvenance::AnalyticFromUc { alpha: uc.alpha },
    }
}

/// Certificate from a uniformly convex patch with residual support gap
/// `beta`: `A = min{alpha / 2, beta / max{1, diam^q}}`.
pub fn lds_from_patch(
    patch_uc: &UcParams,
    beta: f64,
    diameter: f64,
    q: f64,
    rho: f64,
) -> Result<LdsCertificate> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "beta must be positive, got {beta}"
        )));
    }
    if !(diameter >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "diameter must be >= 0, got {diameter}"
        )));
    }
    let a = (patch_uc.alpha / 2.0).min(beta / diameter.powf(q).max(1.0));
    LdsCertificate::checked(
        a,
        q,
        rho,
        LdsProvenance::AnalyticFromPatch {
            alpha: patch_uc.alpha,
            beta,
            diameter,
        },
    )
}

/// Sampling plan for [`estimate_lds`].
///
/// Points and directions come from two independent seeded streams, so the
/// samples of a smaller plan are a prefix of those of a larger one with the
/// same seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LdsSampler {
    pub n_x: usize,
    pub n_g: usize,
    pub seed: u64,
    /// Restrict points to `shell * rho <= dist(x, M) < rho`.
    pub shell: Option<f64>,
}

impl LdsSampler {
    pub fn new(n_x: usize, n_g: usize, seed: u64) -> Self {
        Self {
            n_x,
            n_g,
            seed,
            shell: None,
        }
    }

    pub fn with_shell(mut self, inner_fraction: f64) -> Self {
        self.shell = Some(inner_fraction);
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LdsWitness {
    pub x: Vec<f64>,
    pub g: Vec<f64>,
    pub s: Vec<f64>,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LdsEstimate {
    /// Smallest sampled ratio; an upper estimate of the best constant `A`.
    pub a_hat: f64,
    pub q: f64,
    pub rho: f64,
    pub points: usize,
    pub directions: usize,
    pub pairs: usize,
    pub witness: Option<LdsWitness>,
}

impl LdsEstimate {
    pub fn certificate(&self, sampler: &LdsSampler) -> Result<LdsCertificate> {
        LdsCertificate::checked(
            self.a_hat,
            self.q,
            self.rho,
            LdsProvenance::Sampled {
                n_x: sampler.n_x,
                n_g: sampler.n_g,
                seed: sampler.seed,
            },
        )
    }
}

fn reference_point(m: &MinimizerSet, rng: &mut dyn RngCore) -> Vector {
    match m {
        MinimizerSet::Point { point } => Vector::from_column_slice(point),
        MinimizerSet::Segment { start, end } => {
            let a = Vector::from_column_slice(start);
            let b = Vector::from_column_slice(end);
            let t: f64 = rng.random();
            &a + (b - &a) * t
        }
    }
}

/// Draws a member point near `M`: even draws move radially from a point of
/// `M` (stopping at the boundary), odd draws take boundary points seen from
/// the set's interior point.
fn sample_near<S: ConvexSet + ?Sized>(
    set: &S,
    m: &MinimizerSet,
    rho: f64,
    inner: f64,
    boundary_draw: bool,
    rng: &mut dyn RngCore,
) -> Option<Vector> {
    let dim = set.dim();
    if boundary_draw {
        for _ in 0..1000 {
            let b = set.boundary_toward(&random_unit(dim, rng));
            let dist = m.distance(&b);
            if dist < rho && dist >= inner {
                return Some(b);
            }
        }
    }
    for _ in 0..1000 {
        let base = reference_point(m, rng);
        let dir = random_unit(dim, rng);
        let u: f64 = rng.random();
        let r = if rng.random::<bool>() {
            inner + (rho - inner) * u.powf(1.0 / dim as f64)
        } else {
            inner + (rho - inner) * u
        };
        let t = ray_exit(set, &base, &dir).min(r);
        let x = base + dir * t;
        let dist = m.distance(&x);
        if dist < rho && dist >= inner && set.contains(&x, 0.0).unwrap_or(false) {
            return Some(x);
        }
    }
    None
}

/// Sampled local dual sharpness constant around `m`.
///
/// Returns the minimum of `<g, x - s> / (||g|| ||x - s||^q)` over sampled
/// points `x` with `dist(x, M) < rho` and unit directions `g` (uniform plus
/// the set's special directions), where `s = lmo(g)`. Pairs with
/// `||x - s|| < 1e-12` are skipped. Sampling can only miss bad pairs, so the
/// result overestimates the true constant.
pub fn estimate_lds<S: ConvexSet + ?Sized>(
    set: &S,
    m: &MinimizerSet,
    q: f64,
    rho: f64,
    sampler: &LdsSampler,
) -> Result<LdsEstimate> {
    if sampler.n_x == 0 || sampler.n_g == 0 {
        return Err(Error::InvalidParameter("sampler sizes must be >= 1".into()));
    }
    if !(rho > 0.0) || !(q > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need rho > 0 and q > 0 (got rho={rho}, q={q})"
        )));
    }
    if m.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            got: m.dim(),
        });
    }
    let inner = sampler.shell.map_or(0.0, |f| f.clamp(0.0, 1.0) * rho);
    let dim = set.dim();

    let mut g_rng = ChaCha8Rng::seed_from_u64(sampler.seed ^ DIRECTION_STREAM);
    let mut dirs = set.special_directions();
    dirs.iter_mut().for_each(|d| {
        d.normalize_mut();
    });
    dirs.extend((0..sampler.n_g).map(|_| random_unit(dim, &mut g_rng)));
    let atoms = dirs
        .iter()
        .map(|g| set.lmo(g))
        .collect::<Result<Vec<_>>>()?;

    let mut x_rng = ChaCha8Rng::seed_from_u64(sampler.seed);
    let mut points = 0;
    let mut pairs = 0;
    let mut best = f64::INFINITY;
    let mut witness = None;
    for i in 0..sampler.n_x {
        let Some(x) = sample_near(set, m, rho, inner, i % 2 == 1, &mut x_rng) else {
            continue;
        };
        points += 1;
        for (g, s) in dirs.iter().zip(&atoms) {
            let diff = &x - s;
            let len = diff.norm();
            if len < MIN_DISPLACEMENT {
                continue;
            }
            let num = g.dot(&diff);
            let scale: f64 = (0..dim)
                .map(|k| g[k].abs() * (x[k].abs() + s[k].abs()))
                .sum();
            if num * MAX_RELATIVE_ROUNDOFF < 4.0 * f64::EPSILON * scale {
                continue;
            }
            pairs += 1;
            let ratio = num / len.powf(q);
            if ratio < best {
                best = ratio;
                witness = Some(LdsWitness {
                    x: x.as_slice().to_vec(),
                    g: g.as_slice().to_vec(),
                    s: s.as_slice().to_vec(),
                    ratio,
                });
            }
        }
    }
    if points == 0 {
        return Err(Error::EmptyNeighborhood { rho });
    }
    Ok(LdsEstimate {
        a_hat: best,
        q,
        rho,
        points,
        directions: dirs.len(),
        pairs,
        witness,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub certificate: LdsCertificate,
    pub estimate: LdsEstimate,
    /// `a_hat >= A - 1e-6`.
    pub holds: bool,
}

/// Compares a certificate with a sampled estimate inside its radius.
pub fn validate_certificate<S: ConvexSet + ?Sized>(
    set: &S,
    m: &MinimizerSet,
    cert: &LdsCertificate,
    sampler: &LdsSampler,
) -> Result<CertificateCheck> {
    let estimate = estimate_lds(set, m, cert.q, cert.rho, sampler)?;
    Ok(CertificateCheck {
        holds: estimate.a_hat >= cert.a - CERTIFICATE_SLACK,
        certificate: cert.clone(),
        estimate,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct UcSampler {
    pub n: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UcWitness {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub lambda: f64,
    pub z: Vec<f64>,
    /// Length of the displacement `lambda (1 - lambda) alpha ||x - y||^q`.
    pub displacement: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UcCheck {
    pub holds: bool,
    pub tested: usize,
    pub worst: Option<UcWitness>,
}

fn sample_pair<S: ConvexSet + ?Sized>(set: &S, rng: &mut dyn RngCore) -> (Vector, Vector) {
    let dim = set.dim();
    let x = if rng.random::<bool>() {
        set.boundary_toward(&random_unit(dim, rng))
    } else {
        set.sample_point(rng)
    };
    let y = match rng.random_range(0..3) {
        0 => set.sample_point(rng),
        1 => set.boundary_toward(&random_unit(dim, rng)),
        _ => {
            // boundary point close to x as seen from the interior point
            let base = &x - set.interior_point();
            let eps = 10f64.powf(-3.0 * rng.random::<f64>());
            let dir = if base.norm() > 0.0 {
                base.normalize()
            } else {
                random_unit(dim, rng)
            };
            set.boundary_toward(&(dir + random_unit(dim, rng) * eps))
        }
    };
    (x, y)
}

/// Tests power-type uniform convexity: every sampled
/// `lambda x + (1 - lambda) y + lambda (1 - lambda) alpha ||x - y||^q z`
/// with `||z|| = 1` must be a member (tolerance `1e-9`).
///
/// Directions `z` are one uniform draw plus every special direction of the
/// set. The worst witness is the failure with the largest displacement.
pub fn check_uc<S: ConvexSet + ?Sized>(
    set: &S,
    alpha: f64,
    q: f64,
    sampler: &UcSampler,
) -> Result<UcCheck> {
    let uc = UcParams::new(alpha, q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
    let dim = set.dim();
    let mut specials = set.special_directions();
    specials.iter_mut().for_each(|d| {
        d.normalize_mut();
    });
    let mut report = UcCheck {
        holds: true,
        tested: 0,
        worst: None,
    };
    for _ in 0..sampler.n {
        let (x, y) = sample_pair(set, &mut rng);
        let lambda: f64 = rng.random();
        let mid = &x * lambda + &y * (1.0 - lambda);
        let displacement = lambda * (1.0 - lambda) * uc.alpha * (&x - &y).norm().powf(uc.q);
        let mut zs = vec![random_unit(dim, &mut rng)];
        zs.extend(specials.iter().cloned());
        for z in zs {
            report.tested += 1;
            let p = &mid + &z * displacement;
            if !set.contains(&p, 1e-9)? {
                report.holds = false;
                if report
                    .worst
                    .as_ref()
                    .is_none_or(|w| displacement > w.displacement)
                {
                    report.worst = Some(UcWitness {
                        x: x.as_slice().to_vec(),
                        y: y.as_slice().to_vec(),
                        lambda,
                        z: z.as_slice().to_vec(),
                        displacement,
                    });
                }
            }
        }
    }
    Ok(report)
}

/// Brute-force estimate of the largest `alpha` for which the set is
/// `(alpha, q)`-uniformly convex.
///
/// For sampled boundary pairs and weights, the distance from the combination
/// to the boundary is measured by ray exits along `n_z` directions (a grid in
/// the plane); the ratio to `lambda (1 - lambda) ||x - y||^q` bounds `alpha`
/// from above. Pairs closer than `1e-3` are skipped.
pub fn estimate_uc_alpha<S: ConvexSet + ?Sized>(
    set: &S,
    q: f64,
    sampler: &UcSampler,
    n_z: usize,
) -> Result<f64> {
    if sampler.n == 0 || n_z == 0 {
        return Err(Error::InvalidParameter("sampler sizes must be >= 1".into()));
    }
    let dim = set.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
    let zs: Vec<Vector> = if dim == 2 {
        (0..n_z)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / n_z as f64;
                Vector::from_vec(vec![th.cos(), th.sin()])
            })
            .collect()
    } else {
        (0..n_z).map(|_| random_unit(dim, &mut rng)).collect()
    };
    let mut best = f64::INFINITY;
    for _ in 0..sampler.n {
        let x = set.boundary_toward(&random_unit(dim, &mut rng));
        let eps = 10f64.powf(-2.0 * rng.random::<f64>());
        let base = &x - set.interior_point();
        let y = set.boundary_toward(&(base.normalize() + random_unit(dim, &mut rng) * eps));
        let sep = (&x - &y).norm();
        if sep < 1e-3 {
            continue;
        }
        let lambda = 0.5 + 0.4 * (2.0 * rng.random::<f64>() - 1.0);
        let mid = &x * lambda + &y * (1.0 - lambda);
        let depth = zs
            .iter()
            .map(|z| ray_exit(set, &mid, z))
            .fold(f64::INFINITY, f64::min);
        best = best.min(depth / (lambda * (1.0 - lambda) * sep.powf(q)));
    }
    if !best.is_finite() {
        return Err(Error::InsufficientData("no usable boundary pairs".into()));
    }
    Ok(best)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatchBeta {
    /// Sound lower bound: grid minimum minus the Lipschitz correction.
    pub beta: f64,
    pub grid_min: f64,
    pub correction: f64,
    pub worst_x: Vec<f64>,
    pub worst_direction: Vec<f64>,
}

/// Residual support gap `min <u, x - lmo(u)>` over planar points within `rho`
/// of `center` and unit directions with angle in `[theta_lo, theta_hi]`.
///
/// The objective is 1-Lipschitz in `x` and `D`-Lipschitz in the angle, so
/// subtracting `h_x / sqrt(2) + D h_theta / 2` from the minimum over an
/// `n_x`-by-`n_x` point grid and `n_theta` angles gives a lower bound.
pub fn patch_beta_2d<S: ConvexSet + ?Sized>(
    set: &S,
    center: &Vector,
    rho: f64,
    theta: (f64, f64),
    n_x: usize,
    n_theta: usize,
) -> Result<PatchBeta> {
    if set.dim() != 2 || center.len() != 2 {
        return Err(Error::InvalidParameter("patch grid is planar".into()));
    }
    if n_x < 2 || n_theta < 2 || !(theta.1 > theta.0) || !(rho > 0.0) {
        return Err(Error::InvalidParameter("invalid patch grid".into()));
    }
    let h_x = 2.0 * rho / (n_x - 1) as f64;
    let h_theta = (theta.1 - theta.0) / (n_theta - 1) as f64;
    let reach = rho + h_x / std::f64::consts::SQRT_2;
    let dirs: Vec<Vector> = (0..n_theta)
        .map(|k| {
            let th = theta.0 + h_theta * k as f64;
            Vector::from_vec(vec![th.cos(), th.sin()])
        })
        .collect();
    let atoms = dirs
        .iter()
        .map(|u| set.lmo(u))
        .collect::<Result<Vec<_>>>()?;
    let mut best = f64::INFINITY;
    let mut worst = (Vec::new(), Vec::new());
    for i in 0..n_x {
        for j in 0..n_x {
            let x = Vector::from_vec(vec![
                center[0] - rho + h_x * i as f64,
                center[1] - rho + h_x * j as f64,
            ]);
            if (&x - center).norm() > reach || !set.contains(&x, h_x)? {
                continue;
            }
            for (u, s) in dirs.iter().zip(&atoms) {
                let phi = u.dot(&(&x - s));
                if phi < best {
                    best = phi;
                    worst = (x.as_slice().to_vec(), u.as_slice().to_vec());
                }
            }
        }
    }
    let correction = h_x / std::f64::consts::SQRT_2 + set.diameter() * h_theta / 2.0;
    Ok(PatchBeta {
        beta: best - correction,
        grid_min: best,
        correction,
        worst_x: worst.0,
        worst_direction: worst.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::FeasibleSet;

    #[test]
    fn uc_certificate_examples() {
        let c = lds_from_uc(&UcParams::new(1.0, 2.0).unwrap());
        assert_eq!((c.a, c.q), (0.5, 2.0));
        let c = lds_from_uc(&UcParams::new(0.5, 4.0).unwrap());
        assert_eq!((c.a, c.q), (0.25, 4.0));
    }

    #[test]
    fn patch_certificate_examples() {
        let uc = UcParams::new(1.0, 2.0).unwrap();
        let c = lds_from_patch(&uc, 0.1, 4.0, 2.0, 0.3).unwrap();
        assert!((c.a - 0.00625).abs() < 1e-15);
        let c = lds_from_patch(&uc, 10.0, 0.5, 2.0, 0.3).unwrap();
        assert_eq!(c.a, 0.5);
        assert!(lds_from_patch(&uc, 0.0, 1.0, 2.0, 0.3).is_err());
    }

    #[test]
    fn estimate_requires_neighborhood() {
        let ball = FeasibleSet::l2_ball(Vector::zeros(2), 1.0).unwrap();
        let far = MinimizerSet::Point {
            point: vec![5.0, 5.0],
        };
        let err = estimate_lds(&ball, &far, 2.0, 0.1, &LdsSampler::new(4, 4, 0));
        assert!(matches!(err, Err(Error::EmptyNeighborhood { .. })));
    }

    #[test]
    fn ball_estimate_is_half() {
        let ball = FeasibleSet::l2_ball(Vector::zeros(2), 1.0).unwrap();
        let m = MinimizerSet::Point {
            point: vec![0.0, -1.0],
        };
        let est = estimate_lds(&ball, &m, 2.0, 0.5, &LdsSampler::new(200, 200, 1)).unwrap();
        assert!(est.a_hat >= 0.5 - 1e-9 && est.a_hat < 0.52, "{:?}", est);
    }

    #[test]
    fn stadium_fails_uniform_convexity_on_flat_side() {
        let stadium = FeasibleSet::stadium(1.0).unwrap();
        let check = check_uc(&stadium, 1e-3, 2.0, &UcSampler { n: 2000, seed: 5 }).unwrap();
        assert!(!check.holds);
        let w = check.worst.unwrap();
        assert!(w.x[1].abs() > 1.0 - 1e-9 && w.y[1].abs() > 1.0 - 1e-9);
    }

    #[test]
    fn ball_alpha_estimate_near_half() {
        let ball = FeasibleSet::l2_ball(Vector::zeros(2), 1.0).unwrap();
        let alpha = estimate_uc_alpha(&ball, 2.0, &UcSampler { n: 2000, seed: 2 }, 256).unwrap();
        assert!((0.5 - 1e-6..0.55).contains(&alpha), "{alpha}");
    }
}
