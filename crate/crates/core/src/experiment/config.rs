use std::path::Path;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::WindowPolicy;
use crate::geometry::{ConvexSet, FeasibleSet, SuperflatBody, TieBreak};
use crate::objectives::Objective;
use crate::solver::{RecordPolicy, RunOptions};
use crate::stepping::StepRule;
use crate::{Error, Result, Vector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SetSpec {
    L2Ball {
        center: Vec<f64>,
        radius: f64,
    },
    LpBall {
        center: Vec<f64>,
        radius: f64,
        p: f64,
    },
    Simplex {
        dim: usize,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Ellipsoid {
        center: Vec<f64>,
        shape: Vec<Vec<f64>>,
    },
    Stadium {
        half_length: f64,
    },
    Capsule {
        start: Vec<f64>,
        end: Vec<f64>,
        radius: f64,
    },
    TruncatedDisk {
        cut: f64,
    },
    Polytope {
        vertices: Vec<Vec<f64>>,
    },
    Superflat {
        scale: f64,
    },
}

fn vector(v: &[f64]) -> Vector {
    Vector::from_column_slice(v)
}

fn matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Config("matrix must be square".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl SetSpec {
    pub fn build(&self, tie_break: TieBreak) -> Result<Box<dyn ConvexSet>> {
        let set = match self {
            SetSpec::L2Ball { center, radius } => FeasibleSet::l2_ball(vector(center), *radius)?,
            SetSpec::LpBall { center, radius, p } => {
                FeasibleSet::lp_ball(vector(center), *radius, *p)?
            }
            SetSpec::Simplex { dim } => FeasibleSet::simplex(*dim)?,
            SetSpec::Box { lo, hi } => FeasibleSet::cube(vector(lo), vector(hi))?,
            SetSpec::Ellipsoid { center, shape } => {
                FeasibleSet::ellipsoid(vector(center), matrix(shape)?)?
            }
            SetSpec::Stadium { half_length } => FeasibleSet::stadium(*half_length)?,
            SetSpec::Capsule { start, end, radius } => {
                FeasibleSet::capsule(vector(start), vector(end), *radius)?
            }
            SetSpec::TruncatedDisk { cut } => FeasibleSet::truncated_disk(*cut)?,
            SetSpec::Polytope { vertices } => {
                FeasibleSet::vertex_polytope(vertices.iter().map(|v| vector(v)).collect())?
            }
            SetSpec::Superflat { scale } => {
                if tie_break != TieBreak::LexMin {
                    return Err(Error::Config(
                        "the superflat body only supports the lex-min rule".into(),
                    ));
                }
                return Ok(Box::new(SuperflatBody::new(*scale)?));
            }
        };
        Ok(Box::new(set.with_tie_break(tie_break)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    Quadratic {
        q: Vec<Vec<f64>>,
        c: Vec<f64>,
    },
    HalfSquaredNorm {
        dim: usize,
    },
    /// `0.5 ||x - anchor||^2` up to a constant.
    AnchoredQuadratic {
        anchor: Vec<f64>,
    },
    Linear {
        c: Vec<f64>,
        #[serde(default)]
        smoothness: Option<f64>,
    },
    /// `diameter` defaults to the diameter of the feasible set.
    DistancePower {
        center: Vec<f64>,
        r: f64,
        #[serde(default)]
        diameter: Option<f64>,
    },
    StadiumPsi {
        c: f64,
    },
}

impl ObjectiveSpec {
    pub fn build(&self, set_diameter: f64) -> Result<Objective> {
        match self {
            ObjectiveSpec::Quadratic { q, c } => Objective::quadratic(matrix(q)?, vector(c)),
            ObjectiveSpec::HalfSquaredNorm { dim } => Objective::half_squared_norm(*dim),
            ObjectiveSpec::AnchoredQuadratic { anchor } => {
                let n = anchor.len();
                Objective::quadratic(DMatrix::identity(n, n), -vector(anchor))
            }
            ObjectiveSpec::Linear { c, smoothness } => {
                let obj = Objective::linear(vector(c))?;
                match smoothness {
                    Some(l) => obj.with_smoothness(*l),
                    None => Ok(obj),
                }
            }
            ObjectiveSpec::DistancePower {
                center,
                r,
                diameter,
            } => Objective::distance_power(vector(center), *r, diameter.unwrap_or(set_diameter)),
            ObjectiveSpec::StadiumPsi { c } => Objective::stadium_psi(*c),
        }
    }
}

/// Runtime-check tolerances of the solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckOptions {
    pub feasibility_tol: f64,
    pub feasibility_every: u64,
    pub check_tol: f64,
    pub line_search_tol: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-9,
            feasibility_every: 1000,
            check_tol: 1e-9,
            line_search_tol: crate::stepping::DEFAULT_LINE_SEARCH_TOL,
        }
    }
}

/// Post-run analysis settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisOptions {
    pub window: WindowPolicy,
    /// Evaluate the `h_t` decay verdict (needs `t_max >= 10^4`).
    pub h_decay: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            window: WindowPolicy::LastDecade,
            h_decay: true,
        }
    }
}

/// One experiment: a problem instance, the rules to run and the seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub set: SetSpec,
    pub objective: ObjectiveSpec,
    #[serde(default)]
    pub tie_break: TieBreak,
    /// Exact minimizer; fixes the optimal value and the minimizer set.
    #[serde(default)]
    pub minimizer: Option<Vec<f64>>,
    /// Step rules as `ss`, `ls` or `ol:<ell>`.
    pub rules: Vec<String>,
    /// Starting point; drawn from the set with each seed when absent.
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    pub t_max: u64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub gap_tol: Option<f64>,
    #[serde(default)]
    pub record: RecordPolicy,
    #[serde(default)]
    pub checks: CheckOptions,
    #[serde(default)]
    pub analysis: AnalysisOptions,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

/// A fully built instance.
pub struct Instance {
    pub set: Box<dyn ConvexSet>,
    pub objective: Objective,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Builds the instance and cross-checks dimensions and rules.
    pub fn validate(&self) -> Result<()> {
        let inst = self.instance()?;
        if self.rules.is_empty() {
            return Err(Error::Config("at least one step rule is required".into()));
        }
        for r in &self.rules {
            self.rule(r, &inst.objective)?;
        }
        if self.t_max < 1 {
            return Err(Error::Config("t_max must be >= 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if let Some(x0) = &self.x0 {
            if x0.len() != inst.set.dim() {
                return Err(Error::Config(format!(
                    "x0 has dimension {}, set has {}",
                    x0.len(),
                    inst.set.dim()
                )));
            }
        }
        Ok(())
    }

    pub fn instance(&self) -> Result<Instance> {
        let set = self.set.build(self.tie_break)?;
        let mut objective = self.objective.build(set.diameter())?;
        if objective.dim() != set.dim() {
            return Err(Error::Config(format!(
                "objective has dimension {}, set has {}",
                objective.dim(),
                set.dim()
            )));
        }
        if let Some(m) = &self.minimizer {
            if m.len() != set.dim() {
                return Err(Error::Config(
                    "minimizer dimension differs from the set".into(),
                ));
            }
            objective = objective.with_minimizer(vector(m))?;
        }
        Ok(Instance { set, objective })
    }

    pub fn rule(&self, label: &str, objective: &Objective) -> Result<StepRule> {
        match StepRule::parse(label, objective.smoothness())? {
            StepRule::LineSearch { .. } => StepRule::line_search(self.checks.line_search_tol),
            rule => Ok(rule),
        }
    }

    pub fn start(&self, set: &dyn ConvexSet, seed: u64) -> Vector {
        match &self.x0 {
            Some(x0) => vector(x0),
            None => set.sample_point(&mut ChaCha8Rng::seed_from_u64(seed)),
        }
    }

    pub fn run_options(&self, seed: u64) -> RunOptions {
        RunOptions {
            t_max: self.t_max,
            gap_tol: self.gap_tol,
            record: self.record,
            feasibility_every: self.checks.feasibility_every,
            feasibility_tol: self.checks.feasibility_tol,
            check_tol: self.checks.check_tol,
            seed: Some(seed),
        }
    }
}
