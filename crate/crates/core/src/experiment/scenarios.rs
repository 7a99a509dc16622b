//! Named, code-defined scenarios.

use super::config::{AnalysisOptions, CheckOptions, ExperimentConfig, ObjectiveSpec, SetSpec};
use crate::geometry::TieBreak;
use crate::solver::RecordPolicy;
use crate::Vector;

pub const SCENARIOS: [&str; 8] = [
    "stadium-fig1",
    "simplex-negative-control",
    "lp4-lbg",
    "heb-r2-ball",
    "openloop-family",
    "l2-lbg",
    "l2-lbg-anchor",
    "lp4-lbg-anchor",
];

fn base(
    name: &str,
    set: SetSpec,
    objective: ObjectiveSpec,
    rules: &[&str],
    x0: Vec<f64>,
    t_max: u64,
) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        set,
        objective,
        tie_break: TieBreak::LexMin,
        minimizer: None,
        rules: rules.iter().map(|r| r.to_string()).collect(),
        x0: Some(x0),
        t_max,
        seeds: vec![0],
        gap_tol: None,
        record: RecordPolicy::Downsampled,
        checks: CheckOptions::default(),
        analysis: AnalysisOptions::default(),
    }
}

/// Looks up a scenario by name.
pub fn scenario(name: &str) -> Option<ExperimentConfig> {
    let stadium = || SetSpec::Stadium { half_length: 1.0 };
    let psi = || ObjectiveSpec::StadiumPsi { c: 2.0 };
    let cfg = match name {
        "stadium-fig1" => ExperimentConfig {
            minimizer: Some(vec![2.0, 0.0]),
            ..base(
                name,
                stadium(),
                psi(),
                &["ss", "ls", "ol:2"],
                vec![0.0, 1.0],
                100_000,
            )
        },
        "openloop-family" => ExperimentConfig {
            minimizer: Some(vec![2.0, 0.0]),
            ..base(
                name,
                stadium(),
                psi(),
                &["ol:2", "ol:3", "ol:4"],
                vec![0.0, 1.0],
                100_000,
            )
        },
        "simplex-negative-control" => {
            let d = 50;
            let mut e1 = vec![0.0; d];
            e1[0] = 1.0;
            ExperimentConfig {
                minimizer: Some(vec![1.0 / d as f64; d]),
                ..base(
                    name,
                    SetSpec::Simplex { dim: d },
                    ObjectiveSpec::HalfSquaredNorm { dim: d },
                    &["ss"],
                    e1,
                    100_000,
                )
            }
        }
        "lp4-lbg" => {
            let set = SetSpec::LpBall {
                center: vec![0.0, 0.0],
                radius: 1.0,
                p: 4.0,
            };
            ExperimentConfig {
                minimizer: Some(linear_minimizer(&set, &[1.0, 0.5])),
                ..base(
                    name,
                    set,
                    ObjectiveSpec::Linear {
                        c: vec![1.0, 0.5],
                        smoothness: None,
                    },
                    &["ss"],
                    vec![1.0, 0.0],
                    1_000_000,
                )
            }
        }
        // The disk sits on the origin so that the boundary near the
        // minimizer is resolved at the scale of the late iterates.
        "heb-r2-ball" => ExperimentConfig {
            minimizer: Some(vec![0.0, 0.0]),
            ..base(
                name,
                SetSpec::L2Ball {
                    center: vec![0.0, 1.0],
                    radius: 1.0,
                },
                ObjectiveSpec::DistancePower {
                    center: vec![0.0, 0.0],
                    r: 2.0,
                    diameter: None,
                },
                &["ss", "ls", "ol:2"],
                vec![1.0, 1.0],
                1_000_000,
            )
        },
        "l2-lbg" => {
            let set = SetSpec::L2Ball {
                center: vec![0.0, 0.0],
                radius: 1.0,
            };
            ExperimentConfig {
                minimizer: Some(linear_minimizer(&set, &[0.6, 0.8])),
                ..base(
                    name,
                    set,
                    ObjectiveSpec::Linear {
                        c: vec![0.6, 0.8],
                        smoothness: None,
                    },
                    &["ss"],
                    vec![1.0, 0.0],
                    100_000,
                )
            }
        }
        "l2-lbg-anchor" => {
            let anchor = [-2.0_f64, 0.5];
            let n = (anchor[0] * anchor[0] + anchor[1] * anchor[1]).sqrt();
            ExperimentConfig {
                minimizer: Some(vec![anchor[0] / n, anchor[1] / n]),
                ..base(
                    name,
                    SetSpec::L2Ball {
                        center: vec![0.0, 0.0],
                        radius: 1.0,
                    },
                    ObjectiveSpec::AnchoredQuadratic {
                        anchor: anchor.to_vec(),
                    },
                    &["ss"],
                    vec![1.0, 0.0],
                    100_000,
                )
            }
        }
        "lp4-lbg-anchor" => ExperimentConfig {
            minimizer: Some(vec![0.0, 0.0]),
            ..base(
                name,
                SetSpec::LpBall {
                    center: vec![1.0, 0.0],
                    radius: 1.0,
                    p: 4.0,
                },
                ObjectiveSpec::AnchoredQuadratic {
                    anchor: vec![-1.0, 0.0],
                },
                &["ss"],
                vec![1.0, 1.0],
                1_000_000,
            )
        },
        _ => return None,
    };
    Some(cfg)
}

/// Minimizer of `<c, x>` over a catalog set, taken from the LMO itself so
/// that finite convergence lands on it bit for bit.
fn linear_minimizer(set: &SetSpec, c: &[f64]) -> Vec<f64> {
    let set = set.build(TieBreak::LexMin).expect("registry set is valid");
    let s = set
        .lmo(&Vector::from_column_slice(c))
        .expect("registry direction is valid");
    s.as_slice().to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_registered_scenario_validates() {
        for name in SCENARIOS {
            let cfg = scenario(name).unwrap();
            cfg.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            let inst = cfg.instance().unwrap();
            let x0 = cfg.start(inst.set.as_ref(), 0);
            assert!(inst.set.contains(&x0, 1e-12).unwrap(), "{name}");
        }
        assert!(scenario("nope").is_none());
    }
}
