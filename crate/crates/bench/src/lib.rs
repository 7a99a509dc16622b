//! Fixtures shared by the criterion benches in `benches/`.

use fwlds::geometry::{ConvexSet, FeasibleSet, SuperflatBody};
use fwlds::Vector;

/// Sets whose oracles are timed, with a representative dimension each.
pub fn oracle_catalog() -> Vec<(&'static str, Box<dyn ConvexSet>)> {
    let verts: Vec<Vector> = (0..64)
        .map(|k| {
            let th = k as f64 * 0.7;
            Vector::from_vec(vec![th.cos() * (1.0 + 0.1 * (k % 3) as f64), th.sin()])
        })
        .collect();
    vec![
        (
            "l2-ball-100",
            Box::new(FeasibleSet::l2_ball(Vector::zeros(100), 1.0).unwrap()),
        ),
        (
            "lp4-ball-100",
            Box::new(FeasibleSet::lp_ball(Vector::zeros(100), 1.0, 4.0).unwrap()),
        ),
        (
            "simplex-1000",
            Box::new(FeasibleSet::simplex(1000).unwrap()),
        ),
        ("box-1000", Box::new(FeasibleSet::unit_box(1000).unwrap())),
        ("stadium", Box::new(FeasibleSet::stadium(1.0).unwrap())),
        (
            "truncated-disk",
            Box::new(FeasibleSet::truncated_disk(0.5).unwrap()),
        ),
        (
            "polytope-64",
            Box::new(FeasibleSet::vertex_polytope(verts).unwrap()),
        ),
        ("superflat", Box::new(SuperflatBody::new(1.0).unwrap())),
    ]
}

/// Deterministic, dense direction of the given dimension.
pub fn direction(dim: usize) -> Vector {
    Vector::from_fn(dim, |i, _| ((i as f64 + 1.0) * 1.618).sin())
}
