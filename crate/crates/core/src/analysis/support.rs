//! Closed-form support values of the planar beyond-UC examples.

use crate::Vector;

/// `min <u, y>` over the stadium `([-a, a] x {0}) + B(0, 1)`.
pub fn stadium_support(a: f64, u: &Vector) -> f64 {
    -a * u[0].abs() - u.norm()
}

/// `min <u, y>` over `B(0, 1) ∩ {y_1 <= b}`.
///
/// Equals `-||u||` when the disk minimizer `-u / ||u||` is feasible and
/// `b u_1 - h |u_2|` (facet value, `h = sqrt(1 - b^2)`) otherwise.
pub fn truncated_disk_support(b: f64, u: &Vector) -> f64 {
    let n = u.norm();
    if n == 0.0 || -u[0] / n <= b {
        -n
    } else {
        b * u[0] - (1.0 - b * b).sqrt() * u[1].abs()
    }
}
