//! Poincaré and Morrey quotients measured on grid data.

use super::field::{gradient, gradient_at, Field};
use crate::error::{invalid, ConeError, Result};
use crate::geometry::ConeBall;
use crate::quad::pairwise_sum_by;

/// `‖f - mean‖_{L^p(cap)} / (diam(cap) ‖∇_θ f‖_{L^p(cap)})` on the cap of one
/// patch at one ring, with `diam` the geodesic diameter `2ωr`.
///
/// Returns 0 for a constant cap and `+∞` when the angular derivative vanishes
/// but the oscillation does not.
pub fn poincare_cap_ratio(f: &Field, patch: usize, ring: usize, p: f64) -> Result<f64> {
    let grid = f.grid();
    if !(p >= 1.0) {
        return Err(invalid("exponent must be ≥ 1"));
    }
    if patch >= grid.patches().len() || ring >= grid.radial() {
        return Err(invalid("cap index out of range"));
    }
    if grid.radial() < 3 || grid.angular() < 3 {
        return Err(ConeError::GridTooSmall {
            radial: grid.radial(),
            angular: grid.angular(),
        });
    }
    let r = grid.radius(ring);
    let n = grid.dim() as i32;
    let weights = grid.angular_weights(patch);
    let sigma = |j: usize| weights[j] * r.powi(n - 1);
    let values = f.ring(patch, ring);
    let big_j = values.len();
    let total = pairwise_sum_by(big_j, sigma);
    let mean = pairwise_sum_by(big_j, |j| values[j] * sigma(j)) / total;
    let lookup = |pp: usize, k: usize, j: usize| f.get(pp, k, j);
    let tangential: Vec<f64> = (0..big_j)
        .map(|j| gradient_at(grid, patch, ring, j, &lookup).1)
        .collect();
    let norm = |g: &dyn Fn(usize) -> f64| {
        if p.is_infinite() {
            (0..big_j).fold(0.0_f64, |m, j| m.max(g(j).abs()))
        } else {
            pairwise_sum_by(big_j, |j| g(j).abs().powf(p) * sigma(j)).powf(1.0 / p)
        }
    };
    let osc = if flat(values.iter().map(|v| v - mean), values) {
        0.0
    } else {
        norm(&|j| values[j] - mean)
    };
    let grad = norm(&|j| tangential[j]);
    let diam = grid.patches()[patch].width() * r;
    Ok(quotient(osc, diam * grad))
}

/// Deviations from the mean that are pure rounding noise.
fn flat(deviations: impl Iterator<Item = f64>, values: &[f64]) -> bool {
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    deviations.fold(0.0_f64, |m, d| m.max(d.abs())) <= 1e-13 * scale
}

fn quotient(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// `(avg_B |f - f_B|^q)^{1/q} / (radius (avg_B |∇f|^q)^{1/q})` over the grid
/// cells whose centers lie in the ball.
///
/// The ball is intersected with every patch of the grid, so on a double-cone
/// grid a ball at the vertex sees both half-cones.
pub fn poincare_ball_ratio(f: &Field, ball: &ConeBall, q: f64) -> Result<f64> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(invalid("exponent must be finite and ≥ 1"));
    }
    let grid = f.grid();
    let cells: Vec<usize> = (0..grid.len())
        .filter(|&i| {
            let x = grid.point(i);
            (x[0] - ball.center[0]).hypot(x[1] - ball.center[1]) < ball.radius
        })
        .collect();
    if cells.is_empty() {
        return Err(ConeError::DegenerateBall);
    }
    let grad = gradient(f)?.magnitude();
    let m = |c: usize| grid.measure(cells[c]);
    let vol = pairwise_sum_by(cells.len(), m);
    let fv = f.values();
    let mean = pairwise_sum_by(cells.len(), |c| fv[cells[c]] * m(c)) / vol;
    let flat_ball = flat(cells.iter().map(|&i| fv[i] - mean), fv);
    let osc = if flat_ball {
        0.0
    } else {
        (pairwise_sum_by(cells.len(), |c| (fv[cells[c]] - mean).abs().powf(q) * m(c)) / vol)
            .powf(1.0 / q)
    };
    let gv = grad.values();
    let g = (pairwise_sum_by(cells.len(), |c| gv[cells[c]].powf(q) * m(c)) / vol).powf(1.0 / q);
    Ok(quotient(osc, ball.radius * g))
}

/// Morrey quotient at scale `ε` for a field vanishing at the vertex:
/// `sup_{|x|<ε} (|f(x)|/ε) / ((|x|/ε)^{1-n/p} (avg_{|y|<2ε} |∇f|^p)^{1/p})`.
pub fn morrey_quotient(f: &Field, p: f64, eps: f64) -> Result<f64> {
    let grid = f.grid();
    let n = grid.dim() as f64;
    if !(p > n) {
        return Err(invalid(format!("Morrey quotient needs p > n = {n}")));
    }
    if let Some((a, b)) = f.vertex_limits() {
        if a != 0.0 || b != 0.0 {
            return Err(ConeError::VertexMismatch {
                value: a.abs().max(b.abs()),
                allowed: 0.0,
            });
        }
    }
    if !(eps > grid.r_min() && eps < grid.r_max()) {
        return Err(invalid(format!("scale {eps} outside the grid range")));
    }
    let grad = gradient(f)?.magnitude();
    let near: Vec<usize> = (0..grid.len())
        .filter(|&i| grid.radius(grid.cell(i).ring) < 2.0 * eps)
        .collect();
    let vol = pairwise_sum_by(near.len(), |c| grid.measure(near[c]));
    let avg = (pairwise_sum_by(near.len(), |c| {
        grad.values()[near[c]].powf(p) * grid.measure(near[c])
    }) / vol)
        .powf(1.0 / p);
    let mut best = 0.0_f64;
    for i in 0..grid.len() {
        let r = grid.radius(grid.cell(i).ring);
        if r >= eps {
            continue;
        }
        let num = f.values()[i].abs() / eps;
        if num == 0.0 {
            continue;
        }
        let den = (r / eps).powf(1.0 - n / p) * avg;
        best = best.max(quotient(num, den));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConeDomain;
    use crate::grid::{GridKind, GridSpec, PolarGrid};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn grid(kind: GridKind, angular: usize) -> Arc<PolarGrid> {
        let spec = GridSpec::reaching(1e-6, 0.95, 4.0, angular);
        Arc::new(PolarGrid::new(ConeDomain::standard(2), kind, spec).unwrap())
    }

    #[test]
    fn neumann_eigenfunction_gives_one_over_pi() {
        let g = grid(GridKind::Plus, 400);
        let w = g.domain().half_angle();
        // s = arc length from the cap edge, normalized by the cap length.
        let f = Field::from_fn(g, "cos", |s| (PI * (s.rel + w) / (2.0 * w)).cos());
        for ring in [10, 100] {
            let ratio = poincare_cap_ratio(&f, 0, ring, 2.0).unwrap();
            assert!((ratio * PI - 1.0).abs() < 0.01, "{ratio}");
        }
        let a = poincare_cap_ratio(&f, 0, 10, 2.0).unwrap();
        let b = poincare_cap_ratio(&f, 0, 100, 2.0).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn constants_have_zero_ratios() {
        let g = grid(GridKind::Double, 16);
        let f = Field::from_fn(g, "c", |_| 3.0);
        assert_eq!(poincare_cap_ratio(&f, 1, 5, 1.0).unwrap(), 0.0);
        let ball = ConeBall::new([0.0, 1.0], 0.5, 4.0);
        assert_eq!(poincare_ball_ratio(&f, &ball, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn vertex_ball_sees_the_jump() {
        let g = grid(GridKind::Double, 16);
        let f = Field::from_fn(g, "sign", |s| s.side.unwrap().sign());
        let ball = ConeBall::new([0.0, 0.0], 0.1, 4.0);
        assert_eq!(poincare_ball_ratio(&f, &ball, 1.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn morrey_quotient_of_r_is_scale_stable() {
        let g = grid(GridKind::Double, 16);
        let f = Field::from_fn(g.clone(), "r", |s| s.r).with_vertex_limits(Some((0.0, 0.0)));
        let qs: Vec<f64> = [0.1, 0.01, 0.001]
            .iter()
            .map(|e| morrey_quotient(&f, 4.0, *e).unwrap())
            .collect();
        for q in &qs {
            assert!((q / qs[0] - 1.0).abs() < 0.05, "{qs:?}");
        }
        assert!(morrey_quotient(&f, 2.0, 0.1).is_err());
        assert_eq!(morrey_quotient(&Field::zeros(g), 4.0, 0.1).unwrap(), 0.0);
    }
}
