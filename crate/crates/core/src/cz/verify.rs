//! Measured constants of a decomposition.

use serde::Serialize;

use super::balls::cells_in_ball;
use super::decompose::{BallType, CzResult};
use super::maximal::cz_integrand;
use crate::calculus::field::{gradient, gradient_at};
use crate::error::Result;
use crate::quad::pairwise_sum_by;

#[derive(Debug, Clone, Serialize)]
pub struct CzReport {
    pub alpha: f64,
    pub n_balls: usize,
    /// Largest number of plain balls containing one cell.
    pub overlap: usize,
    /// `max |f - g - Σ b_i| / max |f|`.
    pub reconstruction_error: f64,
    /// `sup (|g| + |g|/r + |∇g|) / α`.
    pub good_ratio: f64,
    /// `max_i avg_{B_i} (|b_i| + |b_i|/r + |∇b_i|) / α`.
    pub bad_ratio: f64,
    /// `Σ λ(B_i) α^p / ∫ (|f| + |f|/r + |∇f|)^p`.
    pub measure_ratio: f64,
    /// `λ({M > α}) α / ‖|f| + |f|/r + |∇f|‖₁`.
    pub weak_type_ratio: f64,
    pub underline_disjoint: bool,
    pub plain_cover: bool,
    pub overline_meets_complement: bool,
    /// No complement cell inside any plain ball.
    pub balls_inside_level_set: bool,
    /// `max |Σ χ_i - 1_U|`.
    pub partition_error: f64,
    /// `max r_i / r_j` over intersecting pairs.
    pub neighbor_radius_ratio: f64,
    /// `max |f_{B_j} - f_{B_i}| / (r_j α)` over intersecting pairs.
    pub mean_comparability: f64,
    /// `max |x| / r_i` over cells of vertex-type balls (at most 6).
    pub vertex_ball_reach: f64,
    /// `max_i r_i ‖∇χ_i‖_∞`.
    pub cutoff_gradient: f64,
    pub interior_balls: usize,
    pub vertex_balls: usize,
}

impl CzReport {
    /// Structural assertions that must hold exactly on the grid.
    pub fn structure_holds(&self) -> bool {
        self.underline_disjoint
            && self.plain_cover
            && self.overline_meets_complement
            && self.balls_inside_level_set
            && self.partition_error <= 1e-12
    }
}

pub fn verify(res: &CzResult) -> Result<CzReport> {
    let grid = res.grid();
    let alpha = res.params.alpha;
    let p = res.params.p;
    let f = &res.field;
    let n = grid.len();
    let fmax = f.max_abs().max(f64::MIN_POSITIVE);

    let bad_sum = res.bad_sum();
    let reconstruction_error = (0..n)
        .map(|i| (f.values()[i] - res.good.values()[i] - bad_sum.values()[i]).abs())
        .fold(0.0, f64::max)
        / fmax;

    let good_h = cz_integrand(&res.good)?;
    let good_ratio = good_h.max_abs() / alpha;

    let h = cz_integrand(f)?;
    let hp = pairwise_sum_by(n, |i| h.values()[i].powf(p) * grid.measure(i));
    let h1 = pairwise_sum_by(n, |i| h.values()[i] * grid.measure(i));
    let level_measure = pairwise_sum_by(n, |i| if res.level_set[i] { grid.measure(i) } else { 0.0 });
    let weak_type_ratio = if h1 > 0.0 { level_measure * alpha / h1 } else { 0.0 };

    let mut counts = vec![0usize; n];
    let mut underline_owner = vec![usize::MAX; n];
    let mut underline_disjoint = true;
    let mut weight_sum = vec![0.0; n];
    let mut balls_inside_level_set = true;
    let mut overline_meets_complement = true;
    let mut bad_ratio = 0.0_f64;
    let mut cutoff_gradient = 0.0_f64;
    let mut vertex_ball_reach = 0.0_f64;
    let mut ball_measures = Vec::with_capacity(res.balls.len());
    let mut scratch = vec![0.0; n];
    let mut chi = vec![0.0; n];
    let domain = grid.domain();
    let sign = res.side.sign();

    for (idx, b) in res.balls.iter().enumerate() {
        for (&c, &w) in b.cells.iter().zip(&b.weights) {
            counts[c] += 1;
            weight_sum[c] += w;
            if !res.level_set[c] {
                balls_inside_level_set = false;
            }
        }
        for c in cells_in_ball(grid, 0, b.ball.center, b.ball.underline_radius()) {
            if underline_owner[c] != usize::MAX {
                underline_disjoint = false;
            }
            underline_owner[c] = idx;
        }
        let reaches = cells_in_ball(grid, 0, b.ball.center, b.ball.overline_radius() * (1.0 + 1e-12))
            .into_iter()
            .any(|c| !res.level_set[c]);
        overline_meets_complement &= reaches;

        // Ball average of |b| + |b|/r + |∇b| over the plain ball.
        for (&c, &v) in b.cells.iter().zip(&b.bad) {
            scratch[c] = v;
        }
        for (&c, &w) in b.cells.iter().zip(&b.weights) {
            chi[c] = w;
        }
        let lookup_b = |pp: usize, k: usize, j: usize| scratch[grid.index(pp, k, j)];
        let lookup_chi = |pp: usize, k: usize, j: usize| chi[grid.index(pp, k, j)];
        let mut num = 0.0;
        let mut mass = 0.0;
        let mut chi_grad = 0.0_f64;
        for &c in &b.cells {
            let cell = grid.cell(c);
            let (dr, da) = gradient_at(grid, 0, cell.ring, cell.angle, &lookup_b);
            let r = grid.radius(cell.ring);
            let val = scratch[c].abs() * (1.0 + 1.0 / r) + dr.hypot(da);
            num += val * grid.measure(c);
            mass += grid.measure(c);
            let (cr, ca) = gradient_at(grid, 0, cell.ring, cell.angle, &lookup_chi);
            chi_grad = chi_grad.max(cr.hypot(ca));
            if b.kind == BallType::Vertex {
                vertex_ball_reach = vertex_ball_reach.max(r / b.ball.radius);
            }
        }
        bad_ratio = bad_ratio.max(num / mass / alpha);
        cutoff_gradient = cutoff_gradient.max(chi_grad * b.ball.radius);
        for &c in &b.cells {
            scratch[c] = 0.0;
            chi[c] = 0.0;
        }

        let center = [sign * b.ball.center[0], sign * b.ball.center[1]];
        ball_measures.push(domain.ball_measure(&center, b.ball.radius)?);
    }

    let plain_cover = (0..n).all(|i| !res.level_set[i] || counts[i] > 0);
    let overlap = counts.iter().copied().max().unwrap_or(0);
    let partition_error = (0..n)
        .map(|i| (weight_sum[i] - if res.level_set[i] { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max);
    let measure_ratio = if hp > 0.0 {
        pairwise_sum_by(ball_measures.len(), |i| ball_measures[i]) * alpha.powf(p) / hp
    } else {
        0.0
    };

    let mut neighbor_radius_ratio = 1.0_f64;
    let mut mean_comparability = 0.0_f64;
    for (i, bi) in res.balls.iter().enumerate() {
        for bj in &res.balls[i + 1..] {
            let d = (bi.ball.center[0] - bj.ball.center[0]).hypot(bi.ball.center[1] - bj.ball.center[1]);
            if d < bi.ball.radius + bj.ball.radius {
                let ratio = bi.ball.radius / bj.ball.radius;
                neighbor_radius_ratio = neighbor_radius_ratio.max(ratio.max(1.0 / ratio));
                let diff = (bi.mean - bj.mean).abs();
                let r = bi.ball.radius.min(bj.ball.radius);
                mean_comparability = mean_comparability.max(diff / (r * alpha));
            }
        }
    }

    // Keep the gradient import honest for single-ball diagnostics.
    debug_assert!(gradient(&res.good).is_ok());

    Ok(CzReport {
        alpha,
        n_balls: res.balls.len(),
        overlap,
        reconstruction_error,
        good_ratio,
        bad_ratio,
        measure_ratio,
        weak_type_ratio,
        underline_disjoint,
        plain_cover,
        overline_meets_complement,
        balls_inside_level_set,
        partition_error,
        neighbor_radius_ratio,
        mean_comparability,
        vertex_ball_reach,
        cutoff_gradient,
        interior_balls: res.balls.iter().filter(|b| b.kind == BallType::Interior).count(),
        vertex_balls: res.balls.iter().filter(|b| b.kind == BallType::Vertex).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::families::{make_test_field, TestFamily};
    use crate::cz::decompose::{decompose, CzParams};
    use crate::geometry::ConeDomain;
    use crate::grid::{GridKind, GridSpec, PolarGrid};
    use std::sync::Arc;

    #[test]
    fn report_on_a_vertex_singular_field() {
        let spec = GridSpec::reaching(1e-5, 0.92, 8.0, 16);
        let g = Arc::new(PolarGrid::new(ConeDomain::standard(2), GridKind::Plus, spec).unwrap());
        let f = make_test_field(g, TestFamily::Jump);
        let res = decompose(&f, CzParams::new(20.0)).unwrap();
        let rep = verify(&res).unwrap();
        assert!(rep.structure_holds(), "{rep:?}");
        assert!(rep.reconstruction_error < 1e-12);
        assert!(rep.overlap >= 1 && rep.overlap <= 20, "{}", rep.overlap);
        assert!(rep.vertex_ball_reach <= 6.0 + 1e-9);
        assert!(rep.neighbor_radius_ratio <= 3.0 + 1e-9, "{}", rep.neighbor_radius_ratio);
        assert!(rep.vertex_balls > 0);
    }

    #[test]
    fn empty_level_set_has_good_ratio_at_most_one() {
        let spec = GridSpec::reaching(1e-5, 0.92, 8.0, 16);
        let g = Arc::new(PolarGrid::new(ConeDomain::standard(2), GridKind::Plus, spec).unwrap());
        let f = make_test_field(g, TestFamily::RadialPower { a: 2.0 });
        let m = crate::cz::maximal::maximal_function(&f).unwrap();
        let res = decompose(&f, CzParams::new(m.max_abs() * 1.0001)).unwrap();
        let rep = verify(&res).unwrap();
        assert_eq!(rep.n_balls, 0);
        assert!(rep.good_ratio <= 1.0);
    }
}
