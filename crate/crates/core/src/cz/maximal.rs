//! Discrete centered maximal function on a half-cone.
//!
//! For each cell the supremum runs over the balls centered at the cell
//! center with radii `r_max 2^{-m}`, plus the cell itself. Ball averages are
//! assembled from per-ring angular prefix sums, so a query costs one lookup
//! per partially covered ring.

use rayon::prelude::*;

use crate::calculus::field::{gradient, Field};
use crate::error::{ConeError, Result};
use crate::grid::PolarGrid;

/// `|f| + |f|/r + |∇f|`, the quantity controlled by the decomposition.
pub fn cz_integrand(f: &Field) -> Result<Field> {
    let grad = gradient(f)?.magnitude();
    let over_r = f.over_r();
    let values = f
        .values()
        .iter()
        .zip(over_r.values())
        .zip(grad.values())
        .map(|((v, w), g)| v.abs() + w.abs() + g)
        .collect();
    Field::new(f.grid_arc().clone(), values, format!("cz({})", f.name()))
}

/// Radii of the discrete ball family.
pub fn dyadic_radii(grid: &PolarGrid) -> Vec<f64> {
    let levels = (grid.r_max() / grid.r_min()).log2().ceil() as i32;
    (0..=levels).map(|m| grid.r_max() * 2f64.powi(-m)).collect()
}

struct PrefixSums {
    /// Per ring, `J + 1` partial sums of `h μ` and of `μ`.
    weighted: Vec<Vec<f64>>,
    mass: Vec<Vec<f64>>,
    /// Sums over rings `k..K` (everything at or inside ring `k`).
    inner_weighted: Vec<f64>,
    inner_mass: Vec<f64>,
}

impl PrefixSums {
    fn new(grid: &PolarGrid, patch: usize, values: &[f64]) -> Self {
        let (big_k, big_j) = (grid.radial(), grid.angular());
        let mut weighted = Vec::with_capacity(big_k);
        let mut mass = Vec::with_capacity(big_k);
        for k in 0..big_k {
            let mut w = vec![0.0; big_j + 1];
            let mut m = vec![0.0; big_j + 1];
            for j in 0..big_j {
                let i = grid.index(patch, k, j);
                w[j + 1] = w[j] + values[i] * grid.measure(i);
                m[j + 1] = m[j] + grid.measure(i);
            }
            weighted.push(w);
            mass.push(m);
        }
        let mut inner_weighted = vec![0.0; big_k + 1];
        let mut inner_mass = vec![0.0; big_k + 1];
        for k in (0..big_k).rev() {
            inner_weighted[k] = inner_weighted[k + 1] + weighted[k][big_j];
            inner_mass[k] = inner_mass[k + 1] + mass[k][big_j];
        }
        Self { weighted, mass, inner_weighted, inner_mass }
    }
}

/// Average of `values` over the cells of `patch` with centers in `B(x, ρ)`.
fn ball_average(
    grid: &PolarGrid,
    patch: usize,
    sums: &PrefixSums,
    ring: usize,
    angle: usize,
    rho: f64,
) -> f64 {
    let big_j = grid.angular();
    let radii = grid.radii();
    let c = grid.radius(ring);
    let h = grid.angular_step(patch);
    // Rings whose every cell center is within ρ: r_k < ρ - c.
    let inner = radii.partition_point(|r| *r >= rho - c);
    let mut w = sums.inner_weighted[inner];
    let mut m = sums.inner_mass[inner];
    let first = radii.partition_point(|r| *r >= c + rho);
    // Rings with r ≤ c - ρ miss the ball.
    let last = radii.partition_point(|r| *r > c - rho).min(inner);
    for (k, &r) in radii.iter().enumerate().take(last).skip(first) {
        let kappa = (r * r + c * c - rho * rho) / (2.0 * r * c);
        if kappa >= 1.0 {
            continue;
        }
        let (j0, j1) = if kappa <= -1.0 {
            (0, big_j)
        } else {
            // Cells j with |angle_j - φ| < half, where angle_j = φ + (j - angle) h.
            let half = kappa.acos() / h;
            let lo = (angle as f64 - half).floor() + 1.0;
            let hi = (angle as f64 + half).ceil();
            (lo.max(0.0) as usize, (hi.max(0.0) as usize).min(big_j))
        };
        if j0 < j1 {
            w += sums.weighted[k][j1] - sums.weighted[k][j0];
            m += sums.mass[k][j1] - sums.mass[k][j0];
        }
    }
    if m > 0.0 {
        w / m
    } else {
        0.0
    }
}

/// Maximal function of arbitrary nonnegative cell data on one patch.
pub fn maximal_of_values(grid: &PolarGrid, patch: usize, values: &[f64]) -> Result<Vec<f64>> {
    if grid.dim() != 2 {
        return Err(ConeError::Unsupported(
            "the decomposition is implemented in the plane only".into(),
        ));
    }
    let sums = PrefixSums::new(grid, patch, values);
    let radii = dyadic_radii(grid);
    let big_j = grid.angular();
    let count = grid.radial() * big_j;
    let base = grid.index(patch, 0, 0);
    Ok((0..count)
        .into_par_iter()
        .map(|local| {
            let (k, j) = (local / big_j, local % big_j);
            let mut best = values[base + local];
            for &rho in &radii {
                best = best.max(ball_average(grid, patch, &sums, k, j, rho));
            }
            best
        })
        .collect())
}

/// Maximal function of `|f| + |f|/r + |∇f|`, patch by patch.
pub fn maximal_function(f: &Field) -> Result<Field> {
    let h = cz_integrand(f)?;
    let grid = f.grid();
    let mut out = Vec::with_capacity(grid.len());
    for patch in 0..grid.patches().len() {
        out.extend(maximal_of_values(grid, patch, h.values())?);
    }
    Field::new(f.grid_arc().clone(), out, format!("M({})", f.name()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cz::balls::cells_in_ball;
    use crate::geometry::ConeDomain;
    use crate::grid::{GridKind, GridSpec};
    use std::sync::Arc;

    fn grid() -> Arc<PolarGrid> {
        let spec = GridSpec::reaching(1e-4, 0.9, 8.0, 16);
        Arc::new(PolarGrid::new(ConeDomain::standard(2), GridKind::Plus, spec).unwrap())
    }

    #[test]
    fn prefix_averages_match_direct_sums() {
        let g = grid();
        let vals: Vec<f64> = (0..g.len()).map(|i| ((i * 37) % 11) as f64).collect();
        let sums = PrefixSums::new(&g, 0, &vals);
        for &(k, j) in &[(0, 0), (10, 5), (40, 15), (80, 8)] {
            for rho in [0.01, 0.3, 1.0, 5.0, 20.0] {
                let fast = ball_average(&g, 0, &sums, k, j, rho);
                let i = g.index(0, k, j);
                let cells = cells_in_ball(&g, 0, g.point(i), rho);
                let m: f64 = cells.iter().map(|&c| g.measure(c)).sum();
                let w: f64 = cells.iter().map(|&c| vals[c] * g.measure(c)).sum();
                let slow = if m > 0.0 { w / m } else { 0.0 };
                assert!((fast - slow).abs() <= 1e-10 * slow.abs().max(1.0), "{k} {j} {rho}: {fast} {slow}");
            }
        }
    }

    #[test]
    fn dominates_the_integrand_and_constants() {
        let g = grid();
        let f = Field::from_fn(g.clone(), "e", |s| (-s.r).exp());
        let h = cz_integrand(&f).unwrap();
        let m = maximal_function(&f).unwrap();
        for (a, b) in m.values().iter().zip(h.values()) {
            assert!(a >= b);
        }
        let ones = vec![2.0; g.len()];
        let mc = maximal_of_values(&g, 0, &ones).unwrap();
        assert!(mc.iter().all(|v| (v - 2.0).abs() < 1e-12));
    }
}
