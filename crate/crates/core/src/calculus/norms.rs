//! Quadrature norms, Sobolev-type norms, the Hardy quotient and partial
//! integral tables for integrals that only converge (or fail to) at the vertex.

use serde::{Deserialize, Serialize};

use super::field::{gradient, Field, GradientField};
use super::split::radial_split;
use crate::error::{invalid, ConeError, Result};
use crate::grid::PolarGrid;
use crate::quad::{fit_slope, pairwise_sum, pairwise_sum_by};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weight {
    None,
    /// Integrand `|f/r|^p`.
    InvR,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    /// `‖f‖_p`
    Lp,
    /// `‖f‖_p + ‖∇f‖_p`
    W1p,
    /// `‖f‖_p + ‖∇f‖_p + ‖f/r‖_p`
    TildeH1p,
    /// `‖f‖_n + ‖∇f‖_n + ‖f_a/r‖_n`, only for `p = n`
    HatH1n,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub p: f64,
    pub weight: Weight,
    pub kind: NormKind,
}

impl NormSpec {
    pub fn lp(p: f64) -> Self {
        Self {
            p,
            weight: Weight::None,
            kind: NormKind::Lp,
        }
    }

    pub fn weighted(p: f64) -> Self {
        Self {
            p,
            weight: Weight::InvR,
            kind: NormKind::Lp,
        }
    }

    pub fn sobolev(p: f64, kind: NormKind) -> Self {
        Self {
            p,
            weight: Weight::None,
            kind,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.p >= 1.0) {
            return Err(invalid(format!("exponent {} must be ≥ 1", self.p)));
        }
        if self.kind == NormKind::HatH1n && self.p != dim as f64 {
            return Err(invalid(format!(
                "the hat norm needs p = n = {dim}, got p = {}",
                self.p
            )));
        }
        Ok(())
    }
}

/// `(Σ |v|^p w μ)^{1/p}` over the grid cells, or the weighted sample maximum for `p = ∞`.
pub fn lp_of_values(values: &[f64], grid: &PolarGrid, p: f64, weight: Weight) -> f64 {
    let weighted = |i: usize| match weight {
        Weight::None => values[i].abs(),
        Weight::InvR => values[i].abs() / grid.radius(grid.cell(i).ring),
    };
    if p.is_infinite() {
        return (0..values.len()).fold(0.0, |m, i| m.max(weighted(i)));
    }
    let sum = pairwise_sum_by(values.len(), |i| weighted(i).powf(p) * grid.measure(i));
    sum.powf(1.0 / p)
}

/// Anything carrying a per-cell magnitude on a grid.
pub trait Integrand {
    fn grid(&self) -> &PolarGrid;
    fn magnitudes(&self) -> Vec<f64>;
}

impl Integrand for Field {
    fn grid(&self) -> &PolarGrid {
        Field::grid(self)
    }
    fn magnitudes(&self) -> Vec<f64> {
        self.values().iter().map(|v| v.abs()).collect()
    }
}

impl Integrand for GradientField {
    fn grid(&self) -> &PolarGrid {
        GradientField::grid(self)
    }
    fn magnitudes(&self) -> Vec<f64> {
        self.magnitude().into_values()
    }
}

/// Plain or `1/r`-weighted Lebesgue norm of a field or of a gradient.
pub fn lp_norm(f: &impl Integrand, spec: NormSpec) -> Result<f64> {
    spec.validate(f.grid().dim())?;
    if spec.kind != NormKind::Lp {
        return Err(invalid("lp_norm takes an Lp spec; use sobolev_norm"));
    }
    let values = f.magnitudes();
    if values.is_empty() {
        return Err(ConeError::EmptyField);
    }
    Ok(lp_of_values(&values, f.grid(), spec.p, spec.weight))
}

pub fn sobolev_norm(f: &Field, spec: NormSpec) -> Result<f64> {
    let dim = f.grid().dim();
    spec.validate(dim)?;
    if f.values().is_empty() {
        return Err(ConeError::EmptyField);
    }
    let p = spec.p;
    let base = lp_of_values(f.values(), f.grid(), p, spec.weight);
    if spec.kind == NormKind::Lp {
        return Ok(base);
    }
    let grad = gradient(f)?.magnitude();
    let w1p = lp_of_values(f.values(), f.grid(), p, Weight::None)
        + lp_of_values(grad.values(), f.grid(), p, Weight::None);
    Ok(match spec.kind {
        NormKind::Lp => unreachable!(),
        NormKind::W1p => w1p,
        NormKind::TildeH1p => w1p + lp_of_values(f.values(), f.grid(), p, Weight::InvR),
        NormKind::HatH1n => {
            let split = radial_split(f)?;
            w1p + lp_of_values(split.anti.values(), f.grid(), p, Weight::InvR)
        }
    })
}

/// `‖f/r‖_p / ‖∂_r f‖_p`.
pub fn hardy_quotient(f: &Field, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(invalid("exponent must be ≥ 1"));
    }
    let grad = gradient(f)?;
    let denom = lp_of_values(&grad.radial, f.grid(), p, Weight::None);
    if !(denom > 0.0) {
        return Err(ConeError::ZeroGradient);
    }
    Ok(lp_of_values(f.values(), f.grid(), p, Weight::InvR) / denom)
}

/// `∫_{r ≥ r_min} |v|^p w dx` for each requested `r_min`, with the straddling
/// ring counted in proportion to its measure above `r_min`.
pub fn partial_integrals(
    values: &[f64],
    grid: &PolarGrid,
    p: f64,
    weight: Weight,
    r_mins: &[f64],
) -> Vec<f64> {
    let n = grid.dim() as i32;
    let per_ring = grid.angular() * grid.patches().len();
    let ring_totals: Vec<f64> = (0..grid.radial())
        .map(|k| {
            let r = grid.radius(k);
            let terms: Vec<f64> = (0..grid.patches().len())
                .flat_map(|p_idx| (0..grid.angular()).map(move |j| (p_idx, j)))
                .map(|(p_idx, j)| {
                    let i = grid.index(p_idx, k, j);
                    let v = match weight {
                        Weight::None => values[i].abs(),
                        Weight::InvR => values[i].abs() / r,
                    };
                    v.powf(p) * grid.measure(i)
                })
                .collect();
            debug_assert_eq!(terms.len(), per_ring);
            pairwise_sum(&terms)
        })
        .collect();
    let edges = grid.edges();
    let mut cumulative = Vec::with_capacity(ring_totals.len() + 1);
    cumulative.push(0.0);
    for t in &ring_totals {
        cumulative.push(cumulative.last().unwrap() + t);
    }
    r_mins
        .iter()
        .map(|&rm| {
            if rm >= edges[0] {
                return 0.0;
            }
            // Rings entirely above rm, then a fraction of the straddling ring.
            let full = edges[1..].iter().take_while(|e| **e >= rm).count();
            let mut total = cumulative[full];
            if full < ring_totals.len() {
                let (outer, inner) = (edges[full], edges[full + 1]);
                let frac = (outer.powi(n) - rm.powi(n)) / (outer.powi(n) - inner.powi(n));
                total += frac * ring_totals[full];
            }
            total
        })
        .collect()
}

/// Partial integrals over a range of truncation radii and the growth exponent
/// `s` in `I(r_min) ≈ c |ln r_min|^s + d`.
#[derive(Debug, Clone, Serialize)]
pub struct DivergenceTable {
    pub r_min: Vec<f64>,
    pub partial: Vec<f64>,
    /// Estimated from the increments, so the additive constant drops out.
    /// `-inf` when the increments vanish.
    pub growth_exponent: f64,
}

/// Growth exponent above which a partial-integral table is declared divergent.
/// Logarithmic growth has exponent 0; integrands `|ln r|^{-2β}` per unit of
/// `|ln r|` give `1 - 2β`.
pub const DIVERGENCE_EXPONENT: f64 = -0.5;

impl DivergenceTable {
    pub fn is_divergent(&self) -> bool {
        self.growth_exponent > DIVERGENCE_EXPONENT
    }

    /// Relative increment of the last step of the table.
    pub fn last_relative_increment(&self) -> f64 {
        let n = self.partial.len();
        let last = self.partial[n - 1];
        if last == 0.0 {
            return 0.0;
        }
        (last - self.partial[n - 2]) / last
    }
}

pub fn divergence_table(
    values: &[f64],
    grid: &PolarGrid,
    p: f64,
    weight: Weight,
    r_mins: &[f64],
) -> DivergenceTable {
    let partial = partial_integrals(values, grid, p, weight, r_mins);
    let growth_exponent = growth_exponent(r_mins, &partial);
    DivergenceTable {
        r_min: r_mins.to_vec(),
        partial,
        growth_exponent,
    }
}

/// `1 + slope` of `ln(ΔI/ΔL)` against `ln L`, with `L = |ln r_min|`.
pub fn growth_exponent(r_mins: &[f64], partial: &[f64]) -> f64 {
    let scale = partial.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..r_mins.len().saturating_sub(1) {
        let (l0, l1) = (r_mins[i].ln().abs(), r_mins[i + 1].ln().abs());
        let inc = partial[i + 1] - partial[i];
        if inc <= 1e-13 * scale || l1 == l0 {
            return f64::NEG_INFINITY;
        }
        xs.push((0.5 * (l0 + l1)).ln());
        ys.push((inc / (l1 - l0)).ln());
    }
    if xs.len() < 2 {
        return f64::NEG_INFINITY;
    }
    1.0 + fit_slope(&xs, &ys)
}

/// `count` radii spaced geometrically from `hi` down to `lo`.
pub fn geometric_radii(hi: f64, lo: f64, count: usize) -> Vec<f64> {
    let ratio = (lo / hi).ln() / (count - 1) as f64;
    (0..count).map(|i| hi * (ratio * i as f64).exp()).collect()
}

/// Membership gate for the hat space at `p = n`: refuses fields whose
/// `‖f_a/r‖_n` partial integrals keep growing over the last four decades of
/// the grid.
pub fn hat_gate(f: &Field) -> Result<DivergenceTable> {
    let grid = f.grid();
    let split = radial_split(f)?;
    let lo = grid.r_min();
    let r_mins = geometric_radii(lo * 1e4, lo, 9);
    Ok(divergence_table(
        split.anti.values(),
        grid,
        grid.dim() as f64,
        Weight::InvR,
        &r_mins,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConeDomain;
    use crate::grid::{GridKind, GridSpec};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn grid(dim: usize, kind: GridKind) -> Arc<PolarGrid> {
        let spec = GridSpec::reaching(40.0 * 1e-12, 0.98, 40.0, 24);
        Arc::new(PolarGrid::new(ConeDomain::standard(dim), kind, spec).unwrap())
    }

    #[test]
    fn zero_field_has_zero_norms() {
        let g = grid(2, GridKind::Double);
        let z = Field::zeros(g);
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert_eq!(lp_norm(&z, NormSpec::lp(p)).unwrap(), 0.0);
            assert_eq!(
                sobolev_norm(&z, NormSpec::sobolev(p, NormKind::TildeH1p)).unwrap(),
                0.0
            );
        }
        assert_eq!(
            sobolev_norm(&z, NormSpec::sobolev(2.0, NormKind::HatH1n)).unwrap(),
            0.0
        );
    }

    #[test]
    fn gamma_integral_oracle() {
        // ∫ r e^{-r} over Ω⁺ (opening π/2): (π/2) ∫ r² e^{-r} dr = π.
        let g = grid(2, GridKind::Plus);
        let f = Field::from_fn(g, "r exp", |s| s.r * (-s.r).exp());
        let l1 = lp_norm(&f, NormSpec::lp(1.0)).unwrap();
        assert!((l1 - PI).abs() / PI < 1e-4, "{l1}");
        let w1 = lp_norm(&f, NormSpec::weighted(1.0)).unwrap();
        assert!((w1 - PI / 2.0).abs() / (PI / 2.0) < 1e-4, "{w1}");
    }

    #[test]
    fn hat_norm_requires_critical_exponent() {
        let g = grid(2, GridKind::Double);
        let f = Field::from_fn(g, "x", |s| (-s.r).exp());
        assert!(sobolev_norm(&f, NormSpec::sobolev(3.0, NormKind::HatH1n)).is_err());
        // radial field: hat norm equals the W¹ₙ norm
        let hat = sobolev_norm(&f, NormSpec::sobolev(2.0, NormKind::HatH1n)).unwrap();
        let w = sobolev_norm(&f, NormSpec::sobolev(2.0, NormKind::W1p)).unwrap();
        assert!((hat - w).abs() <= 1e-9 * w);
    }

    #[test]
    fn hardy_quotient_radial_exp_times_r() {
        // ratio = 1 / ∫|1-r| r e^{-r} dr = 1 / (1 + 2(3/e - 1)).
        let g = grid(2, GridKind::Plus);
        let f = Field::from_fn(g, "r exp", |s| s.r * (-s.r).exp());
        let q = hardy_quotient(&f, 1.0).unwrap();
        let expected = 1.0 / (1.0 + 2.0 * (3.0 / std::f64::consts::E - 1.0));
        assert!((q - expected).abs() < 1e-3, "{q} vs {expected}");
        assert!(matches!(
            hardy_quotient(&Field::from_fn(f.grid_arc().clone(), "c", |_| 1.0), 1.0),
            Err(ConeError::ZeroGradient)
        ));
    }

    #[test]
    fn partial_integrals_hit_exact_values() {
        // ∫_{r ≥ a} 1 dx over Ω⁺ in the plane = (π/4)(40² - a²).
        let g = grid(2, GridKind::Plus);
        let ones = vec![1.0; g.len()];
        let radii = [10.0, 1.0, 0.123, 1e-7];
        let parts = partial_integrals(&ones, &g, 1.0, Weight::None, &radii);
        for (a, v) in radii.iter().zip(&parts) {
            let exact = PI / 4.0 * (1600.0 - a * a);
            assert!((v - exact).abs() < 1e-9 * exact, "{a}: {v} vs {exact}");
        }
    }

    #[test]
    fn growth_exponent_of_power_of_log() {
        let radii = geometric_radii(1e-4, 1e-12, 9);
        let partial: Vec<f64> = radii
            .iter()
            .map(|r| 3.0 * r.ln().abs().powf(0.5) + 7.0)
            .collect();
        let s = growth_exponent(&radii, &partial);
        assert!((s - 0.5).abs() < 0.01, "{s}");
        let flat = vec![1.0; radii.len()];
        assert_eq!(growth_exponent(&radii, &flat), f64::NEG_INFINITY);
    }
}
