//! Approximation of cone Sobolev functions by functions vanishing near the
//! vertex: bounded truncation, the vertex cutoff `χ_ε`, and the logarithmic
//! corrector `η_δ` needed at the critical exponent.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::field::{gradient, Field};
use crate::calculus::norms::{lp_of_values, Weight};
use crate::error::{invalid, Result};
use crate::grid::PolarGrid;
use crate::quad::{fit_slope, plateau};

/// Radial cutoff profile: 1 on `[0, 1/2]`, 0 on `[1, ∞)`.
pub fn chi(s: f64) -> f64 {
    plateau(s, 0.5, 1.0)
}

/// `η_δ(r) = ln δ / ln r` for `r ≤ δ`, and 1 beyond.
pub fn eta(delta: f64, r: f64) -> f64 {
    if r <= delta {
        delta.ln() / r.ln()
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxParams {
    pub eps: f64,
    /// Corrector exponent; `δ = ε^{1/k}`.
    pub k: f64,
}

impl ApproxParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(invalid(format!("cutoff radius ε = {} must lie in (0, 1)", self.eps)));
        }
        if !(self.k >= 1.0 && self.k.is_finite()) {
            return Err(invalid(format!("corrector exponent k = {} must be ≥ 1", self.k)));
        }
        Ok(())
    }

    pub fn delta(&self) -> f64 {
        self.eps.powf(1.0 / self.k)
    }
}

/// `h_N(f)`: `f` clamped to `[-N, N]`.
pub fn truncate(f: &Field, height: f64) -> Result<Field> {
    if !(height > 0.0) {
        return Err(invalid("truncation height must be positive"));
    }
    Ok(f.map(|v| v.clamp(-height, height)).with_name(format!("h({})", f.name())))
}

fn check_eps(grid: &PolarGrid, eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("cutoff radius ε = {eps} must lie in (0, 1)")));
    }
    if 0.5 * eps <= grid.r_min() || eps >= grid.r_max() {
        return Err(invalid(format!(
            "cutoff radius ε = {eps} is outside the grid range [{:e}, {:e}]",
            2.0 * grid.r_min(),
            grid.r_max()
        )));
    }
    Ok(())
}

/// `χ_ε = χ(|x|/ε)` on the grid.
pub fn cutoff_field(grid: Arc<PolarGrid>, eps: f64) -> Result<Field> {
    check_eps(&grid, eps)?;
    Ok(Field::from_fn(grid, "chi", |s| chi(s.r / eps)))
}

/// `η_δ` on the grid.
pub fn log_weight(grid: Arc<PolarGrid>, delta: f64) -> Result<Field> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("δ = {delta} must lie in (0, 1)")));
    }
    Ok(Field::from_fn(grid, "eta", |s| eta(delta, s.r)))
}

/// `f_ε = f (1 - χ_ε)`, zero on `r ≤ ε/2`.
pub fn vertex_cutoff(f: &Field, eps: f64) -> Result<Field> {
    let c = cutoff_field(f.grid_arc().clone(), eps)?;
    f.zip(&c, |v, x| v * (1.0 - x)).map(|g| g.with_name(format!("{}_eps", f.name())))
}

/// `f_{ε,δ} = f η_δ (1 - χ_ε)` with `δ = ε^{1/k}`.
pub fn log_corrector(f: &Field, params: ApproxParams) -> Result<Field> {
    params.validate()?;
    let c = cutoff_field(f.grid_arc().clone(), params.eps)?;
    let e = log_weight(f.grid_arc().clone(), params.delta())?;
    let values = f
        .values()
        .iter()
        .zip(c.values())
        .zip(e.values())
        .map(|((v, x), y)| v * y * (1.0 - x))
        .collect();
    Field::new(f.grid_arc().clone(), values, format!("{}_eps_delta", f.name()))
}

/// `(‖η_δ ∇χ_ε‖_p, ‖∇η_δ‖_p)` on the grid.
pub fn corrector_terms(grid: Arc<PolarGrid>, params: ApproxParams, p: f64) -> Result<(f64, f64)> {
    params.validate()?;
    let c = cutoff_field(grid.clone(), params.eps)?;
    let e = log_weight(grid.clone(), params.delta())?;
    let gc = gradient(&c)?.magnitude();
    let ge = gradient(&e)?.magnitude();
    let product: Vec<f64> = gc.values().iter().zip(e.values()).map(|(a, b)| a * b).collect();
    Ok((
        lp_of_values(&product, &grid, p, Weight::None),
        lp_of_values(ge.values(), &grid, p, Weight::None),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ApproxMode {
    /// `f (1 - χ_ε)`.
    Cutoff,
    /// `f η_δ (1 - χ_ε)` with `δ = ε^{1/k}`.
    Corrected { k: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    First,
    Down,
    Flat,
    Up,
}

/// Relative change below which consecutive errors count as flat.
const FLAT_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub eps: f64,
    /// Corrector exponent, 0 for the plain cutoff.
    pub k: f64,
    pub l_p_err: f64,
    pub grad_err: f64,
    /// Change of `l_p_err + grad_err` from the previous row.
    pub trend: Trend,
}

impl ConvergenceRow {
    pub fn total(&self) -> f64 {
        self.l_p_err + self.grad_err
    }
}

fn trend(prev: Option<f64>, now: f64) -> Trend {
    match prev {
        None => Trend::First,
        Some(p) if now < p * (1.0 - FLAT_TOLERANCE) => Trend::Down,
        Some(p) if now > p * (1.0 + FLAT_TOLERANCE) => Trend::Up,
        Some(_) => Trend::Flat,
    }
}

/// `(‖f - a‖_p, ‖∇(f - a)‖_p)`.
pub fn approximation_error(f: &Field, approx: &Field, p: f64) -> Result<(f64, f64)> {
    let diff = f.sub(approx)?;
    let grad = gradient(&diff)?.magnitude();
    Ok((
        lp_of_values(diff.values(), f.grid(), p, Weight::None),
        lp_of_values(grad.values(), f.grid(), p, Weight::None),
    ))
}

pub fn approximant(f: &Field, mode: ApproxMode, eps: f64) -> Result<Field> {
    match mode {
        ApproxMode::Cutoff => vertex_cutoff(f, eps),
        ApproxMode::Corrected { k } => log_corrector(f, ApproxParams { eps, k }),
    }
}

/// One row per `ε` in the given order.
pub fn convergence_table(
    f: &Field,
    p: f64,
    mode: ApproxMode,
    sweep: &[f64],
) -> Result<Vec<ConvergenceRow>> {
    let k = match mode {
        ApproxMode::Cutoff => 0.0,
        ApproxMode::Corrected { k } => k,
    };
    let errors: Vec<(f64, f64)> = sweep
        .par_iter()
        .map(|&eps| approximation_error(f, &approximant(f, mode, eps)?, p))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(sweep.len());
    let mut prev = None;
    for (&eps, (l, g)) in sweep.iter().zip(errors) {
        let total = l + g;
        rows.push(ConvergenceRow { eps, k, l_p_err: l, grad_err: g, trend: trend(prev, total) });
        prev = Some(total);
    }
    Ok(rows)
}

/// Errors of `h_N(f)` for each height, in the `eps` column.
pub fn truncation_table(f: &Field, p: f64, heights: &[f64]) -> Result<Vec<ConvergenceRow>> {
    let mut rows = Vec::with_capacity(heights.len());
    let mut prev = None;
    for &n in heights {
        let (l, g) = approximation_error(f, &truncate(f, n)?, p)?;
        rows.push(ConvergenceRow { eps: n, k: 0.0, l_p_err: l, grad_err: g, trend: trend(prev, l + g) });
        prev = Some(l + g);
    }
    Ok(rows)
}

/// Log-log slope of `column(row)` against `ε`.
pub fn error_slope(rows: &[ConvergenceRow], column: impl Fn(&ConvergenceRow) -> f64) -> f64 {
    let xs: Vec<f64> = rows.iter().map(|r| r.eps.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| column(r).ln()).collect();
    fit_slope(&xs, &ys)
}

/// `ε` values spaced geometrically from `hi` down to `lo`, `per_decade` per decade.
pub fn eps_sweep(hi: f64, lo: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let count = (decades * per_decade as f64).round() as usize + 1;
    crate::calculus::norms::geometric_radii(hi, lo, count.max(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::families::{make_test_field, TestFamily};
    use crate::geometry::ConeDomain;
    use crate::grid::{GridKind, GridSpec};

    fn grid() -> Arc<PolarGrid> {
        let spec = GridSpec::reaching(1e-9, 0.97, 8.0, 24);
        Arc::new(PolarGrid::new(ConeDomain::standard(2), GridKind::Double, spec).unwrap())
    }

    #[test]
    fn profiles_are_bounded_and_supported() {
        for i in 0..200 {
            let s = i as f64 / 100.0;
            assert!((0.0..=1.0).contains(&chi(s)));
            if s <= 0.5 {
                assert_eq!(chi(s), 1.0);
            }
            if s >= 1.0 {
                assert_eq!(chi(s), 0.0);
            }
            let r = 1e-6 + s;
            assert!((0.0..=1.0).contains(&eta(0.3, r)));
        }
        // Both branches agree at r = δ.
        assert_eq!(eta(0.3, 0.3), 1.0);
    }

    #[test]
    fn cutoff_vanishes_near_the_vertex() {
        let g = grid();
        let f = make_test_field(g.clone(), TestFamily::RadialExp);
        let eps = 1e-3;
        let fe = vertex_cutoff(&f, eps).unwrap();
        for (i, v) in fe.values().iter().enumerate() {
            if g.radius(g.cell(i).ring) <= eps / 2.0 {
                assert_eq!(*v, 0.0);
            }
        }
        assert!(vertex_cutoff(&f, 1e-12).is_err());
    }

    #[test]
    fn truncation_is_a_contraction() {
        let g = grid();
        let f = make_test_field(g, TestFamily::RadialPower { a: -0.2 });
        let grad = |h: &Field| lp_of_values(gradient(h).unwrap().magnitude().values(), h.grid(), 1.0, Weight::None);
        let full = grad(&f);
        for n in [1.0, 2.0, 5.0] {
            let t = truncate(&f, n).unwrap();
            assert!(t.max_abs() <= n);
            assert!(grad(&t) <= full * (1.0 + 1e-9));
        }
        let bounded = make_test_field(grid(), TestFamily::RadialExp);
        assert_eq!(truncate(&bounded, 2.0).unwrap().values(), bounded.values());
        let rows = truncation_table(&f, 1.0, &[1.0, 2.0, 4.0, 8.0]).unwrap();
        assert!(rows.windows(2).all(|w| w[1].total() < w[0].total()));
    }

    #[test]
    fn subcritical_cutoff_error_is_linear_in_eps() {
        let f = make_test_field(grid(), TestFamily::RadialExp);
        let rows = convergence_table(&f, 1.0, ApproxMode::Cutoff, &eps_sweep(1e-2, 1e-5, 2)).unwrap();
        let slope = error_slope(&rows, ConvergenceRow::total);
        assert!((slope - 1.0).abs() < 0.1, "{slope}");
        assert!(rows[1..].iter().all(|r| r.trend == Trend::Down));
    }

    #[test]
    fn corrector_term_scales_like_one_over_k() {
        let g = grid();
        let eps = 1e-6;
        let products: Vec<f64> = [2.0, 4.0, 8.0, 16.0]
            .iter()
            .map(|&k| k * corrector_terms(g.clone(), ApproxParams { eps, k }, 2.0).unwrap().0)
            .collect();
        let (lo, hi) = products.iter().fold((f64::INFINITY, 0.0_f64), |(a, b), v| (a.min(*v), b.max(*v)));
        assert!(hi / lo < 1.15, "{products:?}");
    }
}
