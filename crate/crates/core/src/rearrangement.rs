//! Decreasing rearrangements and the K-functionals built from them.
//!
//! A table stores the sorted magnitudes of weighted samples together with the
//! cumulative measures, which makes `f*` a right-continuous step function and
//! `∫₀^t f*` piecewise linear. Everything below is exact on that step function.

use serde::Serialize;

use crate::calculus::field::{gradient, Field};
use crate::error::{invalid, Result};
use crate::quad::pairwise_sum;

#[derive(Debug, Clone, Serialize)]
pub struct RearrangementTable {
    /// `|f|` sorted in nonincreasing order, zero-measure samples dropped.
    values: Vec<f64>,
    /// `cum[i]` is the measure carried by the `i` largest values.
    cum: Vec<f64>,
    /// `integral[i] = ∫₀^{cum[i]} f*`.
    integral: Vec<f64>,
}

impl RearrangementTable {
    pub fn from_weighted(values: &[f64], measures: &[f64]) -> Result<Self> {
        if values.len() != measures.len() {
            return Err(invalid("values and measures differ in length"));
        }
        if measures.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
            return Err(invalid("cell measures must be finite and nonnegative"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("values must be finite"));
        }
        let mut order: Vec<usize> = (0..values.len()).filter(|&i| measures[i] > 0.0).collect();
        // Stable sort: ties keep index order, so the table is deterministic.
        order.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()));
        let sorted: Vec<f64> = order.iter().map(|&i| values[i].abs()).collect();
        let mut cum = Vec::with_capacity(sorted.len() + 1);
        let mut integral = Vec::with_capacity(sorted.len() + 1);
        cum.push(0.0);
        integral.push(0.0);
        for (k, &i) in order.iter().enumerate() {
            cum.push(cum[k] + measures[i]);
            integral.push(integral[k] + sorted[k] * measures[i]);
        }
        Ok(Self { values: sorted, cum, integral })
    }

    pub fn from_field(f: &Field) -> Self {
        Self::from_weighted(f.values(), f.grid().measures()).expect("grid data is well formed")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total_measure(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// Step values in nonincreasing order.
    pub fn steps(&self) -> &[f64] {
        &self.values
    }

    /// Right ends of the steps.
    pub fn breakpoints(&self) -> &[f64] {
        &self.cum[1..]
    }

    /// Index of the step containing `t` (the first step with `cum > t`).
    fn step_of(&self, t: f64) -> usize {
        self.cum[1..].partition_point(|c| *c <= t)
    }

    /// `f*(t)`, right-continuous, zero beyond the total measure.
    pub fn f_star(&self, t: f64) -> f64 {
        let i = self.step_of(t);
        self.values.get(i).copied().unwrap_or(0.0)
    }

    /// `∫₀^t f*(s) ds`.
    pub fn integral_to(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let i = self.step_of(t);
        if i >= self.values.len() {
            return *self.integral.last().unwrap();
        }
        self.integral[i] + self.values[i] * (t - self.cum[i])
    }

    /// `f**(t) = t⁻¹ ∫₀^t f*`.
    pub fn f_double_star(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.values.first().copied().unwrap_or(0.0);
        }
        self.integral_to(t) / t
    }

    /// `∫_t^∞ f*(s)^p ds`.
    pub fn power_integral_from(&self, t: f64, p: f64) -> f64 {
        let start = self.step_of(t.max(0.0));
        let mut terms = Vec::with_capacity(self.values.len().saturating_sub(start));
        for i in start..self.values.len() {
            let lo = self.cum[i].max(t);
            terms.push(self.values[i].powf(p) * (self.cum[i + 1] - lo));
        }
        pairwise_sum(&terms)
    }

    /// `‖f*‖_{L^p(0,∞)}`, equal to `‖f‖_p` by equimeasurability.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.values.first().copied().unwrap_or(0.0);
        }
        self.power_integral_from(0.0, p).powf(1.0 / p)
    }

    /// `λ({|f| > s})`.
    pub fn level_measure(&self, s: f64) -> f64 {
        let k = self.values.partition_point(|v| *v > s);
        self.cum[k]
    }

    /// `‖f**‖_{L^p(0,∞)}` for `p > 1`.
    ///
    /// On a step `[a, b]` one has `f** = v + A/s` with `A = ∫₀^a f* - v a`; each
    /// piece is integrated by Gauss–Legendre in `ln s`, and the tail beyond the
    /// total measure, where `f** = I/s`, in closed form.
    pub fn double_star_lp_norm(&self, p: f64) -> Result<f64> {
        if !(p > 1.0) {
            return Err(invalid("f** is only p-integrable for p > 1"));
        }
        if self.values.is_empty() {
            return Ok(0.0);
        }
        let mut terms = Vec::with_capacity(self.values.len() + 1);
        terms.push(self.values[0].powf(p) * self.cum[1]);
        for i in 1..self.values.len() {
            let (a, b) = (self.cum[i], self.cum[i + 1]);
            let v = self.values[i];
            let shift = self.integral[i] - v * a;
            terms.push(gauss_log(|s| (v + shift / s).powf(p), a, b));
        }
        let total = self.total_measure();
        let mass = *self.integral.last().unwrap();
        terms.push(mass.powf(p) * total.powf(1.0 - p) / (p - 1.0));
        Ok(pairwise_sum(&terms).powf(1.0 / p))
    }
}

/// `∫_a^b g(s) ds` with `s = e^u` and 8-point Gauss–Legendre in `u`, `0 < a < b`.
fn gauss_log(g: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const NODES: [f64; 4] =
        [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
    const WEIGHTS: [f64; 4] =
        [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];
    let (lo, hi) = (a.ln(), b.ln());
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut sum = 0.0;
    for (x, w) in NODES.iter().zip(WEIGHTS) {
        for u in [mid - half * x, mid + half * x] {
            let s = u.exp();
            sum += w * g(s) * s;
        }
    }
    sum * half
}

/// `K(f, t; L¹, L^∞) = ∫₀^t f*`.
pub fn k_l1_linf(table: &RearrangementTable, t: f64) -> f64 {
    table.integral_to(t)
}

/// `K(f, t; L¹, L^n) ≈ ∫₀^{t^α} f* + t (∫_{t^α}^∞ (f*)^n)^{1/n}` with `α = n/(n-1)`.
pub fn k_l1_ln(table: &RearrangementTable, t: f64, n: f64) -> f64 {
    let s = t.powf(n / (n - 1.0));
    table.integral_to(s) + t * table.power_integral_from(s, n).powf(1.0 / n)
}

/// Value of `‖f - g‖₁ + t‖g‖_∞` for the truncation `g = sign(f) min(|f|, λ)`.
pub fn truncation_cost(values: &[f64], measures: &[f64], t: f64, level: f64) -> f64 {
    let excess: Vec<f64> = values
        .iter()
        .zip(measures)
        .map(|(v, m)| (v.abs() - level).max(0.0) * m)
        .collect();
    let sup = values.iter().fold(0.0_f64, |a, v| a.max(v.abs().min(level)));
    pairwise_sum(&excess) + t * sup
}

/// Brute-force `(L¹, L^∞)` K-functional: the best truncation over the levels
/// `0`, every sample magnitude and every midpoint between consecutive ones.
pub fn brute_force_k_l1_linf(values: &[f64], measures: &[f64], t: f64) -> f64 {
    let mut levels: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    levels.push(0.0);
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let mids: Vec<f64> = levels.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    levels
        .iter()
        .chain(&mids)
        .map(|&l| truncation_cost(values, measures, t, l))
        .fold(f64::INFINITY, f64::min)
}

/// Rearrangements of `|f|`, `|f|/r` and `|∇f|` for the Sobolev K estimate.
#[derive(Debug, Clone)]
pub struct SobolevTables {
    pub value: RearrangementTable,
    pub over_r: RearrangementTable,
    pub gradient: RearrangementTable,
}

impl SobolevTables {
    pub fn new(f: &Field) -> Result<Self> {
        let grad = gradient(f)?.magnitude();
        Ok(Self {
            value: RearrangementTable::from_field(f),
            over_r: RearrangementTable::from_field(&f.over_r()),
            gradient: RearrangementTable::from_field(&grad),
        })
    }

    /// `t (f**(t) + (|f|/r)**(t) + |∇f|**(t))`.
    pub fn k_estimate(&self, t: f64) -> f64 {
        self.value.integral_to(t) + self.over_r.integral_to(t) + self.gradient.integral_to(t)
    }

    /// Limit of `K(t)/t` as `t → 0`: the sum of the three suprema.
    pub fn sup_sum(&self) -> f64 {
        self.value.f_star(0.0) + self.over_r.f_star(0.0) + self.gradient.f_star(0.0)
    }

    /// Limit of `K(t)` as `t → ∞`: the sum of the three `L¹` norms.
    pub fn l1_sum(&self) -> f64 {
        self.value.lp_norm(1.0) + self.over_r.lp_norm(1.0) + self.gradient.lp_norm(1.0)
    }
}

pub fn k_sobolev_estimate(f: &Field, t: f64) -> Result<f64> {
    Ok(SobolevTables::new(f)?.k_estimate(t))
}

/// Geometric grid of `count` points on `[lo, hi]`.
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let step = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(|i| lo * (step * i as f64).exp()).collect()
}

/// `(∫₀^∞ (t^{-θ} K(f,t))^p dt/t)^{1/p}` with the Sobolev K estimate.
///
/// Trapezoidal rule in `ln t` on 240 geometric points over `[1e-6, 1e6]`;
/// the two tails use `K ≈ t·sup` below and `K ≈ const` above the grid.
pub fn interpolation_norm(f: &Field, theta: f64, p: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(invalid("θ must lie in (0, 1)"));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid("p must be finite and ≥ 1"));
    }
    let tables = SobolevTables::new(f)?;
    let ts = geometric_grid(1e-6, 1e6, 240);
    let h = (ts[1] / ts[0]).ln();
    let g: Vec<f64> = ts.iter().map(|&t| (t.powf(-theta) * tables.k_estimate(t)).powf(p)).collect();
    let mut terms: Vec<f64> = g.windows(2).map(|w| 0.5 * h * (w[0] + w[1])).collect();
    let (t0, t1) = (ts[0], ts[ts.len() - 1]);
    let low = tables.k_estimate(t0) / t0;
    terms.push(low.powf(p) * t0.powf(p * (1.0 - theta)) / (p * (1.0 - theta)));
    let high = tables.k_estimate(t1);
    terms.push(high.powf(p) * t1.powf(-p * theta) / (p * theta));
    Ok(pairwise_sum(&terms).powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit(values: &[f64]) -> RearrangementTable {
        RearrangementTable::from_weighted(values, &vec![1.0; values.len()]).unwrap()
    }

    #[test]
    fn sorting_example() {
        let t = unit(&[3.0, 1.0, 4.0, 1.0]);
        assert_eq!(t.steps(), &[4.0, 3.0, 1.0, 1.0]);
        assert_eq!(t.f_star(0.5), 4.0);
        assert_eq!(t.f_star(1.0), 3.0);
        assert_eq!(t.f_star(3.5), 1.0);
        assert_eq!(t.f_star(4.0), 0.0);
        assert_eq!(k_l1_linf(&t, 2.0), 7.0);
        assert_eq!(brute_force_k_l1_linf(&[3.0, 1.0, 4.0, 1.0], &[1.0; 4], 2.0), 7.0);
    }

    #[test]
    fn indicator_tables() {
        let t = RearrangementTable::from_weighted(&[2.0], &[3.0]).unwrap();
        assert_eq!(t.f_star(2.9), 2.0);
        assert_eq!(t.f_double_star(3.0), 2.0);
        assert!((t.f_double_star(6.0) - 1.0).abs() < 1e-15);
        let one = RearrangementTable::from_weighted(&[1.0], &[1.0]).unwrap();
        assert_eq!(k_l1_ln(&one, 1.0, 2.0), 1.0);
        let four = RearrangementTable::from_weighted(&[1.0], &[4.0]).unwrap();
        assert!((k_l1_ln(&four, 1.0, 2.0) - (1.0 + 3f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn limits_in_t() {
        let t = unit(&[3.0, -1.0, 4.0, 1.0]);
        assert_eq!(k_l1_linf(&t, 1e9), 9.0);
        assert!((k_l1_linf(&t, 1e-9) - 4e-9).abs() < 1e-20);
    }

    #[test]
    fn double_star_norm_of_indicator() {
        // f** = 1 on [0,1], 1/s beyond: ‖f**‖₂² = 1 + 1 = 2.
        let t = RearrangementTable::from_weighted(&[1.0], &[1.0]).unwrap();
        assert!((t.double_star_lp_norm(2.0).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        assert!(t.double_star_lp_norm(1.0).is_err());
    }

    #[test]
    fn double_star_norm_matches_fine_quadrature() {
        let vals = [5.0, 0.5, 2.0, 3.0, 0.1];
        let meas = [0.2, 3.0, 1.0, 0.7, 10.0];
        let t = RearrangementTable::from_weighted(&vals, &meas).unwrap();
        let p = 2.5;
        let g = |s: f64| t.f_double_star(s).powf(p);
        let total = t.total_measure();
        let mut acc = crate::quad::adaptive_simpson(&g, 0.0, total, 1e-12);
        acc += t.integral_to(total).powf(p) * total.powf(1.0 - p) / (p - 1.0);
        let exact = t.double_star_lp_norm(p).unwrap();
        assert!((exact - acc.powf(1.0 / p)).abs() < 1e-8, "{exact} {acc}");
    }

    proptest! {
        #[test]
        fn equimeasurable_and_level_bound(
            data in prop::collection::vec((-10.0f64..10.0, 0.01f64..5.0), 1..40),
            t in 0.0f64..50.0,
        ) {
            let (vals, meas): (Vec<f64>, Vec<f64>) = data.into_iter().unzip();
            let table = RearrangementTable::from_weighted(&vals, &meas).unwrap();
            for p in [1.0, 2.0, 7.0 / 3.0] {
                let direct: f64 = vals.iter().zip(&meas).map(|(v, m)| v.abs().powf(p) * m).sum();
                let rearranged = table.lp_norm(p).powf(p);
                prop_assert!((direct - rearranged).abs() <= 1e-10 * direct.max(1e-300));
            }
            prop_assert!(table.level_measure(table.f_star(t)) <= t + 1e-12);
            prop_assert!(table.f_double_star(t) + 1e-12 >= table.f_star(t));
            let brute = brute_force_k_l1_linf(&vals, &meas, t);
            prop_assert!((brute - k_l1_linf(&table, t)).abs() <= 1e-12 * brute.max(1.0));
        }

        #[test]
        fn k_monotonicity_and_concavity(
            data in prop::collection::vec((0.0f64..10.0, 0.1f64..2.0), 1..20),
        ) {
            let (vals, meas): (Vec<f64>, Vec<f64>) = data.into_iter().unzip();
            let table = RearrangementTable::from_weighted(&vals, &meas).unwrap();
            let ts = geometric_grid(1e-3, 1e3, 60);
            let ks: Vec<f64> = ts.iter().map(|t| k_l1_ln(&table, *t, 2.0)).collect();
            // The expression is only equivalent to K, so it may dip slightly.
            let mut running = 0.0_f64;
            for k in &ks {
                running = running.max(*k);
                prop_assert!(*k >= 0.5 * running);
            }
            let lin: Vec<f64> = (0..=40).map(|i| i as f64 * 0.5).collect();
            let kl: Vec<f64> = lin.iter().map(|t| k_l1_linf(&table, *t)).collect();
            for w in kl.windows(2) {
                prop_assert!(w[1] + 1e-12 >= w[0]);
            }
            for w in kl.windows(3) {
                prop_assert!(w[0] - 2.0 * w[1] + w[2] <= 1e-9);
            }
        }
    }
}
