//! Upper bound for the Sobolev K-functional from the decomposition.
//!
//! At scale `t` the level is `α(t) = max_± M_±*(t)`, the decreasing
//! rearrangement of the maximal function on each half-cone. Splitting
//! `f = b + g` at that level gives `K(f, t) ≤ ‖b‖₁ + t‖g‖_∞` in the
//! weighted first-order norms.

use serde::Serialize;

use super::decompose::{decompose_with_maximal, CzParams, CzResult};
use super::maximal::maximal_function;
use crate::calculus::field::{gradient, Field};
use crate::calculus::norms::{lp_of_values, Weight};
use crate::error::{ConeError, Result};
use crate::geometry::Side;
use crate::rearrangement::RearrangementTable;

/// `‖f‖₁ + ‖∇f‖₁ + ‖f/r‖₁`.
pub fn weighted_l1(f: &Field) -> Result<f64> {
    let grad = gradient(f)?.magnitude();
    let grid = f.grid();
    Ok(lp_of_values(f.values(), grid, 1.0, Weight::None)
        + lp_of_values(grad.values(), grid, 1.0, Weight::None)
        + lp_of_values(f.values(), grid, 1.0, Weight::InvR))
}

/// `‖f‖_∞ + ‖∇f‖_∞ + ‖f/r‖_∞`.
pub fn weighted_sup(f: &Field) -> Result<f64> {
    let grad = gradient(f)?.magnitude();
    Ok(f.max_abs() + grad.max_abs() + f.over_r().max_abs())
}

struct SidePart {
    side: Side,
    field: Field,
    maximal: Field,
    table: RearrangementTable,
}

/// One scale of the bound, with the pieces that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct KUpperPoint {
    pub t: f64,
    pub alpha: f64,
    /// `‖b‖₁` summed over both half-cones.
    pub bad_norm: f64,
    /// `‖g‖_∞`, the larger of the two half-cones.
    pub good_norm: f64,
    pub upper: f64,
    /// True when the level was degenerate and the whole field went to `b`.
    pub trivial: bool,
    pub n_balls: usize,
}

pub struct CzKFunctional {
    parts: Vec<SidePart>,
    whole_l1: f64,
    c1: f64,
}

impl CzKFunctional {
    /// Precomputes the maximal function of each half-cone of `f`.
    pub fn new(f: &Field) -> Result<Self> {
        Self::with_c1(f, super::decompose::DEFAULT_C1)
    }

    pub fn with_c1(f: &Field, c1: f64) -> Result<Self> {
        let mut parts = Vec::new();
        for patch in f.grid().patches() {
            let side = patch.side.ok_or_else(|| {
                ConeError::WrongVariant("the decomposition needs a cone grid".into())
            })?;
            let field = f.side(side)?;
            let maximal = maximal_function(&field)?;
            let table = RearrangementTable::from_field(&maximal);
            parts.push(SidePart { side, field, maximal, table });
        }
        let whole_l1 = parts.iter().map(|p| weighted_l1(&p.field)).sum::<Result<f64>>()?;
        Ok(Self { parts, whole_l1, c1 })
    }

    pub fn alpha(&self, t: f64) -> f64 {
        self.parts.iter().map(|p| p.table.f_star(t)).fold(0.0, f64::max)
    }

    /// Decomposes every half-cone at level `α`.
    pub fn decompose_at(&self, alpha: f64) -> Result<Vec<CzResult>> {
        self.parts
            .iter()
            .map(|p| {
                let params = CzParams { c1: self.c1, ..CzParams::new(alpha) };
                decompose_with_maximal(&p.field, p.maximal.clone(), params)
            })
            .collect()
    }

    pub fn sides(&self) -> Vec<Side> {
        self.parts.iter().map(|p| p.side).collect()
    }

    pub fn upper(&self, t: f64) -> Result<KUpperPoint> {
        let alpha = self.alpha(t);
        let trivial = KUpperPoint {
            t,
            alpha,
            bad_norm: self.whole_l1,
            good_norm: 0.0,
            upper: self.whole_l1,
            trivial: true,
            n_balls: 0,
        };
        if !(alpha > 0.0) {
            return Ok(trivial);
        }
        let results = match self.decompose_at(alpha) {
            Ok(r) => r,
            Err(ConeError::DegenerateLevel { .. }) => return Ok(trivial),
            Err(e) => return Err(e),
        };
        let mut bad_norm = 0.0;
        let mut good_norm = 0.0_f64;
        let mut n_balls = 0;
        for res in &results {
            bad_norm += weighted_l1(&res.bad_sum())?;
            good_norm = good_norm.max(weighted_sup(&res.good)?);
            n_balls += res.balls.len();
        }
        let upper = bad_norm + t * good_norm;
        // The split is only an admissible competitor; the trivial one is too.
        if upper > self.whole_l1 {
            return Ok(trivial);
        }
        Ok(KUpperPoint { t, alpha, bad_norm, good_norm, upper, trivial: false, n_balls })
    }
}

/// Joins the good parts of the two half-cones into one double-cone field.
///
/// The vertex values are estimated by the innermost ring means; they must
/// agree to within `100 α r_min`, the oscillation a function with gradient
/// bounded by `α` can show across the innermost rings.
pub fn glue_good_parts(plus: &CzResult, minus: &CzResult) -> Result<Field> {
    let innermost = |res: &CzResult| {
        let grid = res.grid();
        let values = res.good.ring(0, grid.radial() - 1);
        values.iter().sum::<f64>() / values.len() as f64
    };
    let alpha = plus.params.alpha.max(minus.params.alpha);
    let r_min = plus.grid().radius(plus.grid().radial() - 1);
    let allowed = 100.0 * alpha * r_min;
    let value = (innermost(plus) - innermost(minus)).abs();
    if value > allowed {
        return Err(ConeError::VertexMismatch { value, allowed });
    }
    Field::join_sides(&plus.good, &minus.good)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::families::{make_test_field, TestFamily};
    use crate::geometry::ConeDomain;
    use crate::grid::{GridKind, GridSpec, PolarGrid};
    use crate::rearrangement::k_sobolev_estimate;
    use std::sync::Arc;

    fn double(family: TestFamily) -> Field {
        let spec = GridSpec::reaching(1e-4, 0.9, 8.0, 12);
        let g = Arc::new(PolarGrid::new(ConeDomain::standard(2), GridKind::Double, spec).unwrap());
        make_test_field(g, family)
    }

    #[test]
    fn upper_bound_dominates_the_estimate() {
        let f = double(TestFamily::RadialExp);
        let k = CzKFunctional::new(&f).unwrap();
        for t in [1e-3, 1e-1, 1.0, 10.0] {
            let up = k.upper(t).unwrap();
            let lo = k_sobolev_estimate(&f, t).unwrap();
            assert!(up.upper >= lo * (1.0 - 1e-9), "t={t}: {} < {lo}", up.upper);
            assert!(up.upper <= k.whole_l1 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn alpha_is_nonincreasing() {
        let f = double(TestFamily::Jump);
        let k = CzKFunctional::new(&f).unwrap();
        let mut prev = f64::INFINITY;
        for t in [1e-6, 1e-4, 1e-2, 1.0, 1e2] {
            let a = k.alpha(t);
            assert!(a <= prev);
            prev = a;
        }
    }

    #[test]
    fn gluing_checks_the_vertex() {
        let f = double(TestFamily::RadialExp);
        let k = CzKFunctional::new(&f).unwrap();
        let res = k.decompose_at(k.alpha(1.0)).unwrap();
        let joined = glue_good_parts(&res[0], &res[1]).unwrap();
        assert_eq!(joined.grid().kind(), GridKind::Double);

        let jump = double(TestFamily::Jump);
        let kj = CzKFunctional::new(&jump).unwrap();
        let alpha = 1e-3 * kj.alpha(1e-6);
        let (p, m) = (jump.side(Side::Plus).unwrap(), jump.side(Side::Minus).unwrap());
        // A tiny level with the whole field left as good part.
        let rp = decompose_with_maximal(&p, p.clone().map(|_| 0.0), CzParams::new(alpha)).unwrap();
        let rm = decompose_with_maximal(&m, m.clone().map(|_| 0.0), CzParams::new(alpha)).unwrap();
        assert!(matches!(glue_good_parts(&rp, &rm), Err(ConeError::VertexMismatch { .. })));
    }
}
