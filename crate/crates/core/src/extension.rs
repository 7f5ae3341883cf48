//! Restriction to the cone and extension to the whole space.
//!
//! The extension keeps the radial part of `f` as a function of `|x|` and
//! sends the anti-radial part of each half-cone through the half-space map:
//! pull back by `ψ₊`, reflect evenly across the boundary hyperplane,
//! multiply by the homogeneous cutoff, push forward. Since `ψ₊` preserves
//! `|x|`, every stage acts ring by ring on angles only.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::field::{gradient, Field};
use crate::calculus::norms::{
    divergence_table, geometric_radii, hat_gate, lp_of_values, sobolev_norm, DivergenceTable,
    NormKind, NormSpec, Weight,
};
use crate::calculus::split::radial_split;
use crate::error::{invalid, ConeError, Result};
use crate::geometry::{BilipschitzConeMap, HomogeneousCutoff, Side, Variant};
use crate::grid::{GridKind, PolarGrid};

/// Meridian coordinates `(x', x_n)` of a direction at angle `rel` from the axis.
fn frame_point(r: f64, rel: f64) -> [f64; 2] {
    [r * rel.sin(), r * rel.cos()]
}

/// Absolute angular coordinate on a cone patch of a direction at angle `rel`
/// from the axis of `side`.
fn absolute_angle(grid: &PolarGrid, side: Side, rel: f64) -> f64 {
    if grid.dim() == 2 {
        let axis = grid.domain().axis_angle()
            + match side {
                Side::Plus => 0.0,
                Side::Minus => std::f64::consts::PI,
            };
        axis + rel
    } else {
        match side {
            Side::Plus => rel,
            Side::Minus => std::f64::consts::PI - rel,
        }
    }
}

fn check_full_space(full: &PolarGrid, cone: &PolarGrid) -> Result<()> {
    if full.kind() != GridKind::FullSpace {
        return Err(ConeError::WrongVariant("expected a whole-space field".into()));
    }
    let (a, b) = (full.spec(), cone.spec());
    if a.q != b.q || a.r_max != b.r_max || a.radial != b.radial || full.domain() != cone.domain() {
        return Err(invalid("whole-space and cone grids must share radial nodes and domain"));
    }
    Ok(())
}

/// `R(F) = F|_Ω`, sampled at the nodes of `cone` by angular interpolation.
pub fn restrict(full: &Field, cone: Arc<PolarGrid>) -> Result<Field> {
    check_full_space(full.grid(), &cone)?;
    let fg = full.grid();
    let values = (0..cone.len())
        .map(|i| {
            let c = cone.cell(i);
            let row = full.ring(0, c.ring);
            fg.interpolate_angle(0, row, cone.angle(c.patch, c.angle))
        })
        .collect();
    Field::new(cone, values, format!("R({})", full.name()))
}

/// The pieces of `E(f)`.
#[derive(Debug, Clone)]
pub struct Extension {
    /// `f_r` extended as a function of `|x|`.
    pub radial: Field,
    /// `ξ_±(f_{a±})`, one per half-cone of the source grid.
    pub sides: Vec<(Side, Field)>,
    pub map: BilipschitzConeMap,
    pub total: Field,
}

/// Extension without the membership gate; see [`extend`].
pub fn extend_unchecked(f: &Field) -> Result<Extension> {
    let grid = f.grid_arc().clone();
    if grid.kind() == GridKind::FullSpace {
        return Err(ConeError::WrongVariant("extension needs a cone field".into()));
    }
    let full = Arc::new(grid.full_space()?);
    let map = BilipschitzConeMap::for_domain(grid.domain());
    let cutoff = HomogeneousCutoff::new(&map);
    let split = radial_split(f)?;
    let big_j = full.angular();

    let radial: Vec<f64> = (0..full.len())
        .map(|i| split.radial.values()[grid.index(0, full.cell(i).ring, 0)])
        .collect();
    let radial = Field::new(full.clone(), radial, format!("E({})_r", f.name()))?;

    let mut sides = Vec::new();
    for (patch, p) in grid.patches().iter().enumerate() {
        let side = p.side.expect("cone patches carry a side");
        let anti = &split.anti;
        let values: Vec<f64> = (0..full.len())
            .into_par_iter()
            .map(|i| {
                let c = full.cell(i);
                let r = full.radius(c.ring);
                let rel = grid.domain().relative_angle(full.angle(0, c.angle), side);
                let y = frame_point(r, rel);
                let x = match map.inverse(&y) {
                    Ok(x) => x,
                    Err(ConeError::OutsideSource) => return 0.0,
                    Err(e) => panic!("half-space map failed: {e}"),
                };
                let m = cutoff.value(&x);
                if m == 0.0 {
                    return 0.0;
                }
                // Even reflection across the boundary of the half-space.
                let x = [x[0], x[1].abs()];
                let z = map.forward(&x).expect("the closed half-space is in the source");
                let rel_z = z[0].atan2(z[1]);
                let row = anti.ring(patch, c.ring);
                m * grid.interpolate_angle(patch, row, absolute_angle(&grid, side, rel_z))
            })
            .collect();
        debug_assert_eq!(values.len(), full.radial() * big_j);
        let name = format!("xi{}({})", if side == Side::Plus { "+" } else { "-" }, f.name());
        sides.push((side, Field::new(full.clone(), values, name)?));
    }

    let mut total = radial.values().to_vec();
    for (_, s) in &sides {
        for (t, v) in total.iter_mut().zip(s.values()) {
            *t += v;
        }
    }
    let total = Field::new(full, total, format!("E({})", f.name()))?;
    Ok(Extension { radial, sides, map, total })
}

/// Whether `f` may be fed to the extension at exponent `p`.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "gate", rename_all = "lowercase")]
pub enum Admission {
    /// `p < n`: every grid field is admissible.
    Open,
    Accepted { growth_exponent: f64 },
    Refused { reason: String },
}

impl Admission {
    pub fn is_admitted(&self) -> bool {
        !matches!(self, Admission::Refused { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Admission::Open => "open",
            Admission::Accepted { .. } => "accepted",
            Admission::Refused { .. } => "refused",
        }
    }
}

/// Growth of `sup |∇f|` toward the vertex above which a field is treated as
/// having an unbounded gradient.
const GRADIENT_GROWTH_LIMIT: f64 = 10.0;

/// Membership test for the source space at exponent `p`.
///
/// At `p = n` this is the hat-space gate on `‖f_a/r‖_n`. For `p > n` the
/// field must have a single vertex value; for finite `p` the partial
/// integrals of `|∇f|^p` must settle under the same growth test, and for
/// `p = ∞` the gradient must stay bounded toward the vertex (innermost four
/// decades against the rest).
pub fn admission(f: &Field, p: f64) -> Result<Admission> {
    let n = f.grid().dim() as f64;
    if p < n {
        return Ok(Admission::Open);
    }
    if p == n {
        let table: DivergenceTable = hat_gate(f)?;
        return Ok(if table.is_divergent() {
            Admission::Refused {
                reason: format!(
                    "‖f_a/r‖_{n} partial integrals keep growing (exponent {:.3})",
                    table.growth_exponent
                ),
            }
        } else {
            Admission::Accepted { growth_exponent: table.growth_exponent }
        });
    }
    match f.vertex_limits() {
        Some((a, b)) if (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0) => {}
        Some((a, b)) => {
            return Ok(Admission::Refused {
                reason: format!("vertex values {a} and {b} differ"),
            })
        }
        None => {
            return Ok(Admission::Refused { reason: "no vertex value".into() });
        }
    }
    let grid = f.grid();
    let grad = gradient(f)?.magnitude();
    if p.is_finite() {
        let lo = grid.r_min();
        let r_mins = geometric_radii(lo * 1e4, lo, 9);
        let table = divergence_table(grad.values(), grid, p, Weight::None, &r_mins);
        return Ok(if table.is_divergent() {
            Admission::Refused {
                reason: format!(
                    "‖∇f‖_{p} partial integrals keep growing (exponent {:.3})",
                    table.growth_exponent
                ),
            }
        } else {
            Admission::Accepted { growth_exponent: table.growth_exponent }
        });
    }
    let split_radius = grid.r_min() * 1e4;
    let (mut inner, mut outer) = (0.0_f64, 0.0_f64);
    for (i, g) in grad.values().iter().enumerate() {
        if grid.radius(grid.cell(i).ring) < split_radius {
            inner = inner.max(*g);
        } else {
            outer = outer.max(*g);
        }
    }
    if inner > GRADIENT_GROWTH_LIMIT * outer.max(f64::MIN_POSITIVE) && inner > 1e-12 {
        return Ok(Admission::Refused {
            reason: format!("gradient grows toward the vertex ({inner:.3e} vs {outer:.3e})"),
        });
    }
    Ok(Admission::Accepted { growth_exponent: f64::NEG_INFINITY })
}

/// `E(f)`, refusing inputs outside the source space at exponent `p`.
pub fn extend(f: &Field, p: f64) -> Result<Extension> {
    match admission(f, p)? {
        Admission::Refused { reason } => Err(ConeError::Divergent(format!(
            "{} refused at p = {p}: {reason}",
            f.name()
        ))),
        _ => extend_unchecked(f),
    }
}

/// Norm of the source space at exponent `p`: `W¹_p` on the cone, or the
/// hat norm at `p = n`.
pub fn source_norm(f: &Field, p: f64) -> Result<f64> {
    let n = f.grid().dim() as f64;
    let kind = if p == n { NormKind::HatH1n } else { NormKind::W1p };
    sobolev_norm(f, NormSpec::sobolev(p, kind))
}

pub fn w1p(f: &Field, p: f64) -> Result<f64> {
    sobolev_norm(f, NormSpec::sobolev(p, NormKind::W1p))
}

/// `‖R(E f) - f‖_{W¹_p(Ω)} / ‖f‖_{W¹_p(Ω)}`.
pub fn roundtrip_error(f: &Field, ext: &Field, p: f64) -> Result<f64> {
    let back = restrict(ext, f.grid_arc().clone())?;
    let diff = back.sub(f)?;
    let denom = w1p(f, p)?;
    Ok(if denom > 0.0 { w1p(&diff, p)? / denom } else { 0.0 })
}

/// Largest `|rel| / (ω + ε)` over the cells where `ξ_±` is nonzero; at most
/// 1 when the supports stay inside the enlarged cones.
pub fn support_reach(ext: &Extension) -> f64 {
    let grid = ext.total.grid();
    let domain = grid.domain();
    let limit = ext.map.target_half_angle();
    let mut reach = 0.0_f64;
    for (side, f) in &ext.sides {
        for (i, v) in f.values().iter().enumerate() {
            if *v != 0.0 {
                let c = grid.cell(i);
                let rel = domain.relative_angle(grid.angle(0, c.angle), *side).abs();
                reach = reach.max(rel / limit);
            }
        }
    }
    reach
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtensionRow {
    pub field: String,
    pub p: f64,
    pub source_norm: f64,
    pub target_norm: f64,
    pub ratio: f64,
    pub roundtrip_err: f64,
    pub gate: String,
}

/// Ratios `‖E f‖_{W¹_p(ℝⁿ)} / ‖f‖` over fields and exponents. Zero fields
/// are skipped; refused inputs are listed with NaN norms.
pub fn operator_norm_report(fields: &[Field], ps: &[f64]) -> Result<Vec<ExtensionRow>> {
    let per_field: Vec<Result<Vec<ExtensionRow>>> = fields
        .par_iter()
        .map(|f| {
            if f.max_abs() == 0.0 {
                return Ok(Vec::new());
            }
            let gates = ps.iter().map(|&p| admission(f, p)).collect::<Result<Vec<_>>>()?;
            let ext = if gates.iter().any(Admission::is_admitted) {
                Some(extend_unchecked(f)?)
            } else {
                None
            };
            let mut rows = Vec::with_capacity(ps.len());
            for (&p, gate) in ps.iter().zip(&gates) {
                let mut row = ExtensionRow {
                    field: f.name().to_string(),
                    p,
                    source_norm: f64::NAN,
                    target_norm: f64::NAN,
                    ratio: f64::NAN,
                    roundtrip_err: f64::NAN,
                    gate: gate.label().into(),
                };
                if let (true, Some(ext)) = (gate.is_admitted(), &ext) {
                    row.source_norm = source_norm(f, p)?;
                    row.target_norm = w1p(&ext.total, p)?;
                    row.ratio = row.target_norm / row.source_norm;
                    row.roundtrip_err = roundtrip_error(f, &ext.total, p)?;
                }
                rows.push(row);
            }
            Ok(rows)
        })
        .collect();
    let mut out = Vec::new();
    for rows in per_field {
        out.extend(rows?);
    }
    Ok(out)
}

/// Measured constants of the cutoff inequalities for one half-cone:
/// `‖m g/r‖_p / ‖g/r‖_p` and `‖∇(m g)‖_p / (‖∇g‖_p + ‖g/r‖_p)`, where `g`
/// is the even reflection of `f_{a+} ∘ ψ₊`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CutoffRatios {
    pub weighted: f64,
    pub gradient: f64,
}

pub fn cutoff_ratios(f: &Field, p: f64) -> Result<CutoffRatios> {
    let grid = f.grid_arc().clone();
    let patch = grid.patch_of(Side::Plus).ok_or_else(|| {
        ConeError::WrongVariant("cutoff ratios need the Ω⁺ half-cone".into())
    })?;
    let full = Arc::new(grid.full_space()?);
    let map = BilipschitzConeMap::for_domain(grid.domain());
    let cutoff = HomogeneousCutoff::new(&map);
    let anti = radial_split(f)?.anti;
    let mut g = vec![0.0; full.len()];
    let mut mg = vec![0.0; full.len()];
    for i in 0..full.len() {
        let c = full.cell(i);
        let r = full.radius(c.ring);
        let rel = grid.domain().relative_angle(full.angle(0, c.angle), Side::Plus);
        let x = frame_point(r, rel);
        let z = map.forward(&[x[0], x[1].abs()])?;
        let row = anti.ring(patch, c.ring);
        g[i] = grid.interpolate_angle(patch, row, absolute_angle(&grid, Side::Plus, z[0].atan2(z[1])));
        mg[i] = cutoff.value(&x) * g[i];
    }
    let g = Field::new(full.clone(), g, "g")?;
    let mg = Field::new(full.clone(), mg, "mg")?;
    let g_over_r = lp_of_values(g.values(), &full, p, Weight::InvR);
    let mg_over_r = lp_of_values(mg.values(), &full, p, Weight::InvR);
    let grad_g = lp_of_values(gradient(&g)?.magnitude().values(), &full, p, Weight::None);
    let grad_mg = lp_of_values(gradient(&mg)?.magnitude().values(), &full, p, Weight::None);
    let safe = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
    Ok(CutoffRatios {
        weighted: safe(mg_over_r, g_over_r),
        gradient: safe(grad_mg, grad_g + g_over_r),
    })
}

/// Measured Lipschitz constants of `ψ₊` and `ψ₊⁻¹` on pairs of points of
/// the closed half-space cone and of `Ω⁺`: `(lip, lip_inverse)`.
pub fn bilipschitz_constants(map: &BilipschitzConeMap, samples: usize) -> Result<(f64, f64)> {
    let half = std::f64::consts::FRAC_PI_2;
    let w = map.half_angle();
    let mut lip = 0.0_f64;
    let mut lip_inv = 0.0_f64;
    let pts = |limit: f64| -> Vec<[f64; 2]> {
        let mut out = Vec::new();
        for a in 0..samples {
            let rel = -limit + 2.0 * limit * (a as f64 + 0.5) / samples as f64;
            for r in [0.25, 0.5, 1.0, 2.0] {
                out.push(frame_point(r, rel));
            }
        }
        out
    };
    let src = pts(half);
    let dst = pts(w);
    let dist = |a: &[f64], b: &[f64]| (a[0] - b[0]).hypot(a[1] - b[1]);
    for (i, a) in src.iter().enumerate() {
        let fa = map.forward(a)?;
        for b in &src[i + 1..] {
            let fb = map.forward(b)?;
            lip = lip.max(dist(&fa, &fb) / dist(a, b));
        }
    }
    for (i, a) in dst.iter().enumerate() {
        let fa = map.inverse(a)?;
        for b in &dst[i + 1..] {
            let fb = map.inverse(b)?;
            lip_inv = lip_inv.max(dist(&fa, &fb) / dist(a, b));
        }
    }
    Ok((lip, lip_inv))
}

/// The explicit planar extension from the quadrant cone `{xy > 0}`:
/// `E f(x, y) = (x² f(x, -y) + y² f(-x, y)) / (x² + y²)` on `{xy < 0}`.
pub fn extend_pierre_2d(f: &Field) -> Result<Field> {
    let grid = f.grid_arc().clone();
    if grid.domain().variant() != Variant::Quadrant || grid.kind() != GridKind::Double {
        return Err(ConeError::WrongVariant(
            "the explicit formula needs a field on both quadrants".into(),
        ));
    }
    let full = Arc::new(grid.full_space()?);
    let domain = *grid.domain();
    let at = |ring: usize, angle: f64| -> f64 {
        let side = if domain.relative_angle(angle, Side::Plus).abs() <= domain.half_angle() {
            Side::Plus
        } else {
            Side::Minus
        };
        let patch = grid.patch_of(side).expect("double grid");
        let row = f.ring(patch, ring);
        let centre = absolute_angle(&grid, side, domain.relative_angle(angle, side));
        grid.interpolate_angle(patch, row, centre)
    };
    let values = (0..full.len())
        .map(|i| {
            let c = full.cell(i);
            let phi = full.angle(0, c.angle);
            // x = r sin φ, y = r cos φ.
            let (sx, cy) = (phi.sin(), phi.cos());
            if sx * cy > 0.0 {
                at(c.ring, phi)
            } else {
                // (x, -y) has angle π - φ and (-x, y) has angle -φ.
                let a = at(c.ring, std::f64::consts::PI - phi);
                let b = at(c.ring, -phi);
                sx * sx * a + cy * cy * b
            }
        })
        .collect();
    Field::new(full, values, format!("P({})", f.name()))
}

/// Pointwise version of the explicit formula for a function given on the
/// quadrants, used as an independent check of the grid version.
pub fn pierre_formula(f: impl Fn(f64, f64) -> f64, x: f64, y: f64) -> f64 {
    if x * y > 0.0 {
        f(x, y)
    } else {
        (x * x * f(x, -y) + y * y * f(-x, y)) / (x * x + y * y)
    }
}

/// Jumps of a planar whole-space field across the coordinate axes, compared
/// with its largest step between angular neighbours elsewhere.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeamReport {
    /// Largest jump across `{y = 0}`.
    pub horizontal: f64,
    /// Largest jump across `{x = 0}`.
    pub vertical: f64,
    /// Largest neighbour step away from the axes.
    pub interior: f64,
}

impl SeamReport {
    pub fn continuous(&self, scale: f64) -> bool {
        let slack = 1e-12 * scale;
        self.horizontal <= self.interior + slack && self.vertical <= self.interior + slack
    }
}

pub fn seam_jumps(full: &Field) -> Result<SeamReport> {
    let grid = full.grid();
    if grid.kind() != GridKind::FullSpace || grid.dim() != 2 {
        return Err(ConeError::WrongVariant("seams are measured on planar whole-space fields".into()));
    }
    let big_j = grid.angular();
    let h = grid.angular_step(0);
    let mut rep = SeamReport { horizontal: 0.0, vertical: 0.0, interior: 0.0 };
    let half = std::f64::consts::FRAC_PI_2;
    for k in 0..grid.radial() {
        let row = full.ring(0, k);
        for j in 0..big_j {
            let next = (j + 1) % big_j;
            let edge = grid.angle(0, j) + 0.5 * h;
            let step = (row[next] - row[j]).abs();
            // Axis crossings: φ ∈ {0, π} is x = 0, φ = ±π/2 is y = 0.
            let near = |target: f64| {
                let d = (edge - target).rem_euclid(2.0 * std::f64::consts::PI);
                d.min(2.0 * std::f64::consts::PI - d) < 0.25 * h
            };
            if near(half) || near(-half) {
                rep.horizontal = rep.horizontal.max(step);
            } else if near(0.0) || near(std::f64::consts::PI) {
                rep.vertical = rep.vertical.max(step);
            } else {
                rep.interior = rep.interior.max(step);
            }
        }
    }
    Ok(rep)
}

/// `(‖(R F)_a / r‖₂, ‖∇F‖_{L²(ℝ²)})` for a planar whole-space field.
pub fn restriction_hat_terms(full: &Field, cone: Arc<PolarGrid>) -> Result<(f64, f64)> {
    let rf = restrict(full, cone)?;
    let anti = radial_split(&rf)?.anti;
    let lhs = lp_of_values(anti.values(), rf.grid(), 2.0, Weight::InvR);
    let rhs = lp_of_values(gradient(full)?.magnitude().values(), full.grid(), 2.0, Weight::None);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::families::{make_test_field, TestFamily};
    use crate::geometry::ConeDomain;
    use crate::grid::GridSpec;

    fn cone(domain: ConeDomain, angular: usize) -> Arc<PolarGrid> {
        let spec = GridSpec::reaching(1e-6, 0.95, 8.0, angular);
        Arc::new(PolarGrid::new(domain, GridKind::Double, spec).unwrap())
    }

    #[test]
    fn roundtrip_is_identity_on_aligned_grids() {
        for dim in [2, 3] {
            let g = cone(ConeDomain::standard(dim), 24);
            for fam in [TestFamily::AngularBump { a: 1.0 }, TestFamily::Jump, TestFamily::RadialExp] {
                let f = make_test_field(g.clone(), fam);
                let ext = extend_unchecked(&f).unwrap();
                let back = restrict(&ext.total, g.clone()).unwrap();
                let err = back.sub(&f).unwrap().max_abs();
                assert!(err < 1e-12, "{dim} {fam}: {err}");
                assert!(support_reach(&ext) < 1.0);
            }
        }
    }

    #[test]
    fn radial_fields_have_no_angular_extension() {
        let g = cone(ConeDomain::standard(2), 16);
        let f = make_test_field(g, TestFamily::RadialExp);
        let ext = extend_unchecked(&f).unwrap();
        for (_, s) in &ext.sides {
            assert!(s.max_abs() < 1e-14);
        }
    }

    #[test]
    fn extension_is_linear() {
        let g = cone(ConeDomain::standard(2), 16);
        let a = make_test_field(g.clone(), TestFamily::Jump);
        let b = make_test_field(g, TestFamily::AngularBump { a: 1.0 });
        let sum = extend_unchecked(&a.add(&b).unwrap()).unwrap().total;
        let parts = extend_unchecked(&a).unwrap().total.add(&extend_unchecked(&b).unwrap().total).unwrap();
        let scale = sum.max_abs();
        for (x, y) in sum.values().iter().zip(parts.values()) {
            assert!((x - y).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn reflection_mirrors_across_the_cone_boundary() {
        // ξ₊ at angle ω + d equals m · f_a at angle ω - d.
        let g = cone(ConeDomain::standard(2), 16);
        let f = make_test_field(g.clone(), TestFamily::AngularBump { a: 1.0 });
        let ext = extend_unchecked(&f).unwrap();
        let anti = radial_split(&f).unwrap().anti;
        let full = ext.total.grid();
        let map = ext.map;
        let cutoff = HomogeneousCutoff::new(&map);
        let w = map.half_angle();
        let k = 40;
        for j in 0..full.angular() {
            let phi = full.angle(0, j);
            if phi > w && phi < w + map.enlargement() {
                let mirror = 2.0 * w - phi;
                let src = g.interpolate_angle(0, anti.ring(0, k), mirror);
                let theta = phi * std::f64::consts::PI / (2.0 * w);
                let expected = cutoff.profile(theta) * src;
                let got = ext.sides[0].1.values()[full.index(0, k, j)];
                assert!((got - expected).abs() < 1e-12, "{j}: {got} {expected}");
            }
        }
    }

    #[test]
    fn gate_refuses_slowly_decaying_counterexamples() {
        let spec = GridSpec::reaching(40.0 * 1e-12, 0.98, 40.0, 24);
        let g = Arc::new(PolarGrid::new(ConeDomain::standard(2), GridKind::Double, spec).unwrap());
        let good = make_test_field(g.clone(), TestFamily::LogCounter { beta: 1.0 });
        let bad = make_test_field(g.clone(), TestFamily::LogCounter { beta: 0.25 });
        assert!(extend(&good, 2.0).is_ok());
        assert!(matches!(extend(&bad, 2.0), Err(ConeError::Divergent(_))));
        assert!(extend(&bad, 1.5).is_ok());
        let jump = make_test_field(g, TestFamily::Jump);
        assert!(!admission(&jump, 3.0).unwrap().is_admitted());
        assert!(!admission(&good, 3.0).unwrap().is_admitted());
    }

    #[test]
    fn pierre_matches_the_pointwise_formula() {
        let g = cone(ConeDomain::quadrant(), 24);
        let f = Field::from_fn(g.clone(), "x+y", |s| s.x[0] + s.x[1]);
        let e = extend_pierre_2d(&f).unwrap();
        let full = e.grid();
        for i in (0..full.len()).step_by(97) {
            let x = full.point(i);
            let expected = pierre_formula(|a, b| a + b, x[0], x[1]);
            assert!((e.values()[i] - expected).abs() < 1e-9 * (1.0 + expected.abs()), "{i}");
        }
        assert_eq!(pierre_formula(|a, b| a + b, 1.0, -1.0), 0.0);
        let back = restrict(&e, g).unwrap();
        assert_eq!(back.values(), f.values());
        let seams = seam_jumps(&e).unwrap();
        assert!(seams.continuous(e.max_abs()), "{seams:?}");
    }

    #[test]
    fn pierre_keeps_constants_and_refuses_other_cones() {
        let g = cone(ConeDomain::quadrant(), 12);
        let f = Field::from_fn(g, "c", |_| 2.5);
        let e = extend_pierre_2d(&f).unwrap();
        assert!(e.values().iter().all(|v| (v - 2.5).abs() < 1e-14));
        let other = Field::from_fn(cone(ConeDomain::standard(2), 12), "c", |_| 1.0);
        assert!(matches!(extend_pierre_2d(&other), Err(ConeError::WrongVariant(_))));
    }

    #[test]
    fn restriction_of_outside_support_vanishes() {
        let g = cone(ConeDomain::standard(2), 16);
        let full = Arc::new(g.full_space().unwrap());
        let f = Field::from_fn(full, "side", |s| if s.side.is_none() { 1.0 } else { 0.0 });
        let r = restrict(&f, g).unwrap();
        assert!(r.max_abs() < 1e-14, "{}", r.max_abs());
    }

    #[test]
    fn the_map_is_bilipschitz() {
        let map = BilipschitzConeMap::for_domain(&ConeDomain::standard(2));
        let (a, b) = bilipschitz_constants(&map, 24).unwrap();
        assert!(a >= map.scale() - 1e-9 && a <= 1.0 + 1e-9, "{a}");
        assert!(b >= 1.0 - 1e-9 && b <= 1.0 / map.scale() + 1e-9, "{b}");
    }
}
