//! Measurements behind the twelve verification checks, and the verdicts the
//! command line applies to them.
//!
//! Each `measure_*` function returns raw numbers only. [`run_all`] turns them
//! into pass/fail rows with the default tolerances (overridable from the run
//! configuration); the acceptance tests apply their own.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::families::{full_space_suite, make_test_field, TestFamily};
use crate::calculus::field::{gradient, Field};
use crate::calculus::norms::{
    divergence_table, geometric_radii, hardy_quotient, hat_gate, DivergenceTable, Weight,
};
use crate::config::RunConfig;
use crate::cz::{decompose_with_maximal, maximal_function, verify, CzKFunctional, CzParams, CzReport};
use crate::density::{
    approximation_error, convergence_table, corrector_terms, error_slope, log_corrector,
    vertex_cutoff, ApproxMode, ApproxParams, ConvergenceRow,
};
use crate::error::{ConeError, Result};
use crate::extension::{
    extend_pierre_2d, extend_unchecked, operator_norm_report, restrict, restriction_hat_terms,
    seam_jumps, source_norm, support_reach, w1p, ExtensionRow,
};
use crate::geometry::{ConeDomain, Variant};
use crate::grid::{GridKind, GridSpec, PolarGrid};
use crate::rearrangement::{k_l1_linf, truncation_cost, RearrangementTable, SobolevTables};

fn grid(domain: ConeDomain, kind: GridKind, spec: GridSpec) -> Result<Arc<PolarGrid>> {
    Ok(Arc::new(PolarGrid::new(domain, kind, spec)?))
}

/// The next finer grid: twice the rings over the same radial range and
/// twice the angular cells.
pub fn refine(spec: GridSpec) -> GridSpec {
    GridSpec { q: spec.q.sqrt(), radial: 2 * spec.radial, angular: 2 * spec.angular, ..spec }
}

/// Fields vanishing at the vertex, used where `f/r` must be integrable.
pub fn vanishing_suite() -> Vec<TestFamily> {
    vec![
        TestFamily::RadialPower { a: 1.0 },
        TestFamily::RadialPower { a: 2.0 },
        TestFamily::AngularBump { a: 1.0 },
        TestFamily::AngularBump { a: 2.0 },
        TestFamily::Dipole,
    ]
}

/// Grid for the decomposition checks: the configured resolution over
/// `[1e-4, 1e3]`. The outer radius is large so that the floor
/// `‖h‖₁/|Ω ∩ B(0, r_max)|` of the truncated maximal function sits several
/// decades below its supremum.
pub fn cz_spec(base: GridSpec) -> GridSpec {
    GridSpec::reaching(1e-4, base.q, 1e3, base.angular)
}

// ---------------------------------------------------------------- Hardy

#[derive(Debug, Clone, Serialize)]
pub struct HardyRow {
    pub n: usize,
    pub p: f64,
    pub field: String,
    pub quotient: f64,
    /// `p/(n - p)`.
    pub constant: f64,
}

pub fn hardy_constant(n: usize, p: f64) -> f64 {
    p / (n as f64 - p)
}

/// Hardy quotients of the suite for each `(n, p)`; fields with vanishing
/// radial derivative are skipped.
pub fn measure_hardy(
    spec: GridSpec,
    omega: f64,
    suite: &[TestFamily],
    cases: &[(usize, f64)],
) -> Result<Vec<HardyRow>> {
    let mut rows = Vec::new();
    for &(n, p) in cases {
        let domain = ConeDomain::new(n, omega, Variant::Axial)?;
        let g = grid(domain, GridKind::Double, spec)?;
        let found: Vec<Result<Option<HardyRow>>> = suite
            .par_iter()
            .map(|fam| {
                let f = make_test_field(g.clone(), *fam);
                match hardy_quotient(&f, p) {
                    Ok(quotient) => Ok(Some(HardyRow {
                        n,
                        p,
                        field: fam.to_string(),
                        quotient,
                        constant: hardy_constant(n, p),
                    })),
                    Err(ConeError::ZeroGradient) => Ok(None),
                    Err(e) => Err(e),
                }
            })
            .collect();
        for r in found {
            rows.extend(r?);
        }
    }
    Ok(rows)
}

// ------------------------------------------------------- counterexample

/// Truncation radii one per decade from `1e-4` down to `1e-12`.
pub fn counterexample_radii() -> Vec<f64> {
    geometric_radii(1e-4, 1e-12, 9)
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleTables {
    pub beta: f64,
    /// Partial `‖f/r‖₂²`.
    pub weighted: DivergenceTable,
    /// Partial `‖∇f‖₂²`.
    pub gradient: DivergenceTable,
}

pub fn measure_counterexample(spec: GridSpec, omega: f64, beta: f64) -> Result<CounterexampleTables> {
    let domain = ConeDomain::new(2, omega, Variant::Axial)?;
    let g = grid(domain, GridKind::Double, spec)?;
    let radii = counterexample_radii();
    if g.r_min() > radii[radii.len() - 1] {
        return Err(ConeError::Config(format!(
            "grid reaches only r = {:e}; the divergence tables need 1e-12",
            g.r_min()
        )));
    }
    let f = make_test_field(g.clone(), TestFamily::LogCounter { beta });
    let grad = gradient(&f)?.magnitude();
    Ok(CounterexampleTables {
        beta,
        weighted: divergence_table(f.values(), &g, 2.0, Weight::InvR, &radii),
        gradient: divergence_table(grad.values(), &g, 2.0, Weight::None, &radii),
    })
}

pub fn measure_hat_gate(spec: GridSpec, omega: f64, beta: f64) -> Result<DivergenceTable> {
    let domain = ConeDomain::new(2, omega, Variant::Axial)?;
    let g = grid(domain, GridKind::Double, spec)?;
    hat_gate(&make_test_field(g, TestFamily::LogCounter { beta }))
}

// --------------------------------------------------------------- CZ

#[derive(Debug, Clone, Serialize)]
pub struct CzRow {
    pub field: String,
    /// `α / sup M`.
    pub fraction: f64,
    #[serde(flatten)]
    pub report: CzReport,
}

/// Decompositions of each field on `Ω⁺` at `α = fraction · sup M`.
pub fn measure_cz(spec: GridSpec, suite: &[TestFamily], fractions: &[f64]) -> Result<Vec<CzRow>> {
    let g = grid(ConeDomain::standard(2), GridKind::Plus, spec)?;
    let per_field: Vec<Result<Vec<CzRow>>> = suite
        .par_iter()
        .map(|fam| {
            let f = make_test_field(g.clone(), *fam);
            let m = maximal_function(&f)?;
            let top = m.max_abs();
            let mut rows = Vec::new();
            for &fraction in fractions {
                let res = decompose_with_maximal(&f, m.clone(), CzParams::new(fraction * top))?;
                rows.push(CzRow { field: fam.to_string(), fraction, report: verify(&res)? });
            }
            Ok(rows)
        })
        .collect();
    let mut out = Vec::new();
    for r in per_field {
        out.extend(r?);
    }
    Ok(out)
}

// ---------------------------------------------------------- K-functional

#[derive(Debug, Clone, Serialize)]
pub struct KRow {
    pub field: String,
    pub t: f64,
    pub alpha: f64,
    pub upper: f64,
    /// `K(|f|, t) + K(|f|/r, t) + K(|∇f|, t)` in `(L¹, L^∞)`.
    pub lower: f64,
    pub value_part: f64,
    pub over_r_part: f64,
    pub gradient_part: f64,
    pub ratio: f64,
    pub trivial: bool,
}

pub fn measure_kfunc(spec: GridSpec, suite: &[TestFamily], ts: &[f64]) -> Result<Vec<KRow>> {
    let g = grid(ConeDomain::standard(2), GridKind::Double, spec)?;
    let per_field: Vec<Result<Vec<KRow>>> = suite
        .par_iter()
        .map(|fam| {
            let f = make_test_field(g.clone(), *fam);
            let engine = CzKFunctional::new(&f)?;
            let tables = SobolevTables::new(&f)?;
            ts.iter()
                .map(|&t| {
                    let up = engine.upper(t)?;
                    let (a, b, c) = (
                        k_l1_linf(&tables.value, t),
                        k_l1_linf(&tables.over_r, t),
                        k_l1_linf(&tables.gradient, t),
                    );
                    let lower = a + b + c;
                    Ok(KRow {
                        field: fam.to_string(),
                        t,
                        alpha: up.alpha,
                        upper: up.upper,
                        lower,
                        value_part: a,
                        over_r_part: b,
                        gradient_part: c,
                        ratio: up.upper / lower,
                        trivial: up.trivial,
                    })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for r in per_field {
        out.extend(r?);
    }
    Ok(out)
}

// ------------------------------------------------- discrete K identity

#[derive(Debug, Clone, Serialize)]
pub struct KIdentity {
    /// Largest `|∫₀^t f* - min over truncation levels|` over the instances.
    pub max_error: f64,
    /// Smallest `cost(random split) - ∫₀^t f*`; nonnegative when truncation
    /// is optimal.
    pub min_search_gap: f64,
    pub instances: usize,
    pub search_trials: usize,
}

/// Random instances of at most `max_cells` cells with the exact formula
/// against the best truncation, and random splittings of 4-cell instances
/// against the exact value.
pub fn measure_k_identity(seed: u64, instances: usize, max_cells: usize, trials: usize) -> Result<KIdentity> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_error = 0.0_f64;
    for _ in 0..instances {
        let cells = rng.random_range(1..=max_cells);
        let values: Vec<f64> = (0..cells).map(|_| rng.random_range(-5.0..5.0)).collect();
        let measures: Vec<f64> = (0..cells).map(|_| rng.random_range(0.05..2.0)).collect();
        let t = rng.random_range(0.01..(1.5 * measures.iter().sum::<f64>()));
        let table = RearrangementTable::from_weighted(&values, &measures)?;
        let exact = k_l1_linf(&table, t);
        let mut best = f64::INFINITY;
        for level in std::iter::once(0.0).chain(values.iter().map(|v| v.abs())) {
            best = best.min(truncation_cost(&values, &measures, t, level));
        }
        max_error = max_error.max((exact - best).abs() / best.max(1.0));
    }
    let mut min_search_gap = f64::INFINITY;
    for _ in 0..instances {
        let values: Vec<f64> = (0..4).map(|_| rng.random_range(-5.0..5.0)).collect();
        let measures: Vec<f64> = (0..4).map(|_| rng.random_range(0.05..2.0)).collect();
        let t = rng.random_range(0.01..8.0);
        let exact = k_l1_linf(&RearrangementTable::from_weighted(&values, &measures)?, t);
        for _ in 0..trials {
            // f = f0 + f1 with arbitrary f1.
            let f1: Vec<f64> = values.iter().map(|v| v * rng.random_range(-1.5..1.5)).collect();
            let l1: f64 = values.iter().zip(&f1).zip(&measures).map(|((v, g), m)| (v - g).abs() * m).sum();
            let sup = f1.iter().fold(0.0_f64, |a, g| a.max(g.abs()));
            min_search_gap = min_search_gap.min(l1 + t * sup - exact);
        }
    }
    Ok(KIdentity { max_error, min_search_gap, instances, search_trials: trials })
}

// ------------------------------------------------------- rearrangement

#[derive(Debug, Clone, Serialize)]
pub struct RearrangementRow {
    pub n: usize,
    pub field: String,
    /// `max_s |λ{|f| > s} - λ{f* > s}| / λ(Ω)`.
    pub equimeasure_error: f64,
    /// `max_t λ{|f| > f*(t)} / t`.
    pub level_ratio: f64,
    pub p: f64,
    /// `‖f**‖_p / ‖f‖_p`.
    pub maximal_ratio: f64,
}

pub fn measure_rearrangement(spec: GridSpec, omega: f64, suite: &[TestFamily], dims: &[usize]) -> Result<Vec<RearrangementRow>> {
    let mut rows = Vec::new();
    for &n in dims {
        let domain = ConeDomain::new(n, omega, Variant::Axial)?;
        let g = grid(domain, GridKind::Double, spec)?;
        let ps: Vec<f64> = if n == 2 { vec![2.0] } else { vec![2.0, n as f64] };
        for fam in suite {
            let f = make_test_field(g.clone(), *fam);
            let table = RearrangementTable::from_field(&f);
            let total = table.total_measure();
            let abs: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
            let direct = |s: f64| -> f64 {
                abs.iter().zip(g.measures()).filter(|(v, _)| **v > s).map(|(_, m)| m).sum()
            };
            let mut eq = 0.0_f64;
            let mut lr = 0.0_f64;
            let ends = table.breakpoints();
            let widths: Vec<f64> = (0..ends.len()).map(|i| ends[i] - if i == 0 { 0.0 } else { ends[i - 1] }).collect();
            for s in table.steps().iter().step_by((table.len() / 200).max(1)) {
                // λ{f* > s} summed from the step widths.
                let star: f64 = table.steps().iter().zip(&widths).filter(|(v, _)| *v > s).map(|(_, w)| w).sum();
                eq = eq.max((direct(*s) - star).abs() / total);
            }
            for t in geometric_radii(total, total * 1e-9, 60) {
                lr = lr.max(direct(table.f_star(t)) / t);
            }
            for &p in &ps {
                let norm = table.lp_norm(p);
                let ratio = if norm > 0.0 { table.double_star_lp_norm(p)? / norm } else { 0.0 };
                rows.push(RearrangementRow {
                    n,
                    field: fam.to_string(),
                    equimeasure_error: eq,
                    level_ratio: lr,
                    p,
                    maximal_ratio: ratio,
                });
            }
        }
    }
    Ok(rows)
}

// --------------------------------------------------------- extension

#[derive(Debug, Clone, Serialize)]
pub struct ExtensionMeasurement {
    pub base: Vec<ExtensionRow>,
    pub refined: Vec<ExtensionRow>,
    /// Largest `|rel|/(ω+ε)` over the nonzero cells of `ξ±`, over the suite.
    pub support_reach: f64,
}

pub fn measure_extension(spec: GridSpec, domain: ConeDomain, suite: &[TestFamily], ps: &[f64]) -> Result<ExtensionMeasurement> {
    let report = |spec: GridSpec| -> Result<Vec<ExtensionRow>> {
        let g = grid(domain, GridKind::Double, spec)?;
        let fields: Vec<Field> = suite.iter().map(|fam| make_test_field(g.clone(), *fam)).collect();
        operator_norm_report(&fields, ps)
    };
    let g = grid(domain, GridKind::Double, spec)?;
    let mut reach = 0.0_f64;
    for fam in suite {
        let ext = extend_unchecked(&make_test_field(g.clone(), *fam))?;
        reach = reach.max(support_reach(&ext));
    }
    Ok(ExtensionMeasurement { base: report(spec)?, refined: report(refine(spec))?, support_reach: reach })
}

/// Largest ratio per exponent over the admitted rows.
pub fn max_ratio_by_p(rows: &[ExtensionRow]) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for r in rows.iter().filter(|r| r.ratio.is_finite()) {
        let e = out.entry(format!("{}", r.p)).or_insert(0.0_f64);
        *e = e.max(r.ratio);
    }
    out
}

// ------------------------------------------------------------ Pierre

#[derive(Debug, Clone, Serialize)]
pub struct PierreRow {
    pub field: String,
    pub p: f64,
    pub gate: String,
    pub source_norm: f64,
    pub target_norm: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PierreMeasurement {
    pub rows: Vec<PierreRow>,
    /// Fields whose seam jumps exceed their interior steps.
    pub discontinuous: Vec<String>,
    /// `max |R(E f) - f|` over the suite.
    pub roundtrip_max: f64,
}

pub fn measure_pierre(spec: GridSpec, suite: &[TestFamily], ps: &[f64]) -> Result<PierreMeasurement> {
    let g = grid(ConeDomain::quadrant(), GridKind::Double, spec)?;
    type FieldOutcome = (Vec<PierreRow>, bool, f64, String);
    let per_field: Vec<Result<FieldOutcome>> = suite
        .par_iter()
        .map(|fam| {
            let f = make_test_field(g.clone(), *fam);
            let e = extend_pierre_2d(&f)?;
            let back = restrict(&e, g.clone())?;
            let rt = back.sub(&f)?.max_abs();
            let seams = seam_jumps(&e)?;
            let mut rows = Vec::new();
            for &p in ps {
                let gate = crate::extension::admission(&f, p)?;
                let (s, t) = if gate.is_admitted() {
                    (source_norm(&f, p)?, w1p(&e, p)?)
                } else {
                    (f64::NAN, f64::NAN)
                };
                rows.push(PierreRow {
                    field: fam.to_string(),
                    p,
                    gate: gate.label().into(),
                    source_norm: s,
                    target_norm: t,
                    ratio: t / s,
                });
            }
            Ok((rows, seams.continuous(e.max_abs()), rt, fam.to_string()))
        })
        .collect();
    let mut out = PierreMeasurement { rows: Vec::new(), discontinuous: Vec::new(), roundtrip_max: 0.0 };
    for r in per_field {
        let (rows, cont, rt, name) = r?;
        out.rows.extend(rows);
        if !cont {
            out.discontinuous.push(name);
        }
        out.roundtrip_max = out.roundtrip_max.max(rt);
    }
    Ok(out)
}

// ----------------------------------------------------------- density

#[derive(Debug, Clone, Serialize)]
pub struct DensityMeasurement {
    /// `p = 1`, plain cutoff of a bounded Lipschitz field with `f(0) ≠ 0`.
    pub subcritical: Vec<ConvergenceRow>,
    pub subcritical_slope: f64,
    /// `p = n`, plain cutoff of the same field.
    pub critical_cutoff: Vec<ConvergenceRow>,
    /// `(k, ‖η_δ ∇χ_ε‖_n, ‖∇η_δ‖_n)` at the smallest `ε`.
    pub corrector: Vec<(f64, f64, f64)>,
    /// `‖∇η_δ‖_n` along the `ε` sweep at the largest `k`.
    pub eta_gradient: Vec<(f64, f64)>,
    /// `p = n`, corrected approximants at the smallest `k`, for a field
    /// vanishing at the vertex and for one of the hat space that does not.
    pub critical_corrected: Vec<(String, Vec<ConvergenceRow>)>,
}

pub fn measure_density(spec: GridSpec, omega: f64, eps: &[f64], ks: &[f64]) -> Result<DensityMeasurement> {
    let domain = ConeDomain::new(2, omega, Variant::Axial)?;
    let g = grid(domain, GridKind::Double, spec)?;
    let bounded = make_test_field(g.clone(), TestFamily::RadialExp);
    let subcritical = convergence_table(&bounded, 1.0, ApproxMode::Cutoff, eps)?;
    let subcritical_slope = error_slope(&subcritical, ConvergenceRow::total);
    let critical_cutoff = convergence_table(&bounded, 2.0, ApproxMode::Cutoff, eps)?;
    let smallest = eps.iter().copied().fold(f64::INFINITY, f64::min);
    let corrector = ks
        .iter()
        .map(|&k| {
            let (a, b) = corrector_terms(g.clone(), ApproxParams { eps: smallest, k }, 2.0)?;
            Ok((k, a, b))
        })
        .collect::<Result<Vec<_>>>()?;
    let k_max = ks.iter().copied().fold(1.0, f64::max);
    let eta_gradient = eps
        .iter()
        .map(|&e| Ok((e, corrector_terms(g.clone(), ApproxParams { eps: e, k: k_max }, 2.0)?.1)))
        .collect::<Result<Vec<_>>>()?;
    let k_min = ks.iter().copied().fold(f64::INFINITY, f64::min);
    let critical_corrected = [TestFamily::RadialPower { a: 1.0 }, TestFamily::LogCounter { beta: 1.0 }]
        .iter()
        .map(|fam| {
            let f = make_test_field(g.clone(), *fam);
            Ok((fam.to_string(), convergence_table(&f, 2.0, ApproxMode::Corrected { k: k_min }, eps)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityMeasurement {
        subcritical,
        subcritical_slope,
        critical_cutoff,
        corrector,
        eta_gradient,
        critical_corrected,
    })
}

/// `W¹₄` distances from the jump field to every cutoff and corrected
/// approximant of the sweep, relative to `‖f‖_{W¹₄}`.
#[derive(Debug, Clone, Serialize)]
pub struct ObstructionMeasurement {
    pub min_relative_distance: f64,
    pub rows: Vec<(f64, f64, f64)>,
}

pub fn measure_obstruction(spec: GridSpec, omega: f64, eps: &[f64], ks: &[f64]) -> Result<ObstructionMeasurement> {
    let domain = ConeDomain::new(2, omega, Variant::Axial)?;
    let g = grid(domain, GridKind::Double, spec)?;
    let f = make_test_field(g, TestFamily::Jump);
    let norm = w1p(&f, 4.0)?;
    let mut cases: Vec<(f64, f64)> = eps.iter().map(|&e| (e, 0.0)).collect();
    for &k in ks {
        cases.extend(eps.iter().map(|&e| (e, k)));
    }
    let rows = cases
        .par_iter()
        .map(|&(e, k)| {
            let approx = if k == 0.0 { vertex_cutoff(&f, e)? } else { log_corrector(&f, ApproxParams { eps: e, k })? };
            let (l, gr) = approximation_error(&f, &approx, 4.0)?;
            Ok((e, k, (l + gr) / norm))
        })
        .collect::<Result<Vec<_>>>()?;
    let min_relative_distance = rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    Ok(ObstructionMeasurement { min_relative_distance, rows })
}

// ------------------------------------------------------- restriction

#[derive(Debug, Clone, Serialize)]
pub struct RestrictionRow {
    pub field: String,
    pub anti_over_r: f64,
    pub gradient: f64,
    pub ratio: f64,
}

pub fn measure_restriction(spec: GridSpec, omega: f64) -> Result<Vec<RestrictionRow>> {
    let domain = ConeDomain::new(2, omega, Variant::Axial)?;
    let cone = grid(domain, GridKind::Double, spec)?;
    let full = Arc::new(cone.full_space()?);
    full_space_suite()
        .par_iter()
        .map(|fam| {
            let f = make_test_field(full.clone(), *fam);
            let (lhs, rhs) = restriction_hat_terms(&f, cone.clone())?;
            Ok(RestrictionRow { field: fam.to_string(), anti_over_r: lhs, gradient: rhs, ratio: lhs / rhs })
        })
        .collect()
}

// ------------------------------------------------------------ verdicts

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub criterion: u8,
    pub id: String,
    /// The statement being checked.
    pub anchor: String,
    pub measured: BTreeMap<String, f64>,
    pub expectation: String,
    pub pass: bool,
}

impl Check {
    pub fn new(criterion: u8, id: &str, anchor: &str) -> Self {
        Self {
            criterion,
            id: id.into(),
            anchor: anchor.into(),
            measured: BTreeMap::new(),
            expectation: String::new(),
            pass: true,
        }
    }

    pub fn value(&mut self, key: &str, v: f64) -> &mut Self {
        self.measured.insert(key.into(), v);
        self
    }

    /// Records a sub-condition; the check passes only if all do.
    pub fn require(&mut self, ok: bool, what: &str) -> &mut Self {
        if !self.expectation.is_empty() {
            self.expectation.push_str("; ");
        }
        self.expectation.push_str(what);
        self.pass &= ok;
        self
    }

    /// A check that could not be measured.
    fn failed(criterion: u8, id: &str, anchor: &str, err: &ConeError) -> Self {
        let mut c = Self::new(criterion, id, anchor);
        c.require(false, &format!("measurement failed: {err}"));
        c
    }
}

fn spread(xs: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = xs.fold((f64::INFINITY, 0.0_f64), |(a, b), x| (a.min(x), b.max(x)));
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

fn drift(a: f64, b: f64) -> f64 {
    (a / b).max(b / a)
}

pub type CheckFn = fn(&RunConfig) -> Check;

/// Check ids in criterion order, with their runner.
pub fn registry() -> Vec<(&'static str, CheckFn)> {
    vec![
        ("hardy-subcritical", check_hardy),
        ("hardy-critical-failure", check_counterexample),
        ("hat-gate", check_hat_gate),
        ("cz-decomposition", check_cz),
        ("kfunc-equivalence", check_kfunc),
        ("kfunc-discrete-identity", check_k_identity),
        ("rearrangement-laws", check_rearrangement),
        ("extension-restriction", check_extension),
        ("pierre-formula", check_pierre),
        ("density", check_density),
        ("vertex-obstruction", check_obstruction),
        ("restriction-hat", check_restriction),
    ]
}

pub fn run_all(cfg: &RunConfig) -> Vec<Check> {
    registry().into_iter().map(|(_, f)| f(cfg)).collect()
}

pub fn run_one(cfg: &RunConfig, id: &str) -> Option<Check> {
    registry().into_iter().find(|(k, _)| *k == id).map(|(_, f)| f(cfg))
}

macro_rules! measured {
    ($n:expr, $id:expr, $anchor:expr, $e:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return Check::failed($n, $id, $anchor, &err),
        }
    };
}

fn spec_of(cfg: &RunConfig) -> Result<GridSpec> {
    cfg.grid_spec()
}

fn check_hardy(cfg: &RunConfig) -> Check {
    let (n_, id, anchor) = (1, "hardy-subcritical", "Hardy inequality ‖f/r‖_p ≤ p/(n−p)‖∂_r f‖_p for p < n");
    let spec = measured!(n_, id, anchor, spec_of(cfg));
    let cases = [(2, 1.0), (3, 1.0), (3, 2.0)];
    let rows = measured!(n_, id, anchor, measure_hardy(spec, cfg.domain.omega, &cfg.suite, &cases));
    let slack = cfg.tolerance(id, 0.05);
    let mut c = Check::new(n_, id, anchor);
    let worst = rows.iter().map(|r| r.quotient / r.constant).fold(0.0, f64::max);
    c.value("max_quotient_over_constant", worst);
    c.require(worst <= 1.0 + slack, &format!("quotient ≤ (1+{slack})·p/(n−p)"));
    for (n, p) in cases {
        let best = rows
            .iter()
            .filter(|r| r.n == n && r.p == p)
            .map(|r| r.quotient / r.constant)
            .fold(0.0, f64::max);
        c.value(&format!("tightness_n{n}_p{p}"), best);
        c.require(best >= 0.6, &format!("some field reaches 0.6·constant at n={n}, p={p}"));
    }
    c
}

fn check_counterexample(cfg: &RunConfig) -> Check {
    let (n_, id, anchor) = (2, "hardy-critical-failure", "Hardy inequality fails at p = n for sign(x_n)|ln r|^{-β}");
    let spec = measured!(n_, id, anchor, spec_of(cfg));
    let w = cfg.domain.omega;
    let tol = cfg.tolerance(id, 0.10);
    let mut c = Check::new(n_, id, anchor);
    let t025 = measured!(n_, id, anchor, measure_counterexample(spec, w, 0.25));
    let s = t025.weighted.growth_exponent;
    c.value("growth_exponent_beta_0.25", s);
    c.require((s - 0.5).abs() <= tol * 0.5, &format!("growth exponent 0.5 ± {}%", tol * 100.0));
    let t1 = measured!(n_, id, anchor, measure_counterexample(spec, w, 1.0));
    let inc = t1.weighted.last_relative_increment();
    c.value("last_decade_increment_beta_1", inc);
    c.require(inc < 0.02, "β = 1 weighted partial integral settles (last decade < 2%)");
    for (beta, table) in [(0.25, &t025), (1.0, &t1)] {
        c.value(&format!("gradient_increment_beta_{beta}"), table.gradient.last_relative_increment());
    }
    let t05 = measured!(n_, id, anchor, measure_counterexample(spec, w, 0.5));
    c.value("gradient_increment_beta_0.5", t05.gradient.last_relative_increment());
    let g_ok = [&t025, &t05, &t1].iter().all(|t| t.gradient.last_relative_increment() < 0.02);
    c.require(g_ok, "gradient partial integrals settle for β ∈ {0.25, 0.5, 1}");
    c
}

fn check_hat_gate(cfg: &RunConfig) -> Check {
    let (n_, id, anchor) = (3, "hat-gate", "the hat space is a proper subspace at p = n");
    let spec = measured!(n_, id, anchor, spec_of(cfg));
    let mut c = Check::new(n_, id, anchor);
    for (beta, accept) in [(1.0, true), (0.25, false), (0.5, false)] {
        let t = measured!(n_, id, anchor, measure_hat_gate(spec, cfg.domain.omega, beta));
        c.value(&format!("growth_exponent_beta_{beta}"), t.growth_exponent);
        c.require(t.is_divergent() != accept, &format!("β = {beta} {}", if accept { "accepted" } else { "refused" }));
    }
    c
}

fn check_cz(cfg: &RunConfig) -> Check {
    let (n_, id, anchor) = (4, "cz-decomposition", "Calderón–Zygmund decomposition at every level α");
    let spec = measured!(n_, id, anchor, spec_of(cfg));
    let rows = measured!(n_, id, anchor, measure_cz(cz_spec(spec), &vanishing_suite(), &cfg.sweeps.alpha));
    let mut c = Check::new(n_, id, anchor);
    let recon = rows.iter().map(|r| r.report.reconstruction_error).fold(0.0, f64::max);
    let overlap = rows.iter().map(|r| r.report.overlap).max().unwrap_or(0);
    let structure = rows.iter().all(|r| r.report.structure_holds());
    let per_alpha = |key: fn(&CzReport) -> f64| -> f64 {
        spread(cfg.sweeps.alpha.iter().map(|a| {
            rows.iter().filter(|r| r.fraction == *a).map(|r| key(&r.report)).fold(0.0, f64::max)
        }))
    };
    let (good, bad, meas) = (
        per_alpha(|r| r.good_ratio),
        per_alpha(|r| r.bad_ratio),
        per_alpha(|r| r.measure_ratio),
    );
    let max_of = |key: fn(&CzReport) -> f64| rows.iter().map(|r| key(&r.report)).fold(0.0, f64::max);
    c.value("reconstruction_error", recon)
        .value("overlap", overlap as f64)
        .value("good_ratio_max", max_of(|r| r.good_ratio))
        .value("good_ratio_spread", good)
        .value("bad_ratio_max", max_of(|r| r.bad_ratio))
        .value("bad_ratio_spread", bad)
        .value("measure_ratio_max", max_of(|r| r.measure_ratio))
        .value("measure_ratio_spread", meas);
    c.require(recon <= 1e-10, "reconstruction error ≤ 1e-10")
        .require(good < 2.0, "good-part constant varies < 2× over α")
        .require(bad < 2.0, "bad-part constant varies < 2× over α")
        .require(meas < 2.0, "measure constant varies < 2× over α")
        .require(max_of(|r| r.good_ratio).max(max_of(|r| r.bad_ratio)) <= 100.0, "good and bad constants ≤ 100")
        .require(overlap <= 20, "overlap ≤ 20")
        .require(structure, "underline balls disjoint, overline balls meet the complement");
    c
}

fn check_kfunc(cfg: &RunConfig) -> Check {
    let (n_, id, anchor) = (5, "kfunc-equivalence", "K-functional of the weighted Sobolev couple via the decomposition");
    let spec = measured!(n_, id, anchor, spec_of(cfg));
    let rows = measured!(n_, id, anchor, measure_kfunc(cz_spec(spec), &vanishing_suite(), &cfg.sweeps.t));
    let mut c = Check::new(n_, id, anchor);
    let lo = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let parts_ok = rows
        .iter()
        .all(|r| r.upper >= r.value_part.max(r.over_r_part).max(r.gradient_part) * (1.0 - 1e-12));
    c.value("ratio_min", lo).value("ratio_max", hi).value("band", hi / lo);
    c.require(lo >= 1.0 - 1e-12, "upper bound ≥ rearrangement estimate")
        .require(hi / lo <= 50.0, "band c₂/c₁ ≤ 50")
        .require(parts_ok, "upper bound ≥ each component");
    c
}

fn check_k_identity(cfg: &RunConfig) -> Check {
    let (n_, id, anchor) = (6, "kfunc-discrete-identity", "K(f,t;L¹,L^∞) = ∫₀^t f*");
    let m = measured!(n_, id, anchor, measure_k_identity(7, 50, 10, 2000));
    let tol = cfg.tolerance(id, 1e-12);
    let mut c = Check::new(n_, id, anchor);
    c.value("max_error", m.max_error).value("min_search_gap", m.min_search_gap);
    c.require(m.max_error <= tol, &format!("formula matches best truncation to {tol:e}"))
        .require(m.min_search_gap >= -tol, "no random splitting beats the formula");
    c
}

fn check_rearrangement(cfg: &RunConfig) -> Check {
    let (n_, id, anchor) = (7, "rearrangement-laws", "decreasing rearrangement and the maximal average f**");
    let spec = measured!(n_, id, anchor, spec_of(cfg));
    let rows = measured!(n_, id, anchor, measure_rearrangement(spec, cfg.domain.omega, &cfg.suite, &[2, 3]));
    let mut c = Check::new(n_, id, anchor);
    let eq = rows.iter().map(|r| r.equimeasure_error).fold(0.0, f64::max);
    let lr = rows.iter().map(|r| r.level_ratio).fold(0.0, f64::max);
    let hr = rows.iter().map(|r| r.maximal_ratio / (r.p / (r.p - 1.0))).fold(0.0, f64::max);
    c.value("equimeasure_error", eq).value("level_ratio", lr).value("maximal_ratio_over_constant", hr);
    c.require(eq <= 1e-10, "equimeasurable to 1e-10")
        .require(lr <= 1.0 + 1e-12, "λ{|f| > f*(t)} ≤ t")
        .require(hr <= 1.05, "‖f**‖_p ≤ 1.05·p/(p−1)‖f‖_p");
    c
}

fn check_extension(cfg: &RunConfig) -> Check {
    let (n_, id, anchor) = (8, "extension-restriction", "bounded extension and restriction operators");
    let spec = measured!(n_, id, anchor, spec_of(cfg));
    let domain = measured!(n_, id, anchor, cfg.domain());
    let ps = [1.0, 1.5, 2.0, 3.0, f64::INFINITY];
    let m = measured!(n_, id, anchor, measure_extension(spec, domain, &cfg.suite, &ps));
    let tol = cfg.tolerance(id, 0.02);
    let mut c = Check::new(n_, id, anchor);
    let admitted: Vec<&ExtensionRow> = m.base.iter().chain(&m.refined).filter(|r| r.gate != "refused").collect();
    let rt = admitted.iter().map(|r| r.roundtrip_err).fold(0.0, f64::max);
    let finite = admitted.iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0);
    let (a, b) = (max_ratio_by_p(&m.base), max_ratio_by_p(&m.refined));
    let mut worst_drift = 1.0_f64;
    for (p, ra) in &a {
        let rb = b.get(p).copied().unwrap_or(f64::NAN);
        c.value(&format!("max_ratio_p{p}"), *ra);
        worst_drift = worst_drift.max(drift(*ra, rb));
    }
    let gated = m.base.iter().filter(|r| r.p == 2.0 && r.gate == "accepted").count();
    c.value("roundtrip_max", rt).value("refinement_drift", worst_drift).value("support_reach", m.support_reach);
    c.value("hat_accepted_fields", gated as f64);
    c.require(rt <= tol, &format!("round trip ≤ {}%", tol * 100.0))
        .require(finite, "ratios finite and positive")
        .require(worst_drift < 2.0, "max ratio drifts < 2× under refinement")
        .require(m.support_reach <= 1.0, "ξ± supported in the enlarged cones")
        .require(gated > 0, "some fields pass the hat gate at p = n");
    c
}

fn check_pierre(cfg: &RunConfig) -> Check {
    let (n_, id, anchor) = (9, "pierre-formula", "explicit extension from the quadrant cone");
    let spec = measured!(n_, id, anchor, spec_of(cfg));
    let ps = [1.0, 1.5, 2.0, 3.0, f64::INFINITY];
    let m = measured!(n_, id, anchor, measure_pierre(spec, &cfg.suite, &ps));
    let mut c = Check::new(n_, id, anchor);
    let admitted: Vec<&PierreRow> = m.rows.iter().filter(|r| r.gate != "refused").collect();
    let finite = admitted.iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0);
    let max = admitted.iter().map(|r| r.ratio).fold(0.0, f64::max);
    c.value("max_ratio", max)
        .value("roundtrip_max", m.roundtrip_max)
        .value("discontinuous_fields", m.discontinuous.len() as f64);
    c.require(m.discontinuous.is_empty(), "seam jumps within grid steps")
        .require(finite, "ratios finite")
        .require(m.roundtrip_max == 0.0, "identity on the quadrants");
    c
}

fn check_density(cfg: &RunConfig) -> Check {
    let (n_, id, anchor) = (10, "density", "approximation by functions vanishing near the vertex");
    let spec = measured!(n_, id, anchor, spec_of(cfg));
    let m = measured!(n_, id, anchor, measure_density(spec, cfg.domain.omega, &cfg.sweeps.eps, &cfg.sweeps.k));
    let mut c = Check::new(n_, id, anchor);
    let plateau = spread(m.critical_cutoff.iter().map(|r| r.grad_err));
    let floor = m.critical_cutoff.iter().map(|r| r.grad_err).fold(f64::INFINITY, f64::min);
    let k_spread = spread(m.corrector.iter().map(|(k, a, _)| k * a));
    let mut worst_decay = 0.0_f64;
    let mut monotone = true;
    for (_, rows) in &m.critical_corrected {
        let totals: Vec<f64> = rows.iter().map(ConvergenceRow::total).collect();
        monotone &= totals.windows(2).all(|w| w[1] < w[0]);
        worst_decay = worst_decay.max(totals[totals.len() - 1] / totals[0]);
    }
    let eta_down = m.eta_gradient.windows(2).all(|w| w[1].1 < w[0].1);
    c.value("subcritical_slope", m.subcritical_slope)
        .value("critical_plateau_spread", plateau)
        .value("critical_plateau_floor", floor)
        .value("corrector_k_spread", k_spread)
        .value("corrected_error_decay", worst_decay);
    c.require((m.subcritical_slope - 1.0).abs() <= 0.1, "p=1 cutoff slope 1 ± 0.1")
        .require(plateau <= 1.1 && floor > 0.1, "p=n cutoff gradient error plateaus above 0.1")
        .require(k_spread <= 1.15, "k·‖η_δ∇χ_ε‖ constant within 15%")
        .require(eta_down, "‖∇η_δ‖ decreases with ε")
        .require(monotone && worst_decay < 0.5, "corrected error decreases to below half its first value");
    c
}

/// Smallest relative `W¹₄` distance measured on the default grid, frozen
/// as a regression floor.
pub const OBSTRUCTION_FLOOR: f64 = 0.1;

fn check_obstruction(cfg: &RunConfig) -> Check {
    let (n_, id, anchor) = (11, "vertex-obstruction", "vanishing functions have codimension 1 for p > n");
    let spec = measured!(n_, id, anchor, spec_of(cfg));
    let m = measured!(n_, id, anchor, measure_obstruction(spec, cfg.domain.omega, &cfg.sweeps.eps, &cfg.sweeps.k));
    let mut c = Check::new(n_, id, anchor);
    c.value("min_relative_distance", m.min_relative_distance);
    c.require(m.min_relative_distance >= OBSTRUCTION_FLOOR, "W¹₄ distance ≥ 0.1‖f‖ for every approximant");
    c
}

fn check_restriction(cfg: &RunConfig) -> Check {
    let (n_, id, anchor) = (12, "restriction-hat", "restriction maps W¹_n(ℝⁿ) into the hat space");
    let spec = measured!(n_, id, anchor, spec_of(cfg));
    let a = measured!(n_, id, anchor, measure_restriction(spec, cfg.domain.omega));
    let b = measured!(n_, id, anchor, measure_restriction(refine(spec), cfg.domain.omega));
    let ca = a.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let cb = b.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let tol = cfg.tolerance(id, 0.1);
    let mut c = Check::new(n_, id, anchor);
    c.value("constant", ca).value("constant_refined", cb);
    c.require(ca.is_finite() && ca > 0.0, "finite constant")
        .require(drift(ca, cb) <= 1.0 + tol, &format!("constant stable to {}% under refinement", tol * 100.0));
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refinement_keeps_the_radial_range() {
        let s = GridSpec { q: 0.9, r_max: 4.0, radial: 10, angular: 8 };
        let r = refine(s);
        assert!((r.r_min() - s.r_min()).abs() < 1e-12 * s.r_min());
        assert_eq!(r.angular, 16);
    }

    #[test]
    fn k_identity_holds_on_random_instances() {
        let m = measure_k_identity(1, 20, 10, 200).unwrap();
        assert!(m.max_error < 1e-12);
        assert!(m.min_search_gap >= -1e-12);
    }

    #[test]
    fn registry_is_in_criterion_order() {
        let ids: Vec<&str> = registry().iter().map(|r| r.0).collect();
        assert_eq!(ids.len(), 12);
        let mut seen = ids.clone();
        seen.dedup();
        assert_eq!(seen.len(), 12);
    }
}
