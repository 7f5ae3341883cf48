//! One function per subcommand. Each writes its CSV reports and
//! `summary.json` into the output directory and returns whether every check
//! passed.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use conelab::calculus::families::{full_space_suite, make_test_field, standard_suite, TestFamily};
use conelab::calculus::field::Field;
use conelab::calculus::norms::{lp_of_values, sobolev_norm, NormKind, NormSpec, Weight};
use conelab::calculus::split::{radial_split, ring_mean};
use conelab::checks::{self, Check};
use conelab::config::RunConfig;
use conelab::cz::{decompose_with_maximal, maximal_function, verify, BallType, CzParams};
use conelab::density::{convergence_table, error_slope, ApproxMode, ConvergenceRow};
use conelab::dump::{read_field, write_field};
use conelab::extension::{extend_unchecked, operator_norm_report, restrict, restriction_hat_terms};
use conelab::geometry::{ConeDomain, Side};
use conelab::grid::{GridKind, PolarGrid};
use conelab::report::{write_atomic, write_csv, write_json, CheckRow, Summary};

use crate::{Command, Failure};

type Outcome = Result<bool, Failure>;

struct Run<'a> {
    cfg: &'a RunConfig,
    name: &'static str,
    files: Vec<String>,
    checks: Vec<Check>,
    start: Instant,
    timing: bool,
}

impl<'a> Run<'a> {
    fn new(cfg: &'a RunConfig, name: &'static str, timing: bool) -> Self {
        Self { cfg, name, files: Vec::new(), checks: Vec::new(), start: Instant::now(), timing }
    }

    fn path(&mut self, file: &str) -> PathBuf {
        self.files.push(file.to_string());
        self.cfg.output.join(file)
    }

    fn csv<T: Serialize>(&mut self, file: &str, rows: &[T]) -> Result<(), Failure> {
        let path = self.path(file);
        write_csv(&path, rows)?;
        Ok(())
    }

    fn dump(&mut self, file: &str, f: &Field) -> Result<(), Failure> {
        let path = self.path(file);
        write_atomic(&path, write_field(f).as_bytes())?;
        Ok(())
    }

    fn finish(self) -> Outcome {
        let mut summary = Summary::new(self.name, self.checks, self.files);
        if self.timing {
            summary.runtime_seconds = Some(self.start.elapsed().as_secs_f64());
        }
        write_json(&self.cfg.output.join("summary.json"), &summary)?;
        for c in &summary.checks {
            println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.id, c.anchor);
        }
        println!("wrote {} report(s) to {}", summary.files.len() + 1, self.cfg.output.display());
        Ok(summary.pass)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn exponents(list: &[String], default: &[f64]) -> Result<Vec<f64>, Failure> {
    if list.is_empty() {
        return Ok(default.to_vec());
    }
    list.iter()
        .map(|t| match t.trim() {
            "inf" => Ok(f64::INFINITY),
            s => s
                .parse::<f64>()
                .ok()
                .filter(|p| *p >= 1.0)
                .ok_or_else(|| usage(format!("exponent `{s}` must be ≥ 1 or `inf`"))),
        })
        .collect()
}

fn grid(cfg: &RunConfig, kind: GridKind) -> Result<Arc<PolarGrid>, Failure> {
    Ok(cfg.grid(kind)?)
}

/// The configured suite on `grid`, or the one field read from `input`.
fn fields(cfg: &RunConfig, grid: &Arc<PolarGrid>, input: Option<&Path>) -> Result<Vec<Field>, Failure> {
    match input {
        Some(path) => Ok(vec![read_field(path)?]),
        None => Ok(cfg.suite.iter().map(|fam| make_test_field(grid.clone(), *fam)).collect()),
    }
}

/// The suite, or `fallback` when the configuration left it at its default.
fn suite_or(cfg: &RunConfig, fallback: Vec<TestFamily>) -> Vec<TestFamily> {
    if cfg.suite == standard_suite() {
        fallback
    } else {
        cfg.suite.clone()
    }
}

pub fn dispatch(command: &Command, cfg: &RunConfig, timing: bool) -> Outcome {
    match command {
        Command::Norm { input, p } => norm(Run::new(cfg, "norm", timing), input.as_deref(), p),
        Command::Hardy { n, p } => hardy(Run::new(cfg, "hardy", timing), *n, *p),
        Command::Split { input } => split(Run::new(cfg, "split", timing), input.as_deref()),
        Command::Cz { input, alpha } => cz(Run::new(cfg, "cz", timing), input.as_deref(), alpha),
        Command::Kfunc { t } => kfunc(Run::new(cfg, "kfunc", timing), t),
        Command::Extend { input, p } => extend(Run::new(cfg, "extend", timing), input.as_deref(), p),
        Command::Restrict { input } => restrict_cmd(Run::new(cfg, "restrict", timing), input.as_deref()),
        Command::Pierre { p } => pierre(Run::new(cfg, "pierre", timing), p),
        Command::Density { field, p, k } => density(Run::new(cfg, "density", timing), field, *p, *k),
        Command::Counterexample { beta } => counterexample(Run::new(cfg, "counterexample", timing), *beta),
        Command::VerifyAll { only } => verify_all(Run::new(cfg, "verify-all", timing), only),
    }
}

#[derive(Serialize)]
struct NormRow {
    field: String,
    p: f64,
    lp: f64,
    gradient: f64,
    over_r: f64,
    w1p: f64,
    tilde: f64,
}

fn norm(mut run: Run, input: Option<&Path>, p: &[String]) -> Outcome {
    let cfg = run.cfg;
    let ps = exponents(p, &cfg.sweeps.p)?;
    let g = grid(cfg, GridKind::Double)?;
    let fs = fields(cfg, &g, input)?;
    let mut rows = Vec::new();
    for f in &fs {
        let grad = conelab::calculus::field::gradient(f)?.magnitude();
        for &p in &ps {
            let lp = lp_of_values(f.values(), f.grid(), p, Weight::None);
            let over_r = lp_of_values(f.values(), f.grid(), p, Weight::InvR);
            rows.push(NormRow {
                field: f.name().to_string(),
                p,
                lp,
                gradient: lp_of_values(grad.values(), f.grid(), p, Weight::None),
                over_r,
                w1p: sobolev_norm(f, NormSpec::sobolev(p, NormKind::W1p))?,
                tilde: sobolev_norm(f, NormSpec::sobolev(p, NormKind::TildeH1p))?,
            });
        }
    }
    run.csv("norms.csv", &rows)?;
    run.finish()
}

fn hardy(mut run: Run, n: usize, p: f64) -> Outcome {
    let cfg = run.cfg;
    if !(n == 2 || n == 3) || !(p >= 1.0 && p < n as f64) {
        return Err(usage(format!("hardy needs n ∈ {{2, 3}} and 1 ≤ p < n, got n = {n}, p = {p}")));
    }
    let rows = checks::measure_hardy(cfg.grid_spec()?, cfg.domain.omega, &cfg.suite, &[(n, p)])?;
    let tol = cfg.tolerance("hardy-subcritical", 0.05);
    let mut c = Check::new(1, "hardy-subcritical", "Hardy inequality ‖f/r‖_p ≤ p/(n−p)‖∂_r f‖_p for p < n");
    let worst = rows.iter().map(|r| r.quotient / r.constant).fold(0.0, f64::max);
    c.value("max_quotient_over_constant", worst)
        .require(worst <= 1.0 + tol, &format!("quotient ≤ (1+{tol})·p/(n−p)"));
    run.csv("hardy.csv", &rows)?;
    run.checks.push(c);
    run.finish()
}

#[derive(Serialize)]
struct SplitRow {
    field: String,
    l2: f64,
    radial_l2: f64,
    anti_l2: f64,
    anti_over_r_l2: f64,
    /// Largest ring mean of the anti-radial part over `max |f|`.
    ring_mean_residual: f64,
}

fn split(mut run: Run, input: Option<&Path>) -> Outcome {
    let cfg = run.cfg;
    let g = grid(cfg, GridKind::Double)?;
    let fs = fields(cfg, &g, input)?;
    let mut rows = Vec::new();
    for f in &fs {
        let s = radial_split(f)?;
        let grid = f.grid();
        let all: Vec<usize> = (0..grid.patches().len()).collect();
        let residual = (0..grid.radial())
            .map(|k| ring_mean(grid, s.anti.values(), k, &all).abs())
            .fold(0.0, f64::max)
            / f.max_abs().max(f64::MIN_POSITIVE);
        rows.push(SplitRow {
            field: f.name().to_string(),
            l2: lp_of_values(f.values(), grid, 2.0, Weight::None),
            radial_l2: lp_of_values(s.radial.values(), grid, 2.0, Weight::None),
            anti_l2: lp_of_values(s.anti.values(), grid, 2.0, Weight::None),
            anti_over_r_l2: lp_of_values(s.anti.values(), grid, 2.0, Weight::InvR),
            ring_mean_residual: residual,
        });
        if input.is_some() {
            run.dump("radial.txt", &s.radial)?;
            run.dump("anti.txt", &s.anti)?;
        }
    }
    let worst = rows.iter().map(|r| r.ring_mean_residual).fold(0.0, f64::max);
    let mut c = Check::new(0, "split-ring-means", "anti-radial part has mean zero on every sphere");
    c.value("ring_mean_residual", worst).require(worst <= 1e-12, "ring means ≤ 1e-12·max|f|");
    run.csv("split.csv", &rows)?;
    run.checks.push(c);
    run.finish()
}

#[derive(Serialize)]
struct CzCsvRow {
    field: String,
    fraction: f64,
    alpha: f64,
    n_balls: usize,
    #[serde(rename = "overlap_N")]
    overlap: usize,
    rec_err: f64,
    eg_ratio: f64,
    eb_ratio: f64,
    #[serde(rename = "eB_ratio")]
    measure_ratio: f64,
    weak_type_ratio: f64,
    interior_balls: usize,
    vertex_balls: usize,
    structure: bool,
}

#[derive(Serialize)]
struct CoverRow {
    field: String,
    alpha: f64,
    x_r: f64,
    x_theta: f64,
    r_i: f64,
    #[serde(rename = "type")]
    kind: &'static str,
}

fn cz(mut run: Run, input: Option<&Path>, alpha: &[f64]) -> Outcome {
    let cfg = run.cfg;
    let fractions = if alpha.is_empty() { cfg.sweeps.alpha.clone() } else { alpha.to_vec() };
    if fractions.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
        return Err(usage("levels must be positive fractions of sup M"));
    }
    let fs: Vec<Field> = match input {
        Some(path) => {
            let f = read_field(path)?;
            let f = if f.grid().patches().len() == 1 { f } else { f.side(Side::Plus)? };
            vec![f]
        }
        None => {
            let spec = checks::cz_spec(cfg.grid_spec()?);
            let g = Arc::new(PolarGrid::new(ConeDomain::standard(2), GridKind::Plus, spec)?);
            suite_or(cfg, checks::vanishing_suite()).iter().map(|fam| make_test_field(g.clone(), *fam)).collect()
        }
    };
    type FieldRows = (Vec<CzCsvRow>, Vec<CoverRow>);
    let per_field: Vec<Result<FieldRows, Failure>> = fs
        .par_iter()
        .map(|f| {
            let m = maximal_function(f)?;
            let top = m.max_abs();
            let (mut rows, mut cover) = (Vec::new(), Vec::new());
            for &fraction in &fractions {
                let res = decompose_with_maximal(f, m.clone(), CzParams::new(fraction * top))?;
                let r = verify(&res)?;
                let domain = f.grid().domain();
                for b in &res.balls {
                    cover.push(CoverRow {
                        field: f.name().to_string(),
                        alpha: r.alpha,
                        x_r: b.ball.center[0].hypot(b.ball.center[1]),
                        x_theta: domain.angle_of(&b.ball.center)?,
                        r_i: b.ball.radius,
                        kind: match b.kind {
                            BallType::Interior => "interior",
                            BallType::Vertex => "vertex",
                        },
                    });
                }
                rows.push(CzCsvRow {
                    field: f.name().to_string(),
                    fraction,
                    alpha: r.alpha,
                    n_balls: r.n_balls,
                    overlap: r.overlap,
                    rec_err: r.reconstruction_error,
                    eg_ratio: r.good_ratio,
                    eb_ratio: r.bad_ratio,
                    measure_ratio: r.measure_ratio,
                    weak_type_ratio: r.weak_type_ratio,
                    interior_balls: r.interior_balls,
                    vertex_balls: r.vertex_balls,
                    structure: r.structure_holds(),
                });
            }
            Ok((rows, cover))
        })
        .collect();
    let (mut rows, mut cover) = (Vec::new(), Vec::new());
    for r in per_field {
        let (a, b) = r?;
        rows.extend(a);
        cover.extend(b);
    }
    let recon = rows.iter().map(|r| r.rec_err).fold(0.0, f64::max);
    let overlap = rows.iter().map(|r| r.overlap).max().unwrap_or(0);
    let mut c = Check::new(4, "cz-structure", "Calderón–Zygmund decomposition: reconstruction, cover and overlap");
    c.value("reconstruction_error", recon)
        .value("overlap", overlap as f64)
        .require(recon <= 1e-10, "reconstruction error ≤ 1e-10")
        .require(overlap <= 20, "overlap ≤ 20")
        .require(rows.iter().all(|r| r.structure), "underline balls disjoint, overline balls meet the complement");
    run.csv("cz.csv", &rows)?;
    run.csv("cover.csv", &cover)?;
    run.checks.push(c);
    run.finish()
}

#[derive(Serialize)]
struct KCsvRow {
    field: String,
    t: f64,
    #[serde(rename = "K_estimate")]
    estimate: f64,
    #[serde(rename = "K_upper_cz")]
    upper: f64,
    ratio: f64,
}

fn kfunc(mut run: Run, t: &[f64]) -> Outcome {
    let cfg = run.cfg;
    let ts = if t.is_empty() { cfg.sweeps.t.clone() } else { t.to_vec() };
    if ts.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(usage("scales t must be positive"));
    }
    let spec = checks::cz_spec(cfg.grid_spec()?);
    let rows = checks::measure_kfunc(spec, &suite_or(cfg, checks::vanishing_suite()), &ts)?;
    let lo = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let mut c = Check::new(5, "kfunc-equivalence", "K-functional of the weighted Sobolev couple via the decomposition");
    c.value("ratio_min", lo)
        .value("ratio_max", hi)
        .require(lo >= 1.0 - 1e-12, "upper bound ≥ rearrangement estimate")
        .require(hi / lo <= 50.0, "band ≤ 50");
    let out: Vec<KCsvRow> = rows
        .into_iter()
        .map(|r| KCsvRow { field: r.field, t: r.t, estimate: r.lower, upper: r.upper, ratio: r.ratio })
        .collect();
    run.csv("kfunc.csv", &out)?;
    run.checks.push(c);
    run.finish()
}

fn extend(mut run: Run, input: Option<&Path>, p: &[String]) -> Outcome {
    let cfg = run.cfg;
    let ps = exponents(p, &cfg.sweeps.p)?;
    let g = grid(cfg, GridKind::Double)?;
    let fs = fields(cfg, &g, input)?;
    let rows = operator_norm_report(&fs, &ps)?;
    if input.is_some() {
        run.dump("extended.txt", &extend_unchecked(&fs[0])?.total)?;
    }
    let tol = cfg.tolerance("extension-restriction", 0.02);
    let admitted = rows.iter().filter(|r| r.gate != "refused");
    let rt = admitted.clone().map(|r| r.roundtrip_err).fold(0.0, f64::max);
    let mut c = Check::new(8, "extension-roundtrip", "restriction undoes extension");
    c.value("roundtrip_max", rt)
        .require(rt <= tol, &format!("round trip ≤ {}%", tol * 100.0))
        .require(admitted.clone().all(|r| r.ratio.is_finite() && r.ratio > 0.0), "ratios finite");
    run.csv("extension.csv", &rows)?;
    run.checks.push(c);
    run.finish()
}

fn restrict_cmd(mut run: Run, input: Option<&Path>) -> Outcome {
    let cfg = run.cfg;
    let rows = match input {
        Some(path) => {
            let f = read_field(path)?;
            if f.grid().kind() != GridKind::FullSpace {
                return Err(usage("restrict takes a whole-space dump (variant fullspace)"));
            }
            let cone = Arc::new(f.grid().with_kind(GridKind::Double)?);
            run.dump("restricted.txt", &restrict(&f, cone.clone())?)?;
            let (lhs, rhs) = restriction_hat_terms(&f, cone)?;
            vec![checks::RestrictionRow { field: f.name().into(), anti_over_r: lhs, gradient: rhs, ratio: lhs / rhs }]
        }
        None => {
            if cfg.suite != standard_suite() && cfg.suite != full_space_suite() {
                return Err(usage("restrict runs on the whole-plane suite or an --input dump"));
            }
            checks::measure_restriction(cfg.grid_spec()?, cfg.domain.omega)?
        }
    };
    let mut c = Check::new(12, "restriction-hat", "restriction maps W¹_n(ℝⁿ) into the hat space");
    let worst = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    c.value("constant", worst).require(worst.is_finite(), "finite constant");
    run.csv("restriction.csv", &rows)?;
    run.checks.push(c);
    run.finish()
}

fn pierre(mut run: Run, p: &[String]) -> Outcome {
    let cfg = run.cfg;
    let ps = exponents(p, &[1.0, 1.5, 3.0, f64::INFINITY])?;
    let m = checks::measure_pierre(cfg.grid_spec()?, &cfg.suite, &ps)?;
    let mut c = Check::new(9, "pierre-formula", "explicit extension from the quadrant cone");
    c.value("roundtrip_max", m.roundtrip_max)
        .value("discontinuous_fields", m.discontinuous.len() as f64)
        .require(m.discontinuous.is_empty(), "seam jumps within grid steps")
        .require(m.roundtrip_max == 0.0, "identity on the quadrants");
    run.csv("pierre.csv", &m.rows)?;
    run.checks.push(c);
    run.finish()
}

fn density(mut run: Run, field: &str, p: f64, k: Option<f64>) -> Outcome {
    let cfg = run.cfg;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(usage("density needs a finite p ≥ 1"));
    }
    let mode = match k {
        None => ApproxMode::Cutoff,
        Some(k) if k >= 1.0 && k.is_finite() => ApproxMode::Corrected { k },
        Some(k) => return Err(usage(format!("corrector exponent k = {k} must be ≥ 1"))),
    };
    let g = grid(cfg, GridKind::Double)?;
    let f = make_test_field(g, field.parse()?);
    let rows = convergence_table(&f, p, mode, &cfg.sweeps.eps)?;
    let mut c = Check::new(10, "density-table", "approximation by functions vanishing near the vertex");
    c.value("total_error_slope", error_slope(&rows, ConvergenceRow::total))
        .value("l_p_error_slope", error_slope(&rows, |r| r.l_p_err))
        .value("gradient_error_slope", error_slope(&rows, |r| r.grad_err))
        .require(rows.iter().all(|r| r.total().is_finite()), "errors finite");
    run.csv("density.csv", &rows)?;
    run.checks.push(c);
    run.finish()
}

#[derive(Serialize)]
struct DivergenceRow {
    r_min: f64,
    weighted_partial: f64,
    gradient_partial: f64,
}

fn counterexample(mut run: Run, beta: f64) -> Outcome {
    let cfg = run.cfg;
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(usage("β must be positive"));
    }
    let t = checks::measure_counterexample(cfg.grid_spec()?, cfg.domain.omega, beta)?;
    let rows: Vec<DivergenceRow> = (0..t.weighted.r_min.len())
        .map(|i| DivergenceRow {
            r_min: t.weighted.r_min[i],
            weighted_partial: t.weighted.partial[i],
            gradient_partial: t.gradient.partial[i],
        })
        .collect();
    let inc = t.gradient.last_relative_increment();
    let mut c = Check::new(2, "counterexample-table", "partial integrals of sign(x_n)|ln r|^{-β} near the vertex");
    c.value("weighted_growth_exponent", t.weighted.growth_exponent)
        .value("expected_growth_exponent", 1.0 - 2.0 * beta)
        .value("weighted_last_increment", t.weighted.last_relative_increment())
        .value("gradient_last_increment", inc)
        .require(inc < 0.02, "gradient partial integral settles (last decade < 2%)");
    run.csv("divergence.csv", &rows)?;
    run.checks.push(c);
    run.finish()
}

fn verify_all(mut run: Run, only: &[String]) -> Outcome {
    let cfg = run.cfg;
    let registry = checks::registry();
    for id in only {
        if !registry.iter().any(|(k, _)| k == id) {
            let known: Vec<&str> = registry.iter().map(|r| r.0).collect();
            return Err(usage(format!("unknown check `{id}`; known: {}", known.join(", "))));
        }
    }
    let selected: Vec<_> = registry.into_iter().filter(|(k, _)| only.is_empty() || only.iter().any(|o| o == k)).collect();
    run.checks = selected.iter().map(|(_, f)| f(cfg)).collect();
    let rows: Vec<CheckRow> = run.checks.iter().map(CheckRow::from).collect();
    run.csv("checks.csv", &rows)?;
    run.finish()
}
