//! Whitney cover of the level set and the good/bad split.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::balls::{cell_distance, cells_in_ball, distance_to_set};
use super::maximal::maximal_function;
use crate::calculus::field::Field;
use crate::error::{invalid, ConeError, Result};
use crate::geometry::{ConeBall, Side};
use crate::grid::PolarGrid;
use crate::quad::{pairwise_sum_by, plateau};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CzParams {
    /// Level `α` of the maximal function.
    pub alpha: f64,
    /// Inner Whitney constant; the outer one is `4 c1`.
    pub c1: f64,
    /// Exponent in the measure estimate.
    pub p: f64,
}

/// Default inner Whitney constant. With covering radius `r/2` it makes the
/// underline balls disjoint while the bump still reaches every covered cell.
pub const DEFAULT_C1: f64 = 4.0;

impl CzParams {
    pub fn new(alpha: f64) -> Self {
        Self { alpha, c1: DEFAULT_C1, p: 1.0 }
    }

    pub fn c2(&self) -> f64 {
        4.0 * self.c1
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid(format!("level α = {} must be positive", self.alpha)));
        }
        // Underline balls have radius r/c1 and are built from centers at least
        // r/2 apart, so c1 ≥ 4 keeps them disjoint; the bump support
        // (1 + c1)/(2 c1) r must stay inside the ball and beyond r/2.
        if !(self.c1 >= 4.0 && self.c1.is_finite()) {
            return Err(invalid(format!("Whitney constant c1 = {} must be ≥ 4", self.c1)));
        }
        if !(self.p >= 1.0) {
            return Err(invalid("exponent must be ≥ 1"));
        }
        Ok(())
    }

    /// Bump `ψ`: 1 on `[0, 1]`, 0 on `[(1 + c1)/2, ∞)`.
    pub fn bump(&self, s: f64) -> f64 {
        plateau(s, 1.0, 0.5 * (1.0 + self.c1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BallType {
    /// `4 r ≤ d(B, 0)`: the bad part subtracts the ball mean.
    Interior,
    /// Near the vertex: the bad part is `f χ`.
    Vertex,
}

#[derive(Debug, Clone)]
pub struct WhitneyBall {
    pub ball: ConeBall,
    /// Cell whose center is the ball center.
    pub center_cell: usize,
    /// `d(x_i, F)`; the radius is half of it.
    pub distance: f64,
    pub kind: BallType,
    /// Cells with centers in the plain ball, increasing.
    pub cells: Vec<usize>,
    /// Partition weight `χ_i` on `cells`.
    pub weights: Vec<f64>,
    /// Bad part `b_i` on `cells`.
    pub bad: Vec<f64>,
    /// Mean of `f` over the plain ball.
    pub mean: f64,
}

#[derive(Debug, Clone)]
pub struct CzResult {
    pub params: CzParams,
    pub side: Side,
    pub field: Field,
    pub maximal: Field,
    /// Cells of the level set `{M > α}`.
    pub level_set: Vec<bool>,
    pub balls: Vec<WhitneyBall>,
    pub good: Field,
}

impl CzResult {
    pub fn grid(&self) -> &PolarGrid {
        self.field.grid()
    }

    /// `b_i` as a dense field.
    pub fn bad_part(&self, i: usize) -> Field {
        let ball = &self.balls[i];
        let mut values = vec![0.0; self.grid().len()];
        for (c, b) in ball.cells.iter().zip(&ball.bad) {
            values[*c] = *b;
        }
        Field::new(self.field.grid_arc().clone(), values, format!("b{i}")).expect("same grid")
    }

    /// `Σ b_i`.
    pub fn bad_sum(&self) -> Field {
        let mut values = vec![0.0; self.grid().len()];
        for ball in &self.balls {
            for (c, b) in ball.cells.iter().zip(&ball.bad) {
                values[*c] += *b;
            }
        }
        Field::new(self.field.grid_arc().clone(), values, "bad").expect("same grid")
    }
}

fn check_input(f: &Field) -> Result<Side> {
    let grid = f.grid();
    if grid.dim() != 2 {
        return Err(ConeError::Unsupported(
            "the decomposition is implemented in the plane only".into(),
        ));
    }
    match (grid.patches().len(), grid.patches()[0].side) {
        (1, Some(side)) => Ok(side),
        _ => Err(ConeError::WrongVariant(
            "decompose one half-cone at a time (see Field::side)".into(),
        )),
    }
}

pub fn decompose(f: &Field, params: CzParams) -> Result<CzResult> {
    check_input(f)?;
    let maximal = maximal_function(f)?;
    decompose_with_maximal(f, maximal, params)
}

/// Same as [`decompose`] with a precomputed maximal function, for sweeps over `α`.
pub fn decompose_with_maximal(f: &Field, maximal: Field, params: CzParams) -> Result<CzResult> {
    let side = check_input(f)?;
    params.validate()?;
    f.check_same_grid(&maximal)?;
    let grid: Arc<PolarGrid> = f.grid_arc().clone();
    let alpha = params.alpha;
    let level_set: Vec<bool> = maximal.values().iter().map(|m| *m > alpha).collect();
    let in_level = level_set.iter().filter(|u| **u).count();
    if in_level == 0 {
        return Ok(CzResult {
            params,
            side,
            field: f.clone(),
            maximal,
            level_set,
            balls: Vec::new(),
            good: f.clone().with_name(format!("g({})", f.name())),
        });
    }
    if in_level == grid.len() {
        return Err(ConeError::DegenerateLevel { alpha });
    }
    let complement: Vec<bool> = level_set.iter().map(|u| !u).collect();
    let (dist, _) = distance_to_set(&grid, 0, &complement);

    let mut order: Vec<usize> = (0..grid.len()).filter(|&i| level_set[i]).collect();
    order.sort_by(|&a, &b| dist[b].total_cmp(&dist[a]).then(a.cmp(&b)));

    let mut covered = vec![false; grid.len()];
    let mut balls = Vec::new();
    for &cell in &order {
        if covered[cell] {
            continue;
        }
        let x = grid.point(cell);
        // The propagated distance is attained, hence an upper bound; the exact
        // distance is realized by a complement cell inside that radius.
        let exact = cells_in_ball(&grid, 0, x, dist[cell] * (1.0 + 1e-12))
            .into_iter()
            .filter(|&c| complement[c])
            .map(|c| cell_distance(&grid, cell, c))
            .fold(dist[cell], f64::min);
        let radius = 0.5 * exact;
        for c in cells_in_ball(&grid, 0, x, 0.5 * radius) {
            if level_set[c] {
                covered[c] = true;
            }
        }
        let cells = cells_in_ball(&grid, 0, x, radius);
        let ball = ConeBall::new(x, radius, params.c1);
        let kind = if 4.0 * radius <= ball.distance_to_vertex() {
            BallType::Interior
        } else {
            BallType::Vertex
        };
        balls.push(WhitneyBall {
            ball,
            center_cell: cell,
            distance: exact,
            kind,
            cells,
            weights: Vec::new(),
            bad: Vec::new(),
            mean: 0.0,
        });
    }

    // Partition of unity.
    let bumps: Vec<Vec<f64>> = balls
        .iter()
        .map(|b| {
            b.cells
                .iter()
                .map(|&c| {
                    let y = grid.point(c);
                    let s = (y[0] - b.ball.center[0]).hypot(y[1] - b.ball.center[1]);
                    params.bump(params.c1 * s / b.ball.radius)
                })
                .collect()
        })
        .collect();
    let mut denom = vec![0.0; grid.len()];
    for (b, psi) in balls.iter().zip(&bumps) {
        for (c, v) in b.cells.iter().zip(psi) {
            denom[*c] += v;
        }
    }
    let fv = f.values();
    for (b, psi) in balls.iter_mut().zip(&bumps) {
        b.weights = b
            .cells
            .iter()
            .zip(psi)
            .map(|(&c, v)| if level_set[c] && denom[c] > 0.0 { v / denom[c] } else { 0.0 })
            .collect();
        let mass = pairwise_sum_by(b.cells.len(), |k| grid.measure(b.cells[k]));
        b.mean = pairwise_sum_by(b.cells.len(), |k| fv[b.cells[k]] * grid.measure(b.cells[k]))
            / mass;
        let shift = match b.kind {
            BallType::Interior => b.mean,
            BallType::Vertex => 0.0,
        };
        b.bad = b.cells.iter().zip(&b.weights).map(|(&c, w)| (fv[c] - shift) * w).collect();
    }

    let mut good = fv.to_vec();
    for b in &balls {
        for (c, v) in b.cells.iter().zip(&b.bad) {
            good[*c] -= v;
        }
    }
    let good = Field::new(grid.clone(), good, format!("g({})", f.name()))?;
    Ok(CzResult { params, side, field: f.clone(), maximal, level_set, balls, good })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::families::{make_test_field, TestFamily};
    use crate::geometry::ConeDomain;
    use crate::grid::{GridKind, GridSpec};

    fn field(family: TestFamily) -> Field {
        let spec = GridSpec::reaching(1e-5, 0.92, 8.0, 16);
        let g = Arc::new(PolarGrid::new(ConeDomain::standard(2), GridKind::Plus, spec).unwrap());
        make_test_field(g, family)
    }

    #[test]
    fn empty_level_set_keeps_the_field() {
        let f = field(TestFamily::RadialPower { a: 2.0 });
        let res = decompose(&f, CzParams::new(1e6)).unwrap();
        assert!(res.balls.is_empty());
        assert_eq!(res.good.values(), f.values());
    }

    #[test]
    fn reconstruction_and_partition() {
        let f = field(TestFamily::RadialExp);
        let res = decompose(&f, CzParams::new(5.0)).unwrap();
        assert!(!res.balls.is_empty());
        let sum = res.good.add(&res.bad_sum()).unwrap();
        for (a, b) in sum.values().iter().zip(f.values()) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
        let mut total = vec![0.0; f.grid().len()];
        for b in &res.balls {
            for (c, w) in b.cells.iter().zip(&b.weights) {
                total[*c] += w;
            }
        }
        for (i, t) in total.iter().enumerate() {
            let expected = if res.level_set[i] { 1.0 } else { 0.0 };
            assert!((t - expected).abs() < 1e-12, "{i}: {t}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        let f = field(TestFamily::RadialExp);
        assert!(decompose(&f, CzParams::new(-1.0)).is_err());
        assert!(decompose(&f, CzParams { c1: 2.0, ..CzParams::new(1.0) }).is_err());
        assert!(matches!(decompose(&f, CzParams::new(1e-12)), Err(ConeError::DegenerateLevel { .. })));
        let spec = GridSpec::reaching(1e-3, 0.9, 4.0, 8);
        let g = Arc::new(PolarGrid::new(ConeDomain::standard(2), GridKind::Double, spec).unwrap());
        let d = Field::from_fn(g, "x", |s| s.r);
        assert!(matches!(decompose(&d, CzParams::new(1.0)), Err(ConeError::WrongVariant(_))));
    }
}
