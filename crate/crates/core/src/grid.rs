//! Geometric polar grids on one half-cone, on the double cone, or on the
//! whole space.
//!
//! Radial cells are `[r_max q^{k+1}, r_max q^k]` for `k = 0..K`, so index 0 is
//! the outermost ring. Angular cells are uniform on each patch. Samples sit
//! at cell centers (geometric mean radius, midpoint angle); cell measures are
//! exact, so the total measure of a truncated cone is exact up to rounding.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, ConeError, Result};
use crate::geometry::{ConeDomain, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Plus,
    Minus,
    Double,
    FullSpace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Radial ratio `r_{k+1}/r_k`.
    pub q: f64,
    pub r_max: f64,
    /// Number of radial cells `K`.
    pub radial: usize,
    /// Angular cells per patch (total for whole-space grids).
    pub angular: usize,
}

impl Default for GridSpec {
    /// 600 rings from `r = 20` down to about `8.6e-13`, 96 angular cells.
    fn default() -> Self {
        Self {
            q: 0.95,
            r_max: 20.0,
            radial: 600,
            angular: 96,
        }
    }
}

impl GridSpec {
    /// Smallest geometric grid whose innermost edge is at or below `r_min`.
    pub fn reaching(r_min: f64, q: f64, r_max: f64, angular: usize) -> Self {
        let radial = ((r_max / r_min).ln() / -q.ln() - 1e-9).ceil().max(1.0) as usize;
        Self {
            q,
            r_max,
            radial,
            angular,
        }
    }

    pub fn r_min(&self) -> f64 {
        self.r_max * self.q.powi(self.radial as i32)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(invalid(format!(
                "radial ratio q = {} must lie in (0, 1)",
                self.q
            )));
        }
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return Err(invalid("r_max must be positive and finite"));
        }
        if self.radial < 3 || self.angular < 3 {
            return Err(ConeError::GridTooSmall {
                radial: self.radial,
                angular: self.angular,
            });
        }
        if !(self.r_min() > 0.0) {
            return Err(invalid("innermost radius underflows"));
        }
        Ok(())
    }
}

/// A contiguous angular range carrying `J` uniform cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Patch {
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
    pub side: Option<Side>,
}

impl Patch {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Cell index `(patch, ring, angle)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub patch: usize,
    pub ring: usize,
    pub angle: usize,
}

#[derive(Debug, Clone)]
pub struct PolarGrid {
    domain: ConeDomain,
    kind: GridKind,
    spec: GridSpec,
    patches: Vec<Patch>,
    edges: Vec<f64>,
    centers: Vec<f64>,
    radial_weights: Vec<f64>,
    angular_weights: Vec<Vec<f64>>,
    measures: Vec<f64>,
}

/// Geometric data of one sample point, handed to field constructors.
#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub r: f64,
    /// Absolute angular coordinate (`φ` in the plane, `θ` in 3D).
    pub angle: f64,
    /// Meridian Cartesian coordinates `(x', x_n)` (planar `(x₁, x₂)`).
    pub x: [f64; 2],
    /// Half-cone the sample belongs to, if any.
    pub side: Option<Side>,
    /// Angle from the axis of `side` (or of `Ω⁺` when `side` is `None`).
    pub rel: f64,
}

impl PolarGrid {
    pub fn new(domain: ConeDomain, kind: GridKind, spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        let patches = match (domain.dim(), kind) {
            (2, GridKind::FullSpace) => vec![Patch {
                lo: -PI,
                hi: PI,
                periodic: true,
                side: None,
            }],
            (_, GridKind::FullSpace) => vec![Patch {
                lo: 0.0,
                hi: PI,
                periodic: false,
                side: None,
            }],
            (_, kind) => {
                let sides: &[Side] = match kind {
                    GridKind::Plus => &[Side::Plus],
                    GridKind::Minus => &[Side::Minus],
                    _ => &[Side::Plus, Side::Minus],
                };
                sides.iter().map(|&s| cone_patch(&domain, s)).collect()
            }
        };
        let n = domain.dim() as i32;
        let edges: Vec<f64> = (0..=spec.radial)
            .map(|k| spec.r_max * spec.q.powi(k as i32))
            .collect();
        let centers = edges.windows(2).map(|e| (e[0] * e[1]).sqrt()).collect();
        let radial_weights = edges
            .windows(2)
            .map(|e| (e[0].powi(n) - e[1].powi(n)) / n as f64)
            .collect();
        let angular_weights = patches
            .iter()
            .map(|p| {
                let h = p.width() / spec.angular as f64;
                (0..spec.angular)
                    .map(|j| {
                        if domain.dim() == 2 {
                            h
                        } else {
                            let a = p.lo + j as f64 * h;
                            2.0 * PI * (a.cos() - (a + h).cos())
                        }
                    })
                    .collect()
            })
            .collect();
        let mut grid = Self {
            domain,
            kind,
            spec,
            patches,
            edges,
            centers,
            radial_weights,
            angular_weights,
            measures: Vec::new(),
        };
        grid.measures = (0..grid.len())
            .map(|i| {
                let c = grid.cell(i);
                grid.radial_weights[c.ring] * grid.angular_weights[c.patch][c.angle]
            })
            .collect();
        Ok(grid)
    }

    /// Whole-space grid sharing the radial nodes and angular spacing of `self`,
    /// aligned so that cone cell centers are also whole-space cell centers
    /// whenever the cone angle allows it.
    pub fn full_space(&self) -> Result<Self> {
        let h = self.angular_step(0);
        let span = if self.dim() == 2 { 2.0 * PI } else { PI };
        let cells = (span / h).round() as usize;
        Self::new(
            self.domain,
            GridKind::FullSpace,
            GridSpec {
                angular: cells,
                ..self.spec
            },
        )
    }

    /// Same radial and angular resolution on a different set of patches.
    pub fn with_kind(&self, kind: GridKind) -> Result<Self> {
        if kind == GridKind::FullSpace {
            return self.full_space();
        }
        if self.kind != GridKind::FullSpace {
            return Self::new(self.domain, kind, self.spec);
        }
        // Keep the angular step of the whole-space grid on the cone patches.
        let probe = Self::new(self.domain, kind, GridSpec { angular: 4, ..self.spec })?;
        let span = probe.patches[0].hi - probe.patches[0].lo;
        let cells = ((span / self.angular_step(0)).round() as usize).max(1);
        Self::new(self.domain, kind, GridSpec { angular: cells, ..self.spec })
    }

    pub fn domain(&self) -> &ConeDomain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn patches(&self) -> &[Patch] {
        &self.patches
    }

    pub fn patch_of(&self, side: Side) -> Option<usize> {
        self.patches.iter().position(|p| p.side == Some(side))
    }

    pub fn radial(&self) -> usize {
        self.spec.radial
    }

    pub fn angular(&self) -> usize {
        self.spec.angular
    }

    pub fn len(&self) -> usize {
        self.patches.len() * self.spec.radial * self.spec.angular
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, patch: usize, ring: usize, angle: usize) -> usize {
        (patch * self.spec.radial + ring) * self.spec.angular + angle
    }

    pub fn cell(&self, index: usize) -> Cell {
        let j = self.spec.angular;
        let k = self.spec.radial;
        Cell {
            patch: index / (j * k),
            ring: (index / j) % k,
            angle: index % j,
        }
    }

    /// Cell edges in decreasing order, `K + 1` entries.
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn radius(&self, ring: usize) -> f64 {
        self.centers[ring]
    }

    pub fn radii(&self) -> &[f64] {
        &self.centers
    }

    pub fn r_min(&self) -> f64 {
        self.edges[self.spec.radial]
    }

    pub fn r_max(&self) -> f64 {
        self.spec.r_max
    }

    pub fn angular_step(&self, patch: usize) -> f64 {
        self.patches[patch].width() / self.spec.angular as f64
    }

    pub fn angle(&self, patch: usize, j: usize) -> f64 {
        let p = &self.patches[patch];
        p.lo + (j as f64 + 0.5) * self.angular_step(patch)
    }

    /// Surface weights of the unit sphere carried by the cells of a patch.
    pub fn angular_weights(&self, patch: usize) -> &[f64] {
        &self.angular_weights[patch]
    }

    /// `∫ r^{n-1} dr` over each radial cell.
    pub fn radial_weights(&self) -> &[f64] {
        &self.radial_weights
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn measure(&self, index: usize) -> f64 {
        self.measures[index]
    }

    /// Exact measure of the truncated region covered by the grid.
    pub fn analytic_measure(&self) -> f64 {
        let n = self.dim() as i32;
        let radial = (self.r_max().powi(n) - self.r_min().powi(n)) / n as f64;
        let angular: f64 = self
            .patches
            .iter()
            .map(|p| {
                if self.dim() == 2 {
                    p.width()
                } else {
                    2.0 * PI * (p.lo.cos() - p.hi.cos())
                }
            })
            .sum();
        radial * angular
    }

    pub fn sample(&self, index: usize) -> Sample {
        let c = self.cell(index);
        self.sample_at(c.patch, self.radius(c.ring), self.angle(c.patch, c.angle))
    }

    pub fn sample_at(&self, patch: usize, r: f64, angle: f64) -> Sample {
        let x = [r * angle.sin(), r * angle.cos()];
        let side = match self.patches[patch].side {
            Some(s) => Some(s),
            None => {
                let mut found = None;
                for s in [Side::Plus, Side::Minus] {
                    if self.domain.relative_angle(angle, s).abs() < self.domain.half_angle() {
                        found = Some(s);
                    }
                }
                found
            }
        };
        let rel = self
            .domain
            .relative_angle(angle, side.unwrap_or(Side::Plus));
        Sample {
            r,
            angle,
            x,
            side,
            rel,
        }
    }

    /// Meridian Cartesian coordinates of a cell center.
    pub fn point(&self, index: usize) -> [f64; 2] {
        self.sample(index).x
    }

    /// Cell reached by the point reflection `x ↦ -x`, when it is on the grid.
    pub fn antipode(&self, patch: usize, j: usize) -> Option<(usize, usize)> {
        let big_j = self.spec.angular;
        match (self.dim(), self.kind) {
            (2, GridKind::Double) => Some((1 - patch, j)),
            (3, GridKind::Double) => Some((1 - patch, big_j - 1 - j)),
            (2, GridKind::FullSpace) if big_j.is_multiple_of(2) => Some((0, (j + big_j / 2) % big_j)),
            (3, GridKind::FullSpace) => Some((0, big_j - 1 - j)),
            _ => None,
        }
    }

    /// Fractional angular index of an absolute angle on a patch
    /// (cell centers sit at integer values).
    pub fn fractional_angle_index(&self, patch: usize, angle: f64) -> f64 {
        let p = &self.patches[patch];
        let mut a = angle;
        if p.periodic {
            a = p.lo + (a - p.lo).rem_euclid(p.width());
        }
        (a - p.lo) / self.angular_step(patch) - 0.5
    }

    /// Linear interpolation of per-patch angular data at an absolute angle.
    /// Values outside the outermost cell centers are extrapolated linearly.
    pub fn interpolate_angle(&self, patch: usize, row: &[f64], angle: f64) -> f64 {
        let big_j = row.len();
        let mut s = self.fractional_angle_index(patch, angle);
        // Aligned grids land on cell centers up to rounding; copy those exactly.
        let nearest = s.round();
        if (s - nearest).abs() < 1e-9 {
            s = nearest;
        }
        if self.patches[patch].periodic {
            let s = s.rem_euclid(big_j as f64);
            let i0 = s.floor() as usize % big_j;
            let i1 = (i0 + 1) % big_j;
            let t = s - s.floor();
            return row[i0] * (1.0 - t) + row[i1] * t;
        }
        let i0 = (s.floor().max(0.0) as usize).min(big_j - 2);
        let t = s - i0 as f64;
        row[i0] * (1.0 - t) + row[i0 + 1] * t
    }

    pub fn same_shape(&self, other: &PolarGrid) -> bool {
        self.kind == other.kind && self.spec == other.spec && self.domain == other.domain
    }
}

fn cone_patch(domain: &ConeDomain, side: Side) -> Patch {
    let w = domain.half_angle();
    let (lo, hi) = if domain.dim() == 2 {
        let axis = match side {
            Side::Plus => domain.axis_angle(),
            Side::Minus => domain.axis_angle() + PI,
        };
        (axis - w, axis + w)
    } else {
        match side {
            Side::Plus => (0.0, w),
            Side::Minus => (PI - w, PI),
        }
    };
    Patch {
        lo,
        hi,
        periodic: false,
        side: Some(side),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn spec(angular: usize) -> GridSpec {
        GridSpec::reaching(1e-6, 0.9, 10.0, angular)
    }

    #[test]
    fn measures_are_positive_and_sum_to_analytic_total() {
        for dim in [2, 3] {
            for kind in [GridKind::Plus, GridKind::Double, GridKind::FullSpace] {
                let g = PolarGrid::new(ConeDomain::standard(dim), kind, spec(12)).unwrap();
                assert!(g.measures().iter().all(|m| *m > 0.0));
                let total: f64 = g.measures().iter().sum();
                let exact = g.analytic_measure();
                assert!((total - exact).abs() <= 1e-12 * exact, "{dim} {kind:?}");
            }
        }
        // Quarter-annulus check against a value computed by hand.
        let g = PolarGrid::new(ConeDomain::standard(2), GridKind::Plus, spec(12)).unwrap();
        let exact = FRAC_PI_4 * (100.0 - g.r_min().powi(2));
        assert!((g.analytic_measure() - exact).abs() < 1e-12);
    }

    #[test]
    fn cone_grid_recovered_from_whole_space() {
        for dim in [2, 3] {
            let cone = PolarGrid::new(ConeDomain::standard(dim), GridKind::Double, spec(12)).unwrap();
            let back = cone.full_space().unwrap().with_kind(GridKind::Double).unwrap();
            assert_eq!(back.spec(), cone.spec(), "{dim}");
        }
    }

    #[test]
    fn geometric_spacing() {
        let g = PolarGrid::new(ConeDomain::standard(2), GridKind::Plus, spec(8)).unwrap();
        for w in g.radii().windows(2) {
            assert!((w[1] / w[0] - 0.9).abs() < 1e-12);
        }
        assert!(g.r_min() <= 1e-6 && g.r_min() > 0.9e-6);
    }

    #[test]
    fn rejects_small_grids() {
        let s = GridSpec {
            q: 0.9,
            r_max: 1.0,
            radial: 2,
            angular: 8,
        };
        assert!(matches!(
            PolarGrid::new(ConeDomain::standard(2), GridKind::Plus, s),
            Err(ConeError::GridTooSmall { .. })
        ));
        let s = GridSpec {
            q: 1.2,
            r_max: 1.0,
            radial: 20,
            angular: 8,
        };
        assert!(PolarGrid::new(ConeDomain::standard(2), GridKind::Plus, s).is_err());
    }

    #[test]
    fn full_space_cells_align_with_cone_cells() {
        let g = PolarGrid::new(ConeDomain::standard(2), GridKind::Double, spec(8)).unwrap();
        let full = g.full_space().unwrap();
        assert_eq!(full.angular(), 32);
        for j in 0..8 {
            let a = g.angle(0, j);
            let s = full.fractional_angle_index(0, a);
            assert!((s - s.round()).abs() < 1e-9);
        }
    }

    #[test]
    fn antipode_is_an_involution() {
        for dim in [2, 3] {
            let g = PolarGrid::new(ConeDomain::standard(dim), GridKind::Double, spec(6)).unwrap();
            for p in 0..2 {
                for j in 0..6 {
                    let (p2, j2) = g.antipode(p, j).unwrap();
                    assert_eq!(g.antipode(p2, j2), Some((p, j)));
                    let a = g.sample_at(p, 1.0, g.angle(p, j)).x;
                    let b = g.sample_at(p2, 1.0, g.angle(p2, j2)).x;
                    assert!((a[0] + b[0]).abs() < 1e-12 || dim == 3);
                    assert!((a[1] + b[1]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn samples_know_their_side() {
        let g = PolarGrid::new(ConeDomain::standard(2), GridKind::FullSpace, spec(16)).unwrap();
        let plus = g.sample_at(0, 1.0, 0.1);
        assert_eq!(plus.side, Some(Side::Plus));
        let out = g.sample_at(0, 1.0, 1.2);
        assert_eq!(out.side, None);
        let minus = g.sample_at(0, 1.0, PI - 0.1);
        assert_eq!(minus.side, Some(Side::Minus));
        assert!((minus.rel + 0.1).abs() < 1e-12);
    }
}
