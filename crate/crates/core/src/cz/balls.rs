//! Ball queries and distances on a single planar patch.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::grid::PolarGrid;

/// Absolute angle of a point, shifted by a multiple of `2π` towards the
/// middle of the patch.
fn patch_angle(grid: &PolarGrid, patch: usize, x: [f64; 2]) -> f64 {
    let p = grid.patches()[patch];
    let mid = 0.5 * (p.lo + p.hi);
    let a = x[0].atan2(x[1]);
    a + 2.0 * PI * ((mid - a) / (2.0 * PI)).round()
}

/// Angular index range `[lo, hi]` (inclusive, possibly empty) of the cells
/// of `ring` whose centers satisfy `|y - c| < ρ`, before exact filtering.
fn ring_span(
    grid: &PolarGrid,
    patch: usize,
    ring: usize,
    center: [f64; 2],
    radius: f64,
) -> Option<(usize, usize)> {
    let big_j = grid.angular();
    let r = grid.radius(ring);
    let c = center[0].hypot(center[1]);
    if c == 0.0 || r == 0.0 {
        return (r < radius).then_some((0, big_j - 1));
    }
    let kappa = (r * r + c * c - radius * radius) / (2.0 * r * c);
    if kappa >= 1.0 {
        return None;
    }
    if kappa <= -1.0 {
        return Some((0, big_j - 1));
    }
    let half = kappa.acos();
    let phi = patch_angle(grid, patch, center);
    // One cell of slack on both sides; callers filter exactly.
    let lo = grid.fractional_angle_index(patch, phi - half).floor() - 1.0;
    let hi = grid.fractional_angle_index(patch, phi + half).ceil() + 1.0;
    if hi < 0.0 || lo > (big_j - 1) as f64 {
        return None;
    }
    Some((lo.max(0.0) as usize, (hi as usize).min(big_j - 1)))
}

/// Ring index range (inclusive) whose radii may lie within `radius` of a
/// point at distance `c` from the vertex.
fn ring_range(grid: &PolarGrid, c: f64, radius: f64) -> Option<(usize, usize)> {
    let radii = grid.radii();
    // Radii decrease with the index.
    let first = radii.partition_point(|r| *r >= c + radius);
    let last = radii.partition_point(|r| *r > c - radius);
    if first >= last {
        return None;
    }
    Some((first, last - 1))
}

/// Cells of one patch whose centers lie in the open ball `B(center, radius)`,
/// in increasing index order.
pub fn cells_in_ball(grid: &PolarGrid, patch: usize, center: [f64; 2], radius: f64) -> Vec<usize> {
    let c = center[0].hypot(center[1]);
    let mut out = Vec::new();
    let Some((k0, k1)) = ring_range(grid, c, radius) else {
        return out;
    };
    for k in k0..=k1 {
        if let Some((j0, j1)) = ring_span(grid, patch, k, center, radius) {
            for j in j0..=j1 {
                let i = grid.index(patch, k, j);
                let y = grid.point(i);
                if (y[0] - center[0]).hypot(y[1] - center[1]) < radius {
                    out.push(i);
                }
            }
        }
    }
    out
}

/// Euclidean distance between two grid cell centers.
pub fn cell_distance(grid: &PolarGrid, a: usize, b: usize) -> f64 {
    let (x, y) = (grid.point(a), grid.point(b));
    (x[0] - y[0]).hypot(x[1] - y[1])
}

#[derive(PartialEq)]
struct Entry {
    dist: f64,
    cell: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on distance, ties broken by cell index.
        other.dist.total_cmp(&self.dist).then_with(|| other.cell.cmp(&self.cell))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Distance from every cell of a patch to the nearest source cell, with the
/// source that realizes it.
///
/// Dijkstra over the 8-neighbour cell graph, where each cell inherits the
/// nearest source of a neighbour and measures the straight-line distance to
/// it. The reported distance is always an attained Euclidean distance to a
/// source cell.
pub fn distance_to_set(grid: &PolarGrid, patch: usize, source: &[bool]) -> (Vec<f64>, Vec<usize>) {
    let big_k = grid.radial();
    let big_j = grid.angular();
    let base = grid.index(patch, 0, 0);
    let count = big_k * big_j;
    let mut dist = vec![f64::INFINITY; count];
    let mut nearest = vec![usize::MAX; count];
    let mut heap = BinaryHeap::new();
    for local in 0..count {
        if source[local] {
            dist[local] = 0.0;
            nearest[local] = local;
            heap.push(Entry { dist: 0.0, cell: local });
        }
    }
    let points: Vec<[f64; 2]> = (0..count).map(|l| grid.point(base + l)).collect();
    let between = |a: usize, b: usize| {
        let (x, y) = (points[a], points[b]);
        (x[0] - y[0]).hypot(x[1] - y[1])
    };
    while let Some(Entry { dist: d, cell }) = heap.pop() {
        if d > dist[cell] {
            continue;
        }
        let (k, j) = (cell / big_j, cell % big_j);
        for dk in -1i64..=1 {
            for dj in -1i64..=1 {
                let (nk, nj) = (k as i64 + dk, j as i64 + dj);
                if (dk == 0 && dj == 0)
                    || nk < 0
                    || nj < 0
                    || nk >= big_k as i64
                    || nj >= big_j as i64
                {
                    continue;
                }
                let nb = nk as usize * big_j + nj as usize;
                let candidate = between(nb, nearest[cell]);
                if candidate < dist[nb] {
                    dist[nb] = candidate;
                    nearest[nb] = nearest[cell];
                    heap.push(Entry { dist: candidate, cell: nb });
                }
            }
        }
    }
    (dist, nearest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConeDomain;
    use crate::grid::{GridKind, GridSpec};

    fn grid(kind: GridKind) -> PolarGrid {
        let spec = GridSpec::reaching(1e-3, 0.9, 4.0, 20);
        PolarGrid::new(ConeDomain::standard(2), kind, spec).unwrap()
    }

    #[test]
    fn ball_query_matches_brute_force() {
        for kind in [GridKind::Plus, GridKind::Double] {
            let g = grid(kind);
            for patch in 0..g.patches().len() {
                for (center, radius) in [
                    ([0.1, 1.0], 0.5),
                    ([0.0, 0.0], 0.3),
                    ([-0.4, -0.5], 0.2),
                    ([0.6, 0.7], 0.05),
                    ([0.0, 3.0], 10.0),
                ] {
                    let fast = cells_in_ball(&g, patch, center, radius);
                    let slow: Vec<usize> = (0..g.len())
                        .filter(|&i| g.cell(i).patch == patch)
                        .filter(|&i| {
                            let y = g.point(i);
                            (y[0] - center[0]).hypot(y[1] - center[1]) < radius
                        })
                        .collect();
                    assert_eq!(fast, slow, "{kind:?} {center:?} {radius}");
                }
            }
        }
    }

    #[test]
    fn distances_are_attained_and_close_to_exact() {
        let g = grid(GridKind::Plus);
        let n = g.len();
        let source: Vec<bool> = (0..n).map(|i| g.radius(g.cell(i).ring) < 0.5 && i % 7 == 0).collect();
        let (dist, nearest) = distance_to_set(&g, 0, &source);
        let sources: Vec<usize> = (0..n).filter(|&i| source[i]).collect();
        for i in 0..n {
            assert!((dist[i] - cell_distance(&g, i, nearest[i])).abs() < 1e-15);
            assert!(source[nearest[i]]);
            let exact = sources.iter().map(|&s| cell_distance(&g, i, s)).fold(f64::INFINITY, f64::min);
            assert!(dist[i] >= exact - 1e-15);
            assert!(dist[i] <= exact * 1.1 + 1e-12, "{i}: {} vs {exact}", dist[i]);
        }
    }
}
