use super::field::Field;
use crate::error::{ConeError, Result};
use crate::grid::PolarGrid;
use crate::quad::pairwise_sum_by;

/// Over which caps the spherical mean defining the radial part is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapScope {
    /// Mean over `Ω ∩ S_r`, all caps of the grid together.
    All,
    /// Mean over each half-cone's own cap.
    PerPatch,
}

#[derive(Debug, Clone)]
pub struct RadialSplit {
    /// `f_r`, constant on each ring.
    pub radial: Field,
    /// `f_a = f - f_r`, mean zero on every ring.
    pub anti: Field,
}

/// σ-weighted mean of `values` over the given patches of one ring.
pub fn ring_mean(grid: &PolarGrid, values: &[f64], ring: usize, patches: &[usize]) -> f64 {
    let big_j = grid.angular();
    let count = patches.len() * big_j;
    let at = |i: usize| (patches[i / big_j], i % big_j);
    let num = pairwise_sum_by(count, |i| {
        let (p, j) = at(i);
        values[grid.index(p, ring, j)] * grid.angular_weights(p)[j]
    });
    let den = pairwise_sum_by(count, |i| {
        let (p, j) = at(i);
        grid.angular_weights(p)[j]
    });
    num / den
}

pub fn radial_split(f: &Field) -> Result<RadialSplit> {
    radial_split_with(f, CapScope::All)
}

pub fn radial_split_with(f: &Field, scope: CapScope) -> Result<RadialSplit> {
    let grid = f.grid();
    let all: Vec<usize> = (0..grid.patches().len()).collect();
    let mut radial = vec![0.0; grid.len()];
    for k in 0..grid.radial() {
        let groups: Vec<Vec<usize>> = match scope {
            CapScope::All => vec![all.clone()],
            CapScope::PerPatch => all.iter().map(|p| vec![*p]).collect(),
        };
        for group in groups {
            let mean = ring_mean(grid, f.values(), k, &group);
            for &p in &group {
                for j in 0..grid.angular() {
                    radial[grid.index(p, k, j)] = mean;
                }
            }
        }
    }
    let radial = Field::new(f.grid_arc().clone(), radial, format!("{}_r", f.name()))?;
    let anti = f.sub(&radial)?.with_name(format!("{}_a", f.name()));
    Ok(RadialSplit { radial, anti })
}

/// `f_e = (f + f∘S)/2`, `f_o = (f - f∘S)/2` with `S x = -x`.
pub fn even_odd_split(f: &Field) -> Result<(Field, Field)> {
    let grid = f.grid();
    if grid.antipode(0, 0).is_none() {
        return Err(ConeError::WrongVariant(
            "even/odd split needs a field on both half-cones".into(),
        ));
    }
    let mut even = vec![0.0; grid.len()];
    let mut odd = vec![0.0; grid.len()];
    for i in 0..grid.len() {
        let c = grid.cell(i);
        let (p2, j2) = grid.antipode(c.patch, c.angle).expect("checked above");
        let mirrored = f.values()[grid.index(p2, c.ring, j2)];
        let v = f.values()[i];
        even[i] = 0.5 * (v + mirrored);
        odd[i] = 0.5 * (v - mirrored);
    }
    let arc = f.grid_arc().clone();
    Ok((
        Field::new(arc.clone(), even, format!("{}_e", f.name()))?,
        Field::new(arc, odd, format!("{}_o", f.name()))?,
    ))
}
