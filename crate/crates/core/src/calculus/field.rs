use std::sync::Arc;

use crate::error::{ConeError, Result};
use crate::geometry::Side;
use crate::grid::{GridKind, PolarGrid, Sample};

/// Scalar samples on a polar grid.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<PolarGrid>,
    values: Vec<f64>,
    name: String,
    /// `(f(0⁺), f(0⁻))` when the family has known vertex limits.
    vertex_limits: Option<(f64, f64)>,
}

impl Field {
    pub fn new(grid: Arc<PolarGrid>, values: Vec<f64>, name: impl Into<String>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(ConeError::InvalidParameter(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            name: name.into(),
            vertex_limits: None,
        })
    }

    pub fn from_fn(
        grid: Arc<PolarGrid>,
        name: impl Into<String>,
        f: impl Fn(&Sample) -> f64,
    ) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.sample(i))).collect();
        Self {
            grid,
            values,
            name: name.into(),
            vertex_limits: None,
        }
    }

    pub fn zeros(grid: Arc<PolarGrid>) -> Self {
        let values = vec![0.0; grid.len()];
        Self {
            grid,
            values,
            name: "zero".into(),
            vertex_limits: Some((0.0, 0.0)),
        }
    }

    pub fn with_vertex_limits(mut self, limits: Option<(f64, f64)>) -> Self {
        self.vertex_limits = limits;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vertex_limits(&self) -> Option<(f64, f64)> {
        self.vertex_limits
    }

    pub fn get(&self, patch: usize, ring: usize, angle: usize) -> f64 {
        self.values[self.grid.index(patch, ring, angle)]
    }

    /// Values of one ring of one patch.
    pub fn ring(&self, patch: usize, ring: usize) -> &[f64] {
        let start = self.grid.index(patch, ring, 0);
        &self.values[start..start + self.grid.angular()]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| f(*v)).collect(),
            name: self.name.clone(),
            vertex_limits: None,
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.check_same_grid(other)?;
        Ok(Field {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(*a, *b))
                .collect(),
            name: self.name.clone(),
            vertex_limits: None,
        })
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Field {
        let mut out = self.map(|v| s * v);
        out.vertex_limits = self.vertex_limits.map(|(a, b)| (s * a, s * b));
        out
    }

    pub fn abs(&self) -> Field {
        self.map(f64::abs)
    }

    /// `|f|/r` sample-wise.
    pub fn over_r(&self) -> Field {
        let mut out = self.clone();
        for (i, v) in out.values.iter_mut().enumerate() {
            *v /= self.grid.radius(self.grid.cell(i).ring);
        }
        out.vertex_limits = None;
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn check_same_grid(&self, other: &Field) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_shape(&other.grid) {
            Ok(())
        } else {
            Err(ConeError::InvalidParameter(
                "fields live on different grids".into(),
            ))
        }
    }

    /// The part of a field living on one half-cone, on a single-patch grid.
    pub fn side(&self, side: Side) -> Result<Field> {
        let patch = self.grid.patch_of(side).ok_or_else(|| {
            ConeError::WrongVariant(format!("field has no {side:?} half-cone"))
        })?;
        if self.grid.patches().len() == 1 {
            return Ok(self.clone());
        }
        let kind = match side {
            Side::Plus => GridKind::Plus,
            Side::Minus => GridKind::Minus,
        };
        let grid = Arc::new(self.grid.with_kind(kind)?);
        let start = self.grid.index(patch, 0, 0);
        let values = self.values[start..start + grid.len()].to_vec();
        let limits = self.vertex_limits.map(|(a, b)| match side {
            Side::Plus => (a, a),
            Side::Minus => (b, b),
        });
        Ok(Field::new(grid, values, self.name.clone())?.with_vertex_limits(limits))
    }

    /// Joins two half-cone fields into one double-cone field.
    pub fn join_sides(plus: &Field, minus: &Field) -> Result<Field> {
        let (gp, gm) = (plus.grid(), minus.grid());
        if gp.kind() != GridKind::Plus
            || gm.kind() != GridKind::Minus
            || gp.spec() != gm.spec()
            || gp.domain() != gm.domain()
        {
            return Err(ConeError::InvalidParameter(
                "join needs matching plus and minus half-cone fields".into(),
            ));
        }
        let grid = Arc::new(gp.with_kind(GridKind::Double)?);
        let mut values = plus.values.clone();
        values.extend_from_slice(&minus.values);
        Field::new(grid, values, plus.name.clone())
    }
}

/// Polar components of a discrete gradient.
#[derive(Debug, Clone)]
pub struct GradientField {
    grid: Arc<PolarGrid>,
    /// `∂f/∂r`.
    pub radial: Vec<f64>,
    /// `r⁻¹ ∂f/∂θ`.
    pub angular: Vec<f64>,
}

impl GradientField {
    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    /// `|∇f|` as a field.
    pub fn magnitude(&self) -> Field {
        let values = self
            .radial
            .iter()
            .zip(&self.angular)
            .map(|(a, b)| a.hypot(*b))
            .collect();
        Field::new(self.grid.clone(), values, "|grad|").expect("shape matches")
    }

    pub fn radial_field(&self) -> Field {
        Field::new(self.grid.clone(), self.radial.clone(), "d/dr").expect("shape matches")
    }
}

/// Derivative at `x` of the quadratic through three nodes.
pub(crate) fn lagrange3_derivative(xs: [f64; 3], fs: [f64; 3], x: f64) -> f64 {
    let [x0, x1, x2] = xs;
    let d0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
    let d2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
    // d0 + d1 + d2 = 0, so constants differentiate to exactly zero.
    (fs[0] - fs[1]) * d0 + (fs[2] - fs[1]) * d2
}

/// Finite-difference gradient at one cell of `value(patch, ring, angle)`.
///
/// Three-point stencils throughout: centered in the interior, one-sided at
/// the first and last ring and at the angular edges of non-periodic patches.
pub(crate) fn gradient_at(
    grid: &PolarGrid,
    patch: usize,
    ring: usize,
    angle: usize,
    value: &dyn Fn(usize, usize, usize) -> f64,
) -> (f64, f64) {
    let big_k = grid.radial();
    let big_j = grid.angular();
    let k0 = ring.clamp(1, big_k - 2) - 1;
    let rs = [grid.radius(k0), grid.radius(k0 + 1), grid.radius(k0 + 2)];
    let fr = [
        value(patch, k0, angle),
        value(patch, k0 + 1, angle),
        value(patch, k0 + 2, angle),
    ];
    let dr = lagrange3_derivative(rs, fr, grid.radius(ring));

    let h = grid.angular_step(patch);
    let f = |j: usize| value(patch, ring, j);
    let dtheta = if grid.patches()[patch].periodic {
        let prev = (angle + big_j - 1) % big_j;
        let next = (angle + 1) % big_j;
        (f(next) - f(prev)) / (2.0 * h)
    } else if angle == 0 {
        (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h)
    } else if angle == big_j - 1 {
        (3.0 * f(big_j - 1) - 4.0 * f(big_j - 2) + f(big_j - 3)) / (2.0 * h)
    } else {
        (f(angle + 1) - f(angle - 1)) / (2.0 * h)
    };
    (dr, dtheta / grid.radius(ring))
}

pub fn gradient(f: &Field) -> Result<GradientField> {
    let grid = f.grid_arc().clone();
    if grid.radial() < 3 || grid.angular() < 3 {
        return Err(ConeError::GridTooSmall {
            radial: grid.radial(),
            angular: grid.angular(),
        });
    }
    let lookup = |p: usize, k: usize, j: usize| f.values()[grid.index(p, k, j)];
    let mut radial = Vec::with_capacity(grid.len());
    let mut angular = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let c = grid.cell(i);
        let (dr, da) = gradient_at(&grid, c.patch, c.ring, c.angle, &lookup);
        radial.push(dr);
        angular.push(da);
    }
    Ok(GradientField {
        grid,
        radial,
        angular,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConeDomain;
    use crate::grid::{GridKind, GridSpec};

    fn grid(q: f64, angular: usize) -> Arc<PolarGrid> {
        let spec = GridSpec::reaching(0.05, q, 2.0, angular);
        Arc::new(PolarGrid::new(ConeDomain::standard(2), GridKind::Plus, spec).unwrap())
    }

    #[test]
    fn constant_has_zero_gradient() {
        let g = grid(0.9, 12);
        let f = Field::from_fn(g, "c", |_| 3.5);
        let d = gradient(&f).unwrap();
        assert!(d.radial.iter().chain(&d.angular).all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn linear_radial_is_exact() {
        let g = grid(0.9, 12);
        let f = Field::from_fn(g, "r", |s| s.r);
        let d = gradient(&f).unwrap();
        assert!(d.radial.iter().all(|v| (v - 1.0).abs() < 1e-10));
        assert!(d.angular.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn quadratic_profile_converges_at_second_order() {
        // f = r² cos θ: ∂_r f = 2r cos θ, r⁻¹∂_θ f = -r sin θ.
        let mut errors = Vec::new();
        for (q, j) in [(0.9, 12), (0.95, 24), (0.975, 48)] {
            let g = grid(q, j);
            let f = Field::from_fn(g.clone(), "r2cos", |s| s.r * s.r * s.angle.cos());
            let d = gradient(&f).unwrap();
            let mut err: f64 = 0.0;
            for i in 0..g.len() {
                let s = g.sample(i);
                let er = 2.0 * s.r * s.angle.cos();
                let ea = -s.r * s.angle.sin();
                err = err
                    .max((d.radial[i] - er).abs() / s.r)
                    .max((d.angular[i] - ea).abs() / s.r);
            }
            errors.push(err);
        }
        let order1 = (errors[0] / errors[1]).log2();
        let order2 = (errors[1] / errors[2]).log2();
        assert!(order1 > 1.8 && order2 > 1.8, "{errors:?}");
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let g = grid(0.9, 12);
        assert!(Field::new(g, vec![0.0; 3], "x").is_err());
    }
}
