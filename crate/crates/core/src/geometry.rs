//! Double cones, balls of a half-cone, the norm-preserving half-space map and
//! the degree-0 cutoff used by the extension operator.
//!
//! Angles follow one convention throughout the crate. In the plane a point is
//! written `x = (r sin φ, r cos φ)`, so `φ` is the signed angle from the
//! positive `x₂` axis. In three dimensions only axisymmetric configurations
//! are handled and `θ ∈ [0, π]` is the polar angle from the positive `x₃`
//! axis.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, ConeError, Result};
use crate::quad::{adaptive_simpson, plateau};

/// Which of the two half-cones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// Shape of the double cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Revolution cone around the last coordinate axis.
    Axial,
    /// The planar cone `{xy > 0}` made of the first and third quadrants.
    Quadrant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeDomain {
    dim: usize,
    half_angle: f64,
    variant: Variant,
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut x = a % (2.0 * PI);
    if x <= -PI {
        x += 2.0 * PI;
    } else if x > PI {
        x -= 2.0 * PI;
    }
    x
}

impl ConeDomain {
    pub fn new(dim: usize, half_angle: f64, variant: Variant) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(ConeError::Unsupported(format!(
                "dimension {dim} (only 2 and 3)"
            )));
        }
        if !(half_angle > 0.0 && half_angle < FRAC_PI_2) {
            return Err(invalid(format!(
                "half-angle {half_angle} must lie in (0, π/2)"
            )));
        }
        if variant == Variant::Quadrant && (dim != 2 || (half_angle - FRAC_PI_4).abs() > 1e-12) {
            return Err(invalid("the quadrant cone is planar with half-angle π/4"));
        }
        Ok(Self {
            dim,
            half_angle,
            variant,
        })
    }

    /// `x₁² + … + x_{n-1}² < x_n²`.
    pub fn standard(dim: usize) -> Self {
        Self::new(dim, FRAC_PI_4, Variant::Axial).expect("standard cone is valid")
    }

    pub fn quadrant() -> Self {
        Self::new(2, FRAC_PI_4, Variant::Quadrant).expect("quadrant cone is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_angle(&self) -> f64 {
        self.half_angle
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Planar angle `φ` of the axis of `Ω⁺`.
    pub fn axis_angle(&self) -> f64 {
        match self.variant {
            Variant::Axial => 0.0,
            Variant::Quadrant => FRAC_PI_4,
        }
    }

    /// Angle of a direction measured from the axis of the given half-cone.
    /// Signed in the plane, nonnegative in 3D.
    pub fn relative_angle(&self, angle: f64, side: Side) -> f64 {
        if self.dim == 2 {
            let axis = match side {
                Side::Plus => self.axis_angle(),
                Side::Minus => self.axis_angle() + PI,
            };
            wrap_angle(angle - axis)
        } else {
            match side {
                Side::Plus => angle,
                Side::Minus => PI - angle,
            }
        }
    }

    /// Angular coordinate (`φ` or `θ`) of a point of the plane or of the meridian.
    pub fn angle_of(&self, point: &[f64]) -> Result<f64> {
        self.check_dim(point)?;
        let r = norm(point);
        if r == 0.0 {
            return Err(invalid("origin has no angle"));
        }
        Ok(if self.dim == 2 {
            point[0].atan2(point[1])
        } else {
            (point[2] / r).clamp(-1.0, 1.0).acos()
        })
    }

    /// Half-cone containing the point, if any.
    pub fn side_of(&self, point: &[f64]) -> Result<Option<Side>> {
        self.check_dim(point)?;
        if norm(point) == 0.0 {
            return Ok(None);
        }
        let angle = self.angle_of(point)?;
        for side in [Side::Plus, Side::Minus] {
            if self.relative_angle(angle, side).abs() < self.half_angle {
                return Ok(Some(side));
            }
        }
        Ok(None)
    }

    pub fn contains(&self, point: &[f64]) -> Result<bool> {
        Ok(self.side_of(point)?.is_some())
    }

    fn check_dim(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim {
            return Err(ConeError::DimensionMismatch {
                expected: self.dim,
                got: point.len(),
            });
        }
        Ok(())
    }

    /// Lebesgue measure of `B(center, radius) ∩ Ω⁺`.
    ///
    /// In the plane any center is allowed. In 3D the ball must be centered on
    /// the axis so that the intersection stays axisymmetric.
    pub fn ball_measure(&self, center: &[f64], radius: f64) -> Result<f64> {
        self.check_dim(center)?;
        if !(radius > 0.0) {
            return Err(invalid(format!("ball radius {radius} must be positive")));
        }
        let c = norm(center);
        if c == 0.0 {
            // Cone sector: ω R² in the plane, 2π(1 - cos ω) R³/3 in space.
            return Ok(self.unit_sector_measure() * radius.powi(self.dim as i32));
        }
        let center_angle = self.angle_of(center)?;
        let rel = self.relative_angle(center_angle, Side::Plus);
        if rel.abs() > self.half_angle + 1e-12 {
            return Err(invalid("ball center must lie in the closure of Ω⁺"));
        }
        let w = self.half_angle;
        if self.dim == 2 {
            let integrand = |phi: f64| {
                let (lo, hi) = ray_chord(c, rel, phi, radius);
                0.5 * (hi * hi - lo * lo)
            };
            Ok(split_integral(&integrand, -w, w, rel, c, radius))
        } else {
            if rel.abs() > 1e-12 {
                return Err(ConeError::Unsupported(
                    "3D balls must be centered on the axis".into(),
                ));
            }
            let integrand = |theta: f64| {
                let (lo, hi) = ray_chord(c, 0.0, theta, radius);
                2.0 * PI * theta.sin() * (hi.powi(3) - lo.powi(3)) / 3.0
            };
            Ok(split_integral(&integrand, 0.0, w, 0.0, c, radius))
        }
    }

    /// Measure of the part of the unit ball inside `Ω⁺`.
    pub fn unit_sector_measure(&self) -> f64 {
        if self.dim == 2 {
            self.half_angle
        } else {
            2.0 * PI * (1.0 - self.half_angle.cos()) / 3.0
        }
    }

    /// `ball_measure(2r) / ball_measure(r)`.
    pub fn doubling_ratio(&self, center: &[f64], radius: f64) -> Result<f64> {
        let small = self.ball_measure(center, radius)?;
        if !(small > 0.0) {
            return Err(ConeError::DegenerateBall);
        }
        Ok(self.ball_measure(center, 2.0 * radius)? / small)
    }
}

pub fn norm(p: &[f64]) -> f64 {
    p.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Radial extent `[lo, hi]` of `B(c·e(rel), R)` along the ray at angle `phi`.
fn ray_chord(c: f64, rel: f64, phi: f64, radius: f64) -> (f64, f64) {
    let t = c * (phi - rel).cos();
    let disc = radius * radius - c * c + t * t;
    if disc <= 0.0 {
        return (0.0, 0.0);
    }
    let s = disc.sqrt();
    let hi = t + s;
    if hi <= 0.0 {
        return (0.0, 0.0);
    }
    ((t - s).max(0.0), hi)
}

/// Integrates over `[a, b]`. When the vertex lies outside the ball the
/// integrand vanishes beyond the tangent directions `rel ± half` and has
/// square-root kinks there; the substitution `φ = rel + half·sin s` removes them.
fn split_integral(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel: f64, c: f64, radius: f64) -> f64 {
    let tol = 1e-14 * radius.powi(2).max(radius.powi(3));
    if c <= radius {
        return adaptive_simpson(f, a, b, tol);
    }
    let half = (radius / c).asin();
    let lo = a.max(rel - half);
    let hi = b.min(rel + half);
    if lo >= hi {
        return 0.0;
    }
    let to_s = |phi: f64| ((phi - rel) / half).clamp(-1.0, 1.0).asin();
    let g = |s: f64| f(rel + half * s.sin()) * half * s.cos();
    adaptive_simpson(&g, to_s(lo), to_s(hi), tol)
}

/// A ball `B(center, radius) ∩ Ω⁺` together with its three Whitney scales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeBall {
    pub center: [f64; 2],
    pub radius: f64,
    /// Inner scale: underline ball has radius `radius / c1`.
    pub c1: f64,
    /// Outer scale: overline ball has radius `radius * c2 / c1`.
    pub c2: f64,
}

impl ConeBall {
    pub fn new(center: [f64; 2], radius: f64, c1: f64) -> Self {
        Self {
            center,
            radius,
            c1,
            c2: 4.0 * c1,
        }
    }

    pub fn underline_radius(&self) -> f64 {
        self.radius / self.c1
    }

    pub fn overline_radius(&self) -> f64 {
        self.radius * self.c2 / self.c1
    }

    /// Distance from the ball (a subset of a convex cone) to the vertex.
    pub fn distance_to_vertex(&self) -> f64 {
        (norm(&self.center) - self.radius).max(0.0)
    }
}

/// The map `ψ₊` sending the upper half-space onto `Ω⁺` while preserving `|x|`.
///
/// In polar form it multiplies the angle from the axis by `2ω/π`; the source
/// region is the enlarged half-space cone of half-angle `π(ω+ε)/(2ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilipschitzConeMap {
    half_angle: f64,
    enlargement: f64,
}

/// Default cone enlargement: `min(0.1, (π/2 - ω)/2, ω/2)`.
pub fn default_enlargement(half_angle: f64) -> f64 {
    0.1_f64
        .min(0.5 * (FRAC_PI_2 - half_angle))
        .min(0.5 * half_angle)
}

impl BilipschitzConeMap {
    pub fn new(half_angle: f64, enlargement: f64) -> Result<Self> {
        if !(half_angle > 0.0 && half_angle < FRAC_PI_2) {
            return Err(invalid("half-angle must lie in (0, π/2)"));
        }
        if !(enlargement > 0.0 && half_angle + enlargement < FRAC_PI_2 && enlargement <= half_angle)
        {
            return Err(invalid(format!(
                "enlargement {enlargement} must satisfy 0 < ε ≤ ω and ω + ε < π/2"
            )));
        }
        Ok(Self {
            half_angle,
            enlargement,
        })
    }

    pub fn for_domain(domain: &ConeDomain) -> Self {
        let w = domain.half_angle();
        Self::new(w, default_enlargement(w)).expect("default enlargement is admissible")
    }

    pub fn half_angle(&self) -> f64 {
        self.half_angle
    }

    pub fn enlargement(&self) -> f64 {
        self.enlargement
    }

    /// Angular scale factor `2ω/π`.
    pub fn scale(&self) -> f64 {
        2.0 * self.half_angle / PI
    }

    /// Half-angle of the enlarged half-space cone, `π(ω+ε)/(2ω) > π/2`.
    pub fn source_half_angle(&self) -> f64 {
        PI * (self.half_angle + self.enlargement) / (2.0 * self.half_angle)
    }

    /// Half-angle of the enlarged target cone `ω + ε`.
    pub fn target_half_angle(&self) -> f64 {
        self.half_angle + self.enlargement
    }

    /// `ψ₊(x)`; the axis is the last coordinate.
    pub fn forward(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.apply(point, self.scale(), self.source_half_angle())
    }

    /// `ψ₊⁻¹(y)`. The angular relation is linear, so its inverse is explicit.
    pub fn inverse(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.apply(point, 1.0 / self.scale(), self.target_half_angle())
    }

    fn apply(&self, point: &[f64], a: f64, limit: f64) -> Result<Vec<f64>> {
        let n = point.len();
        if n < 2 {
            return Err(ConeError::DimensionMismatch {
                expected: 2,
                got: n,
            });
        }
        let r = norm(point);
        if r == 0.0 {
            return Ok(point.to_vec());
        }
        let theta = (point[n - 1] / r).clamp(-1.0, 1.0).acos();
        if theta >= limit {
            return Err(ConeError::OutsideSource);
        }
        let ratio = sin_ratio(a, theta);
        let mut out: Vec<f64> = point[..n - 1].iter().map(|x| ratio * x).collect();
        // x_n cos(aθ)/cos θ, written so that θ = π/2 is harmless.
        out.push(r * (a * theta).cos());
        Ok(out)
    }
}

/// `sin(aθ)/sin θ`, with its series expansion near the removable singularity.
fn sin_ratio(a: f64, theta: f64) -> f64 {
    if theta < 1e-4 {
        a * (1.0 + (1.0 - a * a) * theta * theta / 6.0)
    } else {
        (a * theta).sin() / theta.sin()
    }
}

/// Degree-0 homogeneous cutoff `m₊`: a smooth function of the angle from the
/// axis, equal to 1 on the closed upper half-space and vanishing outside the
/// enlarged half-space cone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousCutoff {
    inner: f64,
    outer: f64,
}

impl HomogeneousCutoff {
    pub fn new(map: &BilipschitzConeMap) -> Self {
        Self {
            inner: FRAC_PI_2,
            outer: map.source_half_angle(),
        }
    }

    /// Profile as a function of the angle from the axis.
    pub fn profile(&self, theta: f64) -> f64 {
        plateau(theta.abs(), self.inner, self.outer)
    }

    pub fn support_half_angle(&self) -> f64 {
        self.outer
    }

    pub fn value(&self, point: &[f64]) -> f64 {
        let r = norm(point);
        if r == 0.0 {
            return 0.0;
        }
        let n = point.len();
        let theta = (point[n - 1] / r).clamp(-1.0, 1.0).acos();
        self.profile(theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contains_examples() {
        let d = ConeDomain::standard(2);
        assert!(d.contains(&[0.0, 1.0]).unwrap());
        assert!(!d.contains(&[1.0, 0.0]).unwrap());
        assert!(!d.contains(&[0.0, 0.0]).unwrap());
        assert!(d.contains(&[0.0, -3.0]).unwrap());
        assert_eq!(d.side_of(&[0.1, -3.0]).unwrap(), Some(Side::Minus));
        assert!(matches!(
            d.contains(&[1.0, 2.0, 3.0]),
            Err(ConeError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn quadrant_membership() {
        let d = ConeDomain::quadrant();
        assert_eq!(d.side_of(&[1.0, 2.0]).unwrap(), Some(Side::Plus));
        assert_eq!(d.side_of(&[-1.0, -0.5]).unwrap(), Some(Side::Minus));
        assert_eq!(d.side_of(&[1.0, -2.0]).unwrap(), None);
    }

    #[test]
    fn rejects_wide_cones() {
        assert!(ConeDomain::new(2, FRAC_PI_2, Variant::Axial).is_err());
        assert!(ConeDomain::new(4, 0.3, Variant::Axial).is_err());
    }

    #[test]
    fn vertex_ball_is_a_sector() {
        let d = ConeDomain::standard(2);
        let m = d.ball_measure(&[0.0, 0.0], 3.0).unwrap();
        assert!((m - FRAC_PI_4 * 9.0).abs() < 1e-14);
        assert_eq!(d.doubling_ratio(&[0.0, 0.0], 0.7).unwrap(), 4.0);
        let d3 = ConeDomain::standard(3);
        assert!((d3.doubling_ratio(&[0.0, 0.0, 0.0], 1.3).unwrap() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn interior_disk_area() {
        let d = ConeDomain::standard(2);
        let m = d.ball_measure(&[0.0, 10.0], 1.0).unwrap();
        assert!((m - PI).abs() < 1e-6, "{m}");
        let d3 = ConeDomain::standard(3);
        let v = d3.ball_measure(&[0.0, 0.0, 10.0], 1.0).unwrap();
        assert!((v - 4.0 * PI / 3.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn ball_errors() {
        let d = ConeDomain::standard(2);
        assert!(d.ball_measure(&[0.0, 1.0], 0.0).is_err());
        assert!(d.ball_measure(&[1.0, 0.0], 1.0).is_err());
        let d3 = ConeDomain::standard(3);
        assert!(matches!(
            d3.ball_measure(&[0.1, 0.0, 1.0], 0.5),
            Err(ConeError::Unsupported(_))
        ));
    }

    #[test]
    fn psi_fixes_axis_and_preserves_norm() {
        let map = BilipschitzConeMap::new(FRAC_PI_4, 0.1).unwrap();
        let y = map.forward(&[0.0, 2.5]).unwrap();
        assert!(y[0].abs() < 1e-15 && (y[1] - 2.5).abs() < 1e-15);
        let y = map.forward(&[1.0, 0.0]).unwrap();
        // boundary of the half-space lands on the cone boundary
        assert!((y[0].atan2(y[1]) - FRAC_PI_4).abs() < 1e-14);
        assert!((norm(&y) - 1.0).abs() < 1e-15);
        assert!(matches!(
            map.forward(&[0.0, -1.0]),
            Err(ConeError::OutsideSource)
        ));
        assert_eq!(map.forward(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn sin_ratio_series_is_continuous() {
        let a = 0.5;
        let below = sin_ratio(a, 0.99999e-4);
        let above = sin_ratio(a, 1.00001e-4);
        assert!((below - above).abs() < 1e-12);
    }

    #[test]
    fn cutoff_examples() {
        let map = BilipschitzConeMap::new(FRAC_PI_4, 0.1).unwrap();
        let m = HomogeneousCutoff::new(&map);
        assert_eq!(m.value(&[0.0, 1.0]), 1.0);
        assert_eq!(m.value(&[0.0, -1.0]), 0.0);
        assert_eq!(m.value(&[0.0, 0.0]), 0.0);
        assert_eq!(m.value(&[1.0, 0.0]), 1.0);
    }

    #[test]
    fn enlargement_validation() {
        assert!(BilipschitzConeMap::new(FRAC_PI_4, 0.9).is_err());
        assert!(BilipschitzConeMap::new(0.05, 0.1).is_err());
        assert_eq!(default_enlargement(FRAC_PI_4), 0.1);
        assert_eq!(default_enlargement(0.05), 0.025);
    }
}
