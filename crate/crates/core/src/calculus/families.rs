//! Named test fields.
//!
//! Families are parsed from strings like `logcounter(0.25)`, `radial_power(1)`
//! or `gaussian(0.3,1,0.5)`; parameters are optional where a default exists.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::field::Field;
use crate::error::{ConeError, Result};
use crate::grid::{PolarGrid, Sample};
use crate::quad::plateau;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TestFamily {
    /// `sign(x_n) |ln r|^{-β}` on `r ≤ 1/4`, smoothly cut off on `[1/4, 1/2]`.
    LogCounter {
        beta: f64,
    },
    /// `e^{-r}`.
    RadialExp,
    /// `r^a e^{-r}`.
    RadialPower {
        a: f64,
    },
    /// `r^a e^{-r} (1 + u)²/4`, `u` the angle from the axis over `ω`.
    AngularBump {
        a: f64,
    },
    /// `sign(x_n) e^{-r²}`: vertex limits `±1`.
    Jump,
    /// `(1 - r)_+`.
    LipschitzCompact,
    Constant {
        c: f64,
    },
    /// `exp(-|x - c|²/s²)` in meridian coordinates.
    Gaussian {
        cx: f64,
        cy: f64,
        s: f64,
    },
    /// `x' e^{-r²}`.
    Dipole,
}

impl TestFamily {
    pub fn name(&self) -> &'static str {
        match self {
            Self::LogCounter { .. } => "logcounter",
            Self::RadialExp => "radial_exp",
            Self::RadialPower { .. } => "radial_power",
            Self::AngularBump { .. } => "angular_bump",
            Self::Jump => "jump",
            Self::LipschitzCompact => "lipschitz_compact",
            Self::Constant { .. } => "constant",
            Self::Gaussian { .. } => "gaussian",
            Self::Dipole => "dipole",
        }
    }

    /// `(f(0⁺), f(0⁻))` where the vertex limits exist.
    pub fn vertex_limits(&self) -> Option<(f64, f64)> {
        match *self {
            Self::LogCounter { .. } | Self::Dipole => Some((0.0, 0.0)),
            Self::RadialExp | Self::LipschitzCompact => Some((1.0, 1.0)),
            Self::RadialPower { a } | Self::AngularBump { a } => match a {
                a if a > 0.0 => Some((0.0, 0.0)),
                a if a == 0.0 && matches!(self, Self::RadialPower { .. }) => Some((1.0, 1.0)),
                _ => None,
            },
            Self::Jump => Some((1.0, -1.0)),
            Self::Constant { c } => Some((c, c)),
            Self::Gaussian { cx, cy, s } => {
                let v = (-(cx * cx + cy * cy) / (s * s)).exp();
                Some((v, v))
            }
        }
    }

    pub fn evaluate(&self, s: &Sample, half_angle: f64) -> f64 {
        let side = axis_sign(s);
        match *self {
            Self::LogCounter { beta } => {
                if s.r >= 0.5 {
                    0.0
                } else {
                    side * s.r.ln().abs().powf(-beta) * plateau(s.r, 0.25, 0.5)
                }
            }
            Self::RadialExp => (-s.r).exp(),
            Self::RadialPower { a } => s.r.powf(a) * (-s.r).exp(),
            Self::AngularBump { a } => {
                let u = s.rel / half_angle;
                s.r.powf(a) * (-s.r).exp() * (1.0 + u) * (1.0 + u) / 4.0
            }
            Self::Jump => side * (-s.r * s.r).exp(),
            Self::LipschitzCompact => (1.0 - s.r).max(0.0),
            Self::Constant { c } => c,
            Self::Gaussian { cx, cy, s: width } => {
                let dx = s.x[0] - cx;
                let dy = s.x[1] - cy;
                (-(dx * dx + dy * dy) / (width * width)).exp()
            }
            Self::Dipole => s.x[0] * (-s.r * s.r).exp(),
        }
    }
}

/// Sign of the component along the axis of `Ω⁺`.
fn axis_sign(s: &Sample) -> f64 {
    match s.side {
        Some(side) => side.sign(),
        None => {
            if s.rel.cos() >= 0.0 {
                1.0
            } else {
                -1.0
            }
        }
    }
}

impl fmt::Display for TestFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::LogCounter { beta } => write!(f, "logcounter({beta})"),
            Self::RadialPower { a } => write!(f, "radial_power({a})"),
            Self::AngularBump { a } => write!(f, "angular_bump({a})"),
            Self::Constant { c } => write!(f, "constant({c})"),
            Self::Gaussian { cx, cy, s } => write!(f, "gaussian({cx},{cy},{s})"),
            _ => f.write_str(self.name()),
        }
    }
}

impl FromStr for TestFamily {
    type Err = ConeError;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let (head, args) = match text.find('(') {
            Some(open) => {
                let close = text
                    .strip_suffix(')')
                    .ok_or_else(|| ConeError::UnknownField(text.to_string()))?;
                (&text[..open], &close[open + 1..])
            }
            None => (text, ""),
        };
        let nums: Vec<f64> = if args.trim().is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|a| a.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| ConeError::UnknownField(text.to_string()))?
        };
        if nums.iter().any(|v| !v.is_finite()) {
            return Err(ConeError::UnknownField(text.to_string()));
        }
        let arg = |i: usize, default: f64| nums.get(i).copied().unwrap_or(default);
        let family = match head.trim() {
            "logcounter" => Self::LogCounter { beta: arg(0, 1.0) },
            "radial_exp" => Self::RadialExp,
            "radial_power" => Self::RadialPower { a: arg(0, 1.0) },
            "angular_bump" => Self::AngularBump { a: arg(0, 1.0) },
            "jump" => Self::Jump,
            "lipschitz_compact" => Self::LipschitzCompact,
            "constant" => Self::Constant { c: arg(0, 1.0) },
            "gaussian" => Self::Gaussian {
                cx: arg(0, 0.0),
                cy: arg(1, 0.0),
                s: arg(2, 1.0),
            },
            "dipole" => Self::Dipole,
            _ => return Err(ConeError::UnknownField(text.to_string())),
        };
        let max_args = match family {
            Self::Gaussian { .. } => 3,
            Self::LogCounter { .. }
            | Self::RadialPower { .. }
            | Self::AngularBump { .. }
            | Self::Constant { .. } => 1,
            _ => 0,
        };
        if nums.len() > max_args {
            return Err(ConeError::UnknownField(text.to_string()));
        }
        if let Self::LogCounter { beta } = family {
            if !(beta > 0.0) {
                return Err(ConeError::InvalidParameter("β must be positive".into()));
            }
        }
        if let Self::Gaussian { s, .. } = family {
            if !(s > 0.0) {
                return Err(ConeError::InvalidParameter(
                    "gaussian width must be positive".into(),
                ));
            }
        }
        Ok(family)
    }
}

impl TryFrom<String> for TestFamily {
    type Error = ConeError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TestFamily> for String {
    fn from(f: TestFamily) -> String {
        f.to_string()
    }
}

pub fn make_test_field(grid: Arc<PolarGrid>, family: TestFamily) -> Field {
    let w = grid.domain().half_angle();
    Field::from_fn(grid, family.to_string(), |s| family.evaluate(s, w))
        .with_vertex_limits(family.vertex_limits())
}

/// Parses `name` and builds the field.
pub fn make_named_field(grid: Arc<PolarGrid>, name: &str) -> Result<Field> {
    Ok(make_test_field(grid, name.parse()?))
}

/// The ten-member suite used by the Hardy and splitting checks.
pub fn standard_suite() -> Vec<TestFamily> {
    vec![
        TestFamily::RadialExp,
        TestFamily::RadialPower { a: 1.0 },
        TestFamily::RadialPower { a: 2.0 },
        TestFamily::RadialPower { a: 0.5 },
        TestFamily::AngularBump { a: 1.0 },
        TestFamily::AngularBump { a: 0.0 },
        TestFamily::Jump,
        TestFamily::LipschitzCompact,
        TestFamily::LogCounter { beta: 1.0 },
        TestFamily::Gaussian {
            cx: 0.3,
            cy: 1.0,
            s: 0.7,
        },
    ]
}

/// Fields depending on `r` only.
pub fn radial_suite() -> Vec<TestFamily> {
    vec![
        TestFamily::RadialExp,
        TestFamily::RadialPower { a: 1.0 },
        TestFamily::RadialPower { a: 2.0 },
        TestFamily::RadialPower { a: 0.5 },
        TestFamily::LipschitzCompact,
    ]
}

/// A named suite (`standard`, `radial`, `fullspace`) or a comma-separated
/// list of families such as `jump,logcounter(0.5)`.
pub fn parse_suite(text: &str) -> Result<Vec<TestFamily>> {
    match text.trim() {
        "standard" => return Ok(standard_suite()),
        "radial" => return Ok(radial_suite()),
        "fullspace" => return Ok(full_space_suite()),
        _ => {}
    }
    // Commas also separate arguments, so split only at depth zero.
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, ch) in text.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(text[start..i].parse()?);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(text[start..].parse()?);
    Ok(out)
}

/// Smooth fields on the whole plane used for restriction checks.
pub fn full_space_suite() -> Vec<TestFamily> {
    vec![
        TestFamily::Gaussian {
            cx: 0.0,
            cy: 0.0,
            s: 1.0,
        },
        TestFamily::Gaussian {
            cx: 0.5,
            cy: 0.5,
            s: 0.6,
        },
        TestFamily::Gaussian {
            cx: -1.0,
            cy: 0.3,
            s: 0.8,
        },
        TestFamily::Gaussian {
            cx: 0.2,
            cy: -1.5,
            s: 1.2,
        },
        TestFamily::Dipole,
    ]
}
