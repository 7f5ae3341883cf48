//! Plain-text field dumps.
//!
//! ```text
//! n=2
//! omega=0.7853981633974483
//! variant=axial
//! K=3
//! J=8
//! q=0.5
//! rmax=1
//! r theta value      (K·J lines, ring-major, all patches per ring)
//! ```
//!
//! The variant tag names the domain (`axial` or `quadrant`) and, unless the
//! grid covers the double cone, the grid kind: `axial-plus`,
//! `quadrant-minus`, `axial-fullspace`. The bare tag `fullspace` means
//! `axial-fullspace`. `J` counts the angular cells of all patches.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::calculus::field::Field;
use crate::error::{ConeError, Result};
use crate::geometry::{ConeDomain, Variant};
use crate::grid::{GridKind, GridSpec, PolarGrid};

/// Largest number of samples a dump may declare.
pub const MAX_SAMPLES: usize = 50_000_000;

/// Relative tolerance when matching dumped coordinates to grid nodes.
const COORD_TOLERANCE: f64 = 1e-9;

pub fn variant_tag(grid: &PolarGrid) -> String {
    let domain = match grid.domain().variant() {
        Variant::Axial => "axial",
        Variant::Quadrant => "quadrant",
    };
    match grid.kind() {
        GridKind::Double => domain.to_string(),
        GridKind::FullSpace if domain == "axial" => "fullspace".to_string(),
        GridKind::Plus => format!("{domain}-plus"),
        GridKind::Minus => format!("{domain}-minus"),
        GridKind::FullSpace => format!("{domain}-fullspace"),
    }
}

fn parse_tag(tag: &str) -> Option<(Variant, GridKind)> {
    if tag == "fullspace" {
        return Some((Variant::Axial, GridKind::FullSpace));
    }
    let (domain, kind) = match tag.split_once('-') {
        Some((d, k)) => (d, Some(k)),
        None => (tag, None),
    };
    let variant = match domain {
        "axial" => Variant::Axial,
        "quadrant" => Variant::Quadrant,
        _ => return None,
    };
    let kind = match kind {
        None => GridKind::Double,
        Some("plus") => GridKind::Plus,
        Some("minus") => GridKind::Minus,
        Some("fullspace") => GridKind::FullSpace,
        Some(_) => return None,
    };
    Some((variant, kind))
}

fn columns(grid: &PolarGrid) -> usize {
    grid.angular() * grid.patches().len()
}

/// Grid index of the `col`-th column of ring `k`.
fn index_of(grid: &PolarGrid, k: usize, col: usize) -> usize {
    grid.index(col / grid.angular(), k, col % grid.angular())
}

pub fn write_field(f: &Field) -> String {
    let grid = f.grid();
    let spec = grid.spec();
    let mut out = String::new();
    let _ = writeln!(out, "n={}", grid.dim());
    let _ = writeln!(out, "omega={}", grid.domain().half_angle());
    let _ = writeln!(out, "variant={}", variant_tag(grid));
    let _ = writeln!(out, "K={}", spec.radial);
    let _ = writeln!(out, "J={}", columns(grid));
    let _ = writeln!(out, "q={}", spec.q);
    let _ = writeln!(out, "rmax={}", spec.r_max);
    for k in 0..grid.radial() {
        for col in 0..columns(grid) {
            let i = index_of(grid, k, col);
            let c = grid.cell(i);
            let _ = writeln!(
                out,
                "{} {} {}",
                grid.radius(k),
                grid.angle(c.patch, c.angle),
                f.values()[i]
            );
        }
    }
    out
}

fn err(line: usize, message: impl Into<String>) -> ConeError {
    ConeError::Parse { line, message: message.into() }
}

const KEYS: [&str; 7] = ["n", "omega", "variant", "K", "J", "q", "rmax"];

/// Parses a dump, checking every coordinate against the grid it declares.
pub fn parse_field(text: &str, name: &str) -> Result<Field> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let mut header: Vec<(usize, &str)> = Vec::with_capacity(KEYS.len());
    for key in KEYS {
        let (no, line) = lines.next().ok_or_else(|| err(0, format!("missing header `{key}`")))?;
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| err(no, format!("expected `{key}=...`")))?;
        if k.trim() != key {
            return Err(err(no, format!("expected header `{key}`, found `{}`", k.trim())));
        }
        header.push((no, v.trim()));
    }
    let int = |i: usize| -> Result<usize> {
        let (no, v) = header[i];
        v.parse::<usize>().map_err(|_| err(no, format!("`{v}` is not a nonnegative integer")))
    };
    let float = |i: usize| -> Result<f64> {
        let (no, v) = header[i];
        let x = v.parse::<f64>().map_err(|_| err(no, format!("`{v}` is not a number")))?;
        if !x.is_finite() {
            return Err(err(no, "value must be finite"));
        }
        Ok(x)
    };
    let dim = int(0)?;
    let omega = float(1)?;
    let (tag_line, tag) = header[2];
    let (variant, kind) =
        parse_tag(tag).ok_or_else(|| err(tag_line, format!("unknown variant `{tag}`")))?;
    let radial = int(3)?;
    let cols = int(4)?;
    let q = float(5)?;
    let r_max = float(6)?;

    let domain = ConeDomain::new(dim, omega, variant).map_err(|e| err(header[1].0, e.to_string()))?;
    let patches = match kind {
        GridKind::Double => 2,
        _ => 1,
    };
    if cols % patches != 0 {
        return Err(err(header[4].0, format!("J = {cols} is not a multiple of {patches}")));
    }
    let total = radial
        .checked_mul(cols)
        .filter(|t| *t <= MAX_SAMPLES)
        .ok_or_else(|| err(header[4].0, "too many samples"))?;
    let spec = GridSpec { q, r_max, radial, angular: cols / patches };
    spec.validate().map_err(|e| err(header[3].0, e.to_string()))?;

    let body: Vec<(usize, &str)> = lines.collect();
    if body.len() != total {
        let at = body.last().map(|b| b.0).unwrap_or(header[6].0);
        return Err(err(at, format!("expected {total} samples, found {}", body.len())));
    }
    let grid = Arc::new(PolarGrid::new(domain, kind, spec).map_err(|e| err(header[3].0, e.to_string()))?);
    let mut values = vec![0.0; total];
    for (n, (no, line)) in body.into_iter().enumerate() {
        let mut parts = line.split_whitespace();
        let mut next = |what: &str| -> Result<f64> {
            let tok = parts.next().ok_or_else(|| err(no, format!("missing {what}")))?;
            tok.parse::<f64>().map_err(|_| err(no, format!("`{tok}` is not a number")))
        };
        let (r, theta, value) = (next("r")?, next("theta")?, next("value")?);
        if parts.next().is_some() {
            return Err(err(no, "expected three columns"));
        }
        let (k, col) = (n / cols, n % cols);
        let i = index_of(&grid, k, col);
        let c = grid.cell(i);
        let (r0, t0) = (grid.radius(k), grid.angle(c.patch, c.angle));
        if !((r - r0).abs() <= COORD_TOLERANCE * r0) {
            return Err(err(no, format!("radius {r} does not match grid node {r0}")));
        }
        if !((theta - t0).abs() <= COORD_TOLERANCE * t0.abs().max(1.0)) {
            return Err(err(no, format!("angle {theta} does not match grid node {t0}")));
        }
        if !value.is_finite() {
            return Err(err(no, "value must be finite"));
        }
        values[i] = value;
    }
    Field::new(grid, values, name)
}

pub fn read_field(path: &std::path::Path) -> Result<Field> {
    let text = std::fs::read_to_string(path)?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("field");
    parse_field(&text, name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::families::{make_test_field, TestFamily};

    fn grid(domain: ConeDomain, kind: GridKind) -> Arc<PolarGrid> {
        let spec = GridSpec { q: 0.7, r_max: 3.0, radial: 5, angular: 6 };
        Arc::new(PolarGrid::new(domain, kind, spec).unwrap())
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        for (domain, kind) in [
            (ConeDomain::standard(2), GridKind::Double),
            (ConeDomain::standard(3), GridKind::Plus),
            (ConeDomain::quadrant(), GridKind::Minus),
            (ConeDomain::standard(2), GridKind::FullSpace),
            (ConeDomain::quadrant(), GridKind::FullSpace),
        ] {
            let f = make_test_field(grid(domain, kind), TestFamily::AngularBump { a: 1.0 });
            let text = write_field(&f);
            let back = parse_field(&text, "f").unwrap();
            assert!(back.grid().same_shape(f.grid()));
            assert_eq!(back.values(), f.values());
            assert_eq!(write_field(&back), text);
        }
    }

    #[test]
    fn reports_the_offending_line() {
        let f = make_test_field(grid(ConeDomain::standard(2), GridKind::Double), TestFamily::Jump);
        let text = write_field(&f);
        let broken = text.replacen("variant=axial", "variant=conic", 1);
        assert!(matches!(parse_field(&broken, "f"), Err(ConeError::Parse { line: 3, .. })));
        let mut lines: Vec<&str> = text.lines().collect();
        lines[9] = "1 2 x";
        assert!(matches!(parse_field(&lines.join("\n"), "f"), Err(ConeError::Parse { line: 10, .. })));
        lines.truncate(20);
        assert!(matches!(parse_field(&lines.join("\n"), "f"), Err(ConeError::Parse { .. })));
        assert!(parse_field("", "f").is_err());
        assert!(parse_field("n=2\nomega=2\nvariant=axial\nK=3\nJ=4\nq=0.5\nrmax=1\n", "f").is_err());
        assert!(parse_field("n=2\nomega=0.5\nvariant=axial\nK=99999999999\nJ=99999999\nq=0.5\nrmax=1\n", "f").is_err());
    }
}
