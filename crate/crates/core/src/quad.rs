//! Small numerical helpers shared by the quadrature code.

/// Pairwise (cascade) summation. The result only depends on the order of
/// `values`, never on how work was split across threads.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Sum of `f(i)` for `i in 0..n`, pairwise.
pub fn pairwise_sum_by(n: usize, f: impl Fn(usize) -> f64) -> f64 {
    fn rec(lo: usize, hi: usize, f: &dyn Fn(usize) -> f64) -> f64 {
        if hi - lo <= 32 {
            return (lo..hi).map(f).sum();
        }
        let mid = lo + (hi - lo) / 2;
        rec(lo, mid, f) + rec(mid, hi, f)
    }
    rec(0, n, &f)
}

/// Adaptive Simpson quadrature on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // Halving the tolerance per level would eventually ask for accuracy
    // below rounding, which makes the recursion exponential; stop there.
    let floor = 64.0 * f64::EPSILON * (b - a).abs() * (fa.abs() + fm.abs() + fb.abs());
    simpson_step(f, a, b, fa, fm, fb, whole, tol, floor, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    floor: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol.max(floor) {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, floor, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, floor, depth - 1)
}

/// Quintic smoothstep `6t^5 - 15t^4 + 10t^3`, clamped to `[0, 1]`.
/// Rises from 0 at `t <= 0` to 1 at `t >= 1` with two vanishing derivatives at both ends.
pub fn smootherstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (t * (6.0 * t - 15.0) + 10.0)
    }
}

/// Profile equal to 1 on `(-inf, a]`, 0 on `[b, inf)`, smooth in between.
pub fn plateau(x: f64, a: f64, b: f64) -> f64 {
    1.0 - smootherstep((x - a) / (b - a))
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_sum_on_integers() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499_500.0);
        assert_eq!(pairwise_sum_by(1000, |i| i as f64), 499_500.0);
    }

    #[test]
    fn simpson_handles_sqrt_endpoint() {
        // Quarter disk area.
        let v = adaptive_simpson(&|x: f64| (1.0 - x * x).max(0.0).sqrt(), 0.0, 1.0, 1e-12);
        assert!((v - std::f64::consts::FRAC_PI_4).abs() < 1e-9);
    }

    #[test]
    fn smootherstep_endpoints() {
        assert_eq!(smootherstep(-1.0), 0.0);
        assert_eq!(smootherstep(0.5), 0.5);
        assert_eq!(smootherstep(2.0), 1.0);
        assert_eq!(plateau(0.1, 0.25, 0.5), 1.0);
        assert_eq!(plateau(0.6, 0.25, 0.5), 0.0);
    }
}
