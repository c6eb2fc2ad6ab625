//! Deterministic adaptive quadrature helpers.
//!
//! Everything here is plain recursive Simpson with an absolute/relative
//! error target. The routines are deliberately simple: integrands in this
//! crate are piecewise smooth once split at their known breakpoints, and
//! power-law tails are always handled analytically by the callers.

/// Result of an adaptive integration: value and an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

impl QuadResult {
    pub const ZERO: QuadResult = QuadResult {
        value: 0.0,
        error: 0.0,
    };

    pub fn combine(self, other: QuadResult) -> QuadResult {
        QuadResult {
            value: self.value + other.value,
            error: self.error + other.error,
        }
    }
}

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> QuadResult {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        QuadResult {
            value: left + right + delta / 15.0,
            error: delta.abs() / 15.0,
        }
    } else {
        let l = adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1);
        let r = adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
        l.combine(r)
    }
}

/// Adaptive Simpson integration of `f` on the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> QuadResult {
    if a == b {
        return QuadResult::ZERO;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(fa, fm, fb, b - a);
    adaptive_step(&f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Integrate over `[a, b]` split at the given breakpoints.
///
/// Breakpoints outside the interval are ignored; the list does not need to
/// be sorted or unique.
pub fn integrate_split<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: f64,
) -> QuadResult {
    let mut pts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|p| *p > a && *p < b)
        .collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    let n = pts.len() - 1;
    let mut total = QuadResult::ZERO;
    for w in pts.windows(2) {
        total = total.combine(integrate(&f, w[0], w[1], tol / n as f64));
    }
    total
}

/// Exact integral of `s^{-1-alpha}` over `[a, b]`, `0 < a <= b <= inf`.
pub fn power_tail_integral(a: f64, b: f64, alpha: f64) -> f64 {
    debug_assert!(a > 0.0 && alpha > 0.0);
    if b.is_infinite() {
        a.powf(-alpha) / alpha
    } else {
        (a.powf(-alpha) - b.powf(-alpha)) / alpha
    }
}

/// Integral of `|s|^{-1-alpha}` over an interval `[a, b]` that does not
/// contain zero in its interior.
pub fn abs_power_integral(a: f64, b: f64, alpha: f64) -> f64 {
    debug_assert!(a <= b);
    if a >= 0.0 {
        if a == 0.0 {
            f64::INFINITY
        } else {
            power_tail_integral(a, b, alpha)
        }
    } else if b <= 0.0 {
        if b == 0.0 {
            f64::INFINITY
        } else {
            power_tail_integral(-b, -a, alpha)
        }
    } else {
        f64::INFINITY
    }
}
