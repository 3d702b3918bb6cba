//! Sign-change scan and bisection shared by every continuity argument.

use crate::error::{Error, Result};
use crate::tolerance::BISECTION_CAP;

/// Scans `samples` equally spaced points of `[a, b]` (endpoints included,
/// `a` may exceed `b`) and returns the first consecutive pair at which the
/// predicate `f(t) >= 0` changes value relative to its value at `a`.
pub(crate) fn first_sign_change<F>(mut f: F, a: f64, b: f64, samples: usize) -> Option<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    debug_assert!(samples >= 2);
    let start = f(a) >= 0.0;
    let mut prev = a;
    for k in 1..samples {
        let t = if k == samples - 1 {
            b
        } else {
            a + (b - a) * (k as f64) / ((samples - 1) as f64)
        };
        if (f(t) >= 0.0) != start {
            return Some((prev, t));
        }
        prev = t;
    }
    None
}

/// Bisection on a bracket whose endpoints disagree on `f(t) >= 0`. Returns
/// the final bracket as `(point on a's side, point on b's side)`.
pub(crate) fn bisect<F>(mut f: F, a: f64, b: f64, width: f64, what: &str) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let side_a = f(a) >= 0.0;
    if side_a == (f(b) >= 0.0) {
        return Err(Error::NoRoot {
            what: what.to_string(),
            lo: a.min(b),
            hi: a.max(b),
        });
    }
    let (mut keep_a, mut keep_b) = (a, b);
    for _ in 0..BISECTION_CAP {
        if (keep_b - keep_a).abs() <= width {
            return Ok((keep_a, keep_b));
        }
        let mid = 0.5 * (keep_a + keep_b);
        if mid == keep_a || mid == keep_b {
            return Ok((keep_a, keep_b));
        }
        if (f(mid) >= 0.0) == side_a {
            keep_a = mid;
        } else {
            keep_b = mid;
        }
    }
    Err(Error::IterationCapExceeded {
        what: what.to_string(),
        cap: BISECTION_CAP,
    })
}

/// Scan then bisect: the first root of `f` met when walking from `a` to `b`.
/// Returns the bracket `(on the a-side, on the b-side)`.
pub(crate) fn first_root<F>(
    mut f: F,
    a: f64,
    b: f64,
    samples: usize,
    width: f64,
    what: &str,
) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let (lo, hi) = first_sign_change(&mut f, a, b, samples).ok_or_else(|| Error::NoRoot {
        what: what.to_string(),
        lo: a.min(b),
        hi: a.max(b),
    })?;
    bisect(f, lo, hi, width, what)
}

/// Bisection for monotone scalar equations where failure to converge is
/// impossible in exact arithmetic; stops at relative width `rel`.
pub(crate) fn bisect_relative<F>(mut pred: F, mut lo: f64, mut hi: f64, rel: f64) -> f64
where
    F: FnMut(f64) -> bool,
{
    // pred(lo) == false, pred(hi) == true
    for _ in 0..BISECTION_CAP {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel * hi || mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Root of `f` on `[a, b]` with `f(a) <= 0 < f(b)`, by regula falsi with the
/// Illinois weight halving, falling back to a bisection step whenever three
/// iterations fail to halve the bracket. Stops at relative width `rel`.
pub(crate) fn bracketed_root<F>(mut f: F, a: f64, b: f64, rel: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa > 0.0 {
        return a;
    }
    if !(fb > 0.0) {
        return b;
    }
    let mut last_side = 0i8;
    let mut checkpoint = b - a;
    for k in 1..=BISECTION_CAP {
        if b - a <= rel * a.abs().max(b.abs()) {
            break;
        }
        let mut x = (a * fb - b * fa) / (fb - fa);
        if !(x > a && x < b) || k % 4 == 0 && b - a > 0.5 * checkpoint {
            x = 0.5 * (a + b);
            last_side = 0;
        }
        if k % 4 == 0 {
            checkpoint = b - a;
        }
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx > 0.0 {
            b = x;
            fb = fx;
            if last_side == 1 {
                fa *= 0.5;
            }
            last_side = 1;
        } else {
            a = x;
            fa = fx;
            if last_side == -1 {
                fb *= 0.5;
            }
            last_side = -1;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracketed_root_matches_closed_form() {
        let mut calls = 0;
        let r = bracketed_root(
            |x| {
                calls += 1;
                x * x - 2.0
            },
            0.0,
            4.0,
            1e-15,
        );
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
        assert!(calls < 40, "{calls} evaluations");
        // kinked, convex along the line
        let r = bracketed_root(|x: f64| (x - 1.0).abs().max(2.0 * x - 3.0) - 1.5, 1.0, 3.0, 1e-15);
        assert!((r - 2.25).abs() < 1e-14);
    }

    #[test]
    fn finds_first_root_in_walk_direction() {
        // roots at 0.25 and 0.75
        let f = |t: f64| (t - 0.25) * (t - 0.75);
        let (a, b) = first_root(f, 0.0, 1.0, 1024, 1e-12, "quad").unwrap();
        assert!((0.5 * (a + b) - 0.25).abs() < 1e-11);
        let (a, b) = first_root(f, 1.0, 0.0, 1024, 1e-12, "quad").unwrap();
        assert!((0.5 * (a + b) - 0.75).abs() < 1e-11);
    }

    #[test]
    fn reports_missing_root() {
        assert!(matches!(
            first_root(|t| t + 1.0, 0.0, 1.0, 16, 1e-12, "pos"),
            Err(Error::NoRoot { .. })
        ));
        assert!(matches!(
            bisect(|t| t + 1.0, 0.0, 1.0, 1e-12, "pos"),
            Err(Error::NoRoot { .. })
        ));
    }

    #[test]
    fn relative_bisection_converges() {
        let r = bisect_relative(|x| x * x >= 2.0, 1.0, 2.0, 1e-15);
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }
}
