//! Bracketed scalar root finding (Illinois-accelerated regula falsi).

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Find a root of `f` in `[lo, hi]`; the bracket must contain a sign change.
pub fn bracketed_root<T: Scalar, F: FnMut(T) -> T>(
    mut f: F,
    lo: T,
    hi: T,
    rel_tol: T,
) -> Result<T> {
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if (fa > T::zero()) == (fb > T::zero()) {
        return Err(Error::BracketFailure {
            lo: lo.to_f64().unwrap_or(f64::NAN),
            hi: hi.to_f64().unwrap_or(f64::NAN),
        });
    }
    let mut side = 0i32;
    for _ in 0..200 {
        let denom = fb - fa;
        let mut x = if denom.abs() > T::zero() {
            b - fb * (b - a) / denom
        } else {
            (a + b) * T::half()
        };
        // fall back to bisection if the secant point leaves the bracket
        if !(x > a && x < b) {
            x = (a + b) * T::half();
        }
        let fx = f(x);
        if fx == T::zero() || (b - a).abs() <= rel_tol * x.abs().max(T::one()) {
            return Ok(x);
        }
        if (fx > T::zero()) == (fb > T::zero()) {
            b = x;
            fb = fx;
            if side == -1 {
                fa = fa * T::half();
            }
            side = -1;
        } else {
            a = x;
            fa = fx;
            if side == 1 {
                fb = fb * T::half();
            }
            side = 1;
        }
    }
    Ok((a + b) * T::half())
}

/// Expand a bracket around `x0` until `f` changes sign, then solve.
pub fn expanding_root<T: Scalar, F: FnMut(T) -> T>(
    mut f: F,
    x0: T,
    initial_width: T,
    rel_tol: T,
) -> Result<T> {
    let mut d = initial_width.abs().max(T::of(1e-12));
    let mut a = x0 - d;
    let mut b = x0 + d;
    let mut fa = f(a);
    let mut fb = f(b);
    for _ in 0..80 {
        if (fa > T::zero()) != (fb > T::zero()) {
            return bracketed_root(f, a, b, rel_tol);
        }
        d = d * T::two();
        if fa.abs() < fb.abs() {
            a = a - d;
            fa = f(a);
        } else {
            b = b + d;
            fb = f(b);
        }
    }
    Err(Error::BracketFailure {
        lo: a.to_f64().unwrap_or(f64::NAN),
        hi: b.to_f64().unwrap_or(f64::NAN),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_root() {
        let r = bracketed_root(|x: f64| x * x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_bracket() {
        assert!(bracketed_root(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn expanding_finds_far_root() {
        let r = expanding_root(|x: f64| x - 17.0, 0.0, 0.1, 1e-14).unwrap();
        assert!((r - 17.0).abs() < 1e-10);
    }
}
