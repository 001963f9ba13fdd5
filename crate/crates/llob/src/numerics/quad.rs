//! Quadrature rules.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Composite Simpson rule on a uniform grid with `n` intervals (`n` is
/// rounded up to the next even number).
pub fn simpson_uniform<T: Scalar, F: FnMut(T) -> T>(mut f: F, a: T, b: T, n: usize) -> T {
    let n = if n % 2 == 0 { n.max(2) } else { n + 1 };
    let h = (b - a) / T::of(n as f64);
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let x = a + h * T::of(i as f64);
        let w = if i % 2 == 1 { T::of(4.0) } else { T::two() };
        sum = sum + w * f(x);
    }
    sum * h / T::of(3.0)
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T, tol: T) -> Result<T> {
    let c = (a + b) * T::half();
    let fa = f(a);
    let fb = f(b);
    let fc = f(c);
    let whole = (b - a) / T::of(6.0) * (fa + T::of(4.0) * fc + fb);
    step(f, a, b, fa, fb, fc, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn step<T: Scalar, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    fa: T,
    fb: T,
    fc: T,
    whole: T,
    tol: T,
    depth: u32,
) -> Result<T> {
    let c = (a + b) * T::half();
    let lm = (a + c) * T::half();
    let rm = (c + b) * T::half();
    let flm = f(lm);
    let frm = f(rm);
    let six = T::of(6.0);
    let left = (c - a) / six * (fa + T::of(4.0) * flm + fc);
    let right = (b - c) / six * (fc + T::of(4.0) * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= T::of(15.0) * tol || (b - a).abs() < T::epsilon() * T::of(64.0) * b.abs().max(T::one()) {
        return Ok(left + right + delta / T::of(15.0));
    }
    if depth == 0 {
        return Err(Error::QuadratureFailure);
    }
    let half_tol = tol * T::half();
    let l = step(f, a, c, fa, fc, flm, left, half_tol, depth - 1)?;
    let r = step(f, c, b, fc, fb, frm, right, half_tol, depth - 1)?;
    Ok(l + r)
}

/// Trapezoid rule over sampled values on an arbitrary strictly increasing grid.
pub fn trapezoid_sampled<T: Scalar>(x: &[T], y: &[T]) -> T {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = T::zero();
    for i in 1..x.len() {
        acc = acc + (x[i] - x[i - 1]) * (y[i] + y[i - 1]) * T::half();
    }
    acc
}
