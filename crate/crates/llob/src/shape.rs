//! Closed-form scaling shape of the book under constant-rate execution:
//! the profile collapses onto phi(x, t) = m0 sqrt(t/D) F(x / sqrt(Dt)),
//! where F solves 2F'' + uF' - F = -2 delta(u - A). Writing F = uG and
//! H = G' reduces the problem to quadratures with a slope jump of exactly
//! -1 across u = A.

use crate::error::{Error, Result};
use crate::numerics::quad::adaptive_simpson;
use crate::numerics::roots::bracketed_root;
use crate::numerics::special::erfcx;
use crate::scalar::Scalar;
use crate::solver::solve_a;

/// Tabulated scaling solution for one value of m0 / J.
#[derive(Debug, Clone)]
pub struct ScalingSolution<T> {
    /// Dimensionless amplitude of the price, y = A sqrt(Dt).
    pub a: T,
    /// F at the origin.
    pub f0: T,
    /// Slope of F just below the price.
    pub slope_below: T,
    /// Slope of F just above the price.
    pub slope_above: T,
    pub u: Vec<T>,
    pub f: Vec<T>,
    pub g: Vec<T>,
    pub h: Vec<T>,
}

/// Per-rate evaluator holding the precomputed constants.
struct Shape<T> {
    a: T,
    f0: T,
    /// J / m0.
    inv_rate: T,
    tol: T,
}

impl<T: Scalar> Shape<T> {
    fn new(rate_ratio: T) -> Result<Self> {
        let a = solve_a(rate_ratio)?;
        // F(0) = (A / 4 sqrt(pi)) e^{A^2/4} Int_{A^2/4}^inf v^{-3/2} e^{-v} dv
        //      = 1/sqrt(pi) - (A/2) erfcx(A/2)
        // via Int_z^inf v^{-3/2} e^{-v} dv = 2 e^{-z}/sqrt(z) - 2 sqrt(pi) erfc(sqrt(z))
        let f0 = T::one() / T::sqrt_pi() - a * T::half() * erfcx(a * T::half());
        Ok(Shape { a, f0, inv_rate: T::one() / rate_ratio, tol: T::of(1e-12) })
    }

    /// Int over [lo, hi] of v^{-2} e^{-(v^2 - A^2)/4} dv; the shifted
    /// exponent keeps the u > A branch finite at large A.
    fn shifted_tail(&self, lo: T, hi: T) -> Result<T> {
        if !(hi > lo) {
            return Ok(T::zero());
        }
        let a2 = self.a * self.a;
        let f = |v: T| (-(v * v - a2) * T::of(0.25)).exp() / (v * v);
        adaptive_simpson(&f, lo, hi, self.tol)
    }

    fn g(&self, u: T) -> Result<T> {
        let a = self.a;
        if u <= a {
            // G(u) = F0 Int_u^A v^{-2} e^{-v^2/4} dv + J/m0
            let f = |v: T| (-v * v * T::of(0.25)).exp() / (v * v);
            let integral = if u < a {
                adaptive_simpson(&f, u, a, self.tol)?
            } else {
                T::zero()
            };
            Ok(self.f0 * integral + self.inv_rate)
        } else {
            // G(u) = -(F0 + A e^{A^2/4}) Int_A^u v^{-2} e^{-v^2/4} dv + J/m0,
            // regrouped so the overall exponent never overflows
            let coeff = self.f0 * (-a * a * T::of(0.25)).exp() + a;
            let tail = self.shifted_tail(a, u)?;
            Ok(self.inv_rate - coeff * tail)
        }
    }

    fn h(&self, u: T) -> T {
        let a = self.a;
        let gauss = (-u * u * T::of(0.25)).exp();
        if u <= a {
            -self.f0 * gauss / (u * u)
        } else {
            let shifted = (-(u * u - a * a) * T::of(0.25)).exp();
            -(self.f0 * gauss + a * shifted) / (u * u)
        }
    }

    fn f(&self, u: T) -> Result<T> {
        if u == T::zero() {
            return Ok(self.f0);
        }
        Ok(u * self.g(u)?)
    }

    fn slope_below(&self) -> T {
        self.inv_rate - self.f0 / self.a * (-self.a * self.a * T::of(0.25)).exp()
    }
}

/// F(u) for u >= 0 at the given m0 / J; the full book perturbation is the
/// odd extension.
pub fn shape_f<T: Scalar>(u: T, rate_ratio: T) -> Result<T> {
    if u < T::zero() {
        return Err(Error::ParameterOutOfRange("shape argument must be >= 0".into()));
    }
    Shape::new(rate_ratio)?.f(u)
}

/// G = F / u on u > 0.
pub fn shape_g<T: Scalar>(u: T, rate_ratio: T) -> Result<T> {
    if !(u > T::zero()) {
        return Err(Error::ParameterOutOfRange("shape argument must be > 0".into()));
    }
    Shape::new(rate_ratio)?.g(u)
}

/// H = G' on u > 0.
pub fn shape_h<T: Scalar>(u: T, rate_ratio: T) -> Result<T> {
    if !(u > T::zero()) {
        return Err(Error::ParameterOutOfRange("shape argument must be > 0".into()));
    }
    Ok(Shape::new(rate_ratio)?.h(u))
}

/// Exact one-sided slopes of F at the price, (F'(A-), F'(A+)); the jump is
/// -1 identically.
pub fn slopes_at_price<T: Scalar>(rate_ratio: T) -> Result<(T, T)> {
    let shape = Shape::new(rate_ratio)?;
    let below = shape.slope_below();
    Ok((below, below - T::one()))
}

/// Exact slope of F away from the jump, F'(u) = uH(u) + G(u).
pub fn shape_f_prime<T: Scalar>(u: T, rate_ratio: T) -> Result<T> {
    if !(u > T::zero()) {
        return Err(Error::ParameterOutOfRange("shape argument must be > 0".into()));
    }
    let shape = Shape::new(rate_ratio)?;
    Ok(u * shape.h(u) + shape.g(u)?)
}

/// Root z* > 0 of the short-time relaxation condition. Diffusing the
/// piecewise-linear full book (stationary part included, so the slopes at
/// the price are F'(A-) - J/m0 and F'(A+) - J/m0) and asking where it
/// crosses zero gives
///   (J/m0 - F'(A-)) z = Int_z^inf (u - z) e^{-u^2/4} / sqrt(4 pi) du,
/// whose positive root is z* = A exactly - the initial decay is therefore
/// rate-independent.
pub fn initial_relaxation_root<T: Scalar>(rate_ratio: T) -> Result<T> {
    let shape = Shape::new(rate_ratio)?;
    // (F0/A) e^{-A^2/4}, formed directly: going through F'(A-) would cancel
    // it against J/m0 at large rates
    let below = shape.f0 / shape.a * (-shape.a * shape.a * T::of(0.25)).exp();
    // Int_z^inf (u - z) e^{-u^2/4} du / sqrt(4 pi)
    //   = e^{-z^2/4} / sqrt(pi) - (z/2) erfc(z/2)
    let kink = |z: T| {
        let half_z = z * T::half();
        (-half_z * half_z).exp() / T::sqrt_pi() - half_z * crate::numerics::special::erfc(half_z)
    };
    let f = |z: T| below * z - kink(z);
    let hi = shape.a * T::two() + T::one();
    bracketed_root(&f, T::of(1e-12), hi, T::of(1e-13)).map_err(|_| {
        Error::RootFindFailure("relaxation root bracket failed".into())
    })
}

/// Tabulate the scaling solution on [0, A + 10] with extra resolution
/// around the slope jump at u = A.
pub fn scaling_solution<T: Scalar>(rate_ratio: T) -> Result<ScalingSolution<T>> {
    let shape = Shape::new(rate_ratio)?;
    let a = shape.a;
    let hi = a + T::of(10.0);
    let w = a.min(T::one()) * T::half();
    // three uniform zones: coarse flanks, fine core around the jump
    let mut u: Vec<T> = Vec::with_capacity(4001);
    let lo_core = a - w;
    let hi_core = a + w;
    push_uniform(&mut u, T::zero(), lo_core, 1000);
    push_uniform(&mut u, lo_core, hi_core, 2000);
    push_uniform(&mut u, hi_core, hi, 1000);
    u.push(hi);
    let mut f = Vec::with_capacity(u.len());
    let mut g = Vec::with_capacity(u.len());
    let mut h = Vec::with_capacity(u.len());
    for &ui in &u {
        f.push(shape.f(ui)?);
        if ui > T::zero() {
            g.push(shape.g(ui)?);
            h.push(shape.h(ui));
        } else {
            // G and H diverge like 1/u and 1/u^2 at the origin
            g.push(T::nan());
            h.push(T::nan());
        }
    }
    let below = shape.slope_below();
    Ok(ScalingSolution {
        a,
        f0: shape.f0,
        slope_below: below,
        slope_above: below - T::one(),
        u,
        f,
        g,
        h,
    })
}

fn push_uniform<T: Scalar>(out: &mut Vec<T>, lo: T, hi: T, n: usize) {
    for k in 0..n {
        out.push(lo + (hi - lo) * T::of(k as f64 / n as f64));
    }
}
