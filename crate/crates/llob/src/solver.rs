//! Direct solution of the self-consistent price equation: time-marching
//! fixed-point solver, the linear-propagator closed form, the constant-rate
//! amplitude A, and the impact law built from it.

use crate::error::{Error, Result};
use crate::model::{ModelParams, PricePath};
use crate::numerics::quad::{adaptive_simpson, simpson_uniform};
use crate::numerics::roots::bracketed_root;
use crate::scalar::Scalar;
use crate::schedule::TradingSchedule;

/// Tunables for the marching solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    /// Marching step.
    pub dt: T,
    /// Relative fixed-point tolerance per step.
    pub tol: T,
    /// Picard iteration cap before falling back to bisection.
    pub max_iters: usize,
    /// Minimum quadrature node count per step (grows with elapsed steps).
    pub quad_nodes: usize,
}

impl<T: Scalar> SolverConfig<T> {
    /// Defaults for a horizon: dt = T/2000, tolerance 1e-10.
    pub fn for_horizon(t_total: T) -> Self {
        Self { dt: t_total / T::of(2000.0), tol: T::of(1e-10), max_iters: 40, quad_nodes: 64 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero()) {
            return Err(Error::ParameterOutOfRange("dt must be positive".into()));
        }
        if !(self.tol > T::zero()) || self.tol > T::of(1e-4) {
            return Err(Error::ParameterOutOfRange("tolerance must be in (0, 1e-4]".into()));
        }
        if self.max_iters < 10 {
            return Err(Error::ParameterOutOfRange("max_iters must be >= 10".into()));
        }
        Ok(())
    }
}

/// Incremental marcher for the price fixed point. History is the pair of
/// vectors (times, y); each `step` appends one solved node.
pub struct Marcher<'a, T, F: Fn(T) -> T> {
    intensity: F,
    params: &'a ModelParams<T>,
    config: SolverConfig<T>,
    pub times: Vec<T>,
    pub y: Vec<T>,
    pub residual: Vec<T>,
}

impl<'a, T: Scalar, F: Fn(T) -> T> Marcher<'a, T, F> {
    pub fn new(intensity: F, params: &'a ModelParams<T>, config: SolverConfig<T>) -> Self {
        Self {
            intensity,
            params,
            config,
            times: vec![T::zero()],
            y: vec![T::zero()],
            residual: vec![T::zero()],
        }
    }

    /// Start from a precomputed history (times strictly increasing,
    /// starting at 0).
    pub fn with_history(
        intensity: F,
        params: &'a ModelParams<T>,
        config: SolverConfig<T>,
        times: Vec<T>,
        y: Vec<T>,
    ) -> Self {
        let residual = vec![T::zero(); times.len()];
        Self { intensity, params, config, times, y, residual }
    }

    /// Interpolated history value, with the not-yet-committed candidate
    /// value at the new time t.
    fn past(&self, s: T, t: T, candidate: T) -> T {
        let n = self.times.len();
        let t_last = self.times[n - 1];
        if s >= t_last {
            if t <= t_last {
                return candidate;
            }
            let w = (s - t_last) / (t - t_last);
            return self.y[n - 1] * (T::one() - w) + candidate * w;
        }
        if s <= self.times[0] {
            return self.y[0];
        }
        let mut lo = 0usize;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.times[mid] <= s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let w = (s - self.times[lo]) / (self.times[hi] - self.times[lo]);
        self.y[lo] * (T::one() - w) + self.y[hi] * w
    }

    /// Right-hand side of the fixed point at time t for candidate value y:
    /// the singular kernel integral after the substitution s = t - u^2.
    fn rhs(&self, t: T, candidate: T) -> T {
        let d = self.params.d;
        let root_t = t.sqrt();
        let steps_elapsed = self.times.len();
        let mut n = self.config.quad_nodes.max(2 * steps_elapsed);
        if n % 2 == 1 {
            n += 1;
        }
        let integral = simpson_uniform(
            |u: T| {
                let s = t - u * u;
                let m = (self.intensity)(s);
                if m == T::zero() {
                    return T::zero();
                }
                if u == T::zero() {
                    return m;
                }
                let dy = candidate - self.past(s, t, candidate);
                let arg = dy * dy / (T::of(4.0) * d * u * u);
                m * (-arg).exp()
            },
            T::zero(),
            root_t,
            n,
        );
        integral / (self.params.l * (self.params.d * T::pi()).sqrt())
    }

    /// Solve one step at time t_new > last time; appends the node.
    pub fn step(&mut self, t_new: T, seed: T) -> Result<()> {
        let tol = self.config.tol;
        let scale = (self.params.d * t_new).sqrt().max(seed.abs());
        let mut x = seed;
        let mut converged = false;
        let mut res = T::zero();
        for _ in 0..self.config.max_iters {
            let g = self.rhs(t_new, x);
            res = (x - g).abs();
            if res <= tol * (scale + x.abs()) {
                x = g;
                converged = true;
                break;
            }
            x = (x + g) * T::half();
        }
        if !converged {
            // expanding-bracket bisection on h(y) = y - rhs(y)
            let h = |y: T| y - self.rhs(t_new, y);
            let mut w = scale.max(T::of(1e-30));
            let mut lo = x - w;
            let mut hi = x + w;
            let mut flo = h(lo);
            let mut fhi = h(hi);
            let mut bracketed = flo * fhi <= T::zero();
            for _ in 0..80 {
                if bracketed {
                    break;
                }
                w = w * T::two();
                lo = x - w;
                hi = x + w;
                flo = h(lo);
                fhi = h(hi);
                bracketed = flo * fhi <= T::zero();
            }
            if !bracketed {
                return Err(Error::FixedPointDivergence {
                    t: t_new.to_f64().unwrap_or(f64::NAN),
                    residual: res.to_f64().unwrap_or(f64::NAN),
                });
            }
            for _ in 0..200 {
                let mid = (lo + hi) * T::half();
                let fm = h(mid);
                if fm == T::zero() || (hi - lo).abs() <= tol * (scale + mid.abs()) {
                    x = mid;
                    res = fm.abs();
                    break;
                }
                if flo * fm <= T::zero() {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
                x = mid;
                res = fm.abs();
            }
        }
        self.times.push(t_new);
        self.y.push(x);
        self.residual.push(res);
        Ok(())
    }

    /// Extrapolation seed for the next step.
    pub fn seed(&self) -> T {
        let n = self.y.len();
        if n >= 2 {
            self.y[n - 1] * T::two() - self.y[n - 2]
        } else {
            self.y[n - 1]
        }
    }

    pub fn into_path(self) -> PricePath<T> {
        PricePath::new(self.times, self.y, self.residual)
    }
}

/// March the price fixed point over a uniform grid on [0, T].
pub fn solve_price_path<T: Scalar>(
    schedule: &TradingSchedule<T>,
    params: &ModelParams<T>,
    config: &SolverConfig<T>,
) -> Result<PricePath<T>> {
    config.validate()?;
    let t_total = schedule.t_total();
    let n_steps = (t_total / config.dt).round().to_f64().unwrap_or(0.0) as usize;
    let n_steps = n_steps.max(1);
    let times: Vec<T> = (0..=n_steps)
        .map(|k| t_total * T::of(k as f64 / n_steps as f64))
        .collect();
    solve_price_path_on(schedule, params, config, &times[1..])
}

/// March the price fixed point over an explicit grid of solve times
/// (strictly increasing, all > 0; t = 0 is implicit with y = 0).
pub fn solve_price_path_on<T: Scalar>(
    schedule: &TradingSchedule<T>,
    params: &ModelParams<T>,
    config: &SolverConfig<T>,
    times: &[T],
) -> Result<PricePath<T>> {
    config.validate()?;
    let mut marcher = Marcher::new(|s| schedule.intensity(s), params, *config);
    let mut first = true;
    for &t in times {
        let seed = if first {
            propagator_value(schedule, params, t)
        } else {
            marcher.seed()
        };
        marcher.step(t, seed)?;
        first = false;
    }
    Ok(marcher.into_path())
}

/// Propagator-limit price at a single time, in closed form. Each
/// polynomial segment's convolution against the inverse-square-root kernel
/// integrates analytically after re-centering the polynomial in (t - s).
pub fn propagator_value<T: Scalar>(
    schedule: &TradingSchedule<T>,
    params: &ModelParams<T>,
    t: T,
) -> T {
    if t <= T::zero() {
        return T::zero();
    }
    let mut total = T::zero();
    for seg in schedule.segments() {
        if seg.t_start >= t {
            break;
        }
        let a = seg.t_start;
        let b = seg.t_end.min(t);
        // m(s) = sum_i c_i (s - a)^i = sum_i c_i ((t - a) - (t - s))^i
        let ta = t - a;
        let tb = t - b;
        for (i, &c) in seg.coeffs.iter().enumerate() {
            if c == T::zero() {
                continue;
            }
            let mut binom = T::one();
            for j in 0..=i {
                // integral of (t - s)^(j - 1/2) over [a, b]
                let p = T::of(j as f64 + 0.5);
                let term = (ta.powf(p) - tb.powf(p)) / p;
                let sign = if j % 2 == 0 { T::one() } else { -T::one() };
                total = total + c * binom * sign * ta.powi((i - j) as i32) * term;
                binom = binom * T::of((i - j) as f64) / T::of(j as f64 + 1.0);
            }
        }
    }
    total / (self_kernel_norm(params))
}

fn self_kernel_norm<T: Scalar>(params: &ModelParams<T>) -> T {
    params.l * (T::of(4.0) * T::pi() * params.d).sqrt()
}

/// Linear-propagator price path on a uniform grid matching the schedule
/// horizon at the given step count.
pub fn propagator_price<T: Scalar>(
    schedule: &TradingSchedule<T>,
    params: &ModelParams<T>,
    n_steps: usize,
) -> PricePath<T> {
    let t_total = schedule.t_total();
    let n = n_steps.max(1);
    let times: Vec<T> = (0..=n).map(|k| t_total * T::of(k as f64 / n as f64)).collect();
    let y: Vec<T> = times.iter().map(|&t| propagator_value(schedule, params, t)).collect();
    let residual = vec![T::zero(); times.len()];
    PricePath::new(times, y, residual)
}

/// Kernel right-hand side with an arbitrary past path and adaptive
/// quadrature; the singularity at s -> t is removed by s = t - u^2 and each
/// schedule segment is integrated over its own u-range (so narrow supports
/// far in the past are never missed).
pub fn kernel_rhs<T: Scalar>(
    schedule: &TradingSchedule<T>,
    past: &dyn Fn(T) -> T,
    t: T,
    candidate: T,
    params: &ModelParams<T>,
    tol: T,
) -> Result<T> {
    let d = params.d;
    let mut total = T::zero();
    for seg in schedule.segments() {
        if seg.t_start >= t {
            break;
        }
        let b = seg.t_end.min(t);
        let u_lo = (t - b).max(T::zero()).sqrt();
        let u_hi = (t - seg.t_start).sqrt();
        if !(u_hi > u_lo) {
            continue;
        }
        let f = |u: T| {
            let s = t - u * u;
            let m = schedule.intensity(s);
            if u == T::zero() {
                return m;
            }
            let dy = candidate - past(s);
            let arg = dy * dy / (T::of(4.0) * d * u * u);
            m * (-arg).exp()
        };
        total = total + adaptive_simpson(&f, u_lo, u_hi, tol * (u_hi - u_lo))?;
    }
    Ok(total / (params.l * (params.d * T::pi()).sqrt()))
}

/// Defect of the fixed-point equation for a given trajectory at time t.
pub fn equation_residual<T: Scalar>(
    schedule: &TradingSchedule<T>,
    trajectory: &dyn Fn(T) -> T,
    t: T,
    params: &ModelParams<T>,
    tol: T,
) -> Result<T> {
    let y = trajectory(t);
    let rhs = kernel_rhs(schedule, trajectory, t, y, params, tol)?;
    Ok(y - rhs)
}

fn amplitude_integral<T: Scalar>(a: T) -> Result<T> {
    // integral over u in (0,1) of exp(-A^2(1-sqrt(u))/(4(1+sqrt(u)))) /
    // sqrt(4 pi (1-u)), endpoint singularity removed via u = 1 - v^2
    let f = |v: T| {
        let w = (T::one() - v * v).max(T::zero()).sqrt();
        let arg = a * a * (T::one() - w) / (T::of(4.0) * (T::one() + w));
        (-arg).exp()
    };
    let val = adaptive_simpson(&f, T::zero(), T::one(), T::of(1e-13))?;
    Ok(val / T::sqrt_pi())
}

/// Amplitude A of the constant-rate square-root solution y = A sqrt(D t),
/// as a function of the dimensionless rate m0 / J.
pub fn solve_a<T: Scalar>(rate_ratio: T) -> Result<T> {
    if !(rate_ratio > T::zero()) {
        return Err(Error::ParameterOutOfRange("rate_ratio must be positive".into()));
    }
    let f = |a: T| -> T {
        a - rate_ratio * amplitude_integral(a).unwrap_or(T::nan())
    };
    let hi = T::two() * (T::two() * rate_ratio).sqrt() + T::one();
    bracketed_root(&f, T::zero(), hi, T::of(1e-14))
        .map_err(|_| Error::BracketFailure {
            lo: 0.0,
            hi: hi.to_f64().unwrap_or(f64::NAN),
        })
}

/// Peak impact of a constant-rate meta-order of volume Q at rate m0:
/// I(Q) = A(m0/J) sqrt(D Q / m0).
pub fn impact<T: Scalar>(q: T, m0: T, params: &ModelParams<T>) -> Result<T> {
    if !(q > T::zero()) || !(m0 > T::zero()) {
        return Err(Error::ParameterOutOfRange("impact needs Q > 0 and m0 > 0".into()));
    }
    let a = solve_a(m0 / params.j)?;
    Ok(a * (params.d * q / m0).sqrt())
}

/// A(rate_ratio) / sqrt(rate_ratio); increases monotonically from 0
/// toward sqrt(2).
pub fn y_ratio<T: Scalar>(rate_ratio: T) -> Result<T> {
    Ok(solve_a(rate_ratio)? / rate_ratio.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> ModelParams<f64> {
        ModelParams::unit()
    }

    // frozen oracle values from an independent fixed-point iteration of the
    // amplitude equation with brute-force trapezoid quadrature at 1e6 nodes
    const A_1: f64 = 0.558054691704;
    const A_10: f64 = 3.86189135348;
    const A_100: f64 = 13.9325348293;

    #[test]
    fn solve_a_reference_values() {
        assert!((solve_a(1.0).unwrap() - A_1).abs() < 1e-10);
        assert!((solve_a(10.0).unwrap() - A_10).abs() < 1e-9);
        assert!((solve_a(100.0).unwrap() - A_100).abs() < 1e-8);
    }

    #[test]
    fn solve_a_asymptotes() {
        let small = solve_a(1e-6).unwrap();
        assert!((small * PI_SQRT / 1e-6 - 1.0).abs() < 1e-4);
        let big = solve_a(1e6).unwrap();
        assert!((big / 1e3 / std::f64::consts::SQRT_2 - 1.0).abs() < 1e-3);
    }
    const PI_SQRT: f64 = 1.7724538509055159;

    #[test]
    fn y_ratio_monotone_and_bounded() {
        let mut prev = 0.0;
        for &r in &[0.01, 0.1, 1.0, 10.0, 100.0, 1e4] {
            let v = y_ratio(r).unwrap();
            assert!(v > prev);
            assert!(v < std::f64::consts::SQRT_2);
            prev = v;
        }
    }

    #[test]
    fn propagator_constant_rate() {
        let s = TradingSchedule::constant(1.0, 1.0);
        let y = propagator_value(&s, &unit(), 1.0);
        assert!((y - 1.0 / PI_SQRT).abs() < 1e-14);
    }

    #[test]
    fn propagator_ramp_closed_form() {
        // m(s) = s on [0,2]: y(t) = (1/(L sqrt(4 pi D))) * (4/3) t^{3/2}
        let s = TradingSchedule::new(vec![crate::schedule::Segment {
            t_start: 0.0,
            t_end: 2.0,
            coeffs: vec![0.0, 1.0],
        }])
        .unwrap();
        let t: f64 = 1.7;
        let expect = (4.0 / 3.0) * t.powf(1.5) / (4.0 * std::f64::consts::PI).sqrt();
        assert!((propagator_value(&s, &unit(), t) - expect).abs() < 1e-13);
    }

    #[test]
    fn propagator_reversal_crossing() {
        // +m0 on [0,T], -m0 after: y ~ 2 sqrt(t) - 4 sqrt(t-T), zero at 4T/3
        let s = TradingSchedule::buy_then_sell(1.0, 1.0, 3.0);
        let p = unit();
        let t = 4.0 / 3.0;
        assert!(propagator_value(&s, &p, t).abs() < 1e-14);
        assert!(propagator_value(&s, &p, t - 0.01) > 0.0);
        assert!(propagator_value(&s, &p, t + 0.01) < 0.0);
    }

    #[test]
    fn marching_zero_intensity() {
        let s = TradingSchedule::constant(0.0, 1.0);
        let cfg = SolverConfig { dt: 0.05, tol: 1e-10, max_iters: 40, quad_nodes: 64 };
        let path = solve_price_path(&s, &unit(), &cfg).unwrap();
        assert!(path.y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn marching_matches_amplitude() {
        let s = TradingSchedule::constant(1.0, 1.0);
        let cfg = SolverConfig { dt: 1e-3, tol: 1e-10, max_iters: 40, quad_nodes: 64 };
        let path = solve_price_path(&s, &unit(), &cfg).unwrap();
        let y_t = *path.y.last().unwrap();
        assert!((y_t / A_1 - 1.0).abs() < 1e-4, "y_T = {y_t}");
    }

    #[test]
    fn marching_matches_propagator_at_small_rate() {
        let s = TradingSchedule::constant(0.01, 1.0);
        let cfg = SolverConfig { dt: 2e-3, tol: 1e-10, max_iters: 40, quad_nodes: 64 };
        let path = solve_price_path(&s, &unit(), &cfg).unwrap();
        let prop = propagator_value(&s, &unit(), 1.0);
        assert!((path.y.last().unwrap() / prop - 1.0).abs() < 1e-3);
    }

    #[test]
    fn odd_symmetry_under_sign_flip() {
        let s = TradingSchedule::buy_then_sell(2.0, 0.5, 1.0);
        let flipped = s.scaled_intensity(-1.0);
        let cfg = SolverConfig { dt: 5e-3, tol: 1e-10, max_iters: 40, quad_nodes: 64 };
        let a = solve_price_path(&s, &unit(), &cfg).unwrap();
        let b = solve_price_path(&flipped, &unit(), &cfg).unwrap();
        for (ya, yb) in a.y.iter().zip(&b.y) {
            assert!((ya + yb).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_solution_residual_small() {
        let p = unit();
        for &r in &[0.1, 1.0, 10.0] {
            let a = solve_a(r).unwrap();
            let s = TradingSchedule::constant(r, 1.0);
            let exact = move |t: f64| a * t.max(0.0).sqrt();
            for &t in &[0.05, 0.3, 0.7, 1.0] {
                let res = equation_residual(&s, &exact, t, &p, 1e-12).unwrap();
                let rel = res.abs() / (a * t.sqrt());
                assert!(rel < 1e-8, "r={r} t={t} rel={rel}");
            }
        }
    }

    #[test]
    fn impact_monotone() {
        let p = unit();
        let mut prev = 0.0;
        for &q in &[0.5, 1.0, 2.0, 4.0] {
            let v = impact(q, 1.0, &p).unwrap();
            assert!(v > prev);
            prev = v;
        }
        assert!(impact(1.0, 2.0, &p).unwrap() > impact(1.0, 1.0, &p).unwrap());
    }
}
