//! Impact decay after a constant-rate order stops, and buy-then-sell
//! reversal trajectories with their return times.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{ModelParams, PricePath};
use crate::numerics::roots::bracketed_root;
use crate::scalar::Scalar;
use crate::schedule::TradingSchedule;
use crate::solver::{kernel_rhs, solve_a, solve_price_path_on, SolverConfig};

/// Normalized propagator-limit decay (sqrt(t) - sqrt(t - T)) / sqrt(T).
pub fn decay_propagator_ratio<T: Scalar>(t: T, big_t: T) -> T {
    ((t.sqrt() - (t - big_t).max(T::zero()).sqrt()) / big_t.sqrt()).max(T::zero())
}

/// Price at a single time t >= big_t after a constant-rate order of rate
/// m0 on [0, big_t]. The growth leg is pinned to its exact square-root
/// law, so once trading has stopped the fixed point at each decay time is
/// independent of every other decay point.
pub fn decay_value<T: Scalar>(
    m0: T,
    big_t: T,
    t: T,
    params: &ModelParams<T>,
    tol: T,
) -> Result<T> {
    if !(m0 > T::zero()) {
        return Err(Error::NonPositiveParameter {
            name: "m0",
            value: m0.to_f64().unwrap_or(f64::NAN),
        });
    }
    if !(t >= big_t) || !(big_t > T::zero()) {
        return Err(Error::ParameterOutOfRange(
            "decay time must satisfy t >= T > 0".into(),
        ));
    }
    let a = solve_a(m0 / params.j)?;
    let d = params.d;
    let y_end = a * (d * big_t).sqrt();
    if t == big_t {
        return Ok(y_end);
    }
    let schedule = TradingSchedule::constant(m0, big_t);
    let past = move |s: T| a * (d * s.max(T::zero())).sqrt();
    let f = |y: T| {
        kernel_rhs(&schedule, &past, t, y, params, tol)
            .map(|rhs| y - rhs)
            .unwrap_or(T::nan())
    };
    // The price decays strictly after trading stops, so the physical root
    // sits just below y(T). At large rates the defect is exponentially
    // flat away from the root, so the bracket is walked downward from
    // y(T) in steps of a quarter of the short-time drop scale
    // y(T) sqrt((t - T)/T), stopping at the first sign change.
    let step = y_end * ((t - big_t) / big_t).sqrt().min(T::one()) * T::of(0.25);
    let mut hi = y_end;
    let mut lo = y_end - step;
    loop {
        if lo <= T::zero() {
            lo = T::zero();
            break;
        }
        if !(f(lo) > T::zero()) {
            break;
        }
        hi = lo;
        lo = lo - step;
    }
    bracketed_root(&f, lo, hi, tol).map_err(|_| Error::BracketFailure {
        lo: lo.to_f64().unwrap_or(f64::NAN),
        hi: y_end.to_f64().unwrap_or(f64::NAN),
    })
}

/// Decay path on (big_t, t_max] on a uniform grid of the configured step.
/// Each point is its own scalar fixed point, so they are solved in
/// parallel.
pub fn decay_trajectory<T: Scalar>(
    m0: T,
    big_t: T,
    t_max: T,
    params: &ModelParams<T>,
    config: &SolverConfig<T>,
) -> Result<PricePath<T>> {
    config.validate()?;
    if !(t_max > big_t) {
        return Err(Error::ParameterOutOfRange("t_max must exceed T".into()));
    }
    let span = t_max - big_t;
    let n = (span / config.dt)
        .ceil()
        .to_f64()
        .unwrap_or(1.0)
        .max(1.0) as usize;
    let times: Vec<T> = (1..=n)
        .map(|k| big_t + span * T::of(k as f64 / n as f64))
        .collect();
    let values: Vec<Result<T>> = times
        .par_iter()
        .map(|&t| decay_value(m0, big_t, t, params, config.tol))
        .collect();
    let mut y = Vec::with_capacity(n);
    for v in values {
        y.push(v?);
    }
    let residual = vec![T::zero(); n];
    Ok(PricePath::new(times, y, residual))
}

/// Buy m0 on [0, T], sell m0 on (T, 2T]; returns the marched path on
/// [0, 2T] and the first time the price re-crosses zero. The grid is
/// refined tenfold around the crossing found in a coarse first pass, since
/// the return lag shrinks like 1 / rate at large rates.
pub fn reversal_trajectory<T: Scalar>(
    m0: T,
    big_t: T,
    params: &ModelParams<T>,
    config: &SolverConfig<T>,
) -> Result<(PricePath<T>, T)> {
    if !(m0 > T::zero()) {
        return Err(Error::NonPositiveParameter {
            name: "m0",
            value: m0.to_f64().unwrap_or(f64::NAN),
        });
    }
    config.validate()?;
    let schedule = TradingSchedule::buy_then_sell(m0, big_t, T::two() * big_t);
    let coarse = march_grid(&schedule, params, config, None)?;
    let bracket = first_crossing_after(&coarse, big_t);
    let (lo, hi) = match bracket {
        Some((t1, t2, _, _)) => (t1, t2),
        None => return Err(Error::NoReturnWithinHorizon),
    };
    // a fast crossing sits on the square-root shoulder right after the
    // rate flips, so the refined window must start at the flip itself
    let lo = if lo - big_t <= big_t * T::of(0.05) {
        big_t
    } else {
        lo - config.dt
    };
    let refined = march_grid(&schedule, params, config, Some((lo, hi + config.dt)))?;
    match first_crossing_after(&refined, big_t) {
        Some((t1, t2, y1, y2)) => {
            let return_time = t1 + (t2 - t1) * y1 / (y1 - y2);
            Ok((refined, return_time))
        }
        None => Err(Error::NoReturnWithinHorizon),
    }
}

/// March over a uniform grid, optionally subdivided tenfold inside a
/// window.
fn march_grid<T: Scalar>(
    schedule: &TradingSchedule<T>,
    params: &ModelParams<T>,
    config: &SolverConfig<T>,
    refine: Option<(T, T)>,
) -> Result<PricePath<T>> {
    let t_total = schedule.t_total();
    let n = (t_total / config.dt)
        .round()
        .to_f64()
        .unwrap_or(1.0)
        .max(1.0) as usize;
    let mut times = Vec::with_capacity(n + 32);
    for k in 1..=n {
        let t0 = t_total * T::of((k - 1) as f64 / n as f64);
        let t1 = t_total * T::of(k as f64 / n as f64);
        if let Some((lo, hi)) = refine {
            if t1 > lo && t0 < hi {
                for j in 1..=10 {
                    times.push(t0 + (t1 - t0) * T::of(j as f64 / 10.0));
                }
                continue;
            }
        }
        times.push(t1);
    }
    solve_price_path_on(schedule, params, config, &times)
}

/// First sign change of y after time t0: (t_before, t_after, y_before,
/// y_after) with y_before > 0 >= y_after.
fn first_crossing_after<T: Scalar>(path: &PricePath<T>, t0: T) -> Option<(T, T, T, T)> {
    for i in 1..path.times.len() {
        if path.times[i] <= t0 {
            continue;
        }
        if path.y[i - 1] > T::zero() && path.y[i] <= T::zero() {
            return Some((path.times[i - 1], path.times[i], path.y[i - 1], path.y[i]));
        }
    }
    None
}
