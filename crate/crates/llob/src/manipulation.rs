//! Round-trip cost positivity: the cost of any closed schedule is a
//! quadratic form with a positive kernel, so no execution schedule earns
//! money on average. Provides the direct cost integral, the kernel-form
//! evaluation, and a randomized audit over closed schedules.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{ModelParams, PricePath};
use crate::scalar::Scalar;
use crate::schedule::TradingSchedule;
use crate::solver::{solve_price_path, SolverConfig};

/// A trading schedule whose net traded volume is structurally zero: the
/// last level is solved so the position closes.
#[derive(Debug, Clone)]
pub struct RoundTripSchedule<T> {
    schedule: TradingSchedule<T>,
}

impl<T: Scalar> RoundTripSchedule<T> {
    /// Equal-duration piecewise-constant levels; the final level is
    /// replaced by whatever closes the position.
    pub fn from_levels(levels: &[T], t_total: T) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::InvalidSchedule(
                "a closed schedule needs at least two segments".into(),
            ));
        }
        if !(t_total > T::zero()) {
            return Err(Error::InvalidSchedule("horizon must be positive".into()));
        }
        let mut levels = levels.to_vec();
        let head: T = levels[..levels.len() - 1]
            .iter()
            .fold(T::zero(), |acc, &v| acc + v);
        let n = levels.len();
        levels[n - 1] = -head;
        let schedule = TradingSchedule::piecewise_constant(&levels, t_total)?;
        debug_assert!(
            schedule.total_volume().abs()
                <= T::of(1e-12) * schedule.gross_volume().max(T::one())
        );
        Ok(RoundTripSchedule { schedule })
    }

    pub fn schedule(&self) -> &TradingSchedule<T> {
        &self.schedule
    }
}

/// C = Int m_s y_s ds with y from the full solver, trapezoid on the
/// marching grid.
pub fn round_trip_cost<T: Scalar>(
    round_trip: &RoundTripSchedule<T>,
    params: &ModelParams<T>,
    config: &SolverConfig<T>,
) -> Result<T> {
    let schedule = round_trip.schedule();
    if schedule.gross_volume() == T::zero() {
        return Ok(T::zero());
    }
    let path = solve_price_path(schedule, params, config)?;
    Ok(cost_on_path(schedule, &path))
}

fn cost_on_path<T: Scalar>(schedule: &TradingSchedule<T>, path: &PricePath<T>) -> T {
    // trapezoid in y, with the rate taken at interval midpoints so level
    // jumps that sit on grid nodes are attributed to the correct side
    let mut acc = T::zero();
    for i in 1..path.times.len() {
        let dt = path.times[i] - path.times[i - 1];
        let mid = (path.times[i] + path.times[i - 1]) * T::half();
        acc = acc + schedule.intensity(mid) * (path.y[i] + path.y[i - 1]) * T::half() * dt;
    }
    acc
}

/// Cost kernel M(s, s') = e^{-(y_s - y_s')^2 / (4 D |s - s'|)} /
/// (L sqrt(4 pi D |s - s'|)): reducing the squared-filter form (z and u
/// integrated in closed form, Fourier measure included) collapses the
/// quadratic cost onto the defining price integral, C = Int m_s y_s ds.
pub fn cost_kernel<T: Scalar>(s: T, s_prime: T, dy: T, params: &ModelParams<T>) -> T {
    let tau = (s - s_prime).abs();
    if tau == T::zero() {
        return T::infinity();
    }
    let arg = dy * dy / (T::of(4.0) * params.d * tau);
    (-arg).exp() / (params.l * (T::of(4.0) * T::pi() * params.d * tau).sqrt())
}

/// Quadratic-form cost (1/2) Int Int m M m on the path's grid. The
/// |s - s'|^{-1/2} singularity is handled by exact cell-pair averages of
/// the singular factor (double differences of its second antiderivative),
/// so the diagonal carries its correct finite weight.
pub fn kernel_quadratic_cost<T: Scalar>(
    schedule: &TradingSchedule<T>,
    path: &PricePath<T>,
    params: &ModelParams<T>,
) -> Result<T> {
    let matrix = kernel_matrix(schedule, path, params)?;
    let n = path.times.len();
    let m: Vec<T> = path.times.iter().map(|&t| schedule.intensity(t)).collect();
    let mut acc = T::zero();
    for k in 0..n {
        for l in 0..n {
            acc = acc + m[k] * matrix[k * n + l] * m[l];
        }
    }
    Ok(acc * T::half())
}

/// Discretized symmetric kernel with cell-pair weights folded in; entry
/// (k, l) approximates the integral of M over the two grid cells divided
/// by the cell areas times the cell area (i.e. ready for plain m^T M m
/// summation).
pub fn kernel_matrix<T: Scalar>(
    schedule: &TradingSchedule<T>,
    path: &PricePath<T>,
    params: &ModelParams<T>,
) -> Result<Vec<T>> {
    let n = path.times.len();
    if n < 2 {
        return Err(Error::ParameterOutOfRange("kernel grid needs >= 2 nodes".into()));
    }
    let _ = schedule;
    let h = (path.times[n - 1] - path.times[0]) / T::of((n - 1) as f64);
    let t_lo = path.times[0];
    let t_hi = path.times[n - 1];
    // second antiderivative of |x|^{-1/2}
    let g2 = |x: T| T::of(4.0 / 3.0) * x.abs().powf(T::of(1.5));
    let norm = params.l * (T::of(4.0) * T::pi() * params.d).sqrt();
    // node k owns [t_k - h/2, t_k + h/2] clipped to the horizon, so the
    // edge nodes carry half cells just as in the trapezoid rule
    let bounds = |k: usize| {
        let t = path.times[k];
        ((t - h * T::half()).max(t_lo), (t + h * T::half()).min(t_hi))
    };
    let mut matrix = vec![T::zero(); n * n];
    for k in 0..n {
        let (a, b) = bounds(k);
        for l in 0..=k {
            let (c, d) = bounds(l);
            // exact integral of |s - s'|^{-1/2} over the cell pair
            let weight = g2(b - c) - g2(b - d) - g2(a - c) + g2(a - d);
            let smooth = if k == l {
                T::one()
            } else {
                let dy = path.y[k] - path.y[l];
                let dt = path.times[k] - path.times[l];
                (-(dy * dy) / (T::of(4.0) * params.d * dt.abs())).exp()
            };
            let value = smooth * weight / norm;
            matrix[k * n + l] = value;
            matrix[l * n + k] = value;
        }
    }
    Ok(matrix)
}

/// Outcome of the randomized no-manipulation audit.
#[derive(Debug, Clone)]
pub struct AuditOutcome<T> {
    pub costs: Vec<T>,
    pub min_cost: T,
    pub argmin_levels: Vec<T>,
    pub argmin_trial: usize,
}

/// Draw closed piecewise-constant schedules (2..=12 equal segments,
/// levels uniform in [-5J, 5J], last level balancing) and price each one
/// with the full solver. Trials use independent, deterministic generator
/// streams, so results are reproducible and order-independent.
pub fn random_round_trip_audit<T: Scalar>(
    n_trials: usize,
    seed: u64,
    t_total: T,
    params: &ModelParams<T>,
    config: &SolverConfig<T>,
) -> Result<AuditOutcome<T>> {
    if n_trials == 0 {
        return Err(Error::ParameterOutOfRange("audit needs at least one trial".into()));
    }
    let five_j = 5.0 * params.j.to_f64().unwrap_or(1.0);
    let results: Vec<Result<(T, Vec<T>)>> = (0..n_trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let k = rng.gen_range(2..=12usize);
            let levels: Vec<T> = (0..k)
                .map(|_| T::of(rng.gen_range(-five_j..five_j)))
                .collect();
            let round_trip = RoundTripSchedule::from_levels(&levels, t_total)?;
            let cost = round_trip_cost(&round_trip, params, config)?;
            let final_levels: Vec<T> = round_trip
                .schedule()
                .segments()
                .iter()
                .map(|seg| seg.coeffs[0])
                .collect();
            Ok((cost, final_levels))
        })
        .collect();
    let mut costs = Vec::with_capacity(n_trials);
    let mut min_cost = T::infinity();
    let mut argmin_levels = Vec::new();
    let mut argmin_trial = 0;
    for (trial, res) in results.into_iter().enumerate() {
        let (cost, levels) = res?;
        if cost < min_cost {
            min_cost = cost;
            argmin_levels = levels;
            argmin_trial = trial;
        }
        costs.push(cost);
    }
    Ok(AuditOutcome { costs, min_cost, argmin_levels, argmin_trial })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::linalg::symmetric_eigenvalues;

    fn unit() -> ModelParams<f64> {
        ModelParams::unit()
    }

    fn coarse(dt: f64) -> SolverConfig<f64> {
        SolverConfig { dt, tol: 1e-10, max_iters: 40, quad_nodes: 64 }
    }

    #[test]
    fn zero_schedule_costs_nothing() {
        let p = unit();
        let rt = RoundTripSchedule::from_levels(&[0.0_f64, 0.0], 1.0).unwrap();
        let c = round_trip_cost(&rt, &p, &coarse(1e-2)).unwrap();
        assert_eq!(c, 0.0);
    }

    #[test]
    fn closing_level_balances_the_volume() {
        let rt = RoundTripSchedule::from_levels(&[3.0_f64, -1.0, 7.5], 1.5).unwrap();
        assert!(rt.schedule().total_volume().abs() < 1e-12 * rt.schedule().gross_volume());
    }

    #[test]
    fn single_segment_round_trip_is_rejected() {
        assert!(matches!(
            RoundTripSchedule::from_levels(&[1.0_f64], 1.0),
            Err(Error::InvalidSchedule(_))
        ));
    }

    #[test]
    fn buy_then_sell_is_costly_and_sign_symmetric() {
        let p = unit();
        let cfg = coarse(2e-3);
        let buy = RoundTripSchedule::from_levels(&[1.0_f64, -1.0], 2.0).unwrap();
        let sell = RoundTripSchedule::from_levels(&[-1.0_f64, 1.0], 2.0).unwrap();
        let cb = round_trip_cost(&buy, &p, &cfg).unwrap();
        let cs = round_trip_cost(&sell, &p, &cfg).unwrap();
        assert!(cb > 0.0, "cost {cb}");
        assert!((cb - cs).abs() < 1e-12 * cb.abs());
    }

    #[test]
    fn kernel_form_agrees_with_the_direct_cost() {
        let p = unit();
        let cfg = coarse(1.0 / 100.0);
        let rt = RoundTripSchedule::from_levels(&[1.0_f64, -1.0], 2.0).unwrap();
        // both sides discretize the same continuum identity; the grid is
        // the finest the O(n^2) kernel route is meant for
        let path = solve_price_path(rt.schedule(), &p, &cfg).unwrap();
        let direct = cost_on_path(rt.schedule(), &path);
        let quadratic = kernel_quadratic_cost(rt.schedule(), &path, &p).unwrap();
        assert!(
            (quadratic / direct - 1.0).abs() < 0.01,
            "quadratic {quadratic} vs direct {direct}"
        );
    }

    #[test]
    fn discretized_kernel_is_symmetric_positive() {
        let p = unit();
        let cfg = coarse(2.0 / 60.0);
        let rt = RoundTripSchedule::from_levels(&[1.0_f64, -0.5, 0.25], 2.0).unwrap();
        let path = solve_price_path(rt.schedule(), &p, &cfg).unwrap();
        let n = path.times.len();
        let m = kernel_matrix(rt.schedule(), &path, &p).unwrap();
        for k in 0..n {
            for l in 0..n {
                assert!((m[k * n + l] - m[l * n + k]).abs() < 1e-12);
            }
        }
        let eig = symmetric_eigenvalues(&m, n);
        let max = eig.iter().cloned().fold(f64::MIN, f64::max);
        let min = eig.iter().cloned().fold(f64::MAX, f64::min);
        assert!(min >= -1e-10 * max, "eigenvalue range [{min}, {max}]");
    }

    #[test]
    fn audit_finds_no_profitable_schedule() {
        let p = unit();
        let cfg = coarse(2.0 / 200.0);
        let out = random_round_trip_audit(200, 42, 2.0, &p, &cfg).unwrap();
        let mut mags: Vec<f64> = out.costs.iter().map(|c| c.abs()).collect();
        mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = mags[mags.len() / 2];
        assert!(
            out.min_cost >= -1e-3 * median,
            "min cost {} vs median magnitude {median}",
            out.min_cost
        );
    }

    #[test]
    fn audit_is_reproducible() {
        let p = unit();
        let cfg = coarse(2.0 / 80.0);
        let a = random_round_trip_audit(20, 7, 2.0, &p, &cfg).unwrap();
        let b = random_round_trip_audit(20, 7, 2.0, &p, &cfg).unwrap();
        assert_eq!(a.costs, b.costs);
        assert_eq!(a.argmin_trial, b.argmin_trial);
        assert_eq!(a.argmin_levels, b.argmin_levels);
    }

    #[test]
    fn audit_floor_shrinks_with_the_step() {
        let p = unit();
        let floor = |dt: f64| {
            let out = random_round_trip_audit(60, 11, 2.0, &p, &coarse(dt)).unwrap();
            (-out.min_cost).max(0.0)
        };
        let coarse_floor = floor(2.0 / 60.0);
        let fine_floor = floor(2.0 / 240.0);
        assert!(
            fine_floor <= coarse_floor.max(1e-12),
            "floor did not shrink: {coarse_floor} -> {fine_floor}"
        );
    }

    #[test]
    fn scaled_rates_stay_non_negative() {
        let p = unit();
        let cfg = coarse(2.0 / 100.0);
        for c in [0.1_f64, 1.0, 10.0] {
            let rt = RoundTripSchedule::from_levels(&[c, -0.4 * c, 0.2 * c], 2.0).unwrap();
            let cost = round_trip_cost(&rt, &p, &cfg).unwrap();
            assert!(cost >= -1e-6 * c, "c={c}: cost {cost}");
        }
    }
}
