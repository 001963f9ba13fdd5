//! Large-rate expansion of the price equation. At high trading intensity
//! the memory kernel localizes near s = t and L y |y'| = m picks up
//! corrections organized in powers of D (equivalently of J / m). The
//! inverted first-order relation gives an explicit trajectory and an
//! execution cost that is independent of the schedule shape.

use crate::error::{Error, Result};
use crate::model::{ModelParams, PricePath};
use crate::numerics::quad::adaptive_simpson;
use crate::scalar::Scalar;
use crate::schedule::TradingSchedule;

/// Derivatives of the trading rate at a point, m through m'''.
#[derive(Debug, Clone, Copy)]
pub struct RateJet<T> {
    pub m: T,
    pub m1: T,
    pub m2: T,
    pub m3: T,
}

impl<T: Scalar> RateJet<T> {
    pub fn of(schedule: &TradingSchedule<T>, t: T) -> Self {
        RateJet {
            m: schedule.intensity(t),
            m1: schedule.intensity_derivative(t, 1),
            m2: schedule.intensity_derivative(t, 2),
            m3: schedule.intensity_derivative(t, 3),
        }
    }
}

/// Derivatives of the price at a point, y' through y''''.
#[derive(Debug, Clone, Copy)]
pub struct PriceJet<T> {
    pub y1: T,
    pub y2: T,
    pub y3: T,
    pub y4: T,
}

/// Per-order contributions to L y |y'|; the bookkeeping epsilon is fixed
/// to one, so smallness is carried entirely by J / m.
#[derive(Debug, Clone, Copy)]
pub struct ExpansionTerms<T> {
    pub order: [T; 4],
}

impl<T: Scalar> ExpansionTerms<T> {
    pub fn evaluate(rate: &RateJet<T>, price: &PriceJet<T>, d: T) -> Result<Self> {
        let (m, m1, m2, m3) = (rate.m, rate.m1, rate.m2, rate.m3);
        let (y1, y2, y3, y4) = (price.y1, price.y2, price.y3, price.y4);
        if y1 == T::zero() {
            return Err(Error::StationaryPriceSingularity);
        }
        let o0 = m;
        let o1 = d * (T::of(3.0) * m * y2 / y1.powi(3) - T::two() * m1 / (y1 * y1));
        let o2 = d * d
            * (T::of(6.0) * m2 * y1 * y1 - T::of(30.0) * m1 * y2 * y1 - T::of(10.0) * m * y3 * y1
                + T::of(45.0) * m * y2 * y2)
            / y1.powi(6);
        let o3 = T::of(5.0) * d.powi(3)
            * ((-T::of(4.0) * m3 * y1.powi(3)
                + T::of(42.0) * m2 * y2 * y1 * y1
                + T::of(28.0) * m1 * y3 * y1 * y1
                + T::of(7.0) * m * y4 * y1 * y1)
                + (-T::of(168.0) * m1 * y2 * y2 * y1 - T::of(112.0) * m * y2 * y3 * y1
                    + T::of(252.0) * m * y2.powi(3)))
            / y1.powi(9);
        Ok(ExpansionTerms { order: [o0, o1, o2, o3] })
    }

    pub fn truncated(&self, order: usize) -> T {
        self.order[..=order.min(3)]
            .iter()
            .fold(T::zero(), |acc, &v| acc + v)
    }
}

/// L y |y'| truncated at the requested order.
pub fn expansion_rhs<T: Scalar>(
    rate: &RateJet<T>,
    price: &PriceJet<T>,
    d: T,
    order: usize,
) -> Result<T> {
    if order > 3 {
        return Err(Error::ParameterOutOfRange("expansion order must be <= 3".into()));
    }
    Ok(ExpansionTerms::evaluate(rate, price, d)?.truncated(order))
}

fn one_signed<T: Scalar>(schedule: &TradingSchedule<T>) -> Result<()> {
    if schedule.changes_sign() {
        return Err(Error::SignChange);
    }
    Ok(())
}

fn uniform_times<T: Scalar>(t_total: T, n_steps: usize) -> Vec<T> {
    let n = n_steps.max(1);
    (0..=n)
        .map(|k| t_total * T::of(k as f64 / n as f64))
        .collect()
}

/// Zeroth-order trajectory y = sqrt(2 Q_t / L); depends on the traded
/// volume only, not on the schedule shape.
pub fn leading_trajectory<T: Scalar>(
    schedule: &TradingSchedule<T>,
    params: &ModelParams<T>,
    n_steps: usize,
) -> Result<PricePath<T>> {
    one_signed(schedule)?;
    let times = uniform_times(schedule.t_total(), n_steps);
    let y: Vec<T> = times
        .iter()
        .map(|&t| (T::two() * schedule.cumulative(t).abs() / params.l).sqrt())
        .collect();
    let residual = vec![T::zero(); times.len()];
    Ok(PricePath::new(times, y, residual))
}

/// First-order trajectory y = sqrt((2/L)(Q_t - J(t + 2 Q_t / m_t))); the
/// radicand going negative marks the edge of the expansion's validity and
/// is reported, not clamped.
pub fn first_order_trajectory<T: Scalar>(
    schedule: &TradingSchedule<T>,
    params: &ModelParams<T>,
    n_steps: usize,
) -> Result<PricePath<T>> {
    one_signed(schedule)?;
    let times = uniform_times(schedule.t_total(), n_steps);
    let mut y = Vec::with_capacity(times.len());
    for &t in &times {
        if t == T::zero() {
            y.push(T::zero());
            continue;
        }
        let q = schedule.cumulative(t);
        let m = schedule.intensity(t);
        let radicand = q - params.j * (t + T::two() * q / m);
        if radicand < T::zero() {
            return Err(Error::NegativeRadicand { t: t.to_f64().unwrap_or(f64::NAN) });
        }
        y.push((T::two() * radicand / params.l).sqrt());
    }
    let residual = vec![T::zero(); times.len()];
    Ok(PricePath::new(times, y, residual))
}

/// Execution cost C = Int m_s y_s ds to the requested expansion order.
/// The order-1 integrand is kept linear in J, which is what makes the cost
/// depend on (Q, T) only: C = (2/3) sqrt(2/L) Q^{3/2} [1 - 3 J T / (2 Q)].
pub fn execution_cost<T: Scalar>(
    schedule: &TradingSchedule<T>,
    params: &ModelParams<T>,
    order: usize,
) -> Result<T> {
    if order > 1 {
        return Err(Error::ParameterOutOfRange("cost expansion order must be <= 1".into()));
    }
    one_signed(schedule)?;
    let l = params.l;
    let t_total = schedule.t_total();
    let tol = T::of(1e-12);
    let lead = |s: T| schedule.intensity(s) * (schedule.cumulative(s)).sqrt();
    let mut cost =
        (T::two() / l).sqrt() * adaptive_simpson(&lead, T::zero(), t_total, tol)?;
    if order == 1 {
        let corr = |s: T| {
            let q = schedule.cumulative(s);
            if q <= T::zero() {
                return T::zero();
            }
            T::two() * q.sqrt() + s * schedule.intensity(s) / q.sqrt()
        };
        cost = cost
            - params.j / (T::two() * l).sqrt()
                * adaptive_simpson(&corr, T::zero(), t_total, tol)?;
    }
    Ok(cost)
}
