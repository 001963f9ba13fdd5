//! Model parameters for the locally-linear latent order book and the
//! derived quantities used throughout the solvers.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::schedule::TradingSchedule;

/// Core model parameters. `gamma` is `None` in the zero-cancellation limit
/// where the book is exactly linear everywhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    /// Latent-order diffusivity.
    pub d: T,
    /// Net order-flow current at the price.
    pub j: T,
    /// Book slope at the price, L = J / D.
    pub l: T,
    /// Inverse decay length of the stationary book, sqrt(nu / D).
    pub gamma: Option<T>,
    /// Deposition rate, when given.
    pub lambda: Option<T>,
    /// Cancellation rate, when given.
    pub nu: Option<T>,
}

fn require_positive<T: Scalar>(name: &'static str, value: T) -> Result<()> {
    if value > T::zero() && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveParameter { name, value: value.to_f64().unwrap_or(f64::NAN) })
    }
}

impl<T: Scalar> ModelParams<T> {
    /// Validate raw inputs and derive (J, L, gamma). Accepts either J
    /// directly, or (lambda, nu), or all of them (checked for consistency).
    pub fn validate_and_derive(d: T, j: Option<T>, lambda: Option<T>, nu: Option<T>) -> Result<Self> {
        require_positive("D", d)?;
        let rates = match (lambda, nu) {
            (Some(lam), Some(nu)) => {
                require_positive("lambda", lam)?;
                require_positive("nu", nu)?;
                let gamma = (nu / d).sqrt();
                Some((lam, nu, gamma, lam / gamma))
            }
            (None, None) => None,
            _ => {
                return Err(Error::ParameterOutOfRange(
                    "lambda and nu must be given together".into(),
                ))
            }
        };
        let (j, gamma, lambda, nu) = match (j, rates) {
            (Some(j), None) => {
                require_positive("J", j)?;
                (j, None, None, None)
            }
            (None, Some((lam, nu, gamma, j_rates))) => (j_rates, Some(gamma), Some(lam), Some(nu)),
            (Some(j), Some((lam, nu, gamma, j_rates))) => {
                require_positive("J", j)?;
                if ((j - j_rates) / j).abs() > T::of(1e-12) {
                    return Err(Error::InconsistentCurrent {
                        j: j.to_f64().unwrap_or(f64::NAN),
                        lam_over_gamma: j_rates.to_f64().unwrap_or(f64::NAN),
                    });
                }
                (j, Some(gamma), Some(lam), Some(nu))
            }
            (None, None) => {
                return Err(Error::ParameterOutOfRange("need J or (lambda, nu)".into()))
            }
        };
        Ok(Self { d, j, l: j / d, gamma, lambda, nu })
    }

    /// Unit parameters D = J = L = 1, zero-cancellation limit.
    pub fn unit() -> Self {
        Self { d: T::one(), j: T::one(), l: T::one(), gamma: None, lambda: None, nu: None }
    }

    /// Dimensionless participation rate m0 / J.
    pub fn participation(&self, m0: T) -> T {
        m0 / self.j
    }

    /// Diffusive price scale sqrt(D * t).
    pub fn price_scale(&self, t: T) -> T {
        (self.d * t).sqrt()
    }
}

/// Scale factors mapping a problem to D = J = 1 (so L = 1) units. Time is
/// untouched; price divides by sqrt(D), rate and volume divide by J.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleFactors<T> {
    pub price: T,
    pub rate: T,
}

impl<T: Scalar> ScaleFactors<T> {
    pub fn price_to_dimless(&self, y: T) -> T {
        y / self.price
    }
    pub fn price_to_physical(&self, y: T) -> T {
        y * self.price
    }
    pub fn rate_to_dimless(&self, m: T) -> T {
        m / self.rate
    }
    pub fn rate_to_physical(&self, m: T) -> T {
        m * self.rate
    }
    pub fn volume_to_dimless(&self, q: T) -> T {
        q / self.rate
    }
    pub fn cost_to_physical(&self, c: T) -> T {
        // cost = integral of m * y dt
        c * self.rate * self.price
    }
}

/// Map a problem to D = J = 1 units; invert with the returned factors.
pub fn nondimensionalize<T: Scalar>(
    params: &ModelParams<T>,
    schedule: &TradingSchedule<T>,
) -> (ModelParams<T>, TradingSchedule<T>, ScaleFactors<T>) {
    let factors = ScaleFactors { price: params.d.sqrt(), rate: params.j };
    let scaled = ModelParams {
        d: T::one(),
        j: T::one(),
        l: T::one(),
        gamma: params.gamma.map(|g| g * factors.price),
        lambda: params.lambda.map(|lam| lam / (params.j / factors.price)),
        nu: params.nu,
    };
    (scaled, schedule.scaled_intensity(T::one() / params.j), factors)
}

/// Invert `nondimensionalize` on the parameter/schedule pair.
pub fn denondimensionalize<T: Scalar>(
    params: &ModelParams<T>,
    schedule: &TradingSchedule<T>,
    factors: &ScaleFactors<T>,
) -> (ModelParams<T>, TradingSchedule<T>) {
    let d = factors.price * factors.price;
    let j = factors.rate;
    let physical = ModelParams {
        d,
        j,
        l: j / d,
        gamma: params.gamma.map(|g| g / factors.price),
        lambda: params.lambda.map(|lam| lam * (j / factors.price)),
        nu: params.nu,
    };
    (physical, schedule.scaled_intensity(factors.rate))
}

/// A solved price trajectory in the book frame, with the per-point defect
/// of the defining fixed-point equation.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePath<T> {
    pub times: Vec<T>,
    pub y: Vec<T>,
    pub residual: Vec<T>,
}

impl<T: Scalar> PricePath<T> {
    pub fn new(times: Vec<T>, y: Vec<T>, residual: Vec<T>) -> Self {
        debug_assert_eq!(times.len(), y.len());
        debug_assert_eq!(times.len(), residual.len());
        Self { times, y, residual }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Linear interpolation of y at time t (clamped to the grid range).
    pub fn interpolate(&self, t: T) -> T {
        let times = &self.times;
        let n = times.len();
        if n == 0 {
            return T::zero();
        }
        if t <= times[0] {
            return self.y[0];
        }
        if t >= times[n - 1] {
            return self.y[n - 1];
        }
        let mut lo = 0usize;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if times[mid] <= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let w = (t - times[lo]) / (times[hi] - times[lo]);
        self.y[lo] * (T::one() - w) + self.y[hi] * w
    }

    pub fn max_abs_residual(&self) -> T {
        self.residual.iter().fold(T::zero(), |a, &r| a.max(r.abs()))
    }
}

/// Agent-sensitivity dispersion: either explicit first two moments or a
/// finite mixture of point masses, together with news volatility and the
/// idiosyncratic diffusivity floor.
#[derive(Debug, Clone, PartialEq)]
pub enum BetaSpec<T> {
    Moments { mean: T, second_moment: T },
    Mixture(Vec<(T, T)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaDistributionSpec<T> {
    pub beta: BetaSpec<T>,
    pub sigma: T,
    pub d0: T,
}

impl<T: Scalar> BetaDistributionSpec<T> {
    fn variance(&self) -> Result<T> {
        match &self.beta {
            BetaSpec::Moments { mean, second_moment } => {
                let var = *second_moment - *mean * *mean;
                if var < T::zero() {
                    return Err(Error::InvalidDistribution(
                        "second moment below mean squared".into(),
                    ));
                }
                Ok(var)
            }
            BetaSpec::Mixture(points) => {
                if points.is_empty() {
                    return Err(Error::InvalidDistribution("empty mixture".into()));
                }
                let mut wsum = T::zero();
                let mut mean = T::zero();
                for &(b, w) in points {
                    if w < T::zero() {
                        return Err(Error::InvalidDistribution("negative weight".into()));
                    }
                    wsum = wsum + w;
                    mean = mean + w * b;
                }
                if (wsum - T::one()).abs() > T::of(1e-12) {
                    return Err(Error::InvalidDistribution("weights must sum to 1".into()));
                }
                let mut var = T::zero();
                for &(b, w) in points {
                    var = var + w * (b - mean) * (b - mean);
                }
                Ok(var)
            }
        }
    }
}

/// D = D0 + (sigma^2 / 2) * Var(beta): only the dispersion of the agents'
/// reactions to news contributes beyond the idiosyncratic floor.
pub fn effective_diffusion<T: Scalar>(spec: &BetaDistributionSpec<T>) -> Result<T> {
    if spec.d0 < T::zero() {
        return Err(Error::NonPositiveParameter {
            name: "D0",
            value: spec.d0.to_f64().unwrap_or(f64::NAN),
        });
    }
    let var = spec.variance()?;
    Ok(spec.d0 + spec.sigma * spec.sigma * var * T::half())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_llob_limit() {
        let p = ModelParams::validate_and_derive(1.0, Some(1.0), None, None).unwrap();
        assert_eq!(p.l, 1.0);
        assert!(p.gamma.is_none());
    }

    #[test]
    fn rates_derive_current() {
        // D=4, nu=1, lambda=2 -> gamma=0.5, J=4, L=1
        let p = ModelParams::<f64>::validate_and_derive(4.0, None, Some(2.0), Some(1.0)).unwrap();
        assert!((p.gamma.unwrap() - 0.5).abs() < 1e-15);
        assert!((p.j - 4.0).abs() < 1e-14);
        assert!((p.l - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inconsistent_quadruple_rejected() {
        let r = ModelParams::validate_and_derive(4.0, Some(5.0), Some(2.0), Some(1.0));
        assert!(matches!(r, Err(Error::InconsistentCurrent { .. })));
        let ok = ModelParams::validate_and_derive(4.0, Some(4.0), Some(2.0), Some(1.0));
        assert!(ok.is_ok());
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(ModelParams::<f64>::validate_and_derive(0.0, Some(1.0), None, None).is_err());
        assert!(ModelParams::<f64>::validate_and_derive(1.0, Some(-1.0), None, None).is_err());
        assert!(ModelParams::<f64>::validate_and_derive(1.0, None, Some(1.0), Some(0.0)).is_err());
    }

    #[test]
    fn effective_diffusion_point_mass() {
        let spec = BetaDistributionSpec {
            beta: BetaSpec::Mixture(vec![(1.0, 1.0)]),
            sigma: 2.0,
            d0: 0.3,
        };
        assert_eq!(effective_diffusion(&spec).unwrap(), 0.3);
    }

    #[test]
    fn effective_diffusion_two_point() {
        // (1-phi) delta(0) + phi delta(1), phi = 0.5, sigma = 1, D0 = 0
        let spec = BetaDistributionSpec {
            beta: BetaSpec::Mixture(vec![(0.0_f64, 0.5), (1.0, 0.5)]),
            sigma: 1.0,
            d0: 0.0,
        };
        assert!((effective_diffusion(&spec).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn effective_diffusion_spread_mixture() {
        // {(0.5, 0.5), (1.5, 0.5)}, sigma = 2, D0 = 1 -> 1 + 2 * 0.25 = 1.5
        let spec = BetaDistributionSpec {
            beta: BetaSpec::Mixture(vec![(0.5_f64, 0.5), (1.5, 0.5)]),
            sigma: 2.0,
            d0: 1.0,
        };
        assert!((effective_diffusion(&spec).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn effective_diffusion_shift_invariance() {
        let base = BetaDistributionSpec {
            beta: BetaSpec::Mixture(vec![(0.5_f64, 0.25), (1.0, 0.5), (1.5, 0.25)]),
            sigma: 1.3,
            d0: 0.2,
        };
        let shifted = BetaDistributionSpec {
            beta: BetaSpec::Mixture(vec![(0.5 + 0.7, 0.25), (1.7, 0.5), (2.2, 0.25)]),
            ..base.clone()
        };
        let a = effective_diffusion(&base).unwrap();
        let b = effective_diffusion(&shifted).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn effective_diffusion_moments_form() {
        let spec = BetaDistributionSpec {
            beta: BetaSpec::Moments { mean: 1.0_f64, second_moment: 1.5 },
            sigma: 2.0,
            d0: 1.0,
        };
        assert!((effective_diffusion(&spec).unwrap() - 2.0).abs() < 1e-15);
        let bad = BetaDistributionSpec {
            beta: BetaSpec::Moments { mean: 2.0_f64, second_moment: 1.0 },
            sigma: 1.0,
            d0: 0.0,
        };
        assert!(effective_diffusion(&bad).is_err());
    }

    #[test]
    fn nondim_round_trip_identity() {
        let p = ModelParams::<f64>::validate_and_derive(4.0, Some(2.0), None, None).unwrap();
        let s = TradingSchedule::constant(2.0, 1.0);
        let (ps, ss, f) = nondimensionalize(&p, &s);
        assert_eq!(ps.d, 1.0);
        assert_eq!(ps.j, 1.0);
        assert!((ss.intensity(0.5) - 1.0).abs() < 1e-15);
        let (p2, s2) = denondimensionalize(&ps, &ss, &f);
        assert!((p2.d - p.d).abs() < 1e-14);
        assert!((p2.j - p.j).abs() < 1e-14);
        assert!((s2.intensity(0.5) - 2.0).abs() < 1e-14);
        let y = 1.234_f64;
        assert!((f.price_to_physical(f.price_to_dimless(y)) - y).abs() < 1e-15);
    }
}
