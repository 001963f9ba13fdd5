//! Mechanical vs informational impact. An informed constant-rate order
//! adds a drift term driven by the correlation C(tau) = Gamma zeta
//! e^{-zeta tau} between the order flow and later book moves; within the
//! model the two contributions are additive, leaving a permanent component
//! Gamma Q after the mechanical part has relaxed away.

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::relaxation::decay_value;
use crate::scalar::Scalar;
use crate::solver::solve_a;

/// Exponential order-flow / price-drift correlation kernel.
#[derive(Debug, Clone, Copy)]
pub struct InfoKernel<T> {
    /// Permanent-impact coefficient (price per volume), >= 0.
    pub gamma: T,
    /// Correlation decay rate (inverse time), > 0.
    pub zeta: T,
}

impl<T: Scalar> InfoKernel<T> {
    pub fn new(gamma: T, zeta: T) -> Result<Self> {
        if gamma < T::zero() {
            return Err(Error::ParameterOutOfRange("gamma must be >= 0".into()));
        }
        if !(zeta > T::zero()) {
            return Err(Error::NonPositiveParameter {
                name: "zeta",
                value: zeta.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(InfoKernel { gamma, zeta })
    }

    /// C(tau) = Gamma zeta e^{-zeta tau}.
    pub fn correlation(&self, tau: T) -> T {
        self.gamma * self.zeta * (-self.zeta * tau.abs()).exp()
    }
}

/// Which solution supplies the mechanical (order-driven) part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MechanicalModel {
    /// Full non-linear amplitude / decay.
    Full,
    /// Bare square-root-kernel limit.
    Propagator,
}

/// Drift accumulated by the informed flow during execution:
/// m0 Int_0^t ds Int_0^s ds' C(s - s') = m0 Gamma (t - (1 - e^{-zeta t}) / zeta).
pub fn informational_component<T: Scalar>(kernel: &InfoKernel<T>, m0: T, t: T) -> T {
    if t <= T::zero() {
        return T::zero();
    }
    let z = kernel.zeta;
    m0 * kernel.gamma * (t - (T::one() - (-z * t).exp()) / z)
}

/// Informational part after execution stops at T: the drift saturates at
/// Gamma Q minus an exponentially fading transient.
pub fn informational_after<T: Scalar>(kernel: &InfoKernel<T>, m0: T, big_t: T, t: T) -> T {
    let z = kernel.zeta;
    let q = m0 * big_t;
    kernel.gamma * q
        - m0 * kernel.gamma / z * (T::one() - (-z * big_t).exp()) * (-z * (t - big_t)).exp()
}

/// Mechanical price during execution at constant rate m0.
pub fn mechanical_during<T: Scalar>(
    m0: T,
    t: T,
    params: &ModelParams<T>,
    model: MechanicalModel,
) -> Result<T> {
    let a = match model {
        MechanicalModel::Full => solve_a(m0 / params.j)?,
        MechanicalModel::Propagator => m0 / params.j / T::sqrt_pi(),
    };
    Ok(a * (params.d * t.max(T::zero())).sqrt())
}

/// Mechanical price after execution (decaying part).
pub fn mechanical_after<T: Scalar>(
    m0: T,
    big_t: T,
    t: T,
    params: &ModelParams<T>,
    model: MechanicalModel,
) -> Result<T> {
    match model {
        MechanicalModel::Full => decay_value(m0, big_t, t, params, T::of(1e-10)),
        MechanicalModel::Propagator => {
            let a = m0 / params.j / T::sqrt_pi();
            Ok(a * (params.d * big_t).sqrt()
                * (t.sqrt() - (t - big_t).max(T::zero()).sqrt())
                / big_t.sqrt())
        }
    }
}

/// Total observed impact during execution (t <= T).
pub fn total_impact_during<T: Scalar>(
    kernel: &InfoKernel<T>,
    m0: T,
    t: T,
    params: &ModelParams<T>,
    model: MechanicalModel,
) -> Result<T> {
    Ok(informational_component(kernel, m0, t) + mechanical_during(m0, t, params, model)?)
}

/// Total observed impact after execution (t > T):
/// I_tot = I_mech(t) + Gamma Q - (m0 Gamma / zeta)(1 - e^{-zeta T}) e^{-zeta (t - T)}.
pub fn total_impact_after<T: Scalar>(
    kernel: &InfoKernel<T>,
    m0: T,
    big_t: T,
    t: T,
    params: &ModelParams<T>,
    model: MechanicalModel,
) -> Result<T> {
    if !(t > big_t) {
        return Err(Error::ParameterOutOfRange("total_impact_after needs t > T".into()));
    }
    Ok(mechanical_after(m0, big_t, t, params, model)? + informational_after(kernel, m0, big_t, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quad::adaptive_simpson;

    fn unit() -> ModelParams<f64> {
        ModelParams::unit()
    }

    #[test]
    fn informational_part_starts_at_zero() {
        let k = InfoKernel::new(0.1_f64, 1.0).unwrap();
        assert_eq!(informational_component(&k, 1.0, 0.0), 0.0);
    }

    #[test]
    fn informational_part_matches_double_quadrature() {
        // oracle: direct nested integration of the correlation kernel
        let k = InfoKernel::new(0.1_f64, 1.0).unwrap();
        let outer = |s: f64| {
            adaptive_simpson(&|sp: f64| k.correlation(s - sp), 0.0, s, 1e-13).unwrap()
        };
        let oracle = adaptive_simpson(&outer, 0.0, 1.0, 1e-12).unwrap();
        let got = informational_component(&k, 1.0, 1.0);
        assert!((got - oracle).abs() < 1e-9, "{got} vs {oracle}");
        assert!((got - 0.1 * (-1.0_f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn fast_correlation_gives_linear_growth() {
        let k = InfoKernel::new(0.1_f64, 500.0).unwrap();
        let t = 1.0;
        let got = informational_component(&k, 2.0, t);
        assert!((got / (0.1 * 2.0 * t) - 1.0).abs() < 3e-3);
    }

    #[test]
    fn impact_settles_at_the_permanent_level() {
        let p = unit();
        let k = InfoKernel::new(0.1_f64, 1.0).unwrap();
        let q = 1.0;
        let t = 1.0 + 20.0_f64.max(1e4 * 1e-4);
        let tot = total_impact_after(&k, 1.0, 1.0, t, &p, MechanicalModel::Full).unwrap();
        let mech = mechanical_after(1.0, 1.0, t, &p, MechanicalModel::Full).unwrap();
        assert!(
            ((tot - mech) - 0.1 * q).abs() < 1e-3 * 0.1 * q,
            "informational part {} vs {}",
            tot - mech,
            0.1 * q
        );
    }

    #[test]
    fn zero_gamma_reduces_to_pure_decay() {
        let p = unit();
        let k = InfoKernel::new(0.0_f64, 1.0).unwrap();
        let tot = total_impact_after(&k, 1.0, 1.0, 3.0, &p, MechanicalModel::Full).unwrap();
        let mech = mechanical_after(1.0, 1.0, 3.0, &p, MechanicalModel::Full).unwrap();
        assert_eq!(tot, mech);
    }

    #[test]
    fn components_are_additive() {
        let p = unit();
        let k = InfoKernel::new(0.1_f64, 1.0).unwrap();
        for &t in &[0.2, 0.7, 1.0] {
            let total = total_impact_during(&k, 1.0, t, &p, MechanicalModel::Full).unwrap();
            let mech = mechanical_during(1.0, t, &p, MechanicalModel::Full).unwrap();
            let info = informational_component(&k, 1.0, t);
            assert_eq!(total, mech + info);
        }
        for &t in &[1.5, 2.0, 5.0] {
            let total = total_impact_after(&k, 1.0, 1.0, t, &p, MechanicalModel::Full).unwrap();
            let mech = mechanical_after(1.0, 1.0, t, &p, MechanicalModel::Full).unwrap();
            let info = informational_after(&k, 1.0, 1.0, t);
            assert_eq!(total, mech + info);
        }
    }

    #[test]
    fn informational_tail_rises_monotonically_to_the_plateau() {
        let k = InfoKernel::new(0.1_f64, 1.0).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 1..100 {
            let t = 1.0 + 0.2 * i as f64;
            let v = informational_after(&k, 1.0, 1.0, t);
            assert!(v > prev);
            assert!(v <= 0.1 + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn mechanical_flavors_differ_by_the_amplitude() {
        let p = unit();
        let full = mechanical_during(1.0, 1.0, &p, MechanicalModel::Full).unwrap();
        let prop = mechanical_during(1.0, 1.0, &p, MechanicalModel::Propagator).unwrap();
        assert!((prop - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-14);
        assert!(full < prop);
    }
}
