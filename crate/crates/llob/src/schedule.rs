//! Signed trading intensity m(t) as a piecewise polynomial on [0, T].

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One polynomial piece of the trading intensity. Coefficients are in the
/// local variable `t - t_start`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment<T> {
    pub t_start: T,
    pub t_end: T,
    pub coeffs: Vec<T>,
}

impl<T: Scalar> Segment<T> {
    fn eval_local(&self, dt: T) -> T {
        let mut acc = T::zero();
        for &c in self.coeffs.iter().rev() {
            acc = acc * dt + c;
        }
        acc
    }

    /// n-th derivative of m at local offset dt.
    fn derivative_local(&self, dt: T, order: usize) -> T {
        let mut acc = T::zero();
        for (i, &c) in self.coeffs.iter().enumerate() {
            if i < order {
                continue;
            }
            let mut fac = T::one();
            for k in 0..order {
                fac = fac * T::of((i - k) as f64);
            }
            acc = acc + c * fac * dt.powi((i - order) as i32);
        }
        acc
    }

    /// Integral of m over [t_start, t_start + dt], closed form.
    fn integral_local(&self, dt: T) -> T {
        let mut acc = T::zero();
        for (i, &c) in self.coeffs.iter().enumerate() {
            acc = acc + c * dt.powi(i as i32 + 1) / T::of(i as f64 + 1.0);
        }
        acc
    }
}

/// Piecewise-polynomial signed trading intensity; m > 0 buys.
#[derive(Debug, Clone, PartialEq)]
pub struct TradingSchedule<T> {
    segments: Vec<Segment<T>>,
    /// Cumulative volume at each segment start.
    q_prefix: Vec<T>,
    t_total: T,
}

impl<T: Scalar> TradingSchedule<T> {
    pub fn new(segments: Vec<Segment<T>>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidSchedule("no segments".into()));
        }
        if segments[0].t_start != T::zero() {
            return Err(Error::InvalidSchedule("first segment must start at t = 0".into()));
        }
        for w in segments.windows(2) {
            if w[0].t_end != w[1].t_start {
                return Err(Error::InvalidSchedule(
                    "segments must be contiguous and non-overlapping".into(),
                ));
            }
        }
        for s in &segments {
            if !(s.t_end > s.t_start) {
                return Err(Error::InvalidSchedule("segment has non-positive length".into()));
            }
            if s.coeffs.is_empty() {
                return Err(Error::InvalidSchedule("segment has no coefficients".into()));
            }
        }
        let t_total = segments.last().unwrap().t_end;
        let mut q_prefix = Vec::with_capacity(segments.len());
        let mut q = T::zero();
        for s in &segments {
            q_prefix.push(q);
            q = q + s.integral_local(s.t_end - s.t_start);
        }
        Ok(Self { segments, q_prefix, t_total })
    }

    /// Constant rate m0 on [0, t_total].
    pub fn constant(m0: T, t_total: T) -> Self {
        Self::new(vec![Segment { t_start: T::zero(), t_end: t_total, coeffs: vec![m0] }]).unwrap()
    }

    /// +m0 on [0, t_switch], -m0 on (t_switch, t_total].
    pub fn buy_then_sell(m0: T, t_switch: T, t_total: T) -> Self {
        Self::new(vec![
            Segment { t_start: T::zero(), t_end: t_switch, coeffs: vec![m0] },
            Segment { t_start: t_switch, t_end: t_total, coeffs: vec![-m0] },
        ])
        .unwrap()
    }

    /// Piecewise-constant schedule over equal-length segments.
    pub fn piecewise_constant(levels: &[T], t_total: T) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidSchedule("no levels".into()));
        }
        let k = T::of(levels.len() as f64);
        let seg_len = t_total / k;
        let segments = levels
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                let a = seg_len * T::of(i as f64);
                let b = if i + 1 == levels.len() { t_total } else { seg_len * T::of(i as f64 + 1.0) };
                Segment { t_start: a, t_end: b, coeffs: vec![m] }
            })
            .collect();
        Self::new(segments)
    }

    pub fn t_total(&self) -> T {
        self.t_total
    }

    pub fn segments(&self) -> &[Segment<T>] {
        &self.segments
    }

    fn segment_index(&self, t: T) -> usize {
        // binary search over segment starts; clamp into [0, T]
        if t <= T::zero() {
            return 0;
        }
        if t >= self.t_total {
            return self.segments.len() - 1;
        }
        let mut lo = 0usize;
        let mut hi = self.segments.len();
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.segments[mid].t_start <= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Trading intensity m(t); zero outside [0, T].
    pub fn intensity(&self, t: T) -> T {
        if t < T::zero() || t > self.t_total {
            return T::zero();
        }
        let s = &self.segments[self.segment_index(t)];
        s.eval_local(t - s.t_start)
    }

    /// n-th time derivative of the intensity, in the interior of segments.
    pub fn intensity_derivative(&self, t: T, order: usize) -> T {
        if order == 0 {
            return self.intensity(t);
        }
        if t < T::zero() || t > self.t_total {
            return T::zero();
        }
        let s = &self.segments[self.segment_index(t)];
        s.derivative_local(t - s.t_start, order)
    }

    /// Cumulative signed volume Q(t), exact per segment.
    pub fn cumulative(&self, t: T) -> T {
        if t <= T::zero() {
            return T::zero();
        }
        let t = t.min(self.t_total);
        let i = self.segment_index(t);
        let s = &self.segments[i];
        self.q_prefix[i] + s.integral_local(t - s.t_start)
    }

    /// Total signed volume Q(T).
    pub fn total_volume(&self) -> T {
        self.cumulative(self.t_total)
    }

    /// Integral of |m| over [0, T] (adaptive quadrature per segment).
    pub fn gross_volume(&self) -> T {
        let mut acc = T::zero();
        for s in &self.segments {
            let len = s.t_end - s.t_start;
            let v = crate::numerics::quad::adaptive_simpson(
                &|t: T| s.eval_local(t - s.t_start).abs(),
                s.t_start,
                s.t_end,
                T::of(1e-12) * (len.abs() + T::one()),
            )
            .unwrap_or_else(|_| {
                crate::numerics::quad::simpson_uniform(
                    |t| s.eval_local(t - s.t_start).abs(),
                    s.t_start,
                    s.t_end,
                    512,
                )
            });
            acc = acc + v;
        }
        acc
    }

    /// Rescale intensity by `factor` (volume scaling).
    pub fn scaled_intensity(&self, factor: T) -> Self {
        let segments = self
            .segments
            .iter()
            .map(|s| Segment {
                t_start: s.t_start,
                t_end: s.t_end,
                coeffs: s.coeffs.iter().map(|&c| c * factor).collect(),
            })
            .collect();
        Self::new(segments).unwrap()
    }

    /// True if m(t) changes sign anywhere on [0, T] (sampled per segment).
    pub fn changes_sign(&self) -> bool {
        let mut seen_pos = false;
        let mut seen_neg = false;
        for s in &self.segments {
            let len = s.t_end - s.t_start;
            let samples = 4 * s.coeffs.len() + 1;
            for i in 0..=samples {
                let dt = len * T::of(i as f64 / samples as f64);
                let v = s.eval_local(dt);
                if v > T::zero() {
                    seen_pos = true;
                } else if v < T::zero() {
                    seen_neg = true;
                }
            }
        }
        seen_pos && seen_neg
    }
}
