//! Finite-difference evolution of the book imbalance: diffusion with a
//! moving point source at the price, stationary profiles with and without
//! deposition asymmetry, price extraction, and volume-dependent bid/ask.

use crate::error::{Error, Result};
use crate::model::{ModelParams, PricePath};
use crate::numerics::linalg::solve_tridiagonal;
use crate::numerics::quad::adaptive_simpson;
use crate::scalar::Scalar;
use crate::schedule::TradingSchedule;

/// Uniform symmetric price grid with y = 0 as a node (odd node count).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D<T> {
    pub half_width: T,
    pub n: usize,
    pub h: T,
}

impl<T: Scalar> Grid1D<T> {
    pub fn new(half_width: T, n: usize) -> Result<Self> {
        if !(half_width > T::zero()) {
            return Err(Error::ParameterOutOfRange("grid half-width must be positive".into()));
        }
        if n < 3 || n % 2 == 0 {
            return Err(Error::ParameterOutOfRange("node count must be odd and >= 3".into()));
        }
        let h = T::two() * half_width / T::of((n - 1) as f64);
        Ok(Self { half_width, n, h })
    }

    pub fn node(&self, i: usize) -> T {
        -self.half_width + self.h * T::of(i as f64)
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Index of the node at or just below y.
    fn cell_of(&self, y: T) -> usize {
        let f = ((y + self.half_width) / self.h).floor();
        let i = f.to_f64().unwrap_or(0.0).max(0.0) as usize;
        i.min(self.n - 2)
    }
}

/// Book imbalance sampled on a grid at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct BookProfile<T> {
    pub grid: Grid1D<T>,
    pub phi: Vec<T>,
    pub t: T,
}

impl<T: Scalar> BookProfile<T> {
    /// Unperturbed book: the exact linear profile -L y.
    pub fn stationary(grid: Grid1D<T>, params: &ModelParams<T>) -> Self {
        let phi = (0..grid.n).map(|i| -params.l * grid.node(i)).collect();
        Self { grid, phi, t: T::zero() }
    }
}

/// Stationary book with finite deposition/cancellation: the saturating
/// exponential on the buy side, odd-extended to the sell side.
pub fn stationary_profile<T: Scalar>(y: T, params: &ModelParams<T>) -> Result<T> {
    let (gamma, lambda, nu) = match (params.gamma, params.lambda, params.nu) {
        (Some(g), Some(lam), Some(nu)) => (g, lam, nu),
        _ => {
            return Err(Error::ParameterOutOfRange(
                "finite-cancellation profile needs lambda and nu; use the linear book otherwise"
                    .into(),
            ))
        }
    };
    if y <= T::zero() {
        Ok(lambda / nu * (T::one() - (gamma * y).exp()))
    } else {
        Ok(-(lambda / nu) * (T::one() - (-gamma * y).exp()))
    }
}

/// Stationary book with a deposition-asymmetry profile `xi` on the sell
/// side (odd-extended below the price). `xi` must decay at infinity.
pub fn stationary_profile_general<T: Scalar>(
    xi: &dyn Fn(T) -> T,
    params: &ModelParams<T>,
    y: T,
) -> Result<T> {
    if y < T::zero() {
        return Ok(-stationary_profile_general(xi, params, -y)?);
    }
    let (gamma, lambda, nu) = match (params.gamma, params.lambda, params.nu) {
        (Some(g), Some(lam), Some(nu)) => (g, lam, nu),
        _ => {
            return Err(Error::ParameterOutOfRange(
                "general stationary profile needs lambda and nu".into(),
            ))
        }
    };
    // tail integral of e^{-gamma y''} xi(y''), truncated where the
    // exponential envelope is negligible
    let cut = T::of(60.0) / gamma;
    let inner = |yp: T| -> T {
        adaptive_simpson(&|z: T| (-gamma * z).exp() * xi(z), yp, yp + cut, T::of(1e-12))
            .unwrap_or(T::nan())
    };
    let outer = adaptive_simpson(
        &|yp: T| (T::two() * gamma * yp).exp() * inner(yp),
        T::zero(),
        y,
        T::of(1e-11),
    )
    .map_err(|_| Error::DivergentDeposition)?;
    if !outer.is_finite() {
        return Err(Error::DivergentDeposition);
    }
    let base = lambda / nu * (T::one() - (-gamma * y).exp());
    let correction = lambda / params.d * (-gamma * y).exp() * outer;
    Ok(-(base + correction))
}

/// Linear-interpolation zero crossing of the profile, scanning the window
/// [lo, hi] of node indices; requires exactly one sign change.
fn zero_crossing_in<T: Scalar>(profile: &BookProfile<T>, lo: usize, hi: usize) -> Result<T> {
    let phi = &profile.phi;
    let mut found: Option<T> = None;
    for i in lo..hi {
        let a = phi[i];
        let b = phi[i + 1];
        if a == T::zero() && b == T::zero() {
            continue;
        }
        let crossing = if a == T::zero() {
            // treat an exact node zero as the crossing when the sign flips
            // across it; skip if the neighbour agrees in sign with the other side
            Some(profile.grid.node(i))
        } else if a * b < T::zero() {
            let w = a / (a - b);
            Some(profile.grid.node(i) + profile.grid.h * w)
        } else {
            None
        };
        if let Some(c) = crossing {
            if let Some(prev) = found {
                if (c - prev).abs() > profile.grid.h * T::half() {
                    return Err(Error::NonUniqueZeroCrossing);
                }
            } else {
                found = Some(c);
            }
        }
    }
    found.ok_or(Error::NoZeroCrossing)
}

/// Zero crossing over the whole grid.
pub fn extract_price<T: Scalar>(profile: &BookProfile<T>) -> Result<T> {
    zero_crossing_in(profile, 0, profile.grid.n - 1)
}

/// Zero crossing scanned within +/- 10 nodes of a previous price; falls
/// back to a full-grid scan when the window has no crossing.
pub fn extract_price_near<T: Scalar>(profile: &BookProfile<T>, hint: T) -> Result<T> {
    let c = profile.grid.cell_of(hint);
    let lo = c.saturating_sub(10);
    let hi = (c + 11).min(profile.grid.n - 1);
    match zero_crossing_in(profile, lo, hi) {
        Ok(y) => Ok(y),
        Err(Error::NoZeroCrossing) => extract_price(profile),
        Err(e) => Err(e),
    }
}

/// Volume-dependent bid and ask: prices holding volume q on each side of
/// the current price, by trapezoidal accumulation with linear inversion in
/// the final cell.
pub fn bid_ask<T: Scalar>(profile: &BookProfile<T>, q: T) -> Result<(T, T)> {
    if q < T::zero() {
        return Err(Error::ParameterOutOfRange("bid/ask volume must be >= 0".into()));
    }
    let y_t = extract_price(profile)?;
    if q == T::zero() {
        return Ok((y_t, y_t));
    }
    let bid = accumulate_side(profile, y_t, q, false)?;
    let ask = accumulate_side(profile, y_t, q, true)?;
    Ok((bid, ask))
}

/// Walk outward from the price accumulating |phi| until the target volume
/// is reached; `upward` picks the sell side.
fn accumulate_side<T: Scalar>(profile: &BookProfile<T>, y_t: T, q: T, upward: bool) -> Result<T> {
    let grid = &profile.grid;
    let phi = &profile.phi;
    let sgn = if upward { T::one() } else { -T::one() };
    let density = |i: usize| (sgn * -phi[i]).max(T::zero());
    let value_at = |y: T| -> T {
        let i = grid.cell_of(y);
        let w = (y - grid.node(i)) / grid.h;
        let v = phi[i] * (T::one() - w) + phi[i + 1] * w;
        (sgn * -v).max(T::zero())
    };
    let mut acc = T::zero();
    let mut y_prev = y_t;
    let mut f_prev = value_at(y_t);
    let start = grid.cell_of(y_t);
    let mut i = if upward { start + 1 } else { start };
    loop {
        let y_next = grid.node(i);
        let f_next = density(i);
        let seg = (y_next - y_prev).abs();
        let add = (f_prev + f_next) * T::half() * seg;
        if acc + add >= q {
            // linear density on the final cell: invert the quadratic
            let need = q - acc;
            let slope = if seg > T::zero() { (f_next - f_prev) / seg } else { T::zero() };
            let x = invert_trapezoid(f_prev, slope, need, seg);
            return Ok(y_prev + sgn * x);
        }
        acc = acc + add;
        y_prev = y_next;
        f_prev = f_next;
        if upward {
            if i + 1 >= grid.n {
                return Err(Error::InsufficientDepth { q: q.to_f64().unwrap_or(f64::NAN) });
            }
            i += 1;
        } else {
            if i == 0 {
                return Err(Error::InsufficientDepth { q: q.to_f64().unwrap_or(f64::NAN) });
            }
            i -= 1;
        }
    }
}

/// Distance x in [0, seg] with integral of (f0 + slope * x) equal to need.
fn invert_trapezoid<T: Scalar>(f0: T, slope: T, need: T, seg: T) -> T {
    if slope.abs() < T::of(1e-300) {
        if f0 > T::zero() {
            return (need / f0).min(seg);
        }
        return seg;
    }
    // (slope/2) x^2 + f0 x - need = 0
    let disc = (f0 * f0 + T::two() * slope * need).max(T::zero()).sqrt();
    let x = (disc - f0) / slope;
    if x >= T::zero() && x <= seg {
        x
    } else {
        ((-disc - f0) / slope).max(T::zero()).min(seg)
    }
}

/// Result of a book evolution: requested snapshots plus the price path.
pub struct BookEvolution<T> {
    pub snapshots: Vec<BookProfile<T>>,
    pub path: PricePath<T>,
}

/// Price extractor hardened against the node-scale ringing the trapezoidal
/// step leaves around a point source: the scan window is smoothed with
/// repeated binomial passes (which annihilate the grid's alternating mode)
/// before crossing detection, and the crossing is then refined by fitting
/// straight lines to the smoothed profile on both sides of the kink cell
/// and averaging their zeros. On a profile that is linear near the price
/// this reduces to plain linear interpolation.
struct PriceTracker {
    /// binomial smoothing passes, scaled with the diffusion number
    smooth: usize,
    /// fit-window offset from the crossing cell
    offset: usize,
    /// fit-window node count
    fit_width: usize,
}

impl PriceTracker {
    fn new<T: Scalar>(r: T) -> Self {
        let r = r.to_f64().unwrap_or(1.0);
        let smooth = ((r / 5.0).ceil().max(2.0)) as usize;
        Self { smooth, offset: smooth + 2, fit_width: 6 }
    }

    fn margin(&self) -> usize {
        12 + 2 * self.smooth + self.offset + self.fit_width
    }

    /// Smoothed copy of phi over node range [lo, hi] inclusive; the pad the
    /// passes consume lies inside [lo - smooth, hi + smooth].
    fn smoothed<T: Scalar>(&self, phi: &[T], lo: usize, hi: usize) -> Vec<T> {
        let pad = self.smooth;
        let mut seg: Vec<T> = phi[lo - pad..=hi + pad].to_vec();
        let quarter = T::of(0.25);
        for _ in 0..self.smooth {
            let prev = seg.clone();
            for i in 1..seg.len() - 1 {
                seg[i] = quarter * prev[i - 1] + T::half() * prev[i] + quarter * prev[i + 1];
            }
        }
        seg[pad..seg.len() - pad].to_vec()
    }

    fn track<T: Scalar>(&self, profile: &BookProfile<T>, hint: T) -> Result<T> {
        let grid = &profile.grid;
        let n = grid.n;
        let edge = grid.cell_of(hint);
        if edge < self.margin() || edge + self.margin() >= n {
            return Err(Error::PriceEscapedGrid {
                t: profile.t.to_f64().unwrap_or(f64::NAN),
            });
        }
        let lo = edge - 10;
        let hi = edge + 11;
        let g = self.smoothed(&profile.phi, lo, hi);
        let mut crossings: Vec<T> = Vec::new();
        for k in 0..g.len() - 1 {
            if g[k] * g[k + 1] < T::zero() {
                let w = g[k] / (g[k] - g[k + 1]);
                crossings.push(grid.node(lo + k) + grid.h * w);
            }
        }
        let coarse = if crossings.is_empty() {
            // full-grid rescan: nearest raw crossing to the previous price
            let mut best: Option<T> = None;
            for k in 0..n - 1 {
                if profile.phi[k] * profile.phi[k + 1] < T::zero() {
                    let w = profile.phi[k] / (profile.phi[k] - profile.phi[k + 1]);
                    let c = grid.node(k) + grid.h * w;
                    if best.map_or(true, |b| (c - hint).abs() < (b - hint).abs()) {
                        best = Some(c);
                    }
                }
            }
            best.ok_or(Error::NoZeroCrossing)?
        } else {
            crossings[crossings.len() / 2]
        };
        let c_edge = grid.cell_of(coarse);
        if c_edge < self.margin() || c_edge + self.margin() >= n {
            return Err(Error::PriceEscapedGrid {
                t: profile.t.to_f64().unwrap_or(f64::NAN),
            });
        }
        let i = grid.cell_of(coarse);
        let flo = i - self.offset - self.fit_width;
        let fhi = i + self.offset + self.fit_width;
        let seg = self.smoothed(&profile.phi, flo, fhi);
        let zl = line_zero(grid, flo, &seg[..self.fit_width]);
        let r0 = seg.len() - self.fit_width;
        let zr = line_zero(grid, flo + r0, &seg[r0..]);
        // a fitted zero is usable only if it lands near the coarse crossing
        // (a flat book region on one side makes that side's zero meaningless)
        let reach = grid.h * T::of((self.offset + self.fit_width) as f64);
        let mut sum = T::zero();
        let mut count = 0;
        for z in [zl, zr].into_iter().flatten() {
            if (z - coarse).abs() <= reach {
                sum = sum + z;
                count += 1;
            }
        }
        if count > 0 {
            Ok(sum / T::of(count as f64))
        } else {
            Ok(coarse)
        }
    }
}

/// Zero of the least-squares line through (node(start + k), values[k]).
fn line_zero<T: Scalar>(grid: &Grid1D<T>, start: usize, values: &[T]) -> Option<T> {
    let m = values.len();
    let mf = T::of(m as f64);
    let mut xbar = T::zero();
    let mut ybar = T::zero();
    for (k, &v) in values.iter().enumerate() {
        xbar = xbar + grid.node(start + k);
        ybar = ybar + v;
    }
    xbar = xbar / mf;
    ybar = ybar / mf;
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for (k, &v) in values.iter().enumerate() {
        let dx = grid.node(start + k) - xbar;
        sxy = sxy + dx * (v - ybar);
        sxx = sxx + dx * dx;
    }
    if sxx == T::zero() || sxy == T::zero() {
        return None;
    }
    let slope = sxy / sxx;
    Some(xbar - ybar / slope)
}

/// Crank-Nicolson evolution of the book under the trading schedule, with
/// the boundary nodes clamped to their initial (stationary) values. Each
/// step's traded mass is deposited on the two nodes bracketing the
/// start-of-step price, half before and half after the diffusion solve
/// (Strang-style source splitting, which removes the O(sqrt(dt)) bias a
/// start-of-step lump introduces next to the moving source).
pub fn evolve_book<T: Scalar>(
    initial: &BookProfile<T>,
    schedule: &TradingSchedule<T>,
    dt: T,
    params: &ModelParams<T>,
    snapshot_times: &[T],
) -> Result<BookEvolution<T>> {
    if !(dt > T::zero()) {
        return Err(Error::ParameterOutOfRange("dt must be positive".into()));
    }
    let grid = initial.grid;
    let n = grid.n;
    let n_steps = (schedule.t_total() / dt).round().to_f64().unwrap_or(1.0).max(1.0) as usize;
    let r = params.d * dt / (grid.h * grid.h);
    let tracker = PriceTracker::new(r);

    let mut phi = initial.phi.clone();
    let bc_lo = phi[0];
    let bc_hi = phi[n - 1];

    let mut times = Vec::with_capacity(n_steps + 1);
    let mut prices = Vec::with_capacity(n_steps + 1);
    let mut price = extract_price(initial)?;
    times.push(initial.t);
    prices.push(price);

    let mut snapshots = Vec::new();
    let mut snap_iter = snapshot_times.iter().copied().peekable();

    // constant tridiagonal coefficients for the interior
    let half_r = r * T::half();
    let lower: Vec<T> = (0..n - 2).map(|i| if i == 0 { T::zero() } else { -half_r }).collect();
    let upper: Vec<T> = (0..n - 2).map(|i| if i == n - 3 { T::zero() } else { -half_r }).collect();
    let diag: Vec<T> = vec![T::one() + r; n - 2];
    let mut rhs = vec![T::zero(); n - 2];

    let deposit = |phi: &mut Vec<T>, pos: T, mass: T, t: T| -> Result<()> {
        if mass == T::zero() {
            return Ok(());
        }
        let edge = grid.cell_of(pos);
        if edge < 11 || edge + 11 >= n {
            return Err(Error::PriceEscapedGrid { t: t.to_f64().unwrap_or(f64::NAN) });
        }
        let w = (pos - grid.node(edge)) / grid.h;
        phi[edge] += mass * (T::one() - w) / grid.h;
        phi[edge + 1] += mass * w / grid.h;
        Ok(())
    };

    let mut touched = false;
    // trailing half of each step's mass is deposited at the next tracked
    // price, so injection keeps up with a fast-moving zero crossing
    let mut carry = T::zero();
    for step in 0..n_steps {
        let t0 = schedule.t_total() * T::of(step as f64 / n_steps as f64);
        let t1 = schedule.t_total() * T::of((step + 1) as f64 / n_steps as f64);
        let mass = schedule.cumulative(t1) - schedule.cumulative(t0);
        touched = touched || mass != T::zero();

        deposit(&mut phi, price, carry + mass * T::half(), t0)?;
        carry = mass * T::half();

        // Crank-Nicolson diffusion with Dirichlet clamp
        for i in 1..n - 1 {
            rhs[i - 1] = phi[i] + half_r * (phi[i - 1] - T::two() * phi[i] + phi[i + 1]);
        }
        rhs[0] += half_r * bc_lo;
        rhs[n - 3] += half_r * bc_hi;
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs);
        for i in 1..n - 1 {
            phi[i] = rhs[i - 1];
        }
        phi[0] = bc_lo;
        phi[n - 1] = bc_hi;

        let profile = BookProfile { grid, phi: phi.clone(), t: t1 };
        price = if touched {
            tracker.track(&profile, price)?
        } else {
            // sourceless evolution has no ringing; plain extraction is exact
            extract_price_near(&profile, price)?
        };
        times.push(t1);
        prices.push(price);

        while let Some(&ts) = snap_iter.peek() {
            if ts <= t1 + dt * T::half() {
                snapshots.push(profile.clone());
                snap_iter.next();
            } else {
                break;
            }
        }
    }

    if carry != T::zero() {
        deposit(&mut phi, price, carry, schedule.t_total())?;
        let profile = BookProfile { grid, phi: phi.clone(), t: schedule.t_total() };
        price = tracker.track(&profile, price)?;
        if let Some(last) = prices.last_mut() {
            *last = price;
        }
        if let Some(last) = snapshots.last_mut() {
            if last.t == profile.t {
                *last = profile;
            }
        }
    }

    let residual = vec![T::zero(); times.len()];
    Ok(BookEvolution { snapshots, path: PricePath::new(times, prices, residual) })
}

/// Net mass added to the book relative to the initial profile (trapezoid).
pub fn mass_imbalance<T: Scalar>(profile: &BookProfile<T>, reference: &BookProfile<T>) -> T {
    let h = profile.grid.h;
    let mut acc = T::zero();
    for i in 0..profile.grid.n - 1 {
        let a = profile.phi[i] - reference.phi[i];
        let b = profile.phi[i + 1] - reference.phi[i + 1];
        acc = acc + (a + b) * T::half() * h;
    }
    acc
}
