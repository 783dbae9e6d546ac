//! Limit laws for the largest parts: rescaling maps, ensemble calibration,
//! the Gumbel family, order-statistic limits and goodness-of-fit distances.

use crate::error::{Error, Result};
use crate::measure::MultiplicativeMeasure;
use crate::special::{gamma, ln_gamma, unit_ball_volume, zeta};
use crate::weights::{WeightKind, WeightSequence};
use crate::Real;

/// Affine map between a level `m` and the rescaled coordinate
/// `t = m · scale - shift`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RescalingSpec<T> {
    scale: T,
    shift: T,
}

impl<T: Real> RescalingSpec<T> {
    pub fn new(scale: T, shift: T) -> Result<Self> {
        if !(scale > T::zero() && scale < T::one()) {
            return Err(Error::domain(format!("rescaling scale must lie in (0,1), got {scale}")));
        }
        if !shift.is_finite() {
            return Err(Error::domain("rescaling shift must be finite"));
        }
        Ok(Self { scale, shift })
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn shift(&self) -> T {
        self.shift
    }

    /// `m · scale - shift`.
    pub fn rescale(&self, m: T) -> T {
        m * self.scale - self.shift
    }

    /// `M(x, t) = (shift + t) / scale`, the real level for threshold `t`.
    pub fn level(&self, t: T) -> T {
        (self.shift + t) / self.scale
    }

    /// `floor(M(x, t))`.
    pub fn floor_level(&self, t: T) -> i64 {
        self.level(t).floor().to_i64().unwrap_or(i64::MAX)
    }
}

fn check_activity<T: Real>(x: T) -> Result<()> {
    if x > T::zero() && x < T::one() {
        Ok(())
    } else {
        Err(Error::domain(format!("activity x must lie in (0,1), got {x}")))
    }
}

/// Shift `A(x)` for power weights `c k^β`, scale `1 - x`.
pub fn rescaling_power<T: Real>(c: T, beta: T, x: T) -> Result<RescalingSpec<T>> {
    check_activity(x)?;
    if !(c > T::zero()) || !(beta > -T::one()) {
        return Err(Error::domain(format!("need c > 0 and beta > -1, got c = {c}, beta = {beta}")));
    }
    let l = (T::one() - x).ln().abs();
    let mut shift = (beta + T::one()) * l + c.ln();
    if !beta.is_zero() {
        shift = shift + beta * l.ln() + beta * (beta + T::one()).ln();
    }
    RescalingSpec::new(T::one() - x, shift)
}

/// Shift `A(x)` for the `d`-dimensional ideal gas (`b_k = j_d(k)`).
pub fn rescaling_gas<T: Real>(d: u32, x: T) -> Result<RescalingSpec<T>> {
    check_activity(x)?;
    if d == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    let half = T::lit(d as f64 / 2.0);
    let l = (T::one() - x).ln().abs();
    let mut shift = half * l + half * half.ln() + unit_ball_volume::<T>(d).ln();
    if d != 2 {
        shift = shift + (half - T::one()) * l.ln();
    }
    RescalingSpec::new(T::one() - x, shift)
}

/// Height of a random plane partition; identical to power weights `c = 1, β = 1`.
pub fn rescaling_plane<T: Real>(x: T) -> Result<RescalingSpec<T>> {
    rescaling_power(T::one(), T::one(), x)
}

/// The rescaling matching a weight family, if it has one.
pub fn rescaling_for<T: Real>(weights: &WeightSequence<T>, x: T) -> Result<RescalingSpec<T>> {
    match weights.kind() {
        WeightKind::Power { c, beta } => rescaling_power(*c, *beta, x),
        WeightKind::PlaneDiagonal => rescaling_plane(x),
        WeightKind::Lattice { d } => rescaling_gas(*d, x),
        WeightKind::Tabulated(_) => Err(Error::domain("tabulated weights have no limit rescaling")),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Calibration {
    /// Leading-order formula in terms of `ζ` and `Γ`.
    ClosedForm,
    /// Bisection on the exact expected weight.
    Numeric,
}

/// `κ` and exponent `e` with `1 - x(n) = (κ/n)^e`.
fn calibration_constants<T: Real>(weights: &WeightSequence<T>) -> Result<(T, T)> {
    match weights.kind() {
        WeightKind::Lattice { d } => {
            let half = T::lit(*d as f64 / 2.0);
            let kappa = T::lit(*d as f64) * T::PI().powf(half) * zeta(half + T::one()) / T::lit(2.0);
            Ok((kappa, T::one() / (half + T::one())))
        }
        WeightKind::Tabulated(_) => Err(Error::domain("no closed-form calibration for tabulated weights")),
        _ => {
            let (c, beta) = weights.power_law().expect("power-law weights");
            let s = beta + T::lit(2.0);
            Ok((c * gamma(s) * zeta(s), T::one() / s))
        }
    }
}

/// Activity `x(n)` at which the expected partition weight is `n`.
pub fn calibrate_x<T: Real>(weights: &WeightSequence<T>, n: T, mode: Calibration) -> Result<T> {
    if !(n > T::zero() && n.is_finite()) {
        return Err(Error::domain(format!("target weight must be positive, got {n}")));
    }
    match mode {
        Calibration::ClosedForm => {
            let (kappa, e) = calibration_constants(weights)?;
            let x = T::one() - (kappa / n).powf(e);
            check_activity(x).map_err(|_| Error::domain(format!("closed-form x(n) = {x} lies outside (0,1) for n = {n}")))?;
            Ok(x)
        }
        Calibration::Numeric => {
            let target_tol = T::one().max(T::lit(1e-6) * n);
            let eval_tol = T::lit(1e-9) * T::one().max(n);
            let weight_at = |x: T| -> Result<T> {
                MultiplicativeMeasure::bose(weights.clone(), x)?.expected_weight(eval_tol)
            };
            let mut lo = T::zero();
            let mut hi = T::lit(0.5);
            let mut w_hi = weight_at(hi)?;
            let mut doublings = 0;
            while w_hi < n {
                lo = hi;
                hi = T::one() - (T::one() - hi) / T::lit(2.0);
                w_hi = weight_at(hi)?;
                doublings += 1;
                if doublings > 60 || hi >= T::one() {
                    return Err(Error::Convergence(format!("expected weight never reaches {n}")));
                }
            }
            if (w_hi - n).abs() <= target_tol {
                return Ok(hi);
            }
            for _ in 0..200 {
                let mid = (lo + hi) / T::lit(2.0);
                let w = weight_at(mid)?;
                if (w - n).abs() <= target_tol {
                    return Ok(mid);
                }
                if w < n {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Err(Error::Convergence(format!("bisection for x({n}) did not reach |w - n| ≤ {target_tol}")))
        }
    }
}

/// Shift `A_n` for the fixed-weight ensemble at weight `n ≥ 3`.
///
/// Power weights use `A_n = (β+1)/(β+2) log n + β log log n + β log((β+1)/(β+2))
/// - (β+1)/(β+2) log(Γ(β+2) ζ(β+2)) + log(c)/(β+2)`. The gas case is the same
/// display with `c = (d/2) C_d`, `β = d/2 - 1`, written out in `d`.
pub fn shift_small_canonical<T: Real>(weights: &WeightSequence<T>, n: u64) -> Result<T> {
    if n < 3 {
        return Err(Error::domain(format!("A_n needs n ≥ 3 so that log log n > 0, got {n}")));
    }
    let ln_n = T::from_count(n).ln();
    let lnln_n = ln_n.ln();
    match weights.kind() {
        WeightKind::Lattice { d } => {
            let d_t = T::lit(*d as f64);
            let two = T::lit(2.0);
            let half = d_t / two;
            Ok(d_t / (d_t + two) * ln_n
                + (d_t - two) / two * lnln_n
                + d_t * d_t / (two * (d_t + two)) * half.ln()
                + (d_t - two) / two * (two / (d_t + two)).ln()
                - d_t / (d_t + two) * (zeta(half + T::one()) / T::PI()).ln()
                - ln_gamma(half + T::one()))
        }
        WeightKind::Tabulated(_) => Err(Error::domain("no small-canonical shift for tabulated weights")),
        _ => {
            let (c, beta) = weights.power_law().expect("power-law weights");
            let b1 = beta + T::one();
            let b2 = beta + T::lit(2.0);
            let mut a = b1 / b2 * ln_n - b1 / b2 * (ln_gamma(b2) + zeta(b2).ln()) + c.ln() / b2;
            if !beta.is_zero() {
                a = a + beta * lnln_n + beta * (b1 / b2).ln();
            }
            Ok(a)
        }
    }
}

/// Scale `(κ/n)^{1/(β+2)}` and shift `A_n` for the fixed-weight ensemble.
pub fn small_canonical_rescaling<T: Real>(weights: &WeightSequence<T>, n: u64) -> Result<RescalingSpec<T>> {
    let (kappa, e) = calibration_constants(weights)?;
    let scale = (kappa / T::from_count(n)).powf(e);
    RescalingSpec::new(scale, shift_small_canonical(weights, n)?)
}

pub fn gumbel_cdf<T: Real>(t: T) -> T {
    (-(-t).exp()).exp()
}

pub fn gumbel_pdf<T: Real>(t: T) -> T {
    (-t - (-t).exp()).exp()
}

pub fn gumbel_quantile<T: Real>(p: T) -> Result<T> {
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::domain(format!("quantile level must lie in (0,1), got {p}")));
    }
    Ok(-(-p.ln()).ln())
}

/// Limit density `exp(-e^{-t_d} - Σ t_i)` of the top `d` rescaled parts on
/// the cone `t_1 > … > t_d`, zero elsewhere (and for an empty list).
pub fn order_joint_density<T: Real>(t: &[T]) -> T {
    let Some(&last) = t.last() else {
        return T::zero();
    };
    if t.windows(2).any(|w| !(w[0] > w[1])) {
        return T::zero();
    }
    let sum: T = t.iter().copied().sum();
    (-(-last).exp() - sum).exp()
}

/// Limit CDF of the `i`-th largest rescaled part,
/// `G_i(t) = e^{-e^{-t}} Σ_{j<i} e^{-jt} / j!`.
pub fn order_marginal_cdf<T: Real>(i: u32, t: T) -> Result<T> {
    if i == 0 {
        return Err(Error::domain("order statistics are indexed from 1"));
    }
    let u = (-t).exp();
    if u.is_infinite() {
        return Ok(T::zero());
    }
    // e^{-u} u^j / j! summed in log space
    let ln_u = -t;
    Ok((0..i)
        .map(|j| {
            let jt = T::from_count(j as u64);
            (-u + jt * ln_u - ln_gamma(jt + T::one())).exp()
        })
        .sum())
}

/// Kolmogorov–Smirnov distance between a sorted sample and a continuous
/// CDF: `max_i max(|i/N - F(s_i)|, |(i-1)/N - F(s_i)|)`.
pub fn ks_distance<T: Real>(sample: &[T], cdf: impl Fn(T) -> T) -> Result<T> {
    if sample.is_empty() {
        return Err(Error::domain("KS distance of an empty sample"));
    }
    if sample.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::domain("KS sample must be sorted"));
    }
    let n = T::from_count(sample.len() as u64);
    let mut d = T::zero();
    for (i, &s) in sample.iter().enumerate() {
        let f = cdf(s);
        let above = T::from_count(i as u64 + 1) / n - f;
        let below = f - T::from_count(i as u64) / n;
        d = d.max(above.abs()).max(below.abs());
    }
    Ok(d)
}

/// `sup_m |F_N(m) - F(m)|` for an integer-valued sample and a CDF on the
/// integers. Both sides are right-continuous step functions, so the sup is
/// attained at sample values or just below them.
pub fn ks_distance_lattice<T: Real>(sample: &[i64], cdf: impl Fn(i64) -> T) -> Result<T> {
    if sample.is_empty() {
        return Err(Error::domain("KS distance of an empty sample"));
    }
    if sample.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::domain("KS sample must be sorted"));
    }
    let n = T::from_count(sample.len() as u64);
    let mut d = T::zero();
    let mut i = 0;
    while i < sample.len() {
        let v = sample[i];
        let before = T::from_count(i as u64) / n;
        let mut j = i;
        while j < sample.len() && sample[j] == v {
            j += 1;
        }
        let after = T::from_count(j as u64) / n;
        d = d.max((before - cdf(v - 1)).abs()).max((after - cdf(v)).abs());
        i = j;
    }
    Ok(d)
}
