//! Multiplicative measures on partitions.
//!
//! Under `μ_x` the occupation numbers `r_k` are independent with
//! `P(r_k = j) = s_k(j) x^{kj} / f_k(x^k)`, where `f_k(z) = (1 - z)^{-b_k}`
//! (Bose) or `(1 + z)^{b_k}` (Fermi). The probability that the largest part
//! is at most `M` is the tail product `∏_{k>M} 1/f_k(x^k)`; everything here
//! is computed from `L(M) = Σ_{k>M} log f_k(x^k)` in log space.

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::special::ln_gamma;
use crate::weights::WeightSequence;
use crate::Real;

/// Default certified truncation error for tail sums.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Hard cap on truncation horizons.
pub const DEFAULT_LEVEL_CAP: usize = 200_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Statistics {
    /// `f_k(z) = (1 - z)^{-b_k}`: negative binomial occupations.
    Bose,
    /// `f_k(z) = (1 + z)^{b_k}`: binomial occupations, integer `b_k` only.
    Fermi,
}

impl std::str::FromStr for Statistics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bose" => Ok(Statistics::Bose),
            "fermi" => Ok(Statistics::Fermi),
            other => Err(Error::Parse(format!("unknown statistics {other:?}; expected bose or fermi"))),
        }
    }
}

impl std::fmt::Display for Statistics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Statistics::Bose => "bose",
            Statistics::Fermi => "fermi",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiplicativeMeasure<T> {
    weights: WeightSequence<T>,
    kind: Statistics,
    x: T,
}

impl<T: Real> MultiplicativeMeasure<T> {
    pub fn new(weights: WeightSequence<T>, kind: Statistics, x: T) -> Result<Self> {
        if !(x > T::zero() && x < T::one()) {
            return Err(Error::domain(format!("activity x must lie in (0,1), got {x}")));
        }
        Ok(Self { weights, kind, x })
    }

    pub fn bose(weights: WeightSequence<T>, x: T) -> Result<Self> {
        Self::new(weights, Statistics::Bose, x)
    }

    pub fn fermi(weights: WeightSequence<T>, x: T) -> Result<Self> {
        Self::new(weights, Statistics::Fermi, x)
    }

    pub fn weights(&self) -> &WeightSequence<T> {
        &self.weights
    }

    pub fn kind(&self) -> Statistics {
        self.kind
    }

    pub fn x(&self) -> T {
        self.x
    }

    /// Same weights and statistics at another activity.
    pub fn with_x(&self, x: T) -> Result<Self> {
        Self::new(self.weights.clone(), self.kind, x)
    }

    fn fermi_trials(&self, k: u64, b: T) -> Result<u64> {
        if b.fract() != T::zero() {
            return Err(Error::domain(format!("Fermi statistics need integer weights; b_{k} = {b}")));
        }
        Ok(b.as_f64() as u64)
    }

    /// `log f_k(x^k)` given `b_k`.
    #[inline]
    fn level_log_factor(&self, b: T, xk: T) -> T {
        if b.is_zero() {
            return T::zero();
        }
        match self.kind {
            Statistics::Bose => -b * (-xk).ln_1p(),
            Statistics::Fermi => b * xk.ln_1p(),
        }
    }

    #[inline]
    fn x_pow(&self, k: u64) -> T {
        (T::from_count(k) * self.x.ln()).exp()
    }

    /// `P(r_k = j)`.
    pub fn occupation_pmf(&self, k: u64, j: u64) -> Result<T> {
        let b = self.weights.weight_at(k)?;
        let xk = self.x_pow(k);
        if b.is_zero() {
            return Ok(if j == 0 { T::one() } else { T::zero() });
        }
        match self.kind {
            Statistics::Bose => {
                let log_p = ln_occupation_coefficient(self.kind, b, j) + T::from_count(j * k) * self.x.ln()
                    - self.level_log_factor(b, xk);
                Ok(log_p.exp())
            }
            Statistics::Fermi => {
                let trials = self.fermi_trials(k, b)?;
                if j > trials {
                    return Ok(T::zero());
                }
                let log_p = ln_occupation_coefficient(self.kind, b, j) + T::from_count(j * k) * self.x.ln()
                    - self.level_log_factor(b, xk);
                Ok(log_p.exp())
            }
        }
    }

    /// `E r_k`.
    pub fn occupation_mean(&self, k: u64) -> Result<T> {
        let b = self.weights.weight_at(k)?;
        let xk = self.x_pow(k);
        Ok(match self.kind {
            Statistics::Bose => b * xk / (T::one() - xk),
            Statistics::Fermi => b * xk / (T::one() + xk),
        })
    }

    /// Certified bound on `Σ_{k>K} k^p log f_k(x^k)`.
    pub fn remainder_bound(&self, k_max: usize, p: i32) -> T {
        let s = self.weights.tail_moment_bound(k_max, p, self.x);
        match self.kind {
            Statistics::Bose => s / (T::one() - self.x_pow(k_max as u64 + 1)),
            Statistics::Fermi => s,
        }
    }

    /// Smallest `K` whose tail remainder `Σ_{k>K} k^p log f_k(x^k)` is
    /// certified below `tol`.
    pub fn horizon_for_moment(&self, p: i32, tol: T, cap: usize) -> Result<usize> {
        if !(tol > T::zero()) {
            return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
        }
        let ok = |k: usize| self.remainder_bound(k, p) < tol;
        if ok(0) {
            return Ok(0);
        }
        let mut hi = 1usize;
        while !ok(hi) {
            if hi >= cap {
                return Err(Error::resource(format!(
                    "truncation horizon for x = {} and tol = {tol} exceeds {cap} levels",
                    self.x
                )));
            }
            hi = (hi * 2).min(cap);
        }
        let mut lo = hi / 2;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// `K_max` such that `L(K_max) < tol` is certified.
    pub fn horizon(&self, tol: T) -> Result<usize> {
        self.horizon_for_moment(0, tol, DEFAULT_LEVEL_CAP)
    }

    /// `log f_k(x^k)` for `k = 0..=K` (index 0 is 0).
    pub fn level_log_factors(&self, k_max: usize) -> Result<Vec<T>> {
        let weights = self.weights.weights_upto(k_max)?;
        let ln_x = self.x.ln();
        Ok(weights
            .iter()
            .enumerate()
            .map(|(k, &b)| if k == 0 { T::zero() } else { self.level_log_factor(b, (T::from_count(k as u64) * ln_x).exp()) })
            .collect())
    }

    /// `Σ_k k E r_k`, truncated with certified remainder below `tol`.
    pub fn expected_weight(&self, tol: T) -> Result<T> {
        let horizon = self.horizon_for_moment(1, tol, DEFAULT_LEVEL_CAP)?;
        let weights = self.weights.weights_upto(horizon)?;
        let ln_x = self.x.ln();
        let mut total = KahanSum::default();
        for k in (1..=horizon).rev() {
            let xk = (T::from_count(k as u64) * ln_x).exp();
            let mean = match self.kind {
                Statistics::Bose => weights[k] * xk / (T::one() - xk),
                Statistics::Fermi => weights[k] * xk / (T::one() + xk),
            };
            total.add(T::from_count(k as u64) * mean);
        }
        Ok(total.value())
    }

    /// `L(M) = Σ_{k>M} log f_k(x^k)`, remainder below `tol`.
    pub fn log_tail_product(&self, m: u64, tol: T) -> Result<T> {
        let horizon = self.horizon(tol)?;
        if m as usize >= horizon {
            return Ok(T::zero());
        }
        let factors = self.level_log_factors(horizon)?;
        let mut total = KahanSum::default();
        for f in factors[m as usize + 1..].iter().rev() {
            total.add(*f);
        }
        Ok(total.value())
    }

    /// `log F(x) = L(0)`.
    pub fn log_partition_function(&self, tol: T) -> Result<T> {
        self.log_tail_product(0, tol)
    }

    /// `μ_x{max(λ) ≤ M}`.
    pub fn max_cdf(&self, m: u64) -> Result<T> {
        Ok((-self.log_tail_product(m, T::lit(DEFAULT_TOL))?).exp())
    }

    /// `L(M)` for every `M` up to the horizon, for repeated CDF queries.
    pub fn tail_profile(&self, tol: T) -> Result<TailProfile<T>> {
        let horizon = self.horizon(tol)?;
        self.tail_profile_upto(horizon, tol)
    }

    fn tail_profile_upto(&self, horizon: usize, tol: T) -> Result<TailProfile<T>> {
        let mut suffix = self.level_log_factors(horizon)?;
        // suffix[M] = Σ_{k=M+1}^{K} log f_k
        let mut acc = KahanSum::default();
        for m in (0..=horizon).rev() {
            let term = suffix[m];
            suffix[m] = acc.value();
            acc.add(term);
        }
        Ok(TailProfile { suffix, tol, remainder: self.remainder_bound(horizon, 0) })
    }

    /// Probability that each named level is occupied exactly once and
    /// every other level above the lowest named one is empty.
    ///
    /// `levels` must be strictly decreasing `k_1 > … > k_d ≥ 1`.
    pub fn exact_top_levels_pmf(&self, levels: &[u64], tol: T) -> Result<T> {
        let Some(&lowest) = levels.last() else {
            return Err(Error::domain("need at least one level"));
        };
        if lowest == 0 || levels.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::domain(format!("levels must be strictly decreasing and positive: {levels:?}")));
        }
        let ln_x = self.x.ln();
        let mut log_p = -self.log_tail_product(lowest, tol)?;
        for &k in levels {
            let b = self.weights.weight_at(k)?;
            if b.is_zero() {
                return Ok(T::zero());
            }
            if self.kind == Statistics::Fermi {
                self.fermi_trials(k, b)?;
            }
            log_p = log_p + b.ln() + T::from_count(k) * ln_x;
        }
        let b_low = self.weights.weight_at(lowest)?;
        log_p = log_p - self.level_log_factor(b_low, self.x_pow(lowest));
        Ok(log_p.exp())
    }

    /// `log μ_x(λ) = Σ_k [log s_k(r_k) + k r_k log x] - log F(x)`.
    pub fn partition_log_probability(&self, partition: &Partition, tol: T) -> Result<T> {
        let mut log_p = -self.log_partition_function(tol)?;
        let ln_x = self.x.ln();
        for &(k, r) in partition.occupations() {
            let b = self.weights.weight_at(k)?;
            if self.kind == Statistics::Fermi {
                let trials = self.fermi_trials(k, b)?;
                if r > trials {
                    return Ok(T::neg_infinity());
                }
            }
            log_p = log_p + ln_occupation_coefficient(self.kind, b, r) + T::from_count(k * r) * ln_x;
        }
        Ok(log_p)
    }
}

/// `log s_k(r)`: `log[(b)_r / r!]` (Bose) or `log C(b, r)` (Fermi).
pub fn ln_occupation_coefficient<T: Real>(kind: Statistics, b: T, r: u64) -> T {
    if r == 0 {
        return T::zero();
    }
    if b.is_zero() {
        return T::neg_infinity();
    }
    let rt = T::from_count(r);
    match kind {
        Statistics::Bose => {
            if r <= 64 {
                (0..r).map(|i| ((b + T::from_count(i)) / T::from_count(i + 1)).ln()).sum()
            } else {
                ln_gamma(rt + b) - ln_gamma(b) - ln_gamma(rt + T::one())
            }
        }
        Statistics::Fermi => {
            if rt > b {
                return T::neg_infinity();
            }
            if r <= 64 {
                (0..r).map(|i| ((b - T::from_count(i)) / T::from_count(i + 1)).ln()).sum()
            } else {
                ln_gamma(b + T::one()) - ln_gamma(rt + T::one()) - ln_gamma(b - rt + T::one())
            }
        }
    }
}

/// Suffix sums `L(M)` up to the truncation horizon.
#[derive(Clone, Debug)]
pub struct TailProfile<T> {
    suffix: Vec<T>,
    tol: T,
    remainder: T,
}

impl<T: Real> TailProfile<T> {
    /// Levels beyond this contribute less than the tolerance.
    pub fn horizon(&self) -> usize {
        self.suffix.len() - 1
    }

    pub fn tolerance(&self) -> T {
        self.tol
    }

    /// Certified bound on the neglected tail.
    pub fn remainder(&self) -> T {
        self.remainder
    }

    pub fn log_tail(&self, m: u64) -> T {
        self.suffix.get(m as usize).copied().unwrap_or_else(T::zero)
    }

    /// `P(max ≤ M)`; zero for negative `M`.
    pub fn max_cdf(&self, m: i64) -> T {
        if m < 0 {
            T::zero()
        } else {
            (-self.log_tail(m as u64)).exp()
        }
    }
}

#[derive(Default, Clone, Copy)]
struct KahanSum<T> {
    sum: T,
    carry: T,
}

impl<T: Real> KahanSum<T> {
    #[inline]
    fn add(&mut self, v: T) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    fn value(&self) -> T {
        self.sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(x: f64) -> MultiplicativeMeasure<f64> {
        MultiplicativeMeasure::bose(WeightSequence::power(1.0, 0.0).unwrap(), x).unwrap()
    }

    /// `∏_{k ≥ from} (1 - 2^{-k})` multiplied out to k = 60.
    fn euler_product_half(from: i32) -> f64 {
        (from..=60).map(|k| 1.0 - 0.5f64.powi(k)).product()
    }

    #[test]
    fn rejects_bad_activity() {
        let w = WeightSequence::power(1.0, 0.0).unwrap();
        assert!(MultiplicativeMeasure::bose(w.clone(), 0.0).is_err());
        assert!(MultiplicativeMeasure::bose(w.clone(), 1.0).is_err());
        assert!(MultiplicativeMeasure::bose(w, f64::NAN).is_err());
    }

    #[test]
    fn occupation_pmf_examples() {
        let m = uniform(0.5);
        assert!((m.occupation_pmf(1, 0).unwrap() - 0.5).abs() < 1e-15);
        assert!((m.occupation_pmf(1, 2).unwrap() - 0.125).abs() < 1e-15);
        let two = MultiplicativeMeasure::bose(WeightSequence::power(2.0f64, 0.0).unwrap(), 0.5).unwrap();
        assert!((two.occupation_pmf(1, 1).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn fermi_pmf_is_binomial() {
        let m = MultiplicativeMeasure::fermi(WeightSequence::power(3.0f64, 0.0).unwrap(), 0.5).unwrap();
        let p: f64 = 0.25 / 1.25;
        let expected = [1.0f64, 3.0, 3.0, 1.0];
        for (j, c) in expected.iter().enumerate() {
            let want = c * p.powi(j as i32) * (1.0 - p).powi(3 - j as i32);
            assert!((m.occupation_pmf(2, j as u64).unwrap() - want).abs() < 1e-14);
        }
        assert_eq!(m.occupation_pmf(2, 4).unwrap(), 0.0);
        let frac = MultiplicativeMeasure::fermi(WeightSequence::power(1.5, 0.0).unwrap(), 0.5).unwrap();
        assert!(matches!(frac.occupation_pmf(1, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn occupation_mean_examples() {
        assert!((uniform(0.5).occupation_mean(1).unwrap() - 1.0).abs() < 1e-15);
        let f = MultiplicativeMeasure::fermi(WeightSequence::power(3.0f64, 0.0).unwrap(), 0.5).unwrap();
        assert!((f.occupation_mean(2).unwrap() - 0.6).abs() < 1e-15);
        let empty = MultiplicativeMeasure::bose(WeightSequence::tabulated(vec![0.0, 0.0]).unwrap(), 0.5).unwrap();
        assert_eq!(empty.occupation_mean(2).unwrap(), 0.0);
    }

    #[test]
    fn expected_weight_examples() {
        let direct: f64 = (1..200).map(|k| k as f64 * 0.5f64.powi(k) / (1.0 - 0.5f64.powi(k))).sum();
        let got = uniform(0.5).expected_weight(1e-12).unwrap();
        assert!((got - direct).abs() < 1e-11);
        assert!((got - 2.744).abs() < 1e-3);
        let tiny = uniform(1e-6).expected_weight(1e-15).unwrap();
        assert!((tiny / 1e-6 - 1.0).abs() < 1e-5);
        // x calibrated to n = 600 by the zeta(2) closed form
        let x = 1.0 - (std::f64::consts::PI.powi(2) / 6.0 / 600.0).sqrt();
        let w = uniform(x).expected_weight(1e-9).unwrap();
        // next-order expansion in e = -log x: ζ(2)/e² - 1/(2e) + 1/24
        let e = -x.ln();
        let second_order = std::f64::consts::PI.powi(2) / 6.0 / (e * e) - 0.5 / e + 1.0 / 24.0;
        assert!((w - second_order).abs() < 0.05, "{w} vs {second_order}");
        assert!((w - 559.465_742).abs() < 1e-5, "{w}");
        assert!((w / 600.0 - 1.0).abs() < 0.1);
    }

    #[test]
    fn tail_product_examples() {
        let m = uniform(0.5);
        assert_eq!(m.log_tail_product(10_000, 1e-12).unwrap(), 0.0);
        let l1 = m.log_tail_product(1, 1e-12).unwrap();
        assert!((l1 + euler_product_half(2).ln()).abs() < 1e-12);
        assert!((l1 - 0.549).abs() < 1e-3);
        let f = MultiplicativeMeasure::fermi(WeightSequence::power(1.0, 0.0).unwrap(), 0.5).unwrap();
        let direct: f64 = (1..=60).map(|k| (1.0 + 0.5f64.powi(k)).ln()).sum();
        let l0 = f.log_tail_product(0, 1e-12).unwrap();
        assert!((l0 - direct).abs() < 1e-12);
        assert!((l0 - 0.8688).abs() < 1e-4);
    }

    #[test]
    fn max_cdf_examples() {
        let m = uniform(0.5);
        assert!((m.max_cdf(1).unwrap() - euler_product_half(2)).abs() < 1e-12);
        assert!((m.max_cdf(1).unwrap() - 0.5776).abs() < 1e-4);
        assert!((m.max_cdf(0).unwrap() - euler_product_half(1)).abs() < 1e-12);
        assert!((m.max_cdf(0).unwrap() - 0.2888).abs() < 1e-4);
        assert!((m.max_cdf(1_000_000).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn top_levels_examples() {
        let m = uniform(0.5);
        let p = m.exact_top_levels_pmf(&[2], 1e-12).unwrap();
        assert!((p - 0.1875 * euler_product_half(3)).abs() < 1e-12);
        assert!((p - 0.1444).abs() < 1e-4);
        assert!(m.exact_top_levels_pmf(&[2, 3], 1e-12).is_err());
        assert!(m.exact_top_levels_pmf(&[2, 2], 1e-12).is_err());
        assert!(m.exact_top_levels_pmf(&[], 1e-12).is_err());
        let small = uniform(1e-4);
        let p3 = small.exact_top_levels_pmf(&[3], 1e-15).unwrap();
        assert!((p3 / 1e-12 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn top_levels_event_decomposition() {
        for x in [0.3, 0.7, 0.95] {
            let m = uniform(x);
            let total: f64 = (1..2000).map(|k| m.exact_top_levels_pmf(&[k], 1e-14).unwrap()).sum();
            assert!(total <= 1.0 + 1e-12);
            for big in [3u64, 10, 40] {
                let rest: f64 = (big + 1..2000).map(|k| m.exact_top_levels_pmf(&[k], 1e-14).unwrap()).sum();
                assert!(m.max_cdf(big).unwrap() + rest <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn profile_agrees_with_direct_tail() {
        let m = MultiplicativeMeasure::bose(WeightSequence::<f64>::lattice(3).unwrap(), 0.97).unwrap();
        let profile = m.tail_profile(1e-12).unwrap();
        for mm in [0u64, 5, 40, 200] {
            let direct = m.log_tail_product(mm, 1e-12).unwrap();
            assert!((profile.log_tail(mm) - direct).abs() < 1e-12);
        }
        assert!(profile.remainder() < 1e-12);
        assert_eq!(profile.max_cdf(-1), 0.0);
    }

    #[test]
    fn f32_tracks_f64() {
        let m64 = uniform(0.9);
        let m32 = MultiplicativeMeasure::bose(WeightSequence::power(1.0f32, 0.0).unwrap(), 0.9f32).unwrap();
        for mm in [5u64, 20, 60] {
            let a = m64.max_cdf(mm).unwrap();
            let b = m32.max_cdf(mm).unwrap() as f64;
            assert!((a - b).abs() < 1e-5, "M = {mm}: {a} vs {b}");
        }
    }
}
