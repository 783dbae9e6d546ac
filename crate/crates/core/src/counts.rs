//! Weighted partition counts `Q(n)`, the coefficients of
//! `∏_k (1 - x^k)^{-b_k}`, and exact fixed-weight laws derived from them.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::measure::Statistics;
use crate::weights::WeightSequence;
use crate::Real;

/// Size limits for the fixed-weight (small-canonical) exact computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Largest `n` for count-based exact laws.
    pub counts: u64,
    /// Largest `n` for which all partitions are listed explicitly.
    pub enumeration: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self { counts: 60, enumeration: 30 }
    }
}

/// `Q(0..=N)` for a weight sequence. `C` is the coefficient type: a float
/// for the general recurrence, [`BigUint`] for the exact one.
#[derive(Clone, Debug)]
pub struct CountTable<T, C = T> {
    weights: WeightSequence<T>,
    q: Vec<C>,
}

impl<T, C> CountTable<T, C> {
    pub fn weights(&self) -> &WeightSequence<T> {
        &self.weights
    }

    pub fn values(&self) -> &[C] {
        &self.q
    }

    pub fn get(&self, n: usize) -> Option<&C> {
        self.q.get(n)
    }

    pub fn max_n(&self) -> usize {
        self.q.len() - 1
    }
}

fn require_bose(kind: Statistics) -> Result<()> {
    match kind {
        Statistics::Bose => Ok(()),
        Statistics::Fermi => Err(Error::domain("weighted counts are only available for Bose statistics")),
    }
}

/// `σ(m) = Σ_{k | m, k ≤ cap} k b_k` for `m = 0..=n` (index 0 unused).
fn divisor_sums<C>(b: &[C], n: usize, cap: usize, scale: impl Fn(&C, usize) -> C, add: impl Fn(&mut C, &C)) -> Vec<C>
where
    C: Clone + Zero,
{
    let mut sigma = vec![C::zero(); n + 1];
    for k in 1..=cap.min(n) {
        if b[k].is_zero() {
            continue;
        }
        let kb = scale(&b[k], k);
        for m in (k..=n).step_by(k) {
            add(&mut sigma[m], &kb);
        }
    }
    sigma
}

/// `n Q(n) = Σ_{m=1}^n σ(m) Q(n-m)` in floating point, levels `k ≤ cap`.
fn float_recurrence<T: Real>(b: &[T], n: usize, cap: usize) -> Vec<T> {
    let sigma = divisor_sums(b, n, cap, |&bk, k| bk * T::from_count(k as u64), |s, v| *s = *s + *v);
    let mut q = vec![T::zero(); n + 1];
    q[0] = T::one();
    for i in 1..=n {
        let s: T = (1..=i).map(|m| sigma[m] * q[i - m]).sum();
        q[i] = s / T::from_count(i as u64);
    }
    q
}

fn exact_recurrence(b: &[u64], n: usize, cap: usize) -> Vec<BigUint> {
    let big: Vec<BigUint> = b.iter().map(|&v| BigUint::from(v)).collect();
    let sigma = divisor_sums(&big, n, cap, |bk, k| bk * BigUint::from(k), |s, v| *s += v);
    let mut q = vec![BigUint::zero(); n + 1];
    q[0] = BigUint::from(1u32);
    for i in 1..=n {
        let mut s = BigUint::zero();
        for m in 1..=i {
            if !sigma[m].is_zero() && !q[i - m].is_zero() {
                s += &sigma[m] * &q[i - m];
            }
        }
        q[i] = s / BigUint::from(i);
    }
    q
}

/// Weighted counts `Q(0..=N)` from the log-derivative recurrence.
pub fn weighted_counts<T: Real>(weights: &WeightSequence<T>, kind: Statistics, n_max: usize) -> Result<CountTable<T>> {
    require_bose(kind)?;
    let b = weights.weights_upto(n_max)?;
    Ok(CountTable { weights: weights.clone(), q: float_recurrence(&b, n_max, n_max) })
}

/// Exact weighted counts; requires integer weights `b_k` for `k ≤ N`.
pub fn weighted_counts_exact<T: Real>(
    weights: &WeightSequence<T>,
    kind: Statistics,
    n_max: usize,
) -> Result<CountTable<T, BigUint>> {
    require_bose(kind)?;
    let b = weights
        .integer_weights_upto(n_max)
        .ok_or_else(|| Error::domain(format!("{weights} has non-integer weights; exact counts unavailable")))?;
    Ok(CountTable { weights: weights.clone(), q: exact_recurrence(&b, n_max, n_max) })
}

fn ratio<T: Real>(num: &BigUint, den: &BigUint) -> T {
    // shift both so the f64 conversion keeps full precision without overflow
    let bits = den.bits().max(num.bits());
    let shift = bits.saturating_sub(1000);
    let a = (num >> shift).to_f64().unwrap_or(f64::INFINITY);
    let b = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
    T::lit(a / b)
}

/// `μⁿ{max ≤ M}` for `M = 0..=n`, exact for integer weights.
pub fn small_canonical_max_distribution<T: Real>(
    weights: &WeightSequence<T>,
    n: u64,
    budget: Budget,
) -> Result<Vec<T>> {
    if n > budget.counts {
        return Err(Error::budget(format!("n = {n} exceeds the count budget {}", budget.counts)));
    }
    let n = n as usize;
    let mut out = Vec::with_capacity(n + 1);
    if let Some(b) = weights.integer_weights_upto(n) {
        let full = exact_recurrence(&b, n, n);
        if full[n].is_zero() {
            return Err(Error::domain(format!("no partitions of {n} carry positive weight")));
        }
        for m in 0..=n {
            out.push(ratio::<T>(&exact_recurrence(&b, n, m)[n], &full[n]));
        }
    } else {
        let b = weights.weights_upto(n)?;
        let full = float_recurrence(&b, n, n);
        if !(full[n] > T::zero()) {
            return Err(Error::domain(format!("no partitions of {n} carry positive weight")));
        }
        for m in 0..=n {
            out.push((float_recurrence(&b, n, m)[n] / full[n]).min(T::one()));
        }
    }
    Ok(out)
}

/// `μⁿ{λ ∈ P(n) : max(λ) ≤ M} = Q_{≤M}(n) / Q(n)`.
pub fn small_canonical_max_cdf<T: Real>(weights: &WeightSequence<T>, n: u64, m: u64) -> Result<T> {
    small_canonical_max_cdf_with(weights, n, m, Budget::default())
}

pub fn small_canonical_max_cdf_with<T: Real>(weights: &WeightSequence<T>, n: u64, m: u64, budget: Budget) -> Result<T> {
    let table = small_canonical_max_distribution(weights, n, budget)?;
    Ok(table[m.min(n) as usize])
}
