//! Seeded sampling of partitions under multiplicative measures.
//!
//! Occupation numbers are drawn independently per level. Levels whose
//! empty-probability is at most one half are drawn directly (closed-form
//! geometric inversion for `b_k = 1`, gamma–Poisson mixture for other Bose
//! weights, binomial for Fermi). The remaining levels are visited by an exact
//! skip-ahead: the occupied ones are the levels hit by a unit-rate Poisson
//! process laid out over their cumulative hazards `-log P(r_k = 0)`, and each
//! hit level then draws `r_k` from its law conditioned on `r_k ≥ 1`.
//!
//! Sample `i` of a run with seed `s` always uses ChaCha8 stream `i` of seed
//! `s`, so results do not depend on evaluation order or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Exp1, Gamma, Poisson};

use crate::asymptotics::{calibrate_x, Calibration};
use crate::counts::Budget;
use crate::error::{Error, Result};
use crate::measure::{ln_occupation_coefficient, MultiplicativeMeasure, Statistics};
use crate::oracle::partitions_of;
use crate::partition::Partition;
use crate::weights::WeightSequence;
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplerConfig {
    pub seed: u64,
    /// Bound on the probability that a level above the truncation is occupied.
    pub tail_tol: f64,
    /// Largest admissible truncation level.
    pub level_cap: usize,
    /// Rejection attempts allowed per fixed-weight sample.
    pub attempt_cap: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { seed: 0, tail_tol: 1e-9, level_cap: 50_000_000, attempt_cap: 10_000_000 }
    }
}

impl SamplerConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tail_tol > 0.0 && self.tail_tol < 1.0) {
            return Err(Error::domain(format!("tail_tol must lie in (0,1), got {}", self.tail_tol)));
        }
        if self.level_cap == 0 || self.attempt_cap == 0 {
            return Err(Error::domain("level_cap and attempt_cap must be positive"));
        }
        Ok(())
    }
}

/// The generator for sample `index` of a run seeded with `seed`.
pub fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Clone, Debug)]
enum Direct {
    /// `P(r ≥ j) = q^j`.
    Geometric { ln_q: f64 },
    GammaPoisson(Gamma<f64>),
    Binomial(Binomial),
}

#[derive(Clone, Debug)]
struct Level {
    k: u64,
    b: f64,
    q: f64,
    /// `-log P(r_k = 0)`.
    hazard: f64,
    /// `P(r_k = 1)`.
    p1: f64,
    /// `P(r_k ≥ 1)`.
    occupied: f64,
    /// Present when `P(r_k = 0) ≤ 1/2`.
    direct: Option<Direct>,
}

/// Precomputed per-level laws for one measure, shared by all samples.
#[derive(Clone, Debug)]
pub struct SamplerPlan {
    kind: Statistics,
    horizon: usize,
    truncation_bias: f64,
    /// Levels with `b_k > 0`, increasing in `k`.
    levels: Vec<Level>,
    dense: Vec<usize>,
    sparse: Vec<usize>,
    /// Running hazard totals over `sparse`.
    sparse_cumulative: Vec<f64>,
    /// Running hazard totals over `levels` taken from the top down.
    top_cumulative: Vec<f64>,
}

/// First index `i ≥ from` with `cumulative[i] > s`, searching outward from `from`.
fn gallop(cumulative: &[f64], from: usize, s: f64) -> usize {
    let mut step = 1;
    let mut lo = from;
    let mut hi = from;
    while hi < cumulative.len() && cumulative[hi] <= s {
        lo = hi + 1;
        hi = from + step;
        step *= 2;
    }
    let hi = hi.min(cumulative.len());
    lo + cumulative[lo..hi].partition_point(|&c| c <= s)
}

fn running_total(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut total = 0.0;
    values
        .map(|v| {
            total += v;
            total
        })
        .collect()
}

impl SamplerPlan {
    /// Truncates at the smallest level `K` with `P(max > K) < tail_tol`.
    pub fn new<T: Real>(measure: &MultiplicativeMeasure<T>, cfg: &SamplerConfig) -> Result<Self> {
        cfg.validate()?;
        let horizon = measure.horizon_for_moment(0, T::lit(cfg.tail_tol), cfg.level_cap)?;
        let bias = measure.remainder_bound(horizon, 0).as_f64();
        Self::build(measure, horizon, bias.min(1.0))
    }

    /// Uses exactly the levels `1..=max_level`, with no truncation bias
    /// beyond that (the caller conditions on levels above being empty).
    pub fn restricted<T: Real>(measure: &MultiplicativeMeasure<T>, max_level: usize) -> Result<Self> {
        Self::build(measure, max_level, 0.0)
    }

    fn build<T: Real>(measure: &MultiplicativeMeasure<T>, horizon: usize, truncation_bias: f64) -> Result<Self> {
        let kind = measure.kind();
        let weights = measure.weights().weights_upto(horizon)?;
        let ln_x = measure.x().as_f64().ln();
        let mut levels = Vec::new();
        for (k, b) in weights.iter().enumerate().skip(1) {
            let b = b.as_f64();
            if b == 0.0 {
                continue;
            }
            if kind == Statistics::Fermi && b.fract() != 0.0 {
                return Err(Error::domain(format!("Fermi statistics need integer weights; b_{k} = {b}")));
            }
            let ln_q = k as f64 * ln_x;
            let q = ln_q.exp();
            let hazard = match kind {
                Statistics::Bose => -b * (-q).ln_1p(),
                Statistics::Fermi => b * q.ln_1p(),
            };
            if hazard <= 0.0 {
                continue;
            }
            let direct = if hazard >= std::f64::consts::LN_2 {
                Some(match kind {
                    Statistics::Bose if b == 1.0 => Direct::Geometric { ln_q },
                    Statistics::Bose => Direct::GammaPoisson(
                        Gamma::new(b, q / (1.0 - q)).map_err(|e| Error::domain(format!("level {k}: {e}")))?,
                    ),
                    Statistics::Fermi => Direct::Binomial(
                        Binomial::new(b as u64, q / (1.0 + q)).map_err(|e| Error::domain(format!("level {k}: {e}")))?,
                    ),
                })
            } else {
                None
            };
            levels.push(Level {
                k: k as u64,
                b,
                q,
                hazard,
                p1: b * q * (-hazard).exp(),
                occupied: -(-hazard).exp_m1(),
                direct,
            });
        }
        let (dense, sparse): (Vec<usize>, Vec<usize>) = (0..levels.len()).partition(|&i| levels[i].direct.is_some());
        let sparse_cumulative = running_total(sparse.iter().map(|&i| levels[i].hazard));
        let top_cumulative = running_total(levels.iter().rev().map(|l| l.hazard));
        Ok(Self { kind, horizon, truncation_bias, levels, dense, sparse, sparse_cumulative, top_cumulative })
    }

    /// Highest level that can be populated.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Upper bound on the total-variation distance to the untruncated law.
    pub fn truncation_bias(&self) -> f64 {
        self.truncation_bias
    }

    fn direct_draw<R: Rng + ?Sized>(law: &Direct, rng: &mut R) -> u64 {
        match law {
            Direct::Geometric { ln_q } => {
                let u: f64 = 1.0 - rng.random::<f64>();
                (u.ln() / ln_q).floor() as u64
            }
            Direct::GammaPoisson(gamma) => {
                let lambda = gamma.sample(rng);
                if lambda > 0.0 {
                    Poisson::new(lambda).map(|p| p.sample(rng) as u64).unwrap_or(0)
                } else {
                    0
                }
            }
            Direct::Binomial(binomial) => binomial.sample(rng),
        }
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> Partition {
        let mut occ = Vec::new();
        for &i in &self.dense {
            let level = &self.levels[i];
            let r = Self::direct_draw(level.direct.as_ref().expect("dense level"), rng);
            if r > 0 {
                occ.push((level.k, r));
            }
        }
        let total = self.sparse_cumulative.last().copied().unwrap_or(0.0);
        let mut s = 0.0;
        let mut from = 0;
        loop {
            let e: f64 = Exp1.sample(rng);
            s += e;
            if s >= total {
                break;
            }
            let i = gallop(&self.sparse_cumulative, from, s);
            if i >= self.sparse.len() {
                break;
            }
            let level = &self.levels[self.sparse[i]];
            occ.push((level.k, self.conditional_draw(level, u64::MAX, rng)));
            s = self.sparse_cumulative[i];
            from = i + 1;
        }
        Partition::from_occupations(occ)
    }

    /// `min(r, cap)` with `r` drawn from the level law conditioned on `r ≥ 1`.
    fn conditional_draw<R: Rng + ?Sized>(&self, level: &Level, cap: u64, rng: &mut R) -> u64 {
        if let Some(law) = &level.direct {
            // P(r = 0) ≤ 1/2: reject zeros
            loop {
                let r = Self::direct_draw(law, rng);
                if r > 0 {
                    return r.min(cap);
                }
            }
        }
        let mut u = rng.random::<f64>() * level.occupied;
        let mut j = 1u64;
        let mut pj = level.p1;
        loop {
            if u < pj || pj <= 0.0 || j >= cap {
                return j;
            }
            u -= pj;
            let next = match self.kind {
                Statistics::Bose => (level.b + j as f64) / (j + 1) as f64 * level.q,
                Statistics::Fermi => (level.b - j as f64) / (j + 1) as f64 * level.q,
            };
            if next <= 0.0 {
                return j;
            }
            pj *= next;
            j += 1;
        }
    }

    /// The `d` largest parts (with multiplicity, zero-padded) of one draw.
    ///
    /// Walks the levels from the top down and stops once `d` parts are
    /// found, so the cost does not grow with the bulk of the partition. The
    /// law is that of [`Partition::top_order_statistics`] applied to
    /// [`SamplerPlan::sample_with`]; the random stream is consumed differently.
    pub fn sample_top_with<R: Rng + ?Sized>(&self, d: usize, rng: &mut R) -> Vec<u64> {
        let mut top = Vec::with_capacity(d);
        let total = self.top_cumulative.last().copied().unwrap_or(0.0);
        let n = self.levels.len();
        let mut s = 0.0;
        let mut from = 0;
        while top.len() < d {
            let e: f64 = Exp1.sample(rng);
            s += e;
            if s >= total {
                break;
            }
            let i = gallop(&self.top_cumulative, from, s);
            if i >= n {
                break;
            }
            let level = &self.levels[n - 1 - i];
            let r = self.conditional_draw(level, (d - top.len()) as u64, rng);
            top.extend(std::iter::repeat_n(level.k, r as usize));
            s = self.top_cumulative[i];
            from = i + 1;
        }
        top.resize(d, 0);
        top
    }

    /// Sample number `index` of the run seeded with `seed`.
    pub fn sample_indexed(&self, seed: u64, index: u64) -> Partition {
        self.sample_with(&mut rng_for(seed, index))
    }

    /// Top `d` parts of sample number `index` (see [`SamplerPlan::sample_top_with`]).
    pub fn sample_top_indexed(&self, d: usize, seed: u64, index: u64) -> Vec<u64> {
        self.sample_top_with(d, &mut rng_for(seed, index))
    }

    /// Applies `f` to samples `indices` in order.
    pub fn map_samples<R>(
        &self,
        seed: u64,
        indices: std::ops::Range<u64>,
        mut f: impl FnMut(u64, &Partition) -> R,
    ) -> Vec<R> {
        indices.map(|i| f(i, &self.sample_indexed(seed, i))).collect()
    }
}

/// One draw from `μ_x` using stream 0 of `cfg.seed`.
pub fn sample_partition<T: Real>(measure: &MultiplicativeMeasure<T>, cfg: &SamplerConfig) -> Result<Partition> {
    Ok(SamplerPlan::new(measure, cfg)?.sample_indexed(cfg.seed, 0))
}

/// Rejection sampler for `μⁿ`: grand-canonical draws at the calibrated
/// activity `x(n)`, kept when the weight is exactly `n`.
#[derive(Clone, Debug)]
pub struct SmallCanonicalSampler {
    n: u64,
    x: f64,
    plan: SamplerPlan,
    attempt_cap: u64,
}

/// An accepted fixed-weight sample and the number of draws it took.
#[derive(Clone, Debug, PartialEq)]
pub struct Accepted {
    pub partition: Partition,
    pub attempts: u64,
}

impl SmallCanonicalSampler {
    pub fn new<T: Real>(weights: &WeightSequence<T>, n: u64, cfg: &SamplerConfig) -> Result<Self> {
        cfg.validate()?;
        if n == 0 {
            return Err(Error::domain("fixed-weight sampling needs n ≥ 1"));
        }
        if n as usize > cfg.level_cap {
            return Err(Error::resource(format!("n = {n} exceeds the level cap {}", cfg.level_cap)));
        }
        let x = calibrate_x(weights, T::from_count(n), Calibration::Numeric)?;
        // levels above n cannot appear in a partition of n
        let plan = SamplerPlan::restricted(&MultiplicativeMeasure::bose(weights.clone(), x)?, n as usize)?;
        Ok(Self { n, x: x.as_f64(), plan, attempt_cap: cfg.attempt_cap })
    }

    pub fn activity(&self) -> f64 {
        self.x
    }

    pub fn sample_indexed(&self, seed: u64, index: u64) -> Result<Accepted> {
        let mut rng = rng_for(seed, index);
        for attempts in 1..=self.attempt_cap {
            let p = self.plan.sample_with(&mut rng);
            if p.weight() == self.n {
                return Ok(Accepted { partition: p, attempts });
            }
        }
        Err(Error::budget(format!(
            "no partition of weight {} within {} attempts",
            self.n, self.attempt_cap
        )))
    }
}

/// One draw from `μⁿ` using stream 0 of `cfg.seed`.
pub fn sample_small_canonical<T: Real>(weights: &WeightSequence<T>, n: u64, cfg: &SamplerConfig) -> Result<Partition> {
    Ok(SmallCanonicalSampler::new(weights, n, cfg)?.sample_indexed(cfg.seed, 0)?.partition)
}

/// All partitions of `n` with their fixed-weight probabilities
/// `∏_k s_k(r_k) / Q(n)` (Bose).
pub fn enumerate_partitions<T: Real>(weights: &WeightSequence<T>, n: u64) -> Result<Vec<(Partition, T)>> {
    enumerate_partitions_with(weights, n, Budget::default())
}

pub fn enumerate_partitions_with<T: Real>(
    weights: &WeightSequence<T>,
    n: u64,
    budget: Budget,
) -> Result<Vec<(Partition, T)>> {
    if n > budget.enumeration {
        return Err(Error::budget(format!("n = {n} exceeds the enumeration budget {}", budget.enumeration)));
    }
    let b = weights.weights_upto(n as usize)?;
    let masses: Vec<(Partition, T)> = partitions_of(n)
        .into_iter()
        .map(|p| {
            let ln_mass: T = p
                .occupations()
                .iter()
                .map(|&(k, r)| ln_occupation_coefficient(Statistics::Bose, b[k as usize], r))
                .sum();
            (p, ln_mass.exp())
        })
        .filter(|(_, m)| *m > T::zero())
        .collect();
    let total: T = masses.iter().map(|(_, m)| *m).sum();
    if !(total > T::zero()) {
        return Err(Error::domain(format!("no partitions of {n} carry positive weight")));
    }
    Ok(masses.into_iter().map(|(p, m)| (p, m / total)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(x: f64) -> MultiplicativeMeasure<f64> {
        MultiplicativeMeasure::bose(WeightSequence::power(1.0, 0.0).unwrap(), x).unwrap()
    }

    #[test]
    fn same_seed_same_partition() {
        let m = uniform(0.99);
        let cfg = SamplerConfig::with_seed(42);
        assert_eq!(sample_partition(&m, &cfg).unwrap(), sample_partition(&m, &cfg).unwrap());
        let plan = SamplerPlan::new(&m, &cfg).unwrap();
        let forward = plan.map_samples(7, 0..20, |_, p| p.clone());
        let backward: Vec<Partition> = (0..20).rev().map(|i| plan.sample_indexed(7, i)).collect();
        assert!(forward.iter().eq(backward.iter().rev()));
    }

    #[test]
    fn tiny_activity_gives_empty_partitions() {
        let m = uniform(1e-9);
        let plan = SamplerPlan::new(&m, &SamplerConfig::default()).unwrap();
        assert!(plan.map_samples(1, 0..1000, |_, p| p.is_empty()).into_iter().all(|e| e));
    }

    #[test]
    fn first_occupation_mean() {
        // r_1 is geometric with mean 1 and variance 2 at x = 1/2
        let plan = SamplerPlan::new(&uniform(0.5), &SamplerConfig::default()).unwrap();
        let n = 100_000u64;
        let total: u64 = plan.map_samples(3, 0..n, |_, p| p.occupation(1)).into_iter().sum();
        let mean = total as f64 / n as f64;
        assert!((mean - 1.0).abs() < 4.0 * (2.0 / n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn occupation_frequencies_match_pmf() {
        // fractional weights exercise the gamma-Poisson and conditional paths
        let m = MultiplicativeMeasure::bose(WeightSequence::power(0.7, 0.5).unwrap(), 0.9).unwrap();
        let plan = SamplerPlan::new(&m, &SamplerConfig::default()).unwrap();
        let n = 100_000u64;
        let samples = plan.map_samples(11, 0..n, |_, p| (1..=20).map(|k| p.occupation(k)).collect::<Vec<_>>());
        for k in 1..=20u64 {
            for j in 0..4u64 {
                let hits = samples.iter().filter(|s| s[k as usize - 1] == j).count() as f64;
                let p = m.occupation_pmf(k, j).unwrap();
                let sigma = (n as f64 * p * (1.0 - p)).sqrt().max(1.0);
                assert!((hits - n as f64 * p).abs() < 4.0 * sigma + 1.0, "k={k} j={j}: {hits} vs {}", n as f64 * p);
            }
        }
    }

    #[test]
    fn fermi_requires_integer_weights() {
        let m = MultiplicativeMeasure::fermi(WeightSequence::power(1.5, 0.0).unwrap(), 0.5).unwrap();
        assert!(SamplerPlan::new(&m, &SamplerConfig::default()).is_err());
    }

    #[test]
    fn horizon_respects_cap() {
        let cfg = SamplerConfig { level_cap: 100, ..SamplerConfig::default() };
        assert!(matches!(SamplerPlan::new(&uniform(0.999), &cfg), Err(Error::Resource(_))));
    }

    #[test]
    fn enumerate_examples() {
        let ones = WeightSequence::<f64>::power(1.0, 0.0).unwrap();
        let four = enumerate_partitions(&ones, 4).unwrap();
        assert_eq!(four.len(), 5);
        assert!(four.iter().all(|(_, p)| (p - 0.2).abs() < 1e-15));
        let zero = enumerate_partitions(&ones, 0).unwrap();
        assert_eq!(zero, vec![(Partition::empty(), 1.0)]);
        let plane = enumerate_partitions(&WeightSequence::<f64>::plane(), 2).unwrap();
        assert_eq!(plane[0].0, Partition::from_parts(&[2]));
        assert!((plane[0].1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((plane[1].1 - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(enumerate_partitions(&ones, 31), Err(Error::Budget(_))));
    }

    #[test]
    fn small_canonical_is_uniform_on_partitions_of_five() {
        let ones = WeightSequence::<f64>::power(1.0, 0.0).unwrap();
        let sampler = SmallCanonicalSampler::new(&ones, 5, &SamplerConfig::default()).unwrap();
        let parts = partitions_of(5);
        let n = 70_000u64;
        let mut hist = vec![0u64; parts.len()];
        for i in 0..n {
            let a = sampler.sample_indexed(5, i).unwrap();
            assert_eq!(a.partition.weight(), 5);
            hist[parts.iter().position(|p| *p == a.partition).unwrap()] += 1;
        }
        let p = 1.0 / 7.0;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for h in hist {
            assert!((h as f64 - n as f64 * p).abs() < 4.0 * sigma, "{h}");
        }
    }

    #[test]
    fn small_canonical_budget() {
        let ones = WeightSequence::<f64>::power(1.0, 0.0).unwrap();
        let cfg = SamplerConfig { attempt_cap: 1, ..SamplerConfig::default() };
        let sampler = SmallCanonicalSampler::new(&ones, 50, &cfg).unwrap();
        let failures = (0..50).filter(|&i| sampler.sample_indexed(0, i).is_err()).count();
        assert!(failures > 0);
    }
}
