//! Weight sequences `b_k` and lattice representation counts.
//!
//! A [`WeightSequence`] is the exponent sequence of the Bose product
//! `∏ (1 - x^k)^{-b_k}` (or the Fermi product `∏ (1 + x^k)^{b_k}`). Four
//! families are supported: power laws `c k^β`, lattice counts `j_d(k)`, the
//! plane-partition diagonal `b_k = k`, and finite tables.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::special::unit_ball_volume;
use crate::Real;

/// Default cap on the number of entries in one lattice count table.
pub const DEFAULT_LATTICE_CAP: usize = 100_000_000;

/// Default `δ` in the four-dimensional error exponent `α_4 = 1 + δ`.
pub const DEFAULT_ALPHA4_DELTA: f64 = 0.01;

#[derive(Clone, Debug, PartialEq)]
pub enum WeightKind<T> {
    /// `b_k = c k^β` with `c > 0`, `β > -1`.
    Power { c: T, beta: T },
    /// `b_k = j_d(k)`, the number of points of `Z^d` on the sphere `|v|² = k`.
    Lattice { d: u32 },
    /// `b_k = k`; the diagonal section of a random plane partition.
    PlaneDiagonal,
    /// `b_1, …, b_n` as given, zero beyond the table.
    Tabulated(Arc<[T]>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightSequence<T> {
    kind: WeightKind<T>,
}

impl<T: Real> WeightSequence<T> {
    pub fn power(c: T, beta: T) -> Result<Self> {
        if !(c.is_finite() && c > T::zero()) {
            return Err(Error::domain(format!("power weights need c > 0, got {c}")));
        }
        if !(beta.is_finite() && beta > -T::one()) {
            return Err(Error::domain(format!("power weights need beta > -1, got {beta}")));
        }
        Ok(Self { kind: WeightKind::Power { c, beta } })
    }

    pub fn lattice(d: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("lattice dimension must be at least 1"));
        }
        Ok(Self { kind: WeightKind::Lattice { d } })
    }

    pub fn plane() -> Self {
        Self { kind: WeightKind::PlaneDiagonal }
    }

    /// `values[i]` is `b_{i+1}`.
    pub fn tabulated(values: Vec<T>) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= T::zero())) {
            return Err(Error::domain(format!("table weight b_{} = {v} is not a nonnegative real", i + 1)));
        }
        Ok(Self { kind: WeightKind::Tabulated(values.into()) })
    }

    /// Reads a one-column CSV file, row `i` holding `b_i`.
    pub fn from_table_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut values = Vec::new();
        for (line_no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|_| Error::Parse(format!("{}:{}: not a number: {line:?}", path.display(), line_no + 1)))?;
            values.push(T::lit(v));
        }
        Self::tabulated(values)
    }

    /// Parses the compact forms `power:c=1,beta=0`, `lattice:d=3`, `plane`
    /// and `table:@file.csv`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (head, args) = match spec.split_once(':') {
            Some((h, a)) => (h.trim(), a.trim()),
            None => (spec, ""),
        };
        match head {
            "plane" if args.is_empty() => Ok(Self::plane()),
            "power" => {
                let mut c = 1.0;
                let mut beta = 0.0;
                for (key, value) in key_values(args)? {
                    match key {
                        "c" => c = parse_f64(value)?,
                        "beta" => beta = parse_f64(value)?,
                        _ => return Err(Error::Parse(format!("unknown power parameter {key:?}"))),
                    }
                }
                Self::power(T::lit(c), T::lit(beta))
            }
            "lattice" => {
                let mut d = None;
                for (key, value) in key_values(args)? {
                    match key {
                        "d" => d = Some(value.parse::<u32>().map_err(|_| Error::Parse(format!("bad dimension {value:?}")))?),
                        _ => return Err(Error::Parse(format!("unknown lattice parameter {key:?}"))),
                    }
                }
                Self::lattice(d.ok_or_else(|| Error::Parse("lattice spec needs d=<int>".into()))?)
            }
            "table" => {
                let path = args
                    .strip_prefix('@')
                    .ok_or_else(|| Error::Parse("table spec must look like table:@file.csv".into()))?;
                Self::from_table_file(path)
            }
            _ => Err(Error::Parse(format!("unrecognised weight spec {spec:?}"))),
        }
    }

    pub fn kind(&self) -> &WeightKind<T> {
        &self.kind
    }

    /// `(c, β)` when the weights are an exact power law.
    pub fn power_law(&self) -> Option<(T, T)> {
        match self.kind {
            WeightKind::Power { c, beta } => Some((c, beta)),
            WeightKind::PlaneDiagonal => Some((T::one(), T::one())),
            _ => None,
        }
    }

    /// Largest level with a nonzero weight, if the sequence is finite.
    pub fn support_end(&self) -> Option<usize> {
        match &self.kind {
            WeightKind::Tabulated(v) => Some(v.iter().rposition(|b| *b > T::zero()).map_or(0, |i| i + 1)),
            _ => None,
        }
    }

    /// `b_k` for `k ≥ 1`. Lattice weights build or extend the shared table.
    pub fn weight_at(&self, k: u64) -> Result<T> {
        if k == 0 {
            return Err(Error::domain("weights are indexed from k = 1"));
        }
        Ok(match &self.kind {
            WeightKind::Power { c, beta } => *c * T::from_count(k).powf(*beta),
            WeightKind::Lattice { d } => T::from_count(shared_lattice_table(*d, k as usize)?.count(k as usize)),
            WeightKind::PlaneDiagonal => T::from_count(k),
            WeightKind::Tabulated(v) => v.get(k as usize - 1).copied().unwrap_or_else(T::zero),
        })
    }

    /// `b_0..=b_K` with `b_0 = 0`.
    pub fn weights_upto(&self, k_max: usize) -> Result<Vec<T>> {
        let mut out = Vec::with_capacity(k_max + 1);
        out.push(T::zero());
        match &self.kind {
            WeightKind::Power { c, beta } => {
                if beta.is_zero() {
                    out.resize(k_max + 1, *c);
                } else {
                    out.extend((1..=k_max).map(|k| *c * T::from_count(k as u64).powf(*beta)));
                }
            }
            WeightKind::Lattice { d } => {
                let table = shared_lattice_table(*d, k_max)?;
                out.extend(table.counts()[1..=k_max].iter().map(|&j| T::from_count(j)));
            }
            WeightKind::PlaneDiagonal => out.extend((1..=k_max).map(|k| T::from_count(k as u64))),
            WeightKind::Tabulated(v) => {
                out.extend((1..=k_max).map(|k| v.get(k - 1).copied().unwrap_or_else(T::zero)));
            }
        }
        Ok(out)
    }

    /// `b_k` as an exact integer when it is one.
    pub fn integer_weight(&self, k: u64) -> Option<u64> {
        match &self.kind {
            WeightKind::PlaneDiagonal => Some(k),
            WeightKind::Lattice { d } => shared_lattice_table(*d, k as usize).ok().map(|t| t.count(k as usize)),
            _ => {
                let v = self.weight_at(k).ok()?.as_f64();
                (v.fract() == 0.0 && v < 2f64.powi(53)).then_some(v as u64)
            }
        }
    }

    /// `b_0..=b_K` as exact integers, or `None` if any weight is fractional.
    pub fn integer_weights_upto(&self, k_max: usize) -> Option<Vec<u64>> {
        match &self.kind {
            WeightKind::PlaneDiagonal => Some((0..=k_max as u64).collect()),
            WeightKind::Lattice { d } => {
                let table = shared_lattice_table(*d, k_max).ok()?;
                let mut v = table.counts()[..=k_max].to_vec();
                v[0] = 0;
                Some(v)
            }
            _ => self
                .weights_upto(k_max)
                .ok()?
                .into_iter()
                .map(|b| {
                    let v = b.as_f64();
                    (v.fract() == 0.0 && v < 2f64.powi(53)).then_some(v as u64)
                })
                .collect(),
        }
    }

    /// Upper bound on `Σ_{k>K} k^p b_k x^k` for `x ∈ (0,1)`.
    ///
    /// Power weights use the ratio bound `a_{k+1}/a_k ≤ ρ` on the tail terms.
    /// Lattice weights go through Abel summation,
    /// `Σ_{k>K} k^p j_d(k) x^k ≤ (1-x) Σ_{k>K} k^p J_d(k) x^k`, with
    /// `J_d(k) ≤ C_d (√k + √d/2)^d`. Returns `+∞` when the ratio bound is
    /// not yet contracting at `K`.
    pub fn tail_moment_bound(&self, k_max: usize, p: i32, x: T) -> T {
        let one = T::one();
        let ln_x = x.ln();
        let next = T::from_count(k_max as u64 + 1);
        let after = next + one;
        let geometric = |log_first: T, ratio: T| -> T {
            if ratio >= one {
                T::infinity()
            } else {
                log_first.exp() / (one - ratio)
            }
        };
        match &self.kind {
            WeightKind::Power { .. } | WeightKind::PlaneDiagonal => {
                let (c, beta) = self.power_law().expect("power-law weights");
                let e = beta + T::lit(p as f64);
                let grow = if e > T::zero() { (after / next).powf(e) } else { one };
                geometric(c.ln() + e * next.ln() + next * ln_x, x * grow)
            }
            WeightKind::Lattice { d } => {
                let d_t = T::lit(*d as f64);
                let h = d_t.sqrt() / T::lit(2.0);
                let c_d = unit_ball_volume::<T>(*d);
                let envelope = |k: T| c_d.ln() + d_t * (k.sqrt() + h).ln() + T::lit(p as f64) * k.ln();
                let grow = (envelope(after) - envelope(next)).exp();
                (one - x) * geometric(envelope(next) + next * ln_x, x * grow)
            }
            WeightKind::Tabulated(v) => {
                if k_max >= v.len() {
                    T::zero()
                } else {
                    v[k_max..]
                        .iter()
                        .enumerate()
                        .map(|(i, b)| {
                            let k = T::from_count((k_max + i + 1) as u64);
                            *b * k.powi(p) * (k * ln_x).exp()
                        })
                        .sum()
                }
            }
        }
    }
}

impl<T: Real> fmt::Display for WeightSequence<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            WeightKind::Power { c, beta } => write!(f, "power:c={c},beta={beta}"),
            WeightKind::Lattice { d } => write!(f, "lattice:d={d}"),
            WeightKind::PlaneDiagonal => write!(f, "plane"),
            WeightKind::Tabulated(v) => write!(f, "table:[{} values]", v.len()),
        }
    }
}

fn key_values(args: &str) -> Result<Vec<(&str, &str)>> {
    args.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {kv:?}")))
        })
        .collect()
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse().map_err(|_| Error::Parse(format!("not a number: {s:?}")))
}

/// Exact counts `j_d(k)` for `k = 0..=K` and their running sums `J_d(k)`.
#[derive(Debug)]
pub struct LatticeCountTable {
    d: u32,
    counts: Vec<u64>,
    cumulative: OnceLock<Vec<u128>>,
}

impl LatticeCountTable {
    pub fn dimension(&self) -> u32 {
        self.d
    }

    /// Largest `k` covered by the table.
    pub fn max_k(&self) -> usize {
        self.counts.len() - 1
    }

    /// `j_d(k)`; panics beyond [`max_k`](Self::max_k).
    pub fn count(&self, k: usize) -> u64 {
        self.counts[k]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `J_d(k) = Σ_{i ≤ k} j_d(i)` for every `k` in the table.
    pub fn cumulative(&self) -> &[u128] {
        self.cumulative.get_or_init(|| {
            self.counts
                .iter()
                .scan(0u128, |acc, &j| {
                    *acc += j as u128;
                    Some(*acc)
                })
                .collect()
        })
    }
}

/// `j_d(0..=K)` by `d - 1` convolutions of `j_1` with itself.
pub fn lattice_counts(d: u32, k_max: usize) -> Result<LatticeCountTable> {
    lattice_counts_capped(d, k_max, DEFAULT_LATTICE_CAP)
}

pub fn lattice_counts_capped(d: u32, k_max: usize, cap: usize) -> Result<LatticeCountTable> {
    if d == 0 {
        return Err(Error::domain("lattice dimension must be at least 1"));
    }
    if k_max >= cap {
        return Err(Error::resource(format!(
            "lattice table for k ≤ {k_max} exceeds the cap of {cap} entries"
        )));
    }
    let root = isqrt(k_max);
    let mut counts = vec![0u64; k_max + 1];
    counts[0] = 1;
    for m in 1..=root {
        counts[m * m] = 2;
    }
    for _ in 1..d {
        let peak = counts.iter().copied().max().unwrap_or(0);
        let fan_in = 2 * root as u64 + 1;
        if peak.checked_mul(fan_in).is_none() {
            return Err(Error::resource(format!("lattice counts overflow u64 for d = {d}, K = {k_max}")));
        }
        counts = convolve_with_squares(&counts);
    }
    Ok(LatticeCountTable { d, counts, cumulative: OnceLock::new() })
}

/// `out[k] = prev[k] + 2 Σ_{1 ≤ m ≤ √k} prev[k - m²]`.
///
/// Sparse inputs are scattered; dense ones are accumulated block by block
/// so that the output block stays in cache while the shifted source windows
/// slide by `2m + 1`.
fn convolve_with_squares(prev: &[u64]) -> Vec<u64> {
    let len = prev.len();
    let nonzero = prev.iter().filter(|&&v| v != 0).count();
    let mut acc = vec![0u64; len];
    if nonzero <= len / 16 {
        for (i, &v) in prev.iter().enumerate().filter(|(_, v)| **v != 0) {
            let mut m = 1;
            while i + m * m < len {
                acc[i + m * m] = acc[i + m * m].wrapping_add(v);
                m += 1;
            }
        }
    } else {
        const BLOCK: usize = 1 << 14;
        let mut lo = 1;
        while lo < len {
            let hi = (lo + BLOCK).min(len);
            let mut m = 1;
            while m * m < hi {
                let shift = m * m;
                let start = lo.max(shift);
                let dst = &mut acc[start..hi];
                let src = &prev[start - shift..hi - shift];
                for (o, &v) in dst.iter_mut().zip(src) {
                    *o = o.wrapping_add(v);
                }
                m += 1;
            }
            lo = hi;
        }
    }
    for (a, &p) in acc.iter_mut().zip(prev) {
        *a = p.wrapping_add(a.wrapping_mul(2));
    }
    acc
}

pub(crate) fn isqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

fn lattice_cache() -> &'static Mutex<HashMap<u32, Arc<LatticeCountTable>>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<LatticeCountTable>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Process-wide table for dimension `d` covering at least `k ≤ K`.
///
/// Tables are immutable; growing replaces the cached table with a fresh,
/// larger one (at least 1.5× the previous size) while earlier `Arc`s stay
/// valid for their readers.
pub fn shared_lattice_table(d: u32, k_max: usize) -> Result<Arc<LatticeCountTable>> {
    let mut cache = lattice_cache().lock().unwrap_or_else(|e| e.into_inner());
    if let Some(t) = cache.get(&d) {
        if t.max_k() >= k_max {
            return Ok(Arc::clone(t));
        }
    }
    let previous = cache.get(&d).map_or(0, |t| t.max_k());
    let target = k_max.max(previous + previous / 2).max(64);
    let target = if target >= DEFAULT_LATTICE_CAP { k_max } else { target };
    let table = Arc::new(lattice_counts(d, target)?);
    cache.insert(d, Arc::clone(&table));
    Ok(table)
}

/// `C_d = π^{d/2} / Γ(d/2 + 1)`, the volume of the unit ball.
pub fn ball_volume_coefficient<T: Real>(d: u32) -> Result<T> {
    if d == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    Ok(unit_ball_volume(d))
}

/// Exponent `α_d` with `|J_d(k) - C_d k^{d/2}| = O(k^{α_d})`.
pub fn error_exponent<T: Real>(d: u32, delta: T) -> Result<T> {
    Ok(match d {
        0 => return Err(Error::domain("dimension must be at least 1")),
        1 => T::zero(),
        2 => T::one() / T::lit(3.0),
        3 => T::lit(0.75),
        4 => T::one() + delta,
        _ => T::lit(d as f64 / 2.0 - 1.0),
    })
}
