//! Brute-force reference computations. Deliberately naive and independent
//! of the recurrences and convolutions used elsewhere; meant for small sizes.

use crate::partition::Partition;

/// Every partition of `n`, in reverse lexicographic order of parts.
pub fn partitions_of(n: u64) -> Vec<Partition> {
    fn rec(rest: u64, largest: u64, parts: &mut Vec<u64>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition::from_parts(parts));
            return;
        }
        for p in (1..=largest.min(rest)).rev() {
            parts.push(p);
            rec(rest - p, p, parts, out);
            parts.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// `C(b + r - 1, r)`: the number of ways to put `r` parts of one size into
/// `b` distinguishable colours.
pub fn multiset_coefficient(b: u64, r: u64) -> u128 {
    if r == 0 {
        return 1;
    }
    if b == 0 {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 1..=r as u128 {
        acc = acc * (b as u128 + i - 1) / i;
    }
    acc
}

/// Unnormalized fixed-weight mass `∏_k C(b_k + r_k - 1, r_k)`.
/// `b[k]` is the weight of level `k`; `b[0]` is ignored.
pub fn partition_mass(b: &[u64], p: &Partition) -> u128 {
    p.occupations().iter().map(|&(k, r)| multiset_coefficient(b[k as usize], r)).product()
}

/// `Q(n)` summed over an explicit list of the partitions of `n`.
pub fn counts_by_enumeration(b: &[u64], n_max: u64) -> Vec<u128> {
    (0..=n_max).map(|n| partitions_of(n).iter().map(|p| partition_mass(b, p)).sum()).collect()
}

/// Coefficients of `∏_{k ≤ N} (1 - x^k)^{-b_k}` up to `x^N`, by repeated
/// multiplication with the geometric series `1/(1 - x^k)`.
pub fn product_expansion(b: &[u64], n_max: usize) -> Vec<u128> {
    let mut q = vec![0u128; n_max + 1];
    q[0] = 1;
    for k in 1..=n_max {
        for _ in 0..b[k] {
            for i in k..=n_max {
                q[i] += q[i - k];
            }
        }
    }
    q
}

/// `μⁿ{max ≤ M}` by listing `P(n)`.
pub fn max_cdf_by_enumeration(b: &[u64], n: u64, m: u64) -> f64 {
    let parts = partitions_of(n);
    let total: u128 = parts.iter().map(|p| partition_mass(b, p)).sum();
    let below: u128 = parts.iter().filter(|p| p.max_part() <= m).map(|p| partition_mass(b, p)).sum();
    below as f64 / total as f64
}

/// Number of plane partitions of `n` for `n = 0..=N`, counted as stacks of
/// rows where each row is a partition dominated entrywise by the row above.
pub fn plane_partition_counts(n_max: u64) -> Vec<u64> {
    fn rows(rest: u64, above: &[u64], row: &mut Vec<u64>, count: &mut u64) {
        // a finished nonempty row opens the next one
        if !row.is_empty() {
            let fixed = row.clone();
            stack(rest, &fixed, count);
        }
        let i = row.len();
        if i >= above.len() {
            return;
        }
        let cap = above[i].min(row.last().copied().unwrap_or(u64::MAX)).min(rest);
        for v in 1..=cap {
            row.push(v);
            rows(rest - v, above, row, count);
            row.pop();
        }
    }
    fn stack(rest: u64, above: &[u64], count: &mut u64) {
        if rest == 0 {
            *count += 1;
            return;
        }
        rows(rest, above, &mut Vec::new(), count);
    }
    (0..=n_max)
        .map(|n| {
            let mut count = 0;
            if n == 0 {
                return 1;
            }
            let first = vec![n; n as usize];
            rows(n, &first, &mut Vec::new(), &mut count);
            count
        })
        .collect()
}

/// `j_d(k)` for `k = 0..=K` by walking every lattice point of the ball.
pub fn lattice_counts_brute(d: u32, k_max: u64) -> Vec<u64> {
    fn walk(coords_left: u32, norm: u64, k_max: u64, out: &mut [u64]) {
        if coords_left == 0 {
            out[norm as usize] += 1;
            return;
        }
        let mut v: i64 = 0;
        loop {
            let sq = (v * v) as u64;
            if norm + sq > k_max {
                break;
            }
            let copies = if v == 0 { 1 } else { 2 };
            for _ in 0..copies {
                walk(coords_left - 1, norm + sq, k_max, out);
            }
            v += 1;
        }
    }
    let mut out = vec![0u64; k_max as usize + 1];
    walk(d, 0, k_max, &mut out);
    out
}
