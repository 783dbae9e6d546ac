//! Partitions stored by occupation numbers.

use std::fmt;

/// A partition as a sparse map `k ↦ r_k`, levels strictly increasing and
/// every stored `r_k ≥ 1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Partition {
    occupations: Vec<(u64, u64)>,
}

impl Partition {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds from `(level, multiplicity)` pairs in any order; zero
    /// multiplicities are dropped and repeated levels merged.
    pub fn from_occupations(pairs: impl IntoIterator<Item = (u64, u64)>) -> Self {
        let mut occupations: Vec<(u64, u64)> = pairs.into_iter().filter(|&(k, r)| k > 0 && r > 0).collect();
        if !occupations.is_sorted_by(|a, b| a.0 < b.0) {
            occupations.sort_unstable_by_key(|&(k, _)| k);
            occupations.dedup_by(|later, earlier| {
                if later.0 == earlier.0 {
                    earlier.1 += later.1;
                    true
                } else {
                    false
                }
            });
        }
        Self { occupations }
    }

    /// Builds from the parts `λ_1 ≥ λ_2 ≥ …` (any order accepted).
    pub fn from_parts(parts: &[u64]) -> Self {
        Self::from_occupations(parts.iter().map(|&k| (k, 1)))
    }

    pub fn occupations(&self) -> &[(u64, u64)] {
        &self.occupations
    }

    /// `r_k`, zero for absent levels.
    pub fn occupation(&self, k: u64) -> u64 {
        self.occupations
            .binary_search_by_key(&k, |&(level, _)| level)
            .map_or(0, |i| self.occupations[i].1)
    }

    /// `Σ k r_k`.
    pub fn weight(&self) -> u64 {
        self.occupations.iter().map(|&(k, r)| k * r).sum()
    }

    /// `Σ r_k`, the number of parts.
    pub fn length(&self) -> u64 {
        self.occupations.iter().map(|&(_, r)| r).sum()
    }

    /// Largest part, 0 for the empty partition.
    pub fn max_part(&self) -> u64 {
        self.occupations.last().map_or(0, |&(k, _)| k)
    }

    pub fn is_empty(&self) -> bool {
        self.occupations.is_empty()
    }

    /// Parts in nonincreasing order.
    pub fn parts(&self) -> impl Iterator<Item = u64> + '_ {
        self.occupations
            .iter()
            .rev()
            .flat_map(|&(k, r)| std::iter::repeat_n(k, r as usize))
    }

    /// The `d` largest parts with multiplicity, padded with zeros.
    pub fn top_order_statistics(&self, d: usize) -> Vec<u64> {
        let mut out: Vec<u64> = self.parts().take(d).collect();
        out.resize(d, 0);
        out
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.parts().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_statistics_examples() {
        let p = Partition::from_occupations([(3, 1), (1, 2)]);
        assert_eq!(p.top_order_statistics(3), vec![3, 1, 1]);
        assert_eq!(Partition::empty().top_order_statistics(2), vec![0, 0]);
        assert_eq!(Partition::from_occupations([(5, 2)]).top_order_statistics(2), vec![5, 5]);
    }

    #[test]
    fn derived_quantities() {
        let p = Partition::from_parts(&[4, 2, 2, 1]);
        assert_eq!(p.weight(), 9);
        assert_eq!(p.length(), 4);
        assert_eq!(p.max_part(), 4);
        assert_eq!(p.occupation(2), 2);
        assert_eq!(p.occupation(3), 0);
        assert_eq!(p.to_string(), "(4,2,2,1)");
        assert_eq!(Partition::empty().max_part(), 0);
    }

    #[test]
    fn merges_and_drops() {
        let p = Partition::from_occupations([(2, 1), (1, 0), (2, 2), (1, 1)]);
        assert_eq!(p.occupations(), &[(1, 1), (2, 3)]);
    }
}
