//! Sparse category weight vectors.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Position of a category in the scheme's canonical (ascending code) order.
pub type CategoryIndex = u32;

/// Tolerance on the unit-sum invariant of normalized vectors.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Sparse map from category index to a strictly positive weight.
///
/// Entries are kept sorted by category index, so iteration order is the
/// canonical component order and summations are reproducible.
#[derive(Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    entries: Vec<(CategoryIndex, f64)>,
}

impl WeightVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vector from arbitrary `(index, weight)` pairs. Weights on the
    /// same index are added in input order; non-positive results are dropped.
    pub fn from_pairs<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (CategoryIndex, f64)>,
    {
        let mut entries: Vec<(CategoryIndex, f64)> = pairs.into_iter().collect();
        entries.sort_by_key(|&(idx, _)| idx);
        let mut merged: Vec<(CategoryIndex, f64)> = Vec::with_capacity(entries.len());
        for (idx, w) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == idx => last.1 += w,
                _ => merged.push((idx, w)),
            }
        }
        merged.retain(|&(_, w)| w > 0.0);
        WeightVector { entries: merged }
    }

    /// Wraps entries already sorted by index with positive weights.
    pub(crate) fn from_sorted(entries: Vec<(CategoryIndex, f64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        WeightVector { entries }
    }

    /// Gathers the positive components of a dense buffer.
    pub fn from_dense(dense: &[f64]) -> Self {
        let entries = dense
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, &w)| (i as CategoryIndex, w))
            .collect();
        WeightVector { entries }
    }

    pub fn unit(index: CategoryIndex) -> Self {
        WeightVector {
            entries: vec![(index, 1.0)],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of non-zero components.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, index: CategoryIndex) -> f64 {
        match self.entries.binary_search_by_key(&index, |&(i, _)| i) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn entries(&self) -> &[(CategoryIndex, f64)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (CategoryIndex, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn support(&self) -> impl Iterator<Item = CategoryIndex> + '_ {
        self.entries.iter().map(|&(i, _)| i)
    }

    /// Sum of the components in ascending index order.
    pub fn sum(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, &(_, w)| acc + w)
    }

    /// Divides every component by the sum. Returns `false`, leaving the
    /// vector untouched, when the sum is zero.
    pub fn normalize(&mut self) -> bool {
        let total = self.sum();
        if total <= 0.0 {
            return false;
        }
        for entry in &mut self.entries {
            entry.1 /= total;
        }
        true
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    pub fn is_normalized(&self) -> bool {
        self.is_empty() || (self.sum() - 1.0).abs() <= SUM_TOLERANCE
    }

    /// Adds `scale * self` into a dense buffer.
    pub fn add_scaled_into(&self, dense: &mut [f64], scale: f64) {
        for &(i, w) in &self.entries {
            dense[i as usize] += w * scale;
        }
    }

    /// Adds `self` into a dense buffer.
    pub fn add_into(&self, dense: &mut [f64]) {
        for &(i, w) in &self.entries {
            dense[i as usize] += w;
        }
    }

    /// Entries ordered by descending weight, ties by ascending index.
    pub fn ranked(&self) -> Vec<(CategoryIndex, f64)> {
        let mut ranked = self.entries.clone();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked
    }

    /// Highest-weight component, ties resolved to the lowest index.
    pub fn winner(&self) -> Option<CategoryIndex> {
        let mut best: Option<(CategoryIndex, f64)> = None;
        for &(i, w) in &self.entries {
            match best {
                Some((_, bw)) if w <= bw => {}
                _ => best = Some((i, w)),
            }
        }
        best.map(|(i, _)| i)
    }

    /// Sum of squared component differences, absent entries read as zero.
    pub fn squared_distance(&self, other: &WeightVector) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0;
        while i < a.len() || j < b.len() {
            let d = match (a.get(i), b.get(j)) {
                (Some(&(ia, wa)), Some(&(ib, wb))) if ia == ib => {
                    i += 1;
                    j += 1;
                    wa - wb
                }
                (Some(&(ia, wa)), Some(&(ib, _))) if ia < ib => {
                    i += 1;
                    wa
                }
                (Some(_), Some(&(_, wb))) => {
                    j += 1;
                    -wb
                }
                (Some(&(_, wa)), None) => {
                    i += 1;
                    wa
                }
                (None, Some(&(_, wb))) => {
                    j += 1;
                    -wb
                }
                (None, None) => unreachable!(),
            };
            acc += d * d;
        }
        acc
    }

    /// Σ min(self[c], other[c]).
    pub fn overlap(&self, other: &WeightVector) -> f64 {
        let mut acc = 0.0;
        for &(i, w) in &self.entries {
            let o = other.get(i);
            if o > 0.0 {
                acc += w.min(o);
            }
        }
        acc
    }

    pub fn is_subset_of(&self, other: &WeightVector) -> bool {
        self.support().all(|i| other.get(i) > 0.0)
    }
}

impl fmt::Debug for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.entries.iter().map(|(i, w)| (i, w)))
            .finish()
    }
}

impl FromIterator<(CategoryIndex, f64)> for WeightVector {
    fn from_iter<T: IntoIterator<Item = (CategoryIndex, f64)>>(iter: T) -> Self {
        WeightVector::from_pairs(iter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_pairs_merges_and_drops_zeros() {
        let v = WeightVector::from_pairs([(3, 0.5), (1, 0.25), (3, 0.25), (2, 0.0)]);
        assert_eq!(v.entries(), &[(1, 0.25), (3, 0.75)]);
    }

    #[test]
    fn normalize_zero_vector_is_noop() {
        let mut v = WeightVector::new();
        assert!(!v.normalize());
        assert!(v.is_empty());
        assert!(v.is_normalized());
    }

    #[test]
    fn squared_distance_reads_missing_as_zero() {
        let a = WeightVector::unit(0);
        let b = WeightVector::unit(1);
        assert_eq!(a.squared_distance(&b), 2.0);
        assert_eq!(a.squared_distance(&a), 0.0);
        let c = WeightVector::from_pairs([(0, 0.5), (2, 0.5)]);
        assert!((a.squared_distance(&c) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ranking_breaks_ties_by_index() {
        let v = WeightVector::from_pairs([(4, 0.25), (2, 0.25), (7, 0.5)]);
        assert_eq!(v.ranked(), vec![(7, 0.5), (2, 0.25), (4, 0.25)]);
        let tie = WeightVector::from_pairs([(5, 0.5), (1, 0.5)]);
        assert_eq!(tie.winner(), Some(1));
    }

    #[test]
    fn overlap_of_half_and_unit() {
        let a = WeightVector::from_pairs([(0, 0.5), (1, 0.5)]);
        let b = WeightVector::unit(0);
        assert_eq!(a.overlap(&b), 0.5);
    }
}
