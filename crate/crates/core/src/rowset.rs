//! Fixed-width bitsets over dataset row indices.

/// A set of row indices in `0..len`, stored as packed 64-bit words.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RowSet {
    words: Vec<u64>,
    len: usize,
}

impl RowSet {
    pub fn empty(len: usize) -> Self {
        RowSet {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn full(len: usize) -> Self {
        let mut set = RowSet {
            words: vec![u64::MAX; len.div_ceil(64)],
            len,
        };
        set.clear_tail();
        set
    }

    pub fn from_indices(len: usize, rows: impl IntoIterator<Item = usize>) -> Self {
        let mut set = RowSet::empty(len);
        for r in rows {
            set.insert(r);
        }
        set
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    /// Universe size (number of rows), not the number of members.
    pub fn universe(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, row: usize) {
        assert!(row < self.len, "row {row} out of range {}", self.len);
        self.words[row / 64] |= 1 << (row % 64);
    }

    pub fn contains(&self, row: usize) -> bool {
        row < self.len && self.words[row / 64] & (1 << (row % 64)) != 0
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn intersect_with(&mut self, other: &RowSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= *b;
        }
    }

    pub fn intersection(&self, other: &RowSet) -> RowSet {
        let mut out = self.clone();
        out.intersect_with(other);
        out
    }

    /// `|self ∩ other|` without materializing the intersection.
    pub fn intersection_count(&self, other: &RowSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// `|self ∩ a ∩ b|`.
    pub fn intersection_count3(&self, a: &RowSet, b: &RowSet) -> usize {
        self.words
            .iter()
            .zip(&a.words)
            .zip(&b.words)
            .map(|((x, y), z)| (x & y & z).count_ones() as usize)
            .sum()
    }

    pub fn is_subset(&self, other: &RowSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + bit)
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_set_respects_length() {
        let s = RowSet::full(70);
        assert_eq!(s.count(), 70);
        assert!(s.contains(69));
        assert!(!s.contains(70));
    }

    #[test]
    fn intersection_counts_agree() {
        let a = RowSet::from_indices(130, [0, 5, 64, 100, 129]);
        let b = RowSet::from_indices(130, [5, 64, 65, 129]);
        let c = RowSet::from_indices(130, [64, 129]);
        assert_eq!(a.intersection(&b).count(), 3);
        assert_eq!(a.intersection_count(&b), 3);
        assert_eq!(a.intersection_count3(&b, &c), 2);
        assert_eq!(a.intersection(&b).iter().collect::<Vec<_>>(), vec![5, 64, 129]);
        assert!(c.is_subset(&a));
        assert!(!b.is_subset(&a));
    }

    #[test]
    fn empty_universe() {
        let s = RowSet::full(0);
        assert!(s.is_empty());
        assert_eq!(s.iter().count(), 0);
    }
}
