//! Small dense bit sets over a fixed universe `{0, ..., n-1}`.
//!
//! Set functions throughout the crate (quota evaluators, matroid ranks) take
//! their argument as a [`BitSubset`].  Cardinality is tracked alongside the
//! words so closed-form evaluators that only need `|B|` stay O(1).

const WORD: usize = 64;

/// A subset of a fixed universe, stored as packed 64-bit words.
///
/// Bits above the universe size are always zero, so word-wise equality and
/// hashing agree with set equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitSubset {
    universe: usize,
    words: Vec<u64>,
    card: usize,
}

impl BitSubset {
    pub fn empty(universe: usize) -> Self {
        BitSubset {
            universe,
            words: vec![0; universe.div_ceil(WORD)],
            card: 0,
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = Self::empty(universe);
        for w in &mut s.words {
            *w = u64::MAX;
        }
        s.clear_excess();
        s.card = universe;
        s
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(universe: usize, indices: I) -> Self {
        let mut s = Self::empty(universe);
        for i in indices {
            s.insert(i);
        }
        s
    }

    /// Builds a subset of a universe of size `universe <= 64` from a mask.
    pub fn from_mask(universe: usize, mask: u64) -> Self {
        assert!(universe <= WORD, "mask constructor limited to 64 elements");
        assert!(
            universe == WORD || mask < (1u64 << universe),
            "mask has bits outside the universe"
        );
        let mut s = Self::empty(universe);
        if !s.words.is_empty() {
            s.words[0] = mask;
        }
        s.card = mask.count_ones() as usize;
        s
    }

    /// The packed mask of a subset whose universe fits one word.
    pub fn as_mask(&self) -> u64 {
        assert!(self.universe <= WORD, "universe too large for a single mask");
        self.words.first().copied().unwrap_or(0)
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn card(&self) -> usize {
        self.card
    }

    pub fn is_empty(&self) -> bool {
        self.card == 0
    }

    pub fn contains(&self, i: usize) -> bool {
        debug_assert!(i < self.universe);
        self.words[i / WORD] & (1 << (i % WORD)) != 0
    }

    /// Inserts `i`; returns true if it was absent.
    pub fn insert(&mut self, i: usize) -> bool {
        assert!(i < self.universe, "index {i} outside universe {}", self.universe);
        let w = &mut self.words[i / WORD];
        let bit = 1u64 << (i % WORD);
        if *w & bit == 0 {
            *w |= bit;
            self.card += 1;
            true
        } else {
            false
        }
    }

    /// Removes `i`; returns true if it was present.
    pub fn remove(&mut self, i: usize) -> bool {
        assert!(i < self.universe, "index {i} outside universe {}", self.universe);
        let w = &mut self.words[i / WORD];
        let bit = 1u64 << (i % WORD);
        if *w & bit != 0 {
            *w &= !bit;
            self.card -= 1;
            true
        } else {
            false
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let base = k * WORD;
            let universe = self.universe;
            std::iter::successors(
                if w == 0 { None } else { Some(w) },
                |&rest| {
                    let rest = rest & (rest - 1);
                    (rest != 0).then_some(rest)
                },
            )
            .map(move |rest| base + rest.trailing_zeros() as usize)
            .filter(move |&i| i < universe)
        })
    }

    pub fn complement(&self) -> Self {
        let mut out = self.clone();
        for w in &mut out.words {
            *w = !*w;
        }
        out.clear_excess();
        out.card = self.universe - self.card;
        out
    }

    pub fn union(&self, other: &Self) -> Self {
        assert_eq!(self.universe, other.universe);
        let mut out = self.clone();
        for (w, o) in out.words.iter_mut().zip(&other.words) {
            *w |= o;
        }
        out.recount();
        out
    }

    pub fn intersection(&self, other: &Self) -> Self {
        assert_eq!(self.universe, other.universe);
        let mut out = self.clone();
        for (w, o) in out.words.iter_mut().zip(&other.words) {
            *w &= o;
        }
        out.recount();
        out
    }

    pub fn difference(&self, other: &Self) -> Self {
        assert_eq!(self.universe, other.universe);
        let mut out = self.clone();
        for (w, o) in out.words.iter_mut().zip(&other.words) {
            *w &= !o;
        }
        out.recount();
        out
    }

    pub fn intersection_card(&self, other: &Self) -> usize {
        assert_eq!(self.universe, other.universe);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(w, o)| (w & o).count_ones() as usize)
            .sum()
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        assert_eq!(self.universe, other.universe);
        self.words.iter().zip(&other.words).all(|(w, o)| w & !o == 0)
    }

    fn clear_excess(&mut self) {
        let rem = self.universe % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    fn recount(&mut self) {
        self.card = self.words.iter().map(|w| w.count_ones() as usize).sum();
    }
}

impl std::fmt::Debug for BitSubset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_remove_tracks_cardinality() {
        let mut s = BitSubset::empty(130);
        assert!(s.insert(0));
        assert!(s.insert(64));
        assert!(s.insert(129));
        assert!(!s.insert(64));
        assert_eq!(s.card(), 3);
        assert!(s.remove(64));
        assert!(!s.remove(64));
        assert_eq!(s.card(), 2);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 129]);
    }

    #[test]
    fn full_and_complement_are_inverses() {
        let s = BitSubset::from_indices(70, [1, 3, 69]);
        let c = s.complement();
        assert_eq!(c.card(), 67);
        assert!(!c.contains(3));
        assert!(c.contains(0));
        assert_eq!(c.complement(), s);
        assert_eq!(BitSubset::full(70).card(), 70);
        assert_eq!(BitSubset::full(0).card(), 0);
    }

    #[test]
    fn mask_roundtrip() {
        let s = BitSubset::from_mask(10, 0b1000100101);
        assert_eq!(s.card(), 4);
        assert_eq!(s.as_mask(), 0b1000100101);
        assert_eq!(BitSubset::from_indices(10, s.iter()), s);
    }

    #[test]
    fn set_algebra() {
        let a = BitSubset::from_indices(8, [0, 1, 2, 5]);
        let b = BitSubset::from_indices(8, [2, 5, 7]);
        assert_eq!(a.intersection(&b).iter().collect::<Vec<_>>(), vec![2, 5]);
        assert_eq!(a.union(&b).card(), 5);
        assert_eq!(a.difference(&b).iter().collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(a.intersection_card(&b), 2);
        assert!(a.intersection(&b).is_subset_of(&a));
        assert!(!a.is_subset_of(&b));
    }

    #[test]
    fn equality_ignores_construction_order() {
        let mut a = BitSubset::empty(100);
        a.insert(99);
        a.insert(1);
        let b = BitSubset::from_indices(100, [1, 99]);
        assert_eq!(a, b);
        use std::collections::hash_map::DefaultHasher;
        use std::hash::{Hash, Hasher};
        let mut ha = DefaultHasher::new();
        let mut hb = DefaultHasher::new();
        a.hash(&mut ha);
        b.hash(&mut hb);
        assert_eq!(ha.finish(), hb.finish());
    }
}
