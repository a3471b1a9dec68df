//! Dense fixed-width bitset over universe elements `0..len`.

use std::fmt;

const WORD: usize = 64;

/// A set of universe elements stored as a packed bit vector.
///
/// All binary operations require both operands to have the same width.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ElementSet {
    len: usize,
    words: Vec<u64>,
}

impl ElementSet {
    pub fn empty(len: usize) -> Self {
        ElementSet {
            len,
            words: vec![0; len.div_ceil(WORD)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = Self::empty(len);
        for w in s.words.iter_mut() {
            *w = !0;
        }
        s.clear_tail();
        s
    }

    /// Builds a set from element indices. Panics if an element is `>= len`.
    pub fn from_elements<I: IntoIterator<Item = usize>>(len: usize, elements: I) -> Self {
        let mut s = Self::empty(len);
        for e in elements {
            s.insert(e);
        }
        s
    }

    /// Universe width.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.cardinality() == self.len
    }

    pub fn insert(&mut self, e: usize) {
        assert!(e < self.len, "element {e} out of range for width {}", self.len);
        self.words[e / WORD] |= 1 << (e % WORD);
    }

    pub fn remove(&mut self, e: usize) {
        assert!(e < self.len, "element {e} out of range for width {}", self.len);
        self.words[e / WORD] &= !(1 << (e % WORD));
    }

    pub fn contains(&self, e: usize) -> bool {
        e < self.len && self.words[e / WORD] & (1 << (e % WORD)) != 0
    }

    pub fn cardinality(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `|self \ other|`, the marginal gain of `self` against a covered set.
    pub fn difference_count(&self, other: &ElementSet) -> usize {
        self.check_width(other);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & !b).count_ones() as usize)
            .sum()
    }

    pub fn intersection_count(&self, other: &ElementSet) -> usize {
        self.check_width(other);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn union_with(&mut self, other: &ElementSet) {
        self.check_width(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &ElementSet) {
        self.check_width(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn difference_with(&mut self, other: &ElementSet) {
        self.check_width(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn is_subset(&self, other: &ElementSet) -> bool {
        self.difference_count(other) == 0
    }

    /// Lowest element not in the set, if any.
    pub fn first_absent(&self) -> Option<usize> {
        for (i, w) in self.words.iter().enumerate() {
            if *w != !0 {
                let e = i * WORD + (!w).trailing_zeros() as usize;
                return (e < self.len).then_some(e);
            }
        }
        None
    }

    /// Ascending iterator over members.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * WORD + t)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    fn check_width(&self, other: &ElementSet) {
        assert_eq!(self.len, other.len, "element sets of different widths");
    }
}

impl fmt::Debug for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn full_and_first_absent() {
        for len in [0, 1, 63, 64, 65, 130] {
            let f = ElementSet::full(len);
            assert_eq!(f.cardinality(), len);
            assert!(f.is_full());
            assert_eq!(f.first_absent(), None);
        }
        let mut s = ElementSet::full(70);
        s.remove(66);
        assert_eq!(s.first_absent(), Some(66));
        assert_eq!(ElementSet::empty(5).first_absent(), Some(0));
    }

    #[test]
    fn contains_out_of_range_is_false() {
        let s = ElementSet::full(3);
        assert!(!s.contains(3));
    }

    fn arb_pair() -> impl Strategy<Value = (usize, Vec<usize>, Vec<usize>)> {
        (1usize..200).prop_flat_map(|n| {
            (
                Just(n),
                proptest::collection::vec(0..n, 0..60),
                proptest::collection::vec(0..n, 0..60),
            )
        })
    }

    proptest! {
        #[test]
        fn matches_btreeset_model((n, a, b) in arb_pair()) {
            let sa = ElementSet::from_elements(n, a.iter().copied());
            let sb = ElementSet::from_elements(n, b.iter().copied());
            let ma: BTreeSet<usize> = a.into_iter().collect();
            let mb: BTreeSet<usize> = b.into_iter().collect();

            prop_assert_eq!(sa.cardinality(), ma.len());
            prop_assert_eq!(sa.to_vec(), ma.iter().copied().collect::<Vec<_>>());
            prop_assert_eq!(sa.difference_count(&sb), ma.difference(&mb).count());
            prop_assert_eq!(sa.intersection_count(&sb), ma.intersection(&mb).count());

            let mut u = sa.clone();
            u.union_with(&sb);
            let mut i = sa.clone();
            i.intersect_with(&sb);
            // inclusion-exclusion
            prop_assert_eq!(u.cardinality() + i.cardinality(), sa.cardinality() + sb.cardinality());
            prop_assert!(sa.is_subset(&u));
            prop_assert!(i.is_subset(&sa));

            let mut d = sa.clone();
            d.difference_with(&sb);
            prop_assert_eq!(d.cardinality(), sa.difference_count(&sb));
            let first = (0..n).find(|e| !ma.contains(e));
            prop_assert_eq!(sa.first_absent(), first);
        }
    }
}
