use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

const WORD: usize = 64;

/// A non-empty set of value indices drawn from a domain of known size.
///
/// Bits are stored inline for domains of up to 128 values, so subset and
/// intersection tests are a couple of word operations in the common case.
/// Ordering is lexicographic on the ascending member sequence, which is the
/// domain's declaration order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ValueSet {
    words: SmallVec<[u64; 2]>,
    domain: u32,
}

impl ValueSet {
    fn blank(domain: usize) -> Self {
        assert!(domain > 0, "domains are non-empty");
        ValueSet { words: SmallVec::from_elem(0, domain.div_ceil(WORD)), domain: domain as u32 }
    }

    pub fn full(domain: usize) -> Self {
        let mut s = Self::blank(domain);
        for i in 0..domain {
            s.words[i / WORD] |= 1 << (i % WORD);
        }
        s
    }

    pub fn singleton(domain: usize, value: usize) -> Self {
        assert!(value < domain, "value {value} outside domain of size {domain}");
        let mut s = Self::blank(domain);
        s.words[value / WORD] |= 1 << (value % WORD);
        s
    }

    /// Builds a set from member indices. Returns `None` when the list is empty.
    pub fn from_indices<I: IntoIterator<Item = usize>>(domain: usize, members: I) -> Option<Self> {
        let mut s = Self::blank(domain);
        for i in members {
            assert!(i < domain, "value {i} outside domain of size {domain}");
            s.words[i / WORD] |= 1 << (i % WORD);
        }
        (!s.is_empty_bits()).then_some(s)
    }

    fn is_empty_bits(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn domain_size(&self) -> usize {
        self.domain as usize
    }

    // Sets are never empty once constructed, so there is no `is_empty`.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.domain_size()
    }

    pub fn is_singleton(&self) -> bool {
        self.len() == 1
    }

    pub fn contains(&self, value: usize) -> bool {
        value < self.domain_size() && self.words[value / WORD] & (1 << (value % WORD)) != 0
    }

    pub fn is_subset(&self, other: &ValueSet) -> bool {
        debug_assert_eq!(self.domain, other.domain);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_strict_subset(&self, other: &ValueSet) -> bool {
        self.is_subset(other) && self != other
    }

    pub fn is_disjoint(&self, other: &ValueSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    /// Intersection, or `None` when it is empty.
    pub fn intersect(&self, other: &ValueSet) -> Option<ValueSet> {
        debug_assert_eq!(self.domain, other.domain);
        let words: SmallVec<[u64; 2]> = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        let s = ValueSet { words, domain: self.domain };
        (!s.is_empty_bits()).then_some(s)
    }

    /// Smallest member.
    pub fn first(&self) -> usize {
        self.iter().next().expect("value sets are non-empty")
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(wi * WORD + tz)
            })
        })
    }

    /// All non-empty subsets, in increasing order of their bitmask over the
    /// members. Callers bound the member count; this panics above 63 members.
    pub fn non_empty_subsets(&self) -> impl Iterator<Item = ValueSet> + '_ {
        let members: Vec<usize> = self.iter().collect();
        assert!(members.len() < 64, "too many members to enumerate subsets");
        let domain = self.domain_size();
        (1u64..(1u64 << members.len())).map(move |mask| {
            let picked = members.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, &m)| m);
            ValueSet::from_indices(domain, picked).expect("mask is non-zero")
        })
    }

    /// Number of non-empty subsets, saturating.
    pub fn subset_count(&self) -> u128 {
        let n = self.len() as u32;
        if n >= 127 {
            u128::MAX
        } else {
            (1u128 << n) - 1
        }
    }
}

impl Ord for ValueSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.domain.cmp(&other.domain).then_with(|| self.iter().cmp(other.iter()))
    }
}

impl PartialOrd for ValueSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for ValueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
