use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::net::PlaceId;

/// Set of marked places of a 1-bounded net.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Marking {
    words: Box<[u64]>,
}

impl Marking {
    pub fn empty(places: usize) -> Self {
        Marking { words: alloc::vec![0u64; places.div_ceil(64).max(1)].into_boxed_slice() }
    }

    pub fn from_places(places: usize, marked: &[PlaceId]) -> Self {
        let mut m = Self::empty(places);
        for &p in marked {
            m.insert(p);
        }
        m
    }

    #[inline]
    pub fn contains(&self, p: PlaceId) -> bool {
        self.words[p as usize / 64] & (1 << (p % 64)) != 0
    }

    #[inline]
    pub fn insert(&mut self, p: PlaceId) -> bool {
        let had = self.contains(p);
        self.words[p as usize / 64] |= 1 << (p % 64);
        !had
    }

    #[inline]
    pub fn remove(&mut self, p: PlaceId) -> bool {
        let had = self.contains(p);
        self.words[p as usize / 64] &= !(1 << (p % 64));
        had
    }

    pub fn places(&self) -> impl Iterator<Item = PlaceId> + '_ {
        self.words
            .iter()
            .enumerate()
            .flat_map(|(i, &w)| (0..64u32).filter(move |b| w & (1u64 << b) != 0).map(move |b| i as u32 * 64 + b))
    }

    pub fn token_count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Token vector over `places` entries.
    pub fn to_vector(&self, places: usize) -> Vec<i64> {
        (0..places as u32).map(|p| self.contains(p) as i64).collect()
    }
}
