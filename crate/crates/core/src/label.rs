//! Label interning shared by logs and nets.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Interned activity label. Id 0 is the silent label τ.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct LabelId(pub u32);

impl LabelId {
    pub const TAU: LabelId = LabelId(0);

    #[inline]
    pub fn is_tau(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for LabelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Bijection between label strings and small integer ids.
///
/// The text used for τ is never handed out by [`Alphabet::intern`], so an
/// event literally named "tau" is an ordinary visible label.
#[derive(Clone, Debug)]
pub struct Alphabet {
    names: Vec<String>,
    index: BTreeMap<String, LabelId>,
}

impl Default for Alphabet {
    fn default() -> Self {
        Self::new()
    }
}

impl Alphabet {
    pub fn new() -> Self {
        Alphabet { names: alloc::vec!["τ".to_string()], index: BTreeMap::new() }
    }

    pub fn intern(&mut self, name: &str) -> LabelId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = LabelId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<LabelId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: LabelId) -> &str {
        self.names.get(id.index()).map(|s| s.as_str()).unwrap_or("?")
    }

    /// Number of ids handed out, τ included.
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.len() == 1
    }

    /// Visible labels in id order.
    pub fn visible(&self) -> impl Iterator<Item = LabelId> + '_ {
        (1..self.names.len() as u32).map(LabelId)
    }

    /// Rank of every id under lexicographic order of the label text; τ ranks first.
    pub fn ranks(&self) -> Vec<u32> {
        let mut ranks = alloc::vec![0u32; self.names.len()];
        for (rank, id) in self.index.values().enumerate() {
            ranks[id.index()] = rank as u32 + 1;
        }
        ranks
    }
}

/// Dense bitset over label ids.
#[derive(Clone, Default, PartialEq, Eq, Hash, Debug)]
pub struct LabelSet {
    words: Vec<u64>,
}

impl LabelSet {
    pub fn new() -> Self {
        LabelSet { words: Vec::new() }
    }

    pub fn insert(&mut self, l: LabelId) -> bool {
        let (w, b) = (l.index() / 64, l.index() % 64);
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        let had = self.words[w] & (1 << b) != 0;
        self.words[w] |= 1 << b;
        !had
    }

    #[inline]
    pub fn contains(&self, l: LabelId) -> bool {
        let (w, b) = (l.index() / 64, l.index() % 64);
        self.words.get(w).is_some_and(|x| x & (1 << b) != 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = LabelId> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            (0..64).filter(move |b| w & (1u64 << b) != 0).map(move |b| LabelId((i * 64 + b) as u32))
        })
    }
}

impl FromIterator<LabelId> for LabelSet {
    fn from_iter<I: IntoIterator<Item = LabelId>>(iter: I) -> Self {
        let mut s = LabelSet::new();
        for l in iter {
            s.insert(l);
        }
        s
    }
}
