//! Prefix and suffix tables shared between the searches of one log.

use alloc::sync::Arc;
use alloc::vec::Vec;

use hashbrown::HashMap;
use rustc_hash::FxBuildHasher;

use super::search::{Mode, Rec};
use super::Move;
use crate::dafsa::StateId;
use crate::label::LabelId;
use crate::rg::MarkingId;

/// Search records with trace position at most the prefix length.
#[derive(Clone, Debug)]
pub(crate) struct PrefixSnapshot {
    pub(crate) recs: Vec<Rec>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Completion {
    pub moves: Arc<[Move]>,
    pub cost: u32,
    pub final_marking: MarkingId,
}

/// Optimal completions from one (DAFSA state, marking) pair for one
/// remaining suffix.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SuffixEntry {
    pub suffix: Vec<LabelId>,
    pub completions: Vec<Completion>,
}

/// What one trace's search adds to the tables.
#[derive(Clone, Debug, Default)]
pub struct MemoContribution {
    pub(crate) prefixes: Vec<(Vec<LabelId>, Arc<PrefixSnapshot>)>,
    pub(crate) suffixes: Vec<((StateId, MarkingId), SuffixEntry)>,
}

impl MemoContribution {
    pub fn is_empty(&self) -> bool {
        self.prefixes.is_empty() && self.suffixes.is_empty()
    }

    pub fn prefix_count(&self) -> usize {
        self.prefixes.len()
    }

    pub fn suffix_count(&self) -> usize {
        self.suffixes.len()
    }
}

/// Tables are read-only during a search; contributions are merged in a
/// fixed trace order so results do not depend on scheduling.
#[derive(Clone, Debug)]
pub struct MemoTables {
    mode: Mode,
    prefixes: HashMap<Vec<LabelId>, Arc<PrefixSnapshot>, FxBuildHasher>,
    suffixes: HashMap<(StateId, MarkingId), Vec<SuffixEntry>, FxBuildHasher>,
}

impl MemoTables {
    pub fn new(mode: Mode) -> Self {
        MemoTables { mode, prefixes: HashMap::default(), suffixes: HashMap::default() }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Insert-if-absent: the first contribution for a key wins.
    pub fn merge(&mut self, c: MemoContribution) {
        for (k, snap) in c.prefixes {
            self.prefixes.entry(k).or_insert(snap);
        }
        for (k, e) in c.suffixes {
            let v = self.suffixes.entry(k).or_default();
            if !v.iter().any(|x| x.suffix == e.suffix) {
                v.push(e);
            }
        }
    }

    pub(crate) fn prefix(&self, prefix: &[LabelId]) -> Option<&Arc<PrefixSnapshot>> {
        self.prefixes.get(prefix)
    }

    pub fn has_prefix(&self, prefix: &[LabelId]) -> bool {
        self.prefixes.contains_key(prefix)
    }

    pub fn suffix(&self, s: StateId, m: MarkingId, suffix: &[LabelId]) -> Option<&SuffixEntry> {
        self.suffixes.get(&(s, m))?.iter().find(|e| e.suffix == suffix)
    }

    pub fn prefix_count(&self) -> usize {
        self.prefixes.len()
    }

    pub fn suffix_count(&self) -> usize {
        self.suffixes.values().map(Vec::len).sum()
    }
}
