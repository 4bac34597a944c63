//! Minimal deterministic acyclic automaton over the distinct traces of a log.
//!
//! Built with the sorted-input incremental construction: words are inserted in
//! lexicographic order and the previous word's fresh suffix is minimized
//! bottom-up against a register of already-minimal states.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec::Vec;

use hashbrown::HashMap;
use rustc_hash::FxBuildHasher;

use crate::label::LabelId;
use crate::log::EventLog;

pub type StateId = u32;
pub type DafsaArcId = u32;

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub struct DafsaArc {
    pub source: StateId,
    pub label: LabelId,
    pub target: StateId,
}

#[derive(Clone, Debug)]
pub struct Dafsa {
    arcs: Vec<DafsaArc>,
    out: Vec<Vec<DafsaArcId>>,
    inc: Vec<Vec<DafsaArcId>>,
    finals: Vec<bool>,
}

/// The unique path of one word through the automaton.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TracePath {
    /// `states[i]` is reached after consuming `i` labels.
    pub states: Vec<StateId>,
    pub arcs: Vec<DafsaArcId>,
}

pub fn build_dafsa(log: &EventLog) -> Dafsa {
    Dafsa::from_words(log.traces().iter().map(|t| t.labels.as_slice()))
}

type Signature = (bool, Vec<(LabelId, u32)>);

impl Dafsa {
    pub fn from_words<'a, I>(words: I) -> Dafsa
    where
        I: IntoIterator<Item = &'a [LabelId]>,
    {
        let mut words: Vec<&[LabelId]> = words.into_iter().collect();
        words.sort_unstable();
        words.dedup();

        let mut edges: Vec<Vec<(LabelId, u32)>> = alloc::vec![Vec::new()];
        let mut fin: Vec<bool> = alloc::vec![false];
        let mut register: HashMap<Signature, u32, FxBuildHasher> = HashMap::default();
        let mut path: Vec<u32> = alloc::vec![0];
        let mut prev: &[LabelId] = &[];

        fn minimize(
            edges: &mut [Vec<(LabelId, u32)>],
            fin: &[bool],
            register: &mut HashMap<Signature, u32, FxBuildHasher>,
            path: &[u32],
            down_to: usize,
        ) {
            for i in (down_to..path.len() - 1).rev() {
                let (parent, child) = (path[i] as usize, path[i + 1]);
                let sig = (fin[child as usize], edges[child as usize].clone());
                match register.get(&sig) {
                    Some(&q) if q != child => {
                        edges[parent].last_mut().expect("parent has an edge").1 = q;
                    }
                    _ => {
                        register.insert(sig, child);
                    }
                }
            }
        }

        for (n, w) in words.iter().enumerate() {
            let k = if n == 0 { 0 } else { prev.iter().zip(w.iter()).take_while(|(a, b)| a == b).count() };
            minimize(&mut edges, &fin, &mut register, &path, k);
            path.truncate(k + 1);
            for &l in &w[k..] {
                let s = edges.len() as u32;
                edges.push(Vec::new());
                fin.push(false);
                edges[*path.last().unwrap() as usize].push((l, s));
                path.push(s);
            }
            fin[*path.last().unwrap() as usize] = true;
            prev = w;
        }
        minimize(&mut edges, &fin, &mut register, &path, 0);

        // Renumber reachable states breadth-first.
        let mut id = alloc::vec![u32::MAX; edges.len()];
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        id[0] = 0;
        order.push(0u32);
        queue.push_back(0u32);
        while let Some(s) = queue.pop_front() {
            for &(_, t) in &edges[s as usize] {
                if id[t as usize] == u32::MAX {
                    id[t as usize] = order.len() as u32;
                    order.push(t);
                    queue.push_back(t);
                }
            }
        }
        let n = order.len();
        let mut d = Dafsa {
            arcs: Vec::new(),
            out: alloc::vec![Vec::new(); n],
            inc: alloc::vec![Vec::new(); n],
            finals: order.iter().map(|&s| fin[s as usize]).collect(),
        };
        for &s in &order {
            for &(l, t) in &edges[s as usize] {
                let a = d.arcs.len() as u32;
                let (src, tgt) = (id[s as usize], id[t as usize]);
                d.arcs.push(DafsaArc { source: src, label: l, target: tgt });
                d.out[src as usize].push(a);
                d.inc[tgt as usize].push(a);
            }
        }
        d
    }

    pub fn initial(&self) -> StateId {
        0
    }

    pub fn num_states(&self) -> usize {
        self.finals.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn arcs(&self) -> &[DafsaArc] {
        &self.arcs
    }

    pub fn arc(&self, a: DafsaArcId) -> &DafsaArc {
        &self.arcs[a as usize]
    }

    /// Outgoing arcs, sorted by label.
    pub fn out_arcs(&self, s: StateId) -> &[DafsaArcId] {
        &self.out[s as usize]
    }

    pub fn in_arcs(&self, s: StateId) -> &[DafsaArcId] {
        &self.inc[s as usize]
    }

    pub fn out_degree(&self, s: StateId) -> usize {
        self.out[s as usize].len()
    }

    pub fn in_degree(&self, s: StateId) -> usize {
        self.inc[s as usize].len()
    }

    pub fn is_final(&self, s: StateId) -> bool {
        self.finals[s as usize]
    }

    pub fn finals(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.finals.len() as u32).filter(|&s| self.finals[s as usize])
    }

    pub fn step(&self, s: StateId, l: LabelId) -> Option<DafsaArcId> {
        let out = &self.out[s as usize];
        out.binary_search_by_key(&l, |&a| self.arcs[a as usize].label).ok().map(|i| out[i])
    }

    /// Path spelled by `word`, if it is in the language.
    pub fn path(&self, word: &[LabelId]) -> Option<TracePath> {
        let mut s = self.initial();
        let mut states = alloc::vec![s];
        let mut arcs = Vec::with_capacity(word.len());
        for &l in word {
            let a = self.step(s, l)?;
            s = self.arcs[a as usize].target;
            arcs.push(a);
            states.push(s);
        }
        self.is_final(s).then_some(TracePath { states, arcs })
    }

    /// Every initial-to-final word, sorted.
    pub fn language(&self) -> Vec<Vec<LabelId>> {
        let mut out = Vec::new();
        let mut word = Vec::new();
        self.collect_words(self.initial(), &mut word, &mut out);
        out.sort();
        out
    }

    fn collect_words(&self, s: StateId, word: &mut Vec<LabelId>, out: &mut Vec<Vec<LabelId>>) {
        if self.is_final(s) {
            out.push(word.clone());
        }
        for &a in &self.out[s as usize] {
            let arc = self.arcs[a as usize];
            word.push(arc.label);
            self.collect_words(arc.target, word, out);
            word.pop();
        }
    }

    /// All words leading from the initial state to `s`.
    pub fn prefixes_of(&self, s: StateId) -> BTreeSet<Vec<LabelId>> {
        let mut out = BTreeSet::new();
        let mut word = Vec::new();
        self.collect_back(s, &mut word, &mut out);
        out
    }

    fn collect_back(&self, s: StateId, word: &mut Vec<LabelId>, out: &mut BTreeSet<Vec<LabelId>>) {
        if s == self.initial() {
            out.insert(word.iter().rev().copied().collect());
        }
        for &a in &self.inc[s as usize] {
            let arc = self.arcs[a as usize];
            word.push(arc.label);
            self.collect_back(arc.source, word, out);
            word.pop();
        }
    }

    /// All words leading from `s` to a final state.
    pub fn suffixes_of(&self, s: StateId) -> BTreeSet<Vec<LabelId>> {
        let mut v = Vec::new();
        self.collect_words(s, &mut Vec::new(), &mut v);
        v.into_iter().collect()
    }

    /// Prefixes of branching states and suffixes of merging states; the
    /// empty word is left out of both.
    pub fn common_affixes(&self) -> (BTreeSet<Vec<LabelId>>, BTreeSet<Vec<LabelId>>) {
        let mut pre = BTreeSet::new();
        let mut suf = BTreeSet::new();
        for s in 0..self.num_states() as u32 {
            if self.out_degree(s) > 1 {
                pre.extend(self.prefixes_of(s));
            }
            if self.in_degree(s) > 1 {
                suf.extend(self.suffixes_of(s));
            }
        }
        pre.remove(&Vec::new());
        suf.remove(&Vec::new());
        (pre, suf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::Alphabet;
    use alloc::collections::BTreeMap;

    fn words(a: &mut Alphabet, ws: &[&str]) -> Vec<Vec<LabelId>> {
        ws.iter().map(|w| w.chars().map(|c| a.intern(c.encode_utf8(&mut [0; 4]))).collect()).collect()
    }

    fn build(ws: &[Vec<LabelId>]) -> Dafsa {
        Dafsa::from_words(ws.iter().map(|w| w.as_slice()))
    }

    /// Minimal automaton size via the trie with states merged by right language.
    fn brute_force_minimal(ws: &[Vec<LabelId>]) -> (usize, usize) {
        let mut prefixes: BTreeSet<Vec<LabelId>> = BTreeSet::new();
        for w in ws {
            for i in 0..=w.len() {
                prefixes.insert(w[..i].to_vec());
            }
        }
        let lang: BTreeSet<&Vec<LabelId>> = ws.iter().collect();
        let right = |p: &Vec<LabelId>| -> BTreeSet<Vec<LabelId>> {
            lang.iter().filter(|w| w.starts_with(p)).map(|w| w[p.len()..].to_vec()).collect()
        };
        let mut classes: BTreeMap<BTreeSet<Vec<LabelId>>, ()> = BTreeMap::new();
        let mut arcs: BTreeSet<(BTreeSet<Vec<LabelId>>, LabelId)> = BTreeSet::new();
        for p in &prefixes {
            let r = right(p);
            if !p.is_empty() {
                arcs.insert((right(&p[..p.len() - 1].to_vec()), p[p.len() - 1]));
            }
            classes.insert(r, ());
        }
        (classes.len(), arcs.len())
    }

    fn running(a: &mut Alphabet) -> Vec<Vec<LabelId>> {
        words(a, &["BDCEG", "BDAEFG", "CABEEG", "CABEHIEFG"])
    }

    #[test]
    fn running_example_is_minimal() {
        let mut a = Alphabet::new();
        let ws = running(&mut a);
        let d = build(&ws);
        let mut sorted = ws.clone();
        sorted.sort();
        assert_eq!(d.language(), sorted);
        let (states, arcs) = brute_force_minimal(&ws);
        assert_eq!((d.num_states(), d.num_arcs()), (states, arcs));
        assert_eq!((states, arcs), (13, 15));
    }

    #[test]
    fn running_example_anchors() {
        let mut a = Alphabet::new();
        let ws = running(&mut a);
        let d = build(&ws);
        let (pre, suf) = d.common_affixes();
        assert_eq!(pre, words(&mut a, &["BD", "CABE"]).into_iter().collect());
        let branching = (1..d.num_states() as u32).filter(|&s| d.out_degree(s) > 1).count();
        let merging = (0..d.num_states() as u32).filter(|&s| d.in_degree(s) > 1).count();
        assert_eq!((branching, merging), (2, 2));
        assert_eq!(suf, words(&mut a, &["G", "EFG"]).into_iter().collect());
    }

    #[test]
    fn shared_suffix_pair() {
        let mut a = Alphabet::new();
        let ws = words(&mut a, &["AC", "BC"]);
        let d = build(&ws);
        assert_eq!((d.num_states(), d.num_arcs()), brute_force_minimal(&ws));
        assert_eq!((d.num_states(), d.num_arcs()), (3, 3));
    }

    #[test]
    fn shared_prefix_pair() {
        let mut a = Alphabet::new();
        let ws = words(&mut a, &["AC", "AD"]);
        let (pre, suf) = build(&ws).common_affixes();
        assert_eq!(pre, words(&mut a, &["A"]).into_iter().collect());
        assert!(suf.is_empty());
    }

    #[test]
    fn chain_and_edge_cases() {
        let mut a = Alphabet::new();
        let d = build(&words(&mut a, &["AB"]));
        assert_eq!((d.num_states(), d.num_arcs()), (3, 2));
        let (pre, suf) = d.common_affixes();
        assert!(pre.is_empty() && suf.is_empty());

        let d = build(&[]);
        assert_eq!(d.num_arcs(), 0);
        assert!(d.language().is_empty());

        let ws = words(&mut a, &["A", "AB"]);
        let d = build(&ws);
        assert_eq!(d.language(), ws);
        assert!(d.path(&ws[0]).is_some());
        assert!(d.path(&ws[1][1..]).is_none());

        let d = build(&[Vec::new()]);
        assert_eq!(d.language(), alloc::vec![Vec::<LabelId>::new()]);
    }

    #[test]
    fn pseudo_random_logs_minimal() {
        let mut seed = 0x2545_f491_4f6c_dd1du64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for _ in 0..200 {
            let n = (next() % 6) as usize;
            let ws: Vec<Vec<LabelId>> =
                (0..n).map(|_| (0..next() % 5).map(|_| LabelId(1 + (next() % 3) as u32)).collect()).collect();
            let d = build(&ws);
            let mut lang: Vec<_> = ws.clone();
            lang.sort();
            lang.dedup();
            assert_eq!(d.language(), lang);
            if !ws.is_empty() {
                assert_eq!((d.num_states(), d.num_arcs()), brute_force_minimal(&ws));
            }
            let events: usize = lang.iter().map(|w| w.len()).sum();
            assert!(d.num_arcs() <= events);
            for s in 0..d.num_states() as u32 {
                let labels: Vec<_> = d.out_arcs(s).iter().map(|&x| d.arc(x).label).collect();
                assert!(labels.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }
}
