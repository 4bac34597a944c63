//! Future-label multisets per marking and the resulting estimate of the
//! remaining alignment cost.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::label::LabelId;
use crate::rg::{MarkingId, ReachabilityGraph};

/// Sets larger than this collapse into one lower-bound element.
pub const DEFAULT_FUTURE_CAP: usize = 64;

/// Label counts along some path to a final marking. Labels in `omega` may
/// repeat without bound and are absent from `counts`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct FutureMultiset {
    pub counts: Vec<(LabelId, u32)>,
    pub omega: Vec<LabelId>,
}

impl FutureMultiset {
    fn with_label(&self, l: LabelId) -> Self {
        let mut f = self.clone();
        if f.omega.binary_search(&l).is_ok() {
            return f;
        }
        match f.counts.binary_search_by_key(&l, |&(x, _)| x) {
            Ok(i) => f.counts[i].1 += 1,
            Err(i) => f.counts.insert(i, (l, 1)),
        }
        f
    }

    fn with_omega(mut self, w: &[LabelId]) -> Self {
        if w.is_empty() {
            return self;
        }
        self.counts.retain(|(l, _)| w.binary_search(l).is_err());
        self.omega.extend_from_slice(w);
        self.omega.sort_unstable();
        self.omega.dedup();
        self
    }

    pub fn count(&self, l: LabelId) -> Option<u32> {
        if self.omega.binary_search(&l).is_ok() {
            return None;
        }
        Some(self.counts.binary_search_by_key(&l, |&(x, _)| x).map(|i| self.counts[i].1).unwrap_or(0))
    }
}

/// Keeps the counts all elements agree on and turns every other label into ω,
/// which never raises the estimate above that of any element.
fn collapse(set: &BTreeSet<FutureMultiset>) -> FutureMultiset {
    let mut labels: BTreeSet<LabelId> = BTreeSet::new();
    for f in set {
        labels.extend(f.counts.iter().map(|&(l, _)| l));
        labels.extend(f.omega.iter().copied());
    }
    let mut out = FutureMultiset::default();
    for l in labels {
        let mut it = set.iter().map(|f| f.count(l));
        let first = it.next().flatten();
        match first {
            Some(c) if it.all(|x| x == first) => {
                if c != 0 {
                    out.counts.push((l, c));
                }
            }
            _ => out.omega.push(l),
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct FutureLabelTable {
    scc_of: Vec<u32>,
    sets: Vec<Vec<FutureMultiset>>,
}

impl FutureLabelTable {
    pub fn build(rg: &ReachabilityGraph, cap: usize) -> Self {
        let (scc_of, sccs) = tarjan(rg);
        let mut sets: Vec<Vec<FutureMultiset>> = alloc::vec![Vec::new(); sccs.len()];
        // Tarjan emits components sinks first.
        for (k, members) in sccs.iter().enumerate() {
            let mut internal: Vec<LabelId> = Vec::new();
            for &u in members {
                for &a in rg.out_arcs(u) {
                    let arc = rg.arc(a);
                    if scc_of[arc.target as usize] == k as u32 {
                        internal.push(arc.label.visible);
                    }
                }
            }
            internal.sort_unstable();
            internal.dedup();
            let mut set = BTreeSet::new();
            if members.iter().any(|&u| rg.is_final(u)) {
                set.insert(FutureMultiset::default().with_omega(&internal));
            }
            for &u in members {
                for &a in rg.out_arcs(u) {
                    let arc = rg.arc(a);
                    let k2 = scc_of[arc.target as usize] as usize;
                    if k2 == k {
                        continue;
                    }
                    for f in &sets[k2] {
                        set.insert(f.with_label(arc.label.visible).with_omega(&internal));
                    }
                }
            }
            sets[k] = if set.len() > cap { alloc::vec![collapse(&set)] } else { set.into_iter().collect() };
        }
        FutureLabelTable { scc_of, sets }
    }

    /// Empty when no final marking is reachable from `m`.
    pub fn of(&self, m: MarkingId) -> &[FutureMultiset] {
        &self.sets[self.scc_of[m as usize] as usize]
    }

    pub fn is_dead(&self, m: MarkingId) -> bool {
        self.of(m).is_empty()
    }

    /// min over f of |L \ f| + |f \ L|, with ω labels contributing nothing.
    pub fn estimate(&self, m: MarkingId, counts: &TraceCounts, pos: usize) -> Option<u32> {
        let remaining = (counts.len - pos) as u32;
        self.of(m)
            .iter()
            .map(|f| {
                let mut h = remaining;
                for &l in &f.omega {
                    h -= counts.remaining(l, pos);
                }
                for &(l, c) in &f.counts {
                    let have = counts.remaining(l, pos);
                    h = h - have + have.abs_diff(c);
                }
                h
            })
            .min()
    }
}

/// Occurrence positions per label, for counting labels in trace suffixes.
#[derive(Clone, Debug)]
pub struct TraceCounts {
    len: usize,
    positions: Vec<Vec<u32>>,
}

impl TraceCounts {
    pub fn new(trace: &[LabelId]) -> Self {
        let max = trace.iter().map(|l| l.index()).max().map_or(0, |m| m + 1);
        let mut positions = alloc::vec![Vec::new(); max];
        for (i, l) in trace.iter().enumerate() {
            positions[l.index()].push(i as u32);
        }
        TraceCounts { len: trace.len(), positions }
    }

    /// Occurrences of `l` at index `pos` or later.
    #[inline]
    pub fn remaining(&self, l: LabelId, pos: usize) -> u32 {
        match self.positions.get(l.index()) {
            None => 0,
            Some(p) => (p.len() - p.partition_point(|&x| (x as usize) < pos)) as u32,
        }
    }
}

/// Strongly connected components, each listed once, sinks first.
fn tarjan(rg: &ReachabilityGraph) -> (Vec<u32>, Vec<Vec<MarkingId>>) {
    let n = rg.num_markings();
    const UNSEEN: u32 = u32::MAX;
    let mut index = alloc::vec![UNSEEN; n];
    let mut low = alloc::vec![0u32; n];
    let mut on_stack = alloc::vec![false; n];
    let mut scc_of = alloc::vec![UNSEEN; n];
    let mut stack: Vec<MarkingId> = Vec::new();
    let mut sccs: Vec<Vec<MarkingId>> = Vec::new();
    let mut next = 0u32;
    let mut call: Vec<(MarkingId, usize)> = Vec::new();
    for root in 0..n as MarkingId {
        if index[root as usize] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root as usize] = next;
        low[root as usize] = next;
        next += 1;
        stack.push(root);
        on_stack[root as usize] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            let outs = rg.out_arcs(v);
            if *i < outs.len() {
                let w = rg.arc(outs[*i]).target;
                *i += 1;
                if index[w as usize] == UNSEEN {
                    index[w as usize] = next;
                    low[w as usize] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w as usize] = true;
                    call.push((w, 0));
                } else if on_stack[w as usize] {
                    low[v as usize] = low[v as usize].min(index[w as usize]);
                }
                continue;
            }
            call.pop();
            if let Some(&(u, _)) = call.last() {
                low[u as usize] = low[u as usize].min(low[v as usize]);
            }
            if low[v as usize] == index[v as usize] {
                let k = sccs.len() as u32;
                let mut members = Vec::new();
                loop {
                    let w = stack.pop().unwrap();
                    on_stack[w as usize] = false;
                    scc_of[w as usize] = k;
                    members.push(w);
                    if w == v {
                        break;
                    }
                }
                members.sort_unstable();
                sccs.push(members);
            }
        }
    }
    (scc_of, sccs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::Alphabet;
    use crate::marking::Marking;
    use crate::rg::{build_rg, remove_tau, ArcLabel, RgArc, DEFAULT_MARKING_CAP};
    use crate::samples::{self, word};

    fn running() -> (Alphabet, crate::net::SystemNet, ReachabilityGraph) {
        let mut a = Alphabet::new();
        let net = samples::running_example(&mut a);
        let rg = remove_tau(&build_rg(&net, DEFAULT_MARKING_CAP).unwrap()).unwrap();
        (a, net, rg)
    }

    #[test]
    fn finals_hold_the_empty_multiset() {
        let (_, _, rg) = running();
        let t = FutureLabelTable::build(&rg, DEFAULT_FUTURE_CAP);
        for &f in rg.finals() {
            assert!(t.of(f).contains(&FutureMultiset::default()));
        }
        let counts = TraceCounts::new(&[]);
        assert_eq!(t.estimate(rg.finals()[0], &counts, 0), Some(0));
    }

    #[test]
    fn estimates_after_first_step() {
        let (mut a, net, rg) = running();
        let t = FutureLabelTable::build(&rg, DEFAULT_FUTURE_CAP);
        let trace = word(&mut a, "BDCEG");
        let counts = TraceCounts::new(&trace);
        // After m(B): the marking with B done, remaining ⟨D,C,E,G⟩.
        let after_b = rg.find(&net.marking(&["p1", "p6", "p3", "p4"]).unwrap()).unwrap();
        assert_eq!(t.estimate(after_b, &counts, 1), Some(1));
        // After r(B): same marking, nothing consumed, g = 1 and h = 2.
        assert_eq!(t.estimate(after_b, &counts, 0), Some(2));
        assert_eq!(t.estimate(rg.initial(), &counts, 0), Some(1));
    }

    #[test]
    fn loop_label_is_unbounded() {
        // Two markings, A loops on the first, B leaves to the final one.
        let m = |p: u32| Marking::from_places(2, &[p]);
        let arcs = alloc::vec![
            RgArc { source: 0, label: ArcLabel::plain(LabelId(1)), target: 0, transition: None },
            RgArc { source: 0, label: ArcLabel::plain(LabelId(2)), target: 1, transition: None },
        ];
        let rg = ReachabilityGraph::from_parts(alloc::vec![m(0), m(1)], arcs, 0, &[1]);
        let t = FutureLabelTable::build(&rg, DEFAULT_FUTURE_CAP);
        assert_eq!(t.of(0), &[FutureMultiset { counts: alloc::vec![(LabelId(2), 1)], omega: alloc::vec![LabelId(1)] }]);
        let trace = [LabelId(1), LabelId(1), LabelId(1), LabelId(2)];
        assert_eq!(t.estimate(0, &TraceCounts::new(&trace), 0), Some(0));
    }

    #[test]
    fn collapse_is_a_lower_bound() {
        let (mut a, _, rg) = running();
        let full = FutureLabelTable::build(&rg, usize::MAX);
        let tiny = FutureLabelTable::build(&rg, 1);
        for t in ["BDCEG", "CABEHIEFG", "", "FFFF", "ABCDEFGHI"] {
            let trace = word(&mut a, t);
            let counts = TraceCounts::new(&trace);
            for m in 0..rg.num_markings() as MarkingId {
                for pos in 0..=trace.len() {
                    assert!(tiny.estimate(m, &counts, pos) <= full.estimate(m, &counts, pos));
                }
            }
        }
    }
}
