//! Reachability graphs and removal of silent arcs.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use hashbrown::HashMap;
use rustc_hash::FxBuildHasher;

use crate::label::LabelId;
use crate::marking::Marking;
use crate::net::{NetError, SystemNet, TransitionId};

pub type MarkingId = u32;
pub type RgArcId = u32;

pub const DEFAULT_MARKING_CAP: usize = 5_000_000;

/// Arc label; `tau_trail` lists the origins of removed silent transitions
/// in extended mode and is empty otherwise.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ArcLabel {
    pub visible: LabelId,
    pub tau_trail: Vec<TransitionId>,
}

impl ArcLabel {
    pub fn plain(visible: LabelId) -> Self {
        ArcLabel { visible, tau_trail: Vec::new() }
    }

    fn joined(visible: LabelId, a: &[TransitionId], b: &[TransitionId]) -> Self {
        let mut tau_trail = Vec::with_capacity(a.len() + b.len());
        tau_trail.extend_from_slice(a);
        tau_trail.extend_from_slice(b);
        ArcLabel { visible, tau_trail }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RgArc {
    pub source: MarkingId,
    pub label: ArcLabel,
    pub target: MarkingId,
    /// Fired transition, for graphs straight out of [`build_rg`].
    pub transition: Option<TransitionId>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum RgError {
    NotOneBounded {
        transition: String,
        place: String,
    },
    Explosion {
        cap: usize,
    },
    /// A silent region offers no visible way out.
    Reduction {
        marking: MarkingId,
    },
}

impl fmt::Display for RgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RgError::NotOneBounded { transition, place } => {
                write!(f, "net is not 1-bounded: firing {transition} puts a second token on {place}")
            }
            RgError::Explosion { cap } => write!(f, "reachability graph exceeds {cap} markings"),
            RgError::Reduction { marking } => {
                write!(f, "silent transitions from marking {marking} never reach a visible step or final marking")
            }
        }
    }
}

impl core::error::Error for RgError {}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ReachabilityGraph {
    markings: Vec<Marking>,
    arcs: Vec<RgArc>,
    out: Vec<Vec<RgArcId>>,
    inc: Vec<Vec<RgArcId>>,
    initial: MarkingId,
    finals: Vec<MarkingId>,
    is_final: Vec<bool>,
}

impl ReachabilityGraph {
    pub fn from_parts(markings: Vec<Marking>, arcs: Vec<RgArc>, initial: MarkingId, finals: &[MarkingId]) -> Self {
        let n = markings.len();
        let mut out = alloc::vec![Vec::new(); n];
        let mut inc = alloc::vec![Vec::new(); n];
        for (i, a) in arcs.iter().enumerate() {
            out[a.source as usize].push(i as RgArcId);
            inc[a.target as usize].push(i as RgArcId);
        }
        let mut is_final = alloc::vec![false; n];
        for &f in finals {
            is_final[f as usize] = true;
        }
        let finals = (0..n as MarkingId).filter(|&m| is_final[m as usize]).collect();
        ReachabilityGraph { markings, arcs, out, inc, initial, finals, is_final }
    }

    pub fn num_markings(&self) -> usize {
        self.markings.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    /// Nodes plus arcs.
    pub fn size(&self) -> usize {
        self.markings.len() + self.arcs.len()
    }

    pub fn markings(&self) -> &[Marking] {
        &self.markings
    }

    pub fn marking(&self, m: MarkingId) -> &Marking {
        &self.markings[m as usize]
    }

    pub fn find(&self, m: &Marking) -> Option<MarkingId> {
        self.markings.iter().position(|x| x == m).map(|i| i as MarkingId)
    }

    pub fn arcs(&self) -> &[RgArc] {
        &self.arcs
    }

    #[inline]
    pub fn arc(&self, a: RgArcId) -> &RgArc {
        &self.arcs[a as usize]
    }

    #[inline]
    pub fn out_arcs(&self, m: MarkingId) -> &[RgArcId] {
        &self.out[m as usize]
    }

    #[inline]
    pub fn in_arcs(&self, m: MarkingId) -> &[RgArcId] {
        &self.inc[m as usize]
    }

    pub fn initial(&self) -> MarkingId {
        self.initial
    }

    pub fn finals(&self) -> &[MarkingId] {
        &self.finals
    }

    #[inline]
    pub fn is_final(&self, m: MarkingId) -> bool {
        self.is_final[m as usize]
    }

    pub fn tau_arc_count(&self) -> usize {
        self.arcs.iter().filter(|a| a.label.visible.is_tau()).count()
    }

    /// Fewest arcs on any path from the initial marking to a final one.
    pub fn shortest_to_final(&self) -> Option<u32> {
        let mut dist = alloc::vec![u32::MAX; self.markings.len()];
        let mut queue = VecDeque::from([self.initial]);
        dist[self.initial as usize] = 0;
        while let Some(m) = queue.pop_front() {
            if self.is_final(m) {
                return Some(dist[m as usize]);
            }
            for &a in self.out_arcs(m) {
                let t = self.arcs[a as usize].target as usize;
                if dist[t] == u32::MAX {
                    dist[t] = dist[m as usize] + 1;
                    queue.push_back(t as MarkingId);
                }
            }
        }
        None
    }

    /// The same graph with every arc reversed; the old finals become
    /// start points and the old initial marking the only final.
    pub fn reversed_arcs(&self) -> Vec<RgArc> {
        self.arcs
            .iter()
            .map(|a| RgArc { source: a.target, label: a.label.clone(), target: a.source, transition: a.transition })
            .collect()
    }
}

/// Breadth-first state-space construction.
pub fn build_rg(net: &SystemNet, cap: usize) -> Result<ReachabilityGraph, RgError> {
    let mut index: HashMap<Marking, MarkingId, FxBuildHasher> = HashMap::default();
    let mut markings = alloc::vec![net.initial().clone()];
    index.insert(net.initial().clone(), 0);
    let mut arcs = Vec::new();
    let mut next = 0usize;
    while next < markings.len() {
        let m = markings[next].clone();
        for t in 0..net.num_transitions() as TransitionId {
            if !net.enabled(&m, t) {
                continue;
            }
            let m2 = match net.fire(&m, t) {
                Ok(m2) => m2,
                Err(NetError::Overflow { transition, place }) => {
                    return Err(RgError::NotOneBounded { transition, place })
                }
                Err(_) => unreachable!("enabled transition"),
            };
            let target = match index.get(&m2) {
                Some(&id) => id,
                None => {
                    if markings.len() >= cap {
                        return Err(RgError::Explosion { cap });
                    }
                    let id = markings.len() as MarkingId;
                    index.insert(m2.clone(), id);
                    markings.push(m2);
                    id
                }
            };
            let tr = net.transition(t);
            let label = if tr.label.is_tau() {
                ArcLabel { visible: LabelId::TAU, tau_trail: alloc::vec![tr.origin] }
            } else {
                ArcLabel::plain(tr.label)
            };
            arcs.push(RgArc { source: next as MarkingId, label, target, transition: Some(t) });
        }
        next += 1;
    }
    let finals: Vec<MarkingId> = net.finals().iter().filter_map(|f| index.get(f).copied()).collect();
    Ok(ReachabilityGraph::from_parts(markings, arcs, 0, &finals))
}

/// Operational soundness symptoms of a full reachability graph.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Diagnostics {
    pub dead_transitions: Vec<TransitionId>,
    /// Reachable markings from which no final marking is reachable.
    pub stuck_markings: usize,
}

pub fn diagnose(net: &SystemNet, rg: &ReachabilityGraph) -> Diagnostics {
    let mut fired = alloc::vec![false; net.num_transitions()];
    for a in rg.arcs() {
        if let Some(t) = a.transition {
            fired[t as usize] = true;
        }
    }
    let mut can_finish = alloc::vec![false; rg.num_markings()];
    let mut queue: VecDeque<MarkingId> = rg.finals().iter().copied().collect();
    for &f in rg.finals() {
        can_finish[f as usize] = true;
    }
    while let Some(m) = queue.pop_front() {
        for &a in rg.in_arcs(m) {
            let s = rg.arc(a).source as usize;
            if !can_finish[s] {
                can_finish[s] = true;
                queue.push_back(s as MarkingId);
            }
        }
    }
    Diagnostics {
        dead_transitions: (0..net.num_transitions() as TransitionId).filter(|&t| !fired[t as usize]).collect(),
        stuck_markings: can_finish.iter().filter(|&&b| !b).count(),
    }
}

struct Work {
    out: Vec<BTreeSet<(ArcLabel, MarkingId)>>,
    inc: Vec<BTreeSet<(MarkingId, ArcLabel)>>,
    alive: Vec<bool>,
    fin: Vec<bool>,
    init: MarkingId,
}

impl Work {
    fn add(&mut self, s: MarkingId, l: ArcLabel, t: MarkingId) {
        self.inc[t as usize].insert((s, l.clone()));
        self.out[s as usize].insert((l, t));
    }

    fn remove(&mut self, s: MarkingId, l: &ArcLabel, t: MarkingId) {
        self.out[s as usize].remove(&(l.clone(), t));
        self.inc[t as usize].remove(&(s, l.clone()));
    }

    fn kill(&mut self, m: MarkingId) -> Vec<MarkingId> {
        let mut touched = Vec::new();
        for (l, t) in core::mem::take(&mut self.out[m as usize]) {
            self.inc[t as usize].remove(&(m, l));
            touched.push(t);
        }
        for (s, l) in core::mem::take(&mut self.inc[m as usize]) {
            self.out[s as usize].remove(&(l, m));
            touched.push(s);
        }
        self.alive[m as usize] = false;
        touched
    }

    fn is_orphan(&self, m: MarkingId) -> bool {
        let i = m as usize;
        self.alive[i] && ((m != self.init && self.inc[i].is_empty()) || (!self.fin[i] && self.out[i].is_empty()))
    }

    fn prune(&mut self) {
        let mut stack: Vec<MarkingId> = (0..self.alive.len() as MarkingId).rev().collect();
        while let Some(m) = stack.pop() {
            if self.is_orphan(m) {
                stack.extend(self.kill(m));
            }
        }
    }

    /// A marking entered only by visible arcs and left only by silent arcs
    /// into non-final markings that are themselves entered visibly: its
    /// visible entries are redirected to the silent successors.
    fn contract_silent_exits(&mut self) {
        for m in 0..self.alive.len() as MarkingId {
            let i = m as usize;
            if !self.alive[i] || m == self.init || self.fin[i] || self.out[i].is_empty() || self.inc[i].is_empty() {
                continue;
            }
            if !self.out[i].iter().all(|(l, _)| l.visible.is_tau())
                || !self.inc[i].iter().all(|(_, l)| !l.visible.is_tau())
            {
                continue;
            }
            let ok = self.out[i].iter().all(|&(_, t)| {
                t != m && !self.fin[t as usize] && self.inc[t as usize].iter().any(|(_, l)| !l.visible.is_tau())
            });
            if !ok {
                continue;
            }
            let ins: Vec<_> = self.inc[i].iter().cloned().collect();
            let outs: Vec<_> = self.out[i].iter().cloned().collect();
            self.kill(m);
            for (x, l) in &ins {
                for (tl, t) in &outs {
                    self.add(*x, ArcLabel::joined(l.visible, &l.tau_trail, &tl.tau_trail), *t);
                }
            }
        }
    }

    /// Replaces the silent arc `(m1, trail, mt)` by arcs from `m1` to the
    /// visible successors of `mt`, following silent chains depth-first.
    fn replace_forward(&mut self, m1: MarkingId, trail: Vec<TransitionId>, mt: MarkingId) -> usize {
        let mut found = 0;
        let mut theta = BTreeSet::from([mt]);
        let mut stack = alloc::vec![(mt, trail)];
        while let Some((m, tr)) = stack.pop() {
            let outs: Vec<_> = self.out[m as usize].iter().cloned().collect();
            for (l2, m2) in outs.into_iter().rev() {
                if !l2.visible.is_tau() || self.fin[m2 as usize] {
                    self.add(m1, ArcLabel::joined(l2.visible, &tr, &l2.tau_trail), m2);
                    found += 1;
                } else if theta.insert(m2) {
                    let mut t2 = tr.clone();
                    t2.extend_from_slice(&l2.tau_trail);
                    stack.push((m2, t2));
                }
            }
        }
        found
    }

    /// Replaces the silent arc `(m1, trail, mf)` into a final marking by
    /// arcs from the visible predecessors of `m1` straight to `mf`.
    fn replace_backward(&mut self, m1: MarkingId, trail: Vec<TransitionId>, mf: MarkingId) {
        let mut theta = BTreeSet::from([m1]);
        let mut stack = alloc::vec![(m1, trail)];
        while let Some((m, tr)) = stack.pop() {
            if m == self.init {
                self.fin[m as usize] = true;
            }
            let ins: Vec<_> = self.inc[m as usize].iter().cloned().collect();
            for (m2, l2) in ins.into_iter().rev() {
                if !l2.visible.is_tau() {
                    self.add(m2, ArcLabel::joined(l2.visible, &l2.tau_trail, &tr), mf);
                } else if theta.insert(m2) {
                    stack.push((m2, [l2.tau_trail.as_slice(), tr.as_slice()].concat()));
                }
            }
        }
    }
}

/// Silent-arc removal with plain labels.
pub fn remove_tau(rg: &ReachabilityGraph) -> Result<ReachabilityGraph, RgError> {
    reduce(rg, false)
}

/// Silent-arc removal keeping the identities of removed silent transitions
/// on every replacement arc.
pub fn remove_tau_extended(rg: &ReachabilityGraph) -> Result<ReachabilityGraph, RgError> {
    reduce(rg, true)
}

fn reduce(rg: &ReachabilityGraph, extended: bool) -> Result<ReachabilityGraph, RgError> {
    let n = rg.num_markings();
    let mut w = Work {
        out: alloc::vec![BTreeSet::new(); n],
        inc: alloc::vec![BTreeSet::new(); n],
        alive: alloc::vec![true; n],
        fin: (0..n as MarkingId).map(|m| rg.is_final(m)).collect(),
        init: rg.initial(),
    };
    for a in rg.arcs() {
        let mut l = a.label.clone();
        if !extended {
            l.tau_trail.clear();
        }
        w.add(a.source, l, a.target);
    }

    w.contract_silent_exits();

    let mut seen = alloc::vec![false; n];
    let mut queue = VecDeque::from([w.init]);
    seen[w.init as usize] = true;
    while let Some(m) = queue.pop_front() {
        if w.alive[m as usize] && !w.fin[m as usize] {
            let psi: Vec<(MarkingId, ArcLabel)> =
                w.inc[m as usize].iter().filter(|(_, l)| l.visible.is_tau()).cloned().collect();
            for (m1, l) in psi {
                w.remove(m1, &l, m);
                if w.replace_forward(m1, l.tau_trail, m) == 0 {
                    return Err(RgError::Reduction { marking: m });
                }
            }
        }
        for &(_, t) in &w.out[m as usize] {
            if !seen[t as usize] {
                seen[t as usize] = true;
                queue.push_back(t);
            }
        }
    }
    w.prune();

    let mut into_finals = Vec::new();
    for f in 0..n as MarkingId {
        if w.alive[f as usize] && w.fin[f as usize] {
            into_finals
                .extend(w.inc[f as usize].iter().filter(|(_, l)| l.visible.is_tau()).map(|(s, l)| (*s, l.clone(), f)));
        }
    }
    for (m1, l, mf) in into_finals {
        w.remove(m1, &l, mf);
        w.replace_backward(m1, l.tau_trail, mf);
    }
    w.prune();

    if let Some(m) = (0..n).find(|&m| w.out[m].iter().any(|(l, _)| l.visible.is_tau())) {
        return Err(RgError::Reduction { marking: m as MarkingId });
    }
    Ok(compact(rg, &w))
}

fn compact(rg: &ReachabilityGraph, w: &Work) -> ReachabilityGraph {
    let n = rg.num_markings();
    let mut id = alloc::vec![u32::MAX; n];
    let mut order = alloc::vec![w.init];
    id[w.init as usize] = 0;
    let mut head = 0;
    while head < order.len() {
        let m = order[head];
        head += 1;
        for &(_, t) in &w.out[m as usize] {
            if id[t as usize] == u32::MAX {
                id[t as usize] = order.len() as u32;
                order.push(t);
            }
        }
    }
    let markings = order.iter().map(|&m| rg.marking(m).clone()).collect();
    let mut arcs = Vec::new();
    for &m in &order {
        for (l, t) in &w.out[m as usize] {
            arcs.push(RgArc { source: id[m as usize], label: l.clone(), target: id[*t as usize], transition: None });
        }
    }
    let finals: Vec<MarkingId> = order.iter().filter(|&&m| w.fin[m as usize]).map(|&m| id[m as usize]).collect();
    ReachabilityGraph::from_parts(markings, arcs, 0, &finals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::Alphabet;
    use crate::samples;

    fn names(net: &SystemNet, rg: &ReachabilityGraph, m: MarkingId) -> Vec<String> {
        net.marking_names(rg.marking(m)).into_iter().map(String::from).collect()
    }

    fn find(net: &SystemNet, rg: &ReachabilityGraph, places: &[&str]) -> Option<MarkingId> {
        rg.find(&net.marking(places).unwrap())
    }

    #[test]
    fn running_example_graph() {
        let mut a = Alphabet::new();
        let net = samples::running_example(&mut a);
        let rg = build_rg(&net, DEFAULT_MARKING_CAP).unwrap();
        assert_eq!(rg.num_markings(), 22);
        let first = rg.arc(rg.out_arcs(rg.initial())[0]).target;
        assert_eq!(names(&net, &rg, first), ["p1", "p2", "p3", "p4"]);
        assert_eq!(rg.finals().len(), 1);
    }

    #[test]
    fn running_example_reduction() {
        let mut a = Alphabet::new();
        let net = samples::running_example(&mut a);
        let rg = build_rg(&net, DEFAULT_MARKING_CAP).unwrap();
        let red = remove_tau(&rg).unwrap();
        assert_eq!(red.tau_arc_count(), 0);
        assert_eq!(red.num_markings(), 19);
        assert!(find(&net, &red, &["p1", "p2", "p3", "p4"]).is_none());
        assert!(find(&net, &red, &["p5", "p6", "p7", "p8"]).is_none());
        assert!(find(&net, &red, &["p11"]).is_none());
        let (p10, end) = (find(&net, &red, &["p10"]).unwrap(), find(&net, &red, &["end"]).unwrap());
        let g = a.get("G").unwrap();
        assert!(red.arcs().iter().any(|x| x.source == p10 && x.target == end && x.label.visible == g));
        // Each first task now leaves the initial marking directly.
        let from_start: BTreeSet<LabelId> =
            red.out_arcs(red.initial()).iter().map(|&x| red.arc(x).label.visible).collect();
        assert_eq!(from_start, ["A", "B", "C", "D"].iter().map(|s| a.get(s).unwrap()).collect());
        for m in 0..red.num_markings() as MarkingId {
            assert!(m == red.initial() || !red.in_arcs(m).is_empty());
            assert!(red.is_final(m) || !red.out_arcs(m).is_empty());
        }
        assert_eq!(remove_tau(&red).unwrap(), red);
    }

    #[test]
    fn extended_labels_project_to_plain() {
        let mut a = Alphabet::new();
        let net = samples::running_example(&mut a);
        let rg = build_rg(&net, DEFAULT_MARKING_CAP).unwrap();
        let plain = remove_tau(&rg).unwrap();
        let ext = remove_tau_extended(&rg).unwrap();
        let key = |g: &ReachabilityGraph| {
            let mut v: Vec<(Marking, LabelId, Marking)> = g
                .arcs()
                .iter()
                .map(|x| (g.marking(x.source).clone(), x.label.visible, g.marking(x.target).clone()))
                .collect();
            v.sort();
            v.dedup();
            v
        };
        assert_eq!(key(&plain), key(&ext));
        assert!(ext.arcs().iter().any(|x| !x.label.tau_trail.is_empty()));
        assert!(plain.arcs().iter().all(|x| x.label.tau_trail.is_empty()));
    }

    #[test]
    fn skippable_parallel_trails() {
        let mut a = Alphabet::new();
        let net = samples::skippable_parallel(&mut a);
        let rg = build_rg(&net, DEFAULT_MARKING_CAP).unwrap();
        let ext = remove_tau_extended(&rg).unwrap();
        let d = a.get("D").unwrap();
        let (t1, t3) = (net.find_transition("t1").unwrap(), net.find_transition("t3").unwrap());
        let trails: BTreeSet<Vec<TransitionId>> =
            ext.arcs().iter().filter(|x| x.label.visible == d).map(|x| x.label.tau_trail.clone()).collect();
        assert!(trails.contains(&alloc::vec![t1]));
        assert!(trails.contains(&alloc::vec![t3]));
    }

    #[test]
    fn linear_and_parallel_counts() {
        let mut a = Alphabet::new();
        let rg = build_rg(&samples::sequence(&mut a, 1), 10).unwrap();
        assert_eq!((rg.num_markings(), rg.num_arcs()), (2, 1));
        for n in 1..=8 {
            let rg = build_rg(&samples::parallel_tasks(&mut a, n), DEFAULT_MARKING_CAP).unwrap();
            // start and end plus every subset of finished tasks
            assert_eq!(rg.num_markings(), (1usize << n) + 2);
        }
        assert_eq!(build_rg(&samples::parallel_tasks(&mut a, 8), 100), Err(RgError::Explosion { cap: 100 }));
    }

    #[test]
    fn tau_free_is_untouched() {
        let mut a = Alphabet::new();
        let rg = build_rg(&samples::sequence(&mut a, 3), 10).unwrap();
        let red = remove_tau(&rg).unwrap();
        assert_eq!(red.num_markings(), rg.num_markings());
        assert_eq!(red.num_arcs(), rg.num_arcs());
    }

    #[test]
    fn silent_trap_is_an_error() {
        let mut b = crate::net::NetBuilder::new();
        let (i, p, o) = (b.place("i"), b.place("p"), b.place("o"));
        let x = b.transition("x", LabelId(1));
        let s1 = b.transition("s1", LabelId::TAU);
        let s2 = b.transition("s2", LabelId::TAU);
        b.connect(&[i], x, &[o]).connect(&[i], s1, &[p]).connect(&[p], s2, &[i]);
        let net = b.build(Marking::from_places(3, &[p]), alloc::vec![Marking::from_places(3, &[o])]);
        let rg = build_rg(&net, 100).unwrap();
        assert!(remove_tau(&rg).is_ok());

        let mut b = crate::net::NetBuilder::new();
        let (i, p, o) = (b.place("i"), b.place("p"), b.place("o"));
        let s1 = b.transition("s1", LabelId::TAU);
        let s2 = b.transition("s2", LabelId::TAU);
        b.connect(&[i], s1, &[p]).connect(&[p], s2, &[i]);
        let net = b.build(Marking::from_places(3, &[i]), alloc::vec![Marking::from_places(3, &[o])]);
        let rg = build_rg(&net, 100).unwrap();
        assert!(matches!(remove_tau(&rg), Err(RgError::Reduction { .. })));
    }
}
