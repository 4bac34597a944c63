//! A* over (trace position, marking) pairs with deterministic tie-breaking.

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use hashbrown::HashMap;
use rustc_hash::FxBuildHasher;

use super::heuristic::{FutureLabelTable, TraceCounts, DEFAULT_FUTURE_CAP};
use super::memo::{Completion, MemoContribution, MemoTables, PrefixSnapshot, SuffixEntry};
use super::psp::{build_psp, Psp};
use super::{Alignment, Move, Op};
use crate::dafsa::{Dafsa, StateId, TracePath};
use crate::label::LabelId;
use crate::log::EventLog;
use crate::rg::{MarkingId, ReachabilityGraph};

pub const DEFAULT_EXPANSION_BUDGET: u64 = 2_000_000;
pub const DEFAULT_OPTIMA_LIMIT: usize = 1000;
/// Largest number of traces aligned against the same memo state.
pub const WAVE_SIZE: usize = 64;
const PREFIX_SNAPSHOT_CAP: usize = 200_000;
const INTERRUPT_EVERY: u64 = 1024;
const INF: u32 = u32::MAX;

#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub enum Mode {
    OneOptimal,
    AllOptimal,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum AlignError {
    SilentArcs {
        count: usize,
    },
    /// No final marking is reachable from the initial one.
    NoFinal,
    /// The trace is not in the language of the given DAFSA.
    NotInLog,
    Budget {
        expanded: u64,
    },
    Interrupted {
        expanded: u64,
    },
}

impl fmt::Display for AlignError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlignError::SilentArcs { count } => write!(f, "reachability graph still has {count} silent arcs"),
            AlignError::NoFinal => write!(f, "no final marking is reachable"),
            AlignError::NotInLog => write!(f, "trace is not accepted by the log automaton"),
            AlignError::Budget { expanded } => write!(f, "expansion budget exhausted after {expanded} nodes"),
            AlignError::Interrupted { expanded } => write!(f, "search interrupted after {expanded} nodes"),
        }
    }
}

impl core::error::Error for AlignError {}

/// A silent-free reachability graph with everything the search precomputes.
#[derive(Clone, Debug)]
pub struct AlignModel {
    rg: ReachabilityGraph,
    future: FutureLabelTable,
    ranks: Vec<u32>,
    min_model_skips: u32,
}

impl AlignModel {
    /// `ranks[l]` orders labels for tie-breaking, see [`crate::Alphabet::ranks`].
    pub fn new(rg: ReachabilityGraph, ranks: Vec<u32>) -> Result<Self, AlignError> {
        Self::with_future_cap(rg, ranks, DEFAULT_FUTURE_CAP)
    }

    pub fn with_future_cap(rg: ReachabilityGraph, ranks: Vec<u32>, cap: usize) -> Result<Self, AlignError> {
        let count = rg.tau_arc_count();
        if count > 0 {
            return Err(AlignError::SilentArcs { count });
        }
        let min_model_skips = rg.shortest_to_final().ok_or(AlignError::NoFinal)?;
        let future = FutureLabelTable::build(&rg, cap);
        Ok(AlignModel { rg, future, ranks, min_model_skips })
    }

    pub fn rg(&self) -> &ReachabilityGraph {
        &self.rg
    }

    pub fn future(&self) -> &FutureLabelTable {
        &self.future
    }

    /// Length of a shortest initial-to-final path.
    pub fn min_model_skips(&self) -> u32 {
        self.min_model_skips
    }

    #[inline]
    pub fn label_rank(&self, l: LabelId) -> u32 {
        self.ranks.get(l.index()).copied().unwrap_or(l.0)
    }

    /// Trace indices sorted by their label ranks, the order in which memo
    /// contributions are merged.
    pub fn wave_order(&self, log: &EventLog) -> Vec<usize> {
        let keys: Vec<Vec<u32>> =
            log.traces().iter().map(|t| t.labels.iter().map(|&l| self.label_rank(l)).collect()).collect();
        let mut order: Vec<usize> = (0..log.len()).collect();
        order.sort_by(|&a, &b| keys[a].cmp(&keys[b]).then(a.cmp(&b)));
        order
    }
}

#[derive(Clone, Copy)]
pub struct SearchLimits<'a> {
    pub expansion_budget: u64,
    /// Maximum number of optima enumerated in all-optimal mode.
    pub optima_limit: usize,
    /// Polled periodically; `true` aborts the search.
    pub interrupt: Option<&'a (dyn Fn() -> bool + Sync)>,
}

impl Default for SearchLimits<'_> {
    fn default() -> Self {
        SearchLimits { expansion_budget: DEFAULT_EXPANSION_BUDGET, optima_limit: DEFAULT_OPTIMA_LIMIT, interrupt: None }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct SearchStats {
    pub expanded: u64,
    pub generated: u64,
    /// Largest g + h among expanded nodes.
    pub max_expanded_f: u32,
    /// Length of the memoized prefix the search resumed from.
    pub resumed_from: Option<usize>,
    pub suffix_hits: u64,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SearchOutcome {
    pub cost: u32,
    /// One alignment in one-optimal mode, every optimum otherwise.
    pub alignments: Vec<Alignment>,
    /// The optima limit cut the enumeration short.
    pub truncated: bool,
    pub stats: SearchStats,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub(crate) enum Status {
    Open,
    Expanded,
    /// Completed from the suffix table instead of being expanded.
    Shortcut,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub(crate) enum Seg {
    One(Move),
    Many(Arc<[Move]>),
}

impl Seg {
    fn moves(&self) -> &[Move] {
        match self {
            Seg::One(m) => core::slice::from_ref(m),
            Seg::Many(v) => v,
        }
    }

    fn cost(&self) -> u32 {
        self.moves().iter().map(Move::cost).sum()
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub(crate) struct Link {
    from: u32,
    seg: Seg,
}

#[derive(Clone, Debug)]
pub(crate) struct Rec {
    pos: u32,
    m: MarkingId,
    g: u32,
    h: u32,
    status: Status,
    /// Incoming moves achieving `g`; one in one-optimal mode.
    links: Vec<Link>,
}

#[derive(PartialEq, Eq)]
struct Entry {
    f: u32,
    op: u8,
    label: u32,
    seq: u64,
    idx: u32,
    g: u32,
}

impl Ord for Entry {
    /// Smallest f first; ties go to match over rhide over lhide, then to
    /// the smaller label, then to the older entry.
    fn cmp(&self, o: &Self) -> Ordering {
        o.f.cmp(&self.f).then(o.op.cmp(&self.op)).then(o.label.cmp(&self.label)).then(o.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

struct Search<'a> {
    model: &'a AlignModel,
    dafsa: &'a Dafsa,
    trace: &'a [LabelId],
    path: &'a TracePath,
    counts: TraceCounts,
    mode: Mode,
    recs: Vec<Rec>,
    index: HashMap<(u32, MarkingId), u32, FxBuildHasher>,
    heap: BinaryHeap<Entry>,
    seq: u64,
    rho_max: u32,
    stats: SearchStats,
}

impl<'a> Search<'a> {
    fn new(model: &'a AlignModel, dafsa: &'a Dafsa, trace: &'a [LabelId], path: &'a TracePath, mode: Mode) -> Self {
        Search {
            model,
            dafsa,
            trace,
            path,
            counts: TraceCounts::new(trace),
            mode,
            recs: Vec::new(),
            index: HashMap::default(),
            heap: BinaryHeap::new(),
            seq: 0,
            rho_max: trace.len() as u32 + model.min_model_skips,
            stats: SearchStats::default(),
        }
    }

    fn n(&self) -> u32 {
        self.trace.len() as u32
    }

    fn is_goal(&self, pos: u32, m: MarkingId) -> bool {
        pos == self.n() && self.model.rg.is_final(m)
    }

    fn h(&self, pos: u32, m: MarkingId) -> u32 {
        self.model.future.estimate(m, &self.counts, pos as usize).unwrap_or(INF)
    }

    fn record(&mut self, pos: u32, m: MarkingId) -> usize {
        if let Some(&i) = self.index.get(&(pos, m)) {
            return i as usize;
        }
        let i = self.recs.len();
        let h = self.h(pos, m);
        self.recs.push(Rec { pos, m, g: INF, h, status: Status::Open, links: Vec::new() });
        self.index.insert((pos, m), i as u32);
        i
    }

    fn push(&mut self, idx: usize) {
        let r = &self.recs[idx];
        if r.h == INF || r.g + r.h > self.rho_max {
            return;
        }
        let (op, label) = match r.links.first() {
            Some(l) => {
                let mv = l.seg.moves()[0];
                (mv.op.rank(), self.model.label_rank(mv.label))
            }
            None => (0, 0),
        };
        self.seq += 1;
        self.heap.push(Entry { f: r.g + r.h, op, label, seq: self.seq, idx: idx as u32, g: r.g });
    }

    fn relax(&mut self, pos: u32, m: MarkingId, g: u32, link: Link) {
        self.stats.generated += 1;
        let idx = self.record(pos, m);
        let r = &mut self.recs[idx];
        if g < r.g {
            r.g = g;
            r.links.clear();
            r.links.push(link);
            r.status = Status::Open;
            if self.is_goal(pos, m) {
                self.rho_max = self.rho_max.min(g);
            }
            self.push(idx);
        } else if g == r.g && self.mode == Mode::AllOptimal && !r.links.contains(&link) {
            r.links.push(link);
        }
    }

    fn start(&mut self) {
        let idx = self.record(0, self.model.rg.initial());
        self.recs[idx].g = 0;
        self.push(idx);
    }

    /// Restores the longest memoized prefix of this trace and reopens every
    /// record whose successors depend on the rest of the trace.
    fn resume(&mut self, memo: &MemoTables) -> bool {
        let n = self.trace.len();
        for len in (1..n).rev() {
            if self.dafsa.out_degree(self.path.states[len]) <= 1 {
                continue;
            }
            let Some(snap) = memo.prefix(&self.trace[..len]) else { continue };
            self.recs = snap.recs.clone();
            for i in 0..self.recs.len() {
                let (pos, m) = (self.recs[i].pos, self.recs[i].m);
                self.index.insert((pos, m), i as u32);
                self.recs[i].h = self.h(pos, m);
                if self.recs[i].status != Status::Expanded || pos as usize == len {
                    self.recs[i].status = Status::Open;
                    self.push(i);
                }
            }
            self.stats.resumed_from = Some(len);
            return true;
        }
        false
    }

    fn expand(&mut self, idx: usize, memo: Option<&MemoTables>) {
        let (pos, m, g) = (self.recs[idx].pos, self.recs[idx].m, self.recs[idx].g);
        let from = idx as u32;
        if let Some(t) = memo {
            let s = self.path.states[pos as usize];
            if self.dafsa.in_degree(s) > 1 {
                if let Some(e) = t.suffix(s, m, &self.trace[pos as usize..]) {
                    self.stats.suffix_hits += 1;
                    self.recs[idx].status = Status::Shortcut;
                    for c in &e.completions {
                        self.relax(
                            self.n(),
                            c.final_marking,
                            g + c.cost,
                            Link { from, seg: Seg::Many(c.moves.clone()) },
                        );
                    }
                    return;
                }
            }
        }
        self.recs[idx].status = Status::Expanded;
        let rg = &self.model.rg;
        if pos < self.n() {
            let l = self.trace[pos as usize];
            let darc = Some(self.path.arcs[pos as usize]);
            for &a in rg.out_arcs(m) {
                let arc = rg.arc(a);
                if arc.label.visible == l {
                    let mv = Move { op: Op::Match, label: l, dafsa_arc: darc, rg_arc: Some(a) };
                    self.relax(pos + 1, arc.target, g, Link { from, seg: Seg::One(mv) });
                }
            }
            let mv = Move { op: Op::LHide, label: l, dafsa_arc: darc, rg_arc: None };
            self.relax(pos + 1, m, g + 1, Link { from, seg: Seg::One(mv) });
        }
        for &a in rg.out_arcs(m) {
            let arc = rg.arc(a);
            let mv = Move { op: Op::RHide, label: arc.label.visible, dafsa_arc: None, rg_arc: Some(a) };
            self.relax(pos, arc.target, g + 1, Link { from, seg: Seg::One(mv) });
        }
    }

    /// Returns the first goal record popped.
    fn run(&mut self, memo: Option<&MemoTables>, limits: &SearchLimits<'_>) -> Result<Option<usize>, AlignError> {
        let mut best: Option<(u32, usize)> = None;
        while let Some(e) = self.heap.pop() {
            let idx = e.idx as usize;
            let r = &self.recs[idx];
            if r.status != Status::Open || r.g != e.g {
                continue;
            }
            if matches!(best, Some((c, _)) if e.f > c) {
                break;
            }
            self.stats.max_expanded_f = self.stats.max_expanded_f.max(e.f);
            if self.is_goal(r.pos, r.m) {
                self.recs[idx].status = Status::Expanded;
                if best.is_none() {
                    best = Some((e.g, idx));
                }
                if self.mode == Mode::OneOptimal {
                    break;
                }
                continue;
            }
            if self.stats.expanded >= limits.expansion_budget {
                return Err(AlignError::Budget { expanded: self.stats.expanded });
            }
            if self.stats.expanded.is_multiple_of(INTERRUPT_EVERY) && limits.interrupt.is_some_and(|f| f()) {
                return Err(AlignError::Interrupted { expanded: self.stats.expanded });
            }
            self.stats.expanded += 1;
            self.expand(idx, memo);
        }
        Ok(best.map(|(_, i)| i))
    }

    fn first_path(&self, goal: usize) -> Vec<Move> {
        let mut rev: Vec<Move> = Vec::new();
        let mut cur = goal;
        while let Some(l) = self.recs[cur].links.first() {
            rev.extend(l.seg.moves().iter().rev());
            cur = l.from as usize;
        }
        rev.reverse();
        rev
    }

    /// All tight back-paths from the goals; `None` past `limit`.
    fn all_paths(&self, goals: &[usize], limit: usize) -> Option<Vec<Vec<Move>>> {
        fn walk(s: &Search<'_>, idx: usize, rev: &mut Vec<Move>, out: &mut Vec<Vec<Move>>, limit: usize) -> bool {
            let r = &s.recs[idx];
            if r.links.is_empty() {
                if out.len() == limit {
                    return false;
                }
                out.push(rev.iter().rev().copied().collect());
                return true;
            }
            for l in &r.links {
                let from = &s.recs[l.from as usize];
                if from.g.saturating_add(l.seg.cost()) != r.g {
                    continue;
                }
                let k = rev.len();
                rev.extend(l.seg.moves().iter().rev());
                let ok = walk(s, l.from as usize, rev, out, limit);
                rev.truncate(k);
                if !ok {
                    return false;
                }
            }
            true
        }
        let mut out = Vec::new();
        let mut rev = Vec::new();
        for &g in goals {
            if !walk(self, g, &mut rev, &mut out, limit) {
                return None;
            }
        }
        Some(out)
    }

    fn prefix_contribution(&self, memo: &MemoTables, out: &mut MemoContribution) {
        for len in 1..self.trace.len() {
            if self.dafsa.out_degree(self.path.states[len]) <= 1 || memo.has_prefix(&self.trace[..len]) {
                continue;
            }
            let keep: Vec<usize> = (0..self.recs.len()).filter(|&i| self.recs[i].pos as usize <= len).collect();
            if keep.len() > PREFIX_SNAPSHOT_CAP {
                continue;
            }
            let mut remap = alloc::vec![u32::MAX; self.recs.len()];
            for (j, &i) in keep.iter().enumerate() {
                remap[i] = j as u32;
            }
            let recs = keep
                .iter()
                .map(|&i| {
                    let mut r = self.recs[i].clone();
                    for l in &mut r.links {
                        l.from = remap[l.from as usize];
                    }
                    r
                })
                .collect();
            out.prefixes.push((self.trace[..len].to_vec(), Arc::new(PrefixSnapshot { recs })));
        }
    }

    fn suffix_contribution(&self, alignments: &[Alignment], memo: &MemoTables, out: &mut MemoContribution) {
        let rg = &self.model.rg;
        let mut found: BTreeMap<(u32, MarkingId), BTreeSet<Vec<Move>>> = BTreeMap::new();
        let mut finals: BTreeMap<Vec<Move>, MarkingId> = BTreeMap::new();
        for al in alignments {
            let (mut pos, mut m) = (0usize, rg.initial());
            for (i, mv) in al.moves.iter().enumerate() {
                let s = self.path.states[pos];
                if self.dafsa.in_degree(s) > 1 && memo.suffix(s, m, &self.trace[pos..]).is_none() {
                    found.entry((pos as u32, m)).or_default().insert(al.moves[i..].to_vec());
                }
                if mv.op != Op::RHide {
                    pos += 1;
                }
                if let Some(a) = mv.rg_arc {
                    m = rg.arc(a).target;
                }
            }
            for i in 0..al.moves.len() {
                finals.entry(al.moves[i..].to_vec()).or_insert(m);
            }
        }
        for ((pos, m), tails) in found {
            let s: StateId = self.path.states[pos as usize];
            let completions = tails
                .into_iter()
                .map(|t| {
                    let final_marking = finals[&t];
                    Completion { cost: super::alignment_cost(&t), moves: t.into(), final_marking }
                })
                .collect();
            out.suffixes.push(((s, m), SuffixEntry { suffix: self.trace[pos as usize..].to_vec(), completions }));
        }
    }
}

/// Aligns one trace of the log `dafsa` was built from. The contribution is
/// empty unless `memo` is given.
pub fn align_trace(
    model: &AlignModel,
    dafsa: &Dafsa,
    trace: &[LabelId],
    mode: Mode,
    memo: Option<&MemoTables>,
    limits: &SearchLimits<'_>,
) -> Result<(SearchOutcome, MemoContribution), AlignError> {
    let path = dafsa.path(trace).ok_or(AlignError::NotInLog)?;
    if let Some(t) = memo {
        assert_eq!(t.mode(), mode, "memo tables were filled in another mode");
    }
    let mut s = Search::new(model, dafsa, trace, &path, mode);
    if !memo.is_some_and(|t| s.resume(t)) {
        s.start();
    }
    let goal = s.run(memo, limits)?.ok_or(AlignError::NoFinal)?;
    let cost = s.recs[goal].g;
    let (paths, truncated) = match mode {
        Mode::OneOptimal => (alloc::vec![s.first_path(goal)], false),
        Mode::AllOptimal => {
            let goals: Vec<usize> =
                (0..s.recs.len()).filter(|&i| s.is_goal(s.recs[i].pos, s.recs[i].m) && s.recs[i].g == cost).collect();
            match s.all_paths(&goals, limits.optima_limit) {
                Some(p) => (p, false),
                None => (alloc::vec![s.first_path(goal)], true),
            }
        }
    };
    let alignments: Vec<Alignment> = paths.into_iter().map(Alignment::new).collect();
    let mut contribution = MemoContribution::default();
    if let Some(t) = memo {
        s.prefix_contribution(t, &mut contribution);
        if !truncated {
            s.suffix_contribution(&alignments, t, &mut contribution);
        }
    }
    Ok((SearchOutcome { cost, alignments, truncated, stats: s.stats }, contribution))
}

/// The single alignment selected by the tie-breaking order.
pub fn align_one_optimal(
    model: &AlignModel,
    dafsa: &Dafsa,
    trace: &[LabelId],
    limits: &SearchLimits<'_>,
) -> Result<SearchOutcome, AlignError> {
    align_trace(model, dafsa, trace, Mode::OneOptimal, None, limits).map(|(o, _)| o)
}

#[derive(Clone, Copy)]
pub struct LogAlignOptions<'a> {
    pub mode: Mode,
    pub memo: bool,
    pub limits: SearchLimits<'a>,
}

impl Default for LogAlignOptions<'_> {
    fn default() -> Self {
        LogAlignOptions { mode: Mode::OneOptimal, memo: true, limits: SearchLimits::default() }
    }
}

#[derive(Clone, Debug)]
pub struct LogAlignment {
    /// Indexed like the log's traces.
    pub results: Vec<Result<SearchOutcome, AlignError>>,
    pub psp: Psp,
}

/// Splits `order` into waves of 1, 2, 4, ... traces, capped at
/// [`WAVE_SIZE`]. Small early waves let later traces reuse memo entries.
pub fn waves(order: &[usize]) -> Vec<&[usize]> {
    let mut out = Vec::new();
    let (mut start, mut size) = (0, 1);
    while start < order.len() {
        let end = (start + size).min(order.len());
        out.push(&order[start..end]);
        start = end;
        size = (size * 2).min(WAVE_SIZE);
    }
    out
}

/// Aligns every distinct trace, in [`waves`] along
/// [`AlignModel::wave_order`].
pub fn align_log(model: &AlignModel, dafsa: &Dafsa, log: &EventLog, opts: &LogAlignOptions<'_>) -> LogAlignment {
    let mut memo = opts.memo.then(|| MemoTables::new(opts.mode));
    let mut results: Vec<Option<Result<SearchOutcome, AlignError>>> = alloc::vec![None; log.len()];
    let order = model.wave_order(log);
    for wave in waves(&order) {
        let outs: Vec<_> = wave
            .iter()
            .map(|&i| align_trace(model, dafsa, &log.traces()[i].labels, opts.mode, memo.as_ref(), &opts.limits))
            .collect();
        for (&i, r) in wave.iter().zip(outs) {
            results[i] = Some(r.map(|(o, c)| {
                if let Some(t) = memo.as_mut() {
                    t.merge(c);
                }
                o
            }));
        }
    }
    let results: Vec<_> = results.into_iter().map(Option::unwrap).collect();
    let psp = build_psp(dafsa, &model.rg, log, &results);
    LogAlignment { results, psp }
}

/// Every optimal alignment of every trace, without memoization.
pub fn align_all_optimal(model: &AlignModel, dafsa: &Dafsa, log: &EventLog, limits: &SearchLimits<'_>) -> LogAlignment {
    align_log(model, dafsa, log, &LogAlignOptions { mode: Mode::AllOptimal, memo: false, limits: *limits })
}

pub fn align_all_optimal_memoized(
    model: &AlignModel,
    dafsa: &Dafsa,
    log: &EventLog,
    limits: &SearchLimits<'_>,
) -> LogAlignment {
    align_log(model, dafsa, log, &LogAlignOptions { mode: Mode::AllOptimal, memo: true, limits: *limits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::Alphabet;
    use crate::oracle::{all_optimal_alignments, brute_force_optimal_cost};
    use crate::rg::{build_rg, remove_tau, DEFAULT_MARKING_CAP};
    use crate::samples::{self, word, RUNNING_LOG};
    use crate::SystemNet;
    use alloc::string::String;

    fn model(a: &Alphabet, net: &SystemNet) -> AlignModel {
        let rg = remove_tau(&build_rg(net, DEFAULT_MARKING_CAP).unwrap()).unwrap();
        AlignModel::new(rg, a.ranks()).unwrap()
    }

    fn show(a: &Alphabet, al: &Alignment) -> String {
        let mut s = String::new();
        for mv in &al.moves {
            let op = match mv.op {
                Op::Match => 'm',
                Op::LHide => 'l',
                Op::RHide => 'r',
            };
            s.push_str(&alloc::format!("{op}({}) ", a.name(mv.label)));
        }
        s.trim_end().into()
    }

    fn one(a: &mut Alphabet, m: &AlignModel, t: &str) -> SearchOutcome {
        let trace = word(a, t);
        let d = Dafsa::from_words([trace.as_slice()]);
        align_one_optimal(m, &d, &trace, &SearchLimits::default()).unwrap()
    }

    #[test]
    fn selected_alignment_for_bdceg() {
        let mut a = Alphabet::new();
        let net = samples::running_example(&mut a);
        let m = model(&a, &net);
        let o = one(&mut a, &m, "BDCEG");
        assert_eq!(o.cost, 1);
        assert_eq!(show(&a, &o.alignments[0]), "m(B) m(D) m(C) r(A) m(E) m(G)");
        assert!(o.alignments[0].is_proper(&word(&mut a, "BDCEG"), m.rg()));
    }

    #[test]
    fn selected_alignment_for_bdaefg() {
        let mut a = Alphabet::new();
        let net = samples::running_example(&mut a);
        let m = model(&a, &net);
        let o = one(&mut a, &m, "BDAEFG");
        assert_eq!(o.cost, 2);
        assert_eq!(show(&a, &o.alignments[0]), "m(B) m(D) m(A) r(C) m(E) m(F) l(G)");
    }

    #[test]
    fn empty_trace_walks_a_shortest_path() {
        let mut a = Alphabet::new();
        let net = samples::running_example(&mut a);
        let m = model(&a, &net);
        let o = one(&mut a, &m, "");
        assert_eq!(o.cost, m.min_model_skips());
        assert!(o.alignments[0].moves.iter().all(|mv| mv.op == Op::RHide));
    }

    #[test]
    fn four_optima_for_bdceg() {
        let mut a = Alphabet::new();
        let net = samples::running_example(&mut a);
        let m = model(&a, &net);
        let trace = word(&mut a, "BDCEG");
        let d = Dafsa::from_words([trace.as_slice()]);
        let (o, _) = align_trace(&m, &d, &trace, Mode::AllOptimal, None, &SearchLimits::default()).unwrap();
        assert_eq!(o.cost, 1);
        assert_eq!(o.alignments.len(), 4);
        let (c, oracle) = all_optimal_alignments(&trace, m.rg(), 100).unwrap().unwrap();
        assert_eq!((c, oracle.len()), (1, 4));
        for al in &o.alignments {
            assert!(al.is_proper(&trace, m.rg()));
            assert_eq!(al.count(Op::RHide), 1);
        }
    }

    #[test]
    fn running_log_matches_oracle_with_and_without_memo() {
        let mut a = Alphabet::new();
        let net = samples::running_example(&mut a);
        let m = model(&a, &net);
        let log = EventLog::from_sequences(RUNNING_LOG.iter().map(|t| word(&mut a, t))).unwrap();
        let d = crate::build_dafsa(&log);
        for mode in [Mode::OneOptimal, Mode::AllOptimal] {
            for memo in [false, true] {
                let r = align_log(&m, &d, &log, &LogAlignOptions { mode, memo, limits: SearchLimits::default() });
                for (t, o) in log.traces().iter().zip(&r.results) {
                    let o = o.as_ref().unwrap();
                    let (c, _) = brute_force_optimal_cost(&t.labels, m.rg()).unwrap();
                    assert_eq!(o.cost, c);
                    for al in &o.alignments {
                        assert!(al.is_proper(&t.labels, m.rg()));
                        assert_eq!(al.cost, c);
                    }
                    assert!(o.stats.max_expanded_f <= c);
                }
            }
        }
    }

    #[test]
    fn waves_double() {
        let order: Vec<usize> = (0..200).collect();
        let sizes: Vec<usize> = waves(&order).iter().map(|w| w.len()).collect();
        assert_eq!(sizes, [1, 2, 4, 8, 16, 32, 64, 64, 9]);
        assert!(waves(&[]).is_empty());
    }

    #[test]
    fn shared_prefix_resumes() {
        let mut a = Alphabet::new();
        let net = samples::running_example(&mut a);
        let m = model(&a, &net);
        let log = EventLog::from_sequences(["CABEEG", "CABEHIEFG"].iter().map(|t| word(&mut a, t))).unwrap();
        let d = crate::build_dafsa(&log);
        let r = align_log(
            &m,
            &d,
            &log,
            &LogAlignOptions { mode: Mode::OneOptimal, memo: true, limits: SearchLimits::default() },
        );
        // The first wave holds one trace; the second resumes from its prefix.
        let resumed: Vec<_> = r.results.iter().map(|o| o.as_ref().unwrap().stats.resumed_from).collect();
        assert_eq!(resumed, [None, Some(4)]);
        let mut memo = MemoTables::new(Mode::OneOptimal);
        let first = &log.traces()[0].labels;
        let (o1, c) = align_trace(&m, &d, first, Mode::OneOptimal, Some(&memo), &SearchLimits::default()).unwrap();
        assert!(c.prefix_count() > 0);
        memo.merge(c);
        let second = &log.traces()[1].labels;
        let (o2, _) = align_trace(&m, &d, second, Mode::OneOptimal, Some(&memo), &SearchLimits::default()).unwrap();
        assert_eq!(o2.stats.resumed_from, Some(4));
        let plain = align_one_optimal(&m, &d, second, &SearchLimits::default()).unwrap();
        assert_eq!(o2.cost, plain.cost);
        assert_eq!(o1.cost, align_one_optimal(&m, &d, first, &SearchLimits::default()).unwrap().cost);
    }

    #[test]
    fn budget_is_enforced() {
        let mut a = Alphabet::new();
        let net = samples::running_example(&mut a);
        let m = model(&a, &net);
        let trace = word(&mut a, "HHHHIIIIAAAA");
        let d = Dafsa::from_words([trace.as_slice()]);
        let limits = SearchLimits { expansion_budget: 3, ..SearchLimits::default() };
        assert_eq!(align_one_optimal(&m, &d, &trace, &limits), Err(AlignError::Budget { expanded: 3 }));
        let stop = || true;
        let limits = SearchLimits { interrupt: Some(&stop), ..SearchLimits::default() };
        assert!(matches!(align_one_optimal(&m, &d, &trace, &limits), Err(AlignError::Interrupted { .. })));
    }

    #[test]
    fn psp_holds_every_optimum() {
        let mut a = Alphabet::new();
        let net = samples::running_example(&mut a);
        let m = model(&a, &net);
        let log = EventLog::from_sequences([word(&mut a, "BDCEG")]).unwrap();
        let d = crate::build_dafsa(&log);
        let r = align_all_optimal(&m, &d, &log, &SearchLimits::default());
        let mut from_psp = r.psp.alignments(100).unwrap();
        let mut direct = r.results[0].as_ref().unwrap().alignments.clone();
        from_psp.sort_by(|x, y| x.moves.cmp(&y.moves));
        direct.sort_by(|x, y| x.moves.cmp(&y.moves));
        assert_eq!(from_psp, direct);
        for &f in r.psp.finals() {
            assert_eq!(r.psp.out_arcs(f).count(), 0);
        }
    }
}
