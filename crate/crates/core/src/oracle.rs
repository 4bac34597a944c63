//! Brute-force reference solver: uniform-cost search over (trace position,
//! marking) pairs. Deliberately shares nothing with the A* engine.

use alloc::collections::{BTreeSet, BinaryHeap};
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::fmt;

use crate::label::LabelId;
use crate::marking::Marking;
use crate::net::SystemNet;
use crate::rg::{MarkingId, ReachabilityGraph, RgArc, RgArcId};

pub const PRODUCT_LIMIT: usize = 1_000_000;

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum StepKind {
    Sync,
    LogOnly,
    ModelOnly,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub struct Step {
    pub kind: StepKind,
    pub label: LabelId,
    pub arc: Option<RgArcId>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum OracleError {
    TooLarge {
        product: usize,
    },
    /// No final marking is reachable at all.
    NoSolution,
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::TooLarge { product } => write!(f, "product of {product} states exceeds the oracle limit"),
            OracleError::NoSolution => write!(f, "no final marking is reachable"),
        }
    }
}

impl core::error::Error for OracleError {}

fn step_cost(kind: StepKind, label: LabelId) -> u32 {
    match kind {
        StepKind::Sync => 0,
        StepKind::LogOnly => 1,
        StepKind::ModelOnly => !label.is_tau() as u32,
    }
}

struct Product<'a> {
    trace: &'a [LabelId],
    markings: usize,
    arcs: &'a [RgArc],
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
}

impl<'a> Product<'a> {
    fn new(trace: &'a [LabelId], markings: usize, arcs: &'a [RgArc]) -> Result<Self, OracleError> {
        let product = (trace.len() + 1) * markings;
        if product > PRODUCT_LIMIT {
            return Err(OracleError::TooLarge { product });
        }
        let mut out = alloc::vec![Vec::new(); markings];
        let mut inc = alloc::vec![Vec::new(); markings];
        for (i, a) in arcs.iter().enumerate() {
            out[a.source as usize].push(i);
            inc[a.target as usize].push(i);
        }
        Ok(Product { trace, markings, arcs, out, inc })
    }

    fn idx(&self, pos: usize, m: MarkingId) -> usize {
        pos * self.markings + m as usize
    }

    /// Successors (or predecessors when `backward`) of a product state.
    fn moves(&self, pos: usize, m: MarkingId, backward: bool, f: &mut impl FnMut(usize, MarkingId, Step)) {
        let n = self.trace.len();
        if !backward && pos < n {
            f(pos + 1, m, Step { kind: StepKind::LogOnly, label: self.trace[pos], arc: None });
        }
        if backward && pos > 0 {
            f(pos - 1, m, Step { kind: StepKind::LogOnly, label: self.trace[pos - 1], arc: None });
        }
        let list = if backward { &self.inc[m as usize] } else { &self.out[m as usize] };
        for &a in list {
            let arc = &self.arcs[a];
            let other = if backward { arc.source } else { arc.target };
            let l = arc.label.visible;
            f(pos, other, Step { kind: StepKind::ModelOnly, label: l, arc: Some(a as RgArcId) });
            let sync = if backward { pos > 0 && self.trace[pos - 1] == l } else { pos < n && self.trace[pos] == l };
            if sync && !l.is_tau() {
                let p2 = if backward { pos - 1 } else { pos + 1 };
                f(p2, other, Step { kind: StepKind::Sync, label: l, arc: Some(a as RgArcId) });
            }
        }
    }

    /// Distances from the sources (forward) or to the goals (backward).
    fn dijkstra(&self, sources: &[(usize, MarkingId)], backward: bool) -> (Vec<u32>, Vec<Option<(usize, Step)>>) {
        let size = (self.trace.len() + 1) * self.markings;
        let mut dist = alloc::vec![u32::MAX; size];
        let mut parent = alloc::vec![None; size];
        let mut heap = BinaryHeap::new();
        for &(p, m) in sources {
            let i = self.idx(p, m);
            dist[i] = 0;
            heap.push(Reverse((0u32, i)));
        }
        while let Some(Reverse((d, i))) = heap.pop() {
            if d > dist[i] {
                continue;
            }
            let (pos, m) = (i / self.markings, (i % self.markings) as MarkingId);
            self.moves(pos, m, backward, &mut |p2, m2, step| {
                let j = self.idx(p2, m2);
                let nd = d + step_cost(step.kind, step.label);
                if nd < dist[j] {
                    dist[j] = nd;
                    parent[j] = Some((i, step));
                    heap.push(Reverse((nd, j)));
                }
            });
        }
        (dist, parent)
    }
}

/// Cost of an optimal alignment between `trace` and the graph, with one witness.
pub fn brute_force_optimal_cost(trace: &[LabelId], rg: &ReachabilityGraph) -> Result<(u32, Vec<Step>), OracleError> {
    optimal_on_arcs(trace, rg.num_markings(), rg.arcs(), &[rg.initial()], rg.finals())
}

/// Same search on a bare arc list with explicit start and goal markings.
pub fn optimal_on_arcs(
    trace: &[LabelId],
    markings: usize,
    arcs: &[RgArc],
    starts: &[MarkingId],
    goals: &[MarkingId],
) -> Result<(u32, Vec<Step>), OracleError> {
    let prod = Product::new(trace, markings, arcs)?;
    let sources: Vec<(usize, MarkingId)> = starts.iter().map(|&m| (0, m)).collect();
    let (dist, parent) = prod.dijkstra(&sources, false);
    let n = trace.len();
    let best = goals.iter().map(|&f| (dist[prod.idx(n, f)], f)).min().filter(|(d, _)| *d != u32::MAX);
    let Some((cost, f)) = best else {
        return Err(OracleError::NoSolution);
    };
    let mut steps = Vec::new();
    let mut i = prod.idx(n, f);
    while let Some((j, s)) = parent[i] {
        steps.push(s);
        i = j;
    }
    steps.reverse();
    Ok((cost, steps))
}

/// The optimal cost and every optimal step sequence.
pub type OptimalSteps = (u32, Vec<Vec<Step>>);

/// Every optimal alignment, as step sequences, for a silent-free graph.
/// Returns `None` when there are more than `limit` of them.
pub fn all_optimal_alignments(
    trace: &[LabelId],
    rg: &ReachabilityGraph,
    limit: usize,
) -> Result<Option<OptimalSteps>, OracleError> {
    assert_eq!(rg.tau_arc_count(), 0, "enumeration needs a silent-free graph");
    let prod = Product::new(trace, rg.num_markings(), rg.arcs())?;
    let n = trace.len();
    let (fwd, _) = prod.dijkstra(&[(0, rg.initial())], false);
    let goals: Vec<(usize, MarkingId)> = rg.finals().iter().map(|&f| (n, f)).collect();
    let (bwd, _) = prod.dijkstra(&goals, true);
    let start = prod.idx(0, rg.initial());
    let cost = bwd[start];
    if cost == u32::MAX {
        return Err(OracleError::NoSolution);
    }
    let mut out = Vec::new();
    let mut path = Vec::new();
    let mut overflow = false;
    #[allow(clippy::too_many_arguments)]
    fn walk(
        prod: &Product<'_>,
        fwd: &[u32],
        bwd: &[u32],
        cost: u32,
        pos: usize,
        m: MarkingId,
        path: &mut Vec<Step>,
        out: &mut Vec<Vec<Step>>,
        limit: usize,
        overflow: &mut bool,
        is_final: &dyn Fn(MarkingId) -> bool,
    ) {
        if *overflow {
            return;
        }
        if pos == prod.trace.len() && is_final(m) && fwd[prod.idx(pos, m)] == cost {
            if out.len() == limit {
                *overflow = true;
                return;
            }
            out.push(path.clone());
        }
        let here = fwd[prod.idx(pos, m)];
        let mut next = Vec::new();
        prod.moves(pos, m, false, &mut |p2, m2, s| next.push((p2, m2, s)));
        for (p2, m2, s) in next {
            let j = prod.idx(p2, m2);
            let c = step_cost(s.kind, s.label);
            if bwd[j] != u32::MAX && here + c + bwd[j] == cost && fwd[j] == here + c {
                path.push(s);
                walk(prod, fwd, bwd, cost, p2, m2, path, out, limit, overflow, is_final);
                path.pop();
            }
        }
    }
    let is_final = |m: MarkingId| rg.is_final(m);
    walk(&prod, &fwd, &bwd, cost, 0, rg.initial(), &mut path, &mut out, limit, &mut overflow, &is_final);
    Ok((!overflow).then_some((cost, out)))
}

/// Whether the net can fire some sequence whose visible labels spell
/// `labels` and which ends in a final marking. Silent transitions are
/// closed over between visible steps. `None` if the explored marking sets
/// grow past `cap`.
pub fn net_replays(net: &SystemNet, labels: &[LabelId], cap: usize) -> Option<bool> {
    let closure = |set: BTreeSet<Marking>| -> Option<BTreeSet<Marking>> {
        let mut all = set.clone();
        let mut stack: Vec<Marking> = set.into_iter().collect();
        while let Some(m) = stack.pop() {
            for t in 0..net.num_transitions() as u32 {
                if net.transition(t).label.is_tau() && net.enabled(&m, t) {
                    let m2 = net.fire(&m, t).ok()?;
                    if all.insert(m2.clone()) {
                        stack.push(m2);
                    }
                }
            }
            if all.len() > cap {
                return None;
            }
        }
        Some(all)
    };
    let mut current = closure(BTreeSet::from([net.initial().clone()]))?;
    for &l in labels {
        let mut next = BTreeSet::new();
        for m in &current {
            for t in net.transitions_labelled(l) {
                if net.enabled(m, t) {
                    next.insert(net.fire(m, t).ok()?);
                }
            }
        }
        current = closure(next)?;
        if current.is_empty() {
            return Some(false);
        }
    }
    Some(current.iter().any(|m| net.finals().contains(m)))
}
