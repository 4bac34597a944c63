//! Aligning against S-components and stitching the projected alignments back
//! into one alignment of the whole net.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec::Vec;
use core::fmt;

use crate::align::{AlignError, AlignModel, Move, Op};
use crate::label::{LabelId, LabelSet};
use crate::net::TransitionId;
use crate::rg::{build_rg, remove_tau_extended, ReachabilityGraph, RgArcId, RgError};
use crate::scomp::{Decomposition, SComponent};

/// One component's silent-free graph with extended labels.
#[derive(Clone, Debug)]
pub struct ComponentModel {
    pub alphabet: LabelSet,
    pub model: AlignModel,
    /// Silent transitions of the component, as sorted net transition ids.
    pub silent: Vec<TransitionId>,
    /// Silent transitions leading from the initial marking to a final one
    /// when the initial marking is final only after silent steps.
    pub initial_exit: Vec<TransitionId>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ComponentError {
    Rg { component: usize, error: RgError },
    Align { component: usize, error: AlignError },
}

impl fmt::Display for ComponentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentError::Rg { component, error } => write!(f, "component {component}: {error}"),
            ComponentError::Align { component, error } => write!(f, "component {component}: {error}"),
        }
    }
}

impl core::error::Error for ComponentError {}

impl ComponentModel {
    pub fn build(c: &SComponent, ranks: Vec<u32>, cap: usize) -> Result<Self, ComponentError> {
        let full = build_rg(&c.net, cap).map_err(|error| ComponentError::Rg { component: c.index, error })?;
        let rg = remove_tau_extended(&full).map_err(|error| ComponentError::Rg { component: c.index, error })?;
        let model = AlignModel::new(rg, ranks).map_err(|error| ComponentError::Align { component: c.index, error })?;
        let mut silent: Vec<TransitionId> =
            c.net.transitions().iter().filter(|t| t.label.is_tau()).map(|t| t.origin).collect();
        silent.sort_unstable();
        silent.dedup();
        let initial_exit = silent_path_to_final(&full);
        Ok(ComponentModel { alphabet: c.alphabet.clone(), model, silent, initial_exit })
    }

    /// Markings plus arcs.
    pub fn size(&self) -> usize {
        self.model.rg().size()
    }
}

/// Breadth-first silent path from the initial marking to a final one; empty
/// if the initial marking is final or no such path exists.
fn silent_path_to_final(rg: &ReachabilityGraph) -> Vec<TransitionId> {
    let n = rg.num_markings();
    let mut via: Vec<Option<RgArcId>> = alloc::vec![None; n];
    let mut seen = alloc::vec![false; n];
    let mut queue = VecDeque::from([rg.initial()]);
    seen[rg.initial() as usize] = true;
    while let Some(m) = queue.pop_front() {
        if rg.is_final(m) {
            let mut path = Vec::new();
            let mut cur = m;
            while let Some(a) = via[cur as usize] {
                let arc = rg.arc(a);
                path.extend(arc.label.tau_trail.iter().rev());
                cur = arc.source;
            }
            path.reverse();
            return path;
        }
        for &a in rg.out_arcs(m) {
            let arc = rg.arc(a);
            if arc.label.visible.is_tau() && !seen[arc.target as usize] {
                seen[arc.target as usize] = true;
                via[arc.target as usize] = Some(a);
                queue.push_back(arc.target);
            }
        }
    }
    Vec::new()
}

pub fn component_models(d: &Decomposition, ranks: &[u32], cap: usize) -> Result<Vec<ComponentModel>, ComponentError> {
    d.components.iter().map(|c| ComponentModel::build(c, ranks.to_vec(), cap)).collect()
}

#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub enum Conflict {
    /// No label lets the lagging components catch up together.
    Order,
    /// Owners of an event disagree between match and lhide.
    Operation,
    /// Owners agree on a move but reached it through different silent
    /// transitions.
    ExtendedLabel,
    /// The composed model run does not replay on the net.
    Replay,
}

impl Conflict {
    pub fn as_str(self) -> &'static str {
        match self {
            Conflict::Order => "order",
            Conflict::Operation => "operation",
            Conflict::ExtendedLabel => "extended-label",
            Conflict::Replay => "replay",
        }
    }
}

/// A move of the recomposed alignment; `parts` lists the component arcs it
/// synchronizes.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ComposedMove {
    pub op: Op,
    pub label: LabelId,
    pub tau_trail: Vec<TransitionId>,
    pub parts: Vec<(usize, RgArcId)>,
}

impl ComposedMove {
    pub fn cost(&self) -> u32 {
        (self.op != Op::Match && !self.label.is_tau()) as u32
    }
}

pub fn composed_cost(moves: &[ComposedMove]) -> u32 {
    moves.iter().map(ComposedMove::cost).sum()
}

pub fn log_projection(moves: &[ComposedMove]) -> Vec<LabelId> {
    moves.iter().filter(|m| m.op != Op::RHide).map(|m| m.label).collect()
}

pub fn model_projection(moves: &[ComposedMove]) -> Vec<LabelId> {
    moves.iter().filter(|m| m.op != Op::LHide).map(|m| m.label).collect()
}

/// A common silent trail and the component arcs it was read from.
type Synced = (Vec<TransitionId>, Vec<(usize, RgArcId)>);

struct Cursors<'a> {
    comps: &'a [ComponentModel],
    projected: &'a [&'a [Move]],
    at: Vec<usize>,
}

impl Cursors<'_> {
    fn next(&self, i: usize) -> Option<&Move> {
        self.projected[i].get(self.at[i])
    }

    fn owners(&self, l: LabelId) -> impl Iterator<Item = usize> + '_ {
        (0..self.comps.len()).filter(move |&i| self.comps[i].alphabet.contains(l))
    }

    /// The owners' common trail and arcs, or a conflict if trails differ.
    fn sync(&self, owners: &[usize]) -> Result<Synced, Conflict> {
        let mut trail: Option<&[TransitionId]> = None;
        let mut parts = Vec::new();
        for &i in owners {
            let Some(a) = self.next(i).and_then(|m| m.rg_arc) else { continue };
            let t = &self.comps[i].model.rg().arc(a).label.tau_trail;
            match trail {
                Some(x) if x != t.as_slice() => return Err(Conflict::ExtendedLabel),
                _ => trail = Some(t),
            }
            parts.push((i, a));
        }
        Ok((trail.unwrap_or_default().to_vec(), parts))
    }

    fn advance(&mut self, owners: &[usize]) {
        for &i in owners {
            self.at[i] += 1;
        }
    }

    /// Whether some component must still replay model moves before the
    /// next event `l` (or, for `None`, before the end).
    fn lagging(&self, l: Option<LabelId>) -> bool {
        (0..self.comps.len()).any(|i| match (l, self.next(i)) {
            (None, next) => next.is_some(),
            (Some(l), next) => {
                self.comps[i].alphabet.contains(l) && !next.is_some_and(|m| m.label == l && m.op != Op::RHide)
            }
        })
    }

    /// Composes rhide moves until no component lags behind `l`.
    fn catch_up(&mut self, l: Option<LabelId>, ranks: &[u32], out: &mut Vec<ComposedMove>) -> Result<(), Conflict> {
        let rank = |x: LabelId| ranks.get(x.index()).copied().unwrap_or(x.0);
        while self.lagging(l) {
            let mut best: Option<LabelId> = None;
            for i in 0..self.comps.len() {
                let Some(mv) = self.next(i) else { continue };
                if mv.op != Op::RHide || best.is_some_and(|b| rank(b) <= rank(mv.label)) {
                    continue;
                }
                let x = mv.label;
                if self.owners(x).all(|j| self.next(j).is_some_and(|m| m.op == Op::RHide && m.label == x)) {
                    best = Some(x);
                }
            }
            let x = best.ok_or(Conflict::Order)?;
            let owners: Vec<usize> = self.owners(x).collect();
            let (tau_trail, parts) = self.sync(&owners)?;
            out.push(ComposedMove { op: Op::RHide, label: x, tau_trail, parts });
            self.advance(&owners);
        }
        Ok(())
    }
}

/// Replays the projected alignments along `trace`. `projected[i]` aligns
/// the projection of `trace` onto component `i`.
pub fn recompose(
    trace: &[LabelId],
    comps: &[ComponentModel],
    projected: &[&[Move]],
    ranks: &[u32],
) -> Result<Vec<ComposedMove>, Conflict> {
    let mut c = Cursors { comps, projected, at: alloc::vec![0; comps.len()] };
    let mut out = Vec::new();
    for &l in trace {
        c.catch_up(Some(l), ranks, &mut out)?;
        let owners: Vec<usize> = c.owners(l).collect();
        let ops: Vec<Op> = owners.iter().filter_map(|&i| c.next(i).map(|m| m.op)).collect();
        let op = if ops.iter().all(|&o| o == Op::LHide) {
            Op::LHide
        } else if ops.iter().all(|&o| o == Op::Match) {
            Op::Match
        } else {
            return Err(Conflict::Operation);
        };
        let (tau_trail, parts) = if op == Op::Match { c.sync(&owners)? } else { (Vec::new(), Vec::new()) };
        out.push(ComposedMove { op, label: l, tau_trail, parts });
        c.advance(&owners);
    }
    c.catch_up(None, ranks, &mut out)?;
    check_silent_counts(comps, projected)?;
    Ok(out)
}

/// Firings of each silent transition along a component's projected run,
/// including the silent exit when the run ends in the initial marking.
fn silent_counts(c: &ComponentModel, moves: &[Move]) -> BTreeMap<TransitionId, u32> {
    let rg = c.model.rg();
    let mut counts = BTreeMap::new();
    let mut last = rg.initial();
    let mut bump = |t: TransitionId| {
        if c.silent.binary_search(&t).is_ok() {
            *counts.entry(t).or_insert(0) += 1;
        }
    };
    for a in moves.iter().filter_map(|m| m.rg_arc) {
        let arc = rg.arc(a);
        arc.label.tau_trail.iter().for_each(|&t| bump(t));
        last = arc.target;
    }
    if last == rg.initial() {
        c.initial_exit.iter().for_each(|&t| bump(t));
    }
    counts
}

/// Components sharing a silent transition must fire it equally often; the
/// trail comparison alone misses silent choices not tied to a shared label.
fn check_silent_counts(comps: &[ComponentModel], projected: &[&[Move]]) -> Result<(), Conflict> {
    let counts: Vec<BTreeMap<TransitionId, u32>> =
        comps.iter().zip(projected).map(|(c, p)| silent_counts(c, p)).collect();
    for i in 0..comps.len() {
        for j in i + 1..comps.len() {
            for &t in &comps[i].silent {
                if comps[j].silent.binary_search(&t).is_ok()
                    && counts[i].get(&t).unwrap_or(&0) != counts[j].get(&t).unwrap_or(&0)
                {
                    return Err(Conflict::ExtendedLabel);
                }
            }
        }
    }
    Ok(())
}

/// Worst-case extra cost of a recomposed alignment: the number of
/// components times the largest count in `trace` of a label some component
/// does not own.
pub fn over_approximation_bound(trace: &[LabelId], comps: &[ComponentModel]) -> u32 {
    let mut labels: Vec<LabelId> = trace.to_vec();
    labels.sort_unstable();
    let mut max = 0u32;
    for run in labels.chunk_by(|a, b| a == b) {
        if !comps.iter().all(|c| c.alphabet.contains(run[0])) {
            max = max.max(run.len() as u32);
        }
    }
    comps.len() as u32 * max
}

#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub enum Strategy {
    Monolithic,
    SComponent,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Monolithic => "monolithic",
            Strategy::SComponent => "scomponent",
        }
    }
}

/// Decomposed iff the components' total graph size is strictly below the
/// full graph's. `None` for the full graph means it exceeded its cap; `None`
/// for the components means decomposition failed.
pub fn hybrid_select(global_size: Option<usize>, component_total: Option<usize>) -> Strategy {
    match (global_size, component_total) {
        (_, None) => Strategy::Monolithic,
        (None, Some(_)) => Strategy::SComponent,
        (Some(g), Some(c)) if c < g => Strategy::SComponent,
        _ => Strategy::Monolithic,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::{align_one_optimal, SearchLimits};
    use crate::dafsa::Dafsa;
    use crate::label::Alphabet;
    use crate::log::project_labels;
    use crate::oracle::{brute_force_optimal_cost, net_replays};
    use crate::rg::{remove_tau, DEFAULT_MARKING_CAP};
    use crate::samples::{self, word};
    use crate::scomp::decompose;
    use crate::SystemNet;
    use alloc::string::String;

    fn run(
        a: &Alphabet,
        net: &SystemNet,
        trace: &[LabelId],
    ) -> (Vec<ComponentModel>, Result<Vec<ComposedMove>, Conflict>) {
        let d = decompose(net).unwrap();
        let comps = component_models(&d, &a.ranks(), DEFAULT_MARKING_CAP).unwrap();
        let projected: Vec<Vec<Move>> = comps
            .iter()
            .map(|c| {
                let p = project_labels(trace, &c.alphabet);
                let dafsa = Dafsa::from_words([p.as_slice()]);
                let o = align_one_optimal(&c.model, &dafsa, &p, &SearchLimits::default()).unwrap();
                o.alignments[0].moves.clone()
            })
            .collect();
        let refs: Vec<&[Move]> = projected.iter().map(Vec::as_slice).collect();
        let r = recompose(trace, &comps, &refs, &a.ranks());
        (comps, r)
    }

    fn show(a: &Alphabet, moves: &[ComposedMove]) -> String {
        let mut s = String::new();
        for m in moves {
            let op = match m.op {
                Op::Match => 'm',
                Op::LHide => 'l',
                Op::RHide => 'r',
            };
            s.push_str(&alloc::format!("{op}({}) ", a.name(m.label)));
        }
        s.trim_end().into()
    }

    #[test]
    fn running_example_recomposes_without_conflict() {
        let mut a = Alphabet::new();
        let net = samples::running_example(&mut a);
        let trace = word(&mut a, "BDAEFG");
        let (_, r) = run(&a, &net, &trace);
        let moves = r.unwrap();
        assert_eq!(show(&a, &moves), "m(B) m(D) m(A) r(C) m(E) m(F) l(G)");
        assert_eq!(composed_cost(&moves), 2);
        assert_eq!(log_projection(&moves), trace);
        assert_eq!(net_replays(&net, &model_projection(&moves), 10_000), Some(true));
    }

    #[test]
    fn merge_before_parallel_overapproximates() {
        let mut a = Alphabet::new();
        let net = samples::two_branch(&mut a);
        let trace = word(&mut a, "CAB");
        let (comps, r) = run(&a, &net, &trace);
        let moves = r.unwrap();
        assert_eq!(show(&a, &moves), "r(A) r(B) m(C) l(A) l(B)");
        assert_eq!(composed_cost(&moves), 4);
        let rg = remove_tau(&build_rg(&net, DEFAULT_MARKING_CAP).unwrap()).unwrap();
        assert_eq!(brute_force_optimal_cost(&trace, &rg).unwrap().0, 2);
        assert_eq!(over_approximation_bound(&trace, &comps), 2);
    }

    #[test]
    fn hidden_choice_is_an_extended_label_conflict() {
        let mut a = Alphabet::new();
        let net = samples::skippable_parallel(&mut a);
        let trace = word(&mut a, "ABD");
        let (_, r) = run(&a, &net, &trace);
        assert_eq!(r, Err(Conflict::ExtendedLabel));
    }

    #[test]
    fn silent_skip_against_shared_split_conflicts() {
        // start -> end by a, by a silent skip, or by a silent split into b || c.
        let mut a = Alphabet::new();
        let (la, lb, lc) = (a.intern("a"), a.intern("b"), a.intern("c"));
        let mut b = crate::net::NetBuilder::new();
        let [start, end, p1, p2, p3, p4] = ["start", "end", "p1", "p2", "p3", "p4"].map(|n| b.place(n));
        let t = b.transition("a", la);
        b.connect(&[start], t, &[end]);
        let t = b.transition("split", LabelId::TAU);
        b.connect(&[start], t, &[p1, p2]);
        let t = b.transition("b", lb);
        b.connect(&[p1], t, &[p3]);
        let t = b.transition("c", lc);
        b.connect(&[p2], t, &[p4]);
        let t = b.transition("join", LabelId::TAU);
        b.connect(&[p3, p4], t, &[end]);
        let t = b.transition("skip", LabelId::TAU);
        b.connect(&[start], t, &[end]);
        let net = b.build_workflow().unwrap();
        let (_, r) = run(&a, &net, &[lc]);
        assert_eq!(r, Err(Conflict::ExtendedLabel));
        let (_, r) = run(&a, &net, &[lb, lc]);
        assert!(r.is_ok());
    }

    #[test]
    fn opposite_local_orders_conflict() {
        // Each component proposes rhide on a label the other owns.
        let comps_alpha = [[1u32, 2], [1, 2]];
        let mut a = Alphabet::new();
        let net = samples::sequence(&mut a, 2);
        let d = decompose(&net).unwrap();
        let mut comps = component_models(&d, &a.ranks(), DEFAULT_MARKING_CAP).unwrap();
        let c0 = comps[0].clone();
        comps.push(c0);
        for (c, al) in comps.iter_mut().zip(comps_alpha) {
            c.alphabet = al.iter().map(|&l| LabelId(l)).collect();
        }
        let r = |l| Move { op: Op::RHide, label: LabelId(l), dafsa_arc: None, rg_arc: None };
        let p0 = [r(1), r(2)];
        let p1 = [r(2), r(1)];
        assert_eq!(recompose(&[], &comps, &[&p0, &p1], &a.ranks()), Err(Conflict::Order));
    }

    #[test]
    fn hybrid_rule() {
        assert_eq!(hybrid_select(Some(1997), Some(583)), Strategy::SComponent);
        assert_eq!(hybrid_select(Some(875), Some(1532)), Strategy::Monolithic);
        assert_eq!(hybrid_select(Some(10), Some(10)), Strategy::Monolithic);
        assert_eq!(hybrid_select(None, Some(10)), Strategy::SComponent);
        assert_eq!(hybrid_select(Some(10), None), Strategy::Monolithic);
    }

    #[test]
    fn parallel_tasks_prefer_components() {
        let mut a = Alphabet::new();
        let net = samples::parallel_tasks(&mut a, 8);
        let rg = remove_tau(&build_rg(&net, DEFAULT_MARKING_CAP).unwrap()).unwrap();
        let d = decompose(&net).unwrap();
        let comps = component_models(&d, &a.ranks(), DEFAULT_MARKING_CAP).unwrap();
        assert_eq!(comps.len(), 8);
        let total: usize = comps.iter().map(ComponentModel::size).sum();
        assert_eq!(hybrid_select(Some(rg.size()), Some(total)), Strategy::SComponent);
    }
}
