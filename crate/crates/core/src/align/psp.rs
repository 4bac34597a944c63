//! The automaton collecting all returned alignments of a log.

use alloc::vec::Vec;

use hashbrown::{HashMap, HashSet};
use rustc_hash::FxBuildHasher;

use super::search::{AlignError, SearchOutcome};
use super::{Alignment, Move, Op};
use crate::dafsa::{Dafsa, StateId, TracePath};
use crate::log::EventLog;
use crate::rg::{MarkingId, ReachabilityGraph};

/// `terminal` separates the end of an alignment from an inner node with the
/// same coordinates, so final nodes have no outgoing arcs.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub struct PspNode {
    pub dafsa_state: StateId,
    pub marking: MarkingId,
    pub pos: u32,
    pub terminal: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub struct PspArc {
    pub source: u32,
    pub mv: Move,
    pub target: u32,
}

#[derive(Clone, Debug)]
pub struct Psp {
    nodes: Vec<PspNode>,
    arcs: Vec<PspArc>,
    out: Vec<Vec<u32>>,
    index: HashMap<PspNode, u32, FxBuildHasher>,
    arc_index: HashSet<PspArc, FxBuildHasher>,
    finals: Vec<u32>,
}

impl Psp {
    pub fn new(dafsa_initial: StateId, rg_initial: MarkingId) -> Self {
        let mut p = Psp {
            nodes: Vec::new(),
            arcs: Vec::new(),
            out: Vec::new(),
            index: HashMap::default(),
            arc_index: HashSet::default(),
            finals: Vec::new(),
        };
        p.node(PspNode { dafsa_state: dafsa_initial, marking: rg_initial, pos: 0, terminal: false });
        p
    }

    fn node(&mut self, n: PspNode) -> u32 {
        if let Some(&i) = self.index.get(&n) {
            return i;
        }
        let i = self.nodes.len() as u32;
        self.nodes.push(n);
        self.out.push(Vec::new());
        self.index.insert(n, i);
        if n.terminal {
            self.finals.push(i);
        }
        i
    }

    /// Merges one alignment of the trace whose DAFSA path is `path`.
    pub fn insert(&mut self, path: &TracePath, rg: &ReachabilityGraph, al: &Alignment) {
        if al.moves.is_empty() {
            if !self.finals.contains(&0) {
                self.finals.push(0);
            }
            return;
        }
        let (mut pos, mut m) = (0usize, rg.initial());
        let mut cur = 0u32;
        for (i, mv) in al.moves.iter().enumerate() {
            if mv.op != Op::RHide {
                pos += 1;
            }
            if let Some(a) = mv.rg_arc {
                m = rg.arc(a).target;
            }
            let next = self.node(PspNode {
                dafsa_state: path.states[pos],
                marking: m,
                pos: pos as u32,
                terminal: i + 1 == al.moves.len(),
            });
            let arc = PspArc { source: cur, mv: *mv, target: next };
            if self.arc_index.insert(arc) {
                self.out[cur as usize].push(self.arcs.len() as u32);
                self.arcs.push(arc);
            }
            cur = next;
        }
    }

    pub fn initial(&self) -> u32 {
        0
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn nodes(&self) -> &[PspNode] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[PspArc] {
        &self.arcs
    }

    pub fn out_arcs(&self, n: u32) -> impl Iterator<Item = &PspArc> + '_ {
        self.out[n as usize].iter().map(|&a| &self.arcs[a as usize])
    }

    pub fn finals(&self) -> &[u32] {
        &self.finals
    }

    pub fn is_final(&self, n: u32) -> bool {
        self.finals.contains(&n)
    }

    /// Every initial-to-final path, or `None` past `limit` paths.
    pub fn alignments(&self, limit: usize) -> Option<Vec<Alignment>> {
        let mut out = Vec::new();
        let mut stack: Vec<(u32, usize)> = alloc::vec![(0, 0)];
        let mut moves: Vec<Move> = Vec::new();
        if self.is_final(0) {
            out.push(Alignment::new(Vec::new()));
        }
        while let Some(&mut (n, ref mut i)) = stack.last_mut() {
            let outs = &self.out[n as usize];
            if *i == outs.len() {
                stack.pop();
                moves.pop();
                continue;
            }
            let arc = self.arcs[outs[*i] as usize];
            *i += 1;
            moves.push(arc.mv);
            if self.nodes[arc.target as usize].terminal {
                if out.len() == limit {
                    return None;
                }
                out.push(Alignment::new(moves.clone()));
                moves.pop();
            } else {
                stack.push((arc.target, 0));
            }
        }
        Some(out)
    }
}

/// PSP over every successfully aligned trace, in log order.
pub fn build_psp(
    dafsa: &Dafsa,
    rg: &ReachabilityGraph,
    log: &EventLog,
    results: &[Result<SearchOutcome, AlignError>],
) -> Psp {
    let mut psp = Psp::new(dafsa.initial(), rg.initial());
    for (t, r) in log.traces().iter().zip(results) {
        if let (Ok(o), Some(path)) = (r, dafsa.path(&t.labels)) {
            for al in &o.alignments {
                psp.insert(&path, rg, al);
            }
        }
    }
    psp
}
