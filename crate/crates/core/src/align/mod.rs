//! Optimal alignments in the product of the log automaton and a silent-free
//! reachability graph.

mod heuristic;
mod memo;
mod psp;
mod search;

pub use heuristic::{FutureLabelTable, FutureMultiset, TraceCounts, DEFAULT_FUTURE_CAP};
pub use memo::{Completion, MemoContribution, MemoTables, SuffixEntry};
pub use psp::{build_psp, Psp, PspArc, PspNode};
pub use search::{
    align_all_optimal, align_all_optimal_memoized, align_log, align_one_optimal, align_trace, waves, AlignError,
    AlignModel, LogAlignOptions, LogAlignment, Mode, SearchLimits, SearchOutcome, SearchStats,
    DEFAULT_EXPANSION_BUDGET, DEFAULT_OPTIMA_LIMIT, WAVE_SIZE,
};

use alloc::vec::Vec;

use crate::dafsa::DafsaArcId;
use crate::label::LabelId;
use crate::rg::{ReachabilityGraph, RgArcId};

#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Op {
    Match,
    /// Log-only step.
    LHide,
    /// Model-only step.
    RHide,
}

impl Op {
    /// Tie-break precedence: match, then rhide, then lhide.
    #[inline]
    pub fn rank(self) -> u8 {
        match self {
            Op::Match => 0,
            Op::RHide => 1,
            Op::LHide => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Op::Match => "match",
            Op::LHide => "lhide",
            Op::RHide => "rhide",
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Move {
    pub op: Op,
    pub label: LabelId,
    pub dafsa_arc: Option<DafsaArcId>,
    pub rg_arc: Option<RgArcId>,
}

impl Move {
    #[inline]
    pub fn cost(&self) -> u32 {
        (self.op != Op::Match && !self.label.is_tau()) as u32
    }

    pub fn consumes_event(&self) -> bool {
        self.op != Op::RHide
    }
}

/// Non-match moves with a visible label.
pub fn alignment_cost(moves: &[Move]) -> u32 {
    moves.iter().map(Move::cost).sum()
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Alignment {
    pub moves: Vec<Move>,
    pub cost: u32,
}

impl Alignment {
    pub fn new(moves: Vec<Move>) -> Self {
        let cost = alignment_cost(&moves);
        Alignment { moves, cost }
    }

    pub fn log_projection(&self) -> Vec<LabelId> {
        self.moves.iter().filter(|m| m.consumes_event()).map(|m| m.label).collect()
    }

    pub fn model_projection(&self) -> Vec<LabelId> {
        self.moves.iter().filter(|m| m.op != Op::LHide).map(|m| m.label).collect()
    }

    pub fn count(&self, op: Op) -> usize {
        self.moves.iter().filter(|m| m.op == op).count()
    }

    /// Spells `trace` on the log side and walks the graph from its initial
    /// marking to a final one on the model side.
    pub fn is_proper(&self, trace: &[LabelId], rg: &ReachabilityGraph) -> bool {
        if self.log_projection() != trace {
            return false;
        }
        let mut m = rg.initial();
        for mv in &self.moves {
            match (mv.op, mv.rg_arc) {
                (Op::LHide, None) => {}
                (Op::LHide, Some(_)) => return false,
                (_, None) => return false,
                (_, Some(a)) => {
                    let arc = rg.arc(a);
                    if arc.source != m || arc.label.visible != mv.label {
                        return false;
                    }
                    m = arc.target;
                }
            }
        }
        rg.is_final(m) && self.cost == alignment_cost(&self.moves)
    }
}
