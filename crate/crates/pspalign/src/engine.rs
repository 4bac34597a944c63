//! End-to-end alignment of a log: model preparation, strategy choice,
//! parallel search and recomposition.

use std::collections::HashMap;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use pspalign_core::align::{
    align_trace, build_psp, waves, AlignError, AlignModel, MemoTables, Mode, Move, Psp, SearchLimits, SearchOutcome,
    SearchStats, DEFAULT_EXPANSION_BUDGET, DEFAULT_OPTIMA_LIMIT,
};
use pspalign_core::log::project_labels;
use pspalign_core::oracle::net_replays;
use pspalign_core::recompose::{
    component_models, composed_cost, hybrid_select, model_projection, recompose, ComponentModel, ComposedMove,
    Conflict, Strategy,
};
use pspalign_core::rg::{build_rg, remove_tau, RgError, DEFAULT_MARKING_CAP};
use pspalign_core::scomp::decompose;
use pspalign_core::{build_dafsa, Alphabet, Dafsa, EventLog, LabelId, SystemNet};
use rayon::prelude::*;

/// Marking sets explored when checking a recomposed run against the net.
const REPLAY_CAP: usize = 100_000;

#[derive(Copy, Clone, PartialEq, Eq, Debug, Default)]
pub enum StrategyChoice {
    #[default]
    Auto,
    Monolithic,
    SComponent,
}

#[derive(Clone, Debug)]
pub struct EngineOptions {
    pub strategy: StrategyChoice,
    pub all_optimal: bool,
    pub memo: bool,
    /// 0 uses every core.
    pub threads: usize,
    pub trace_timeout: Option<Duration>,
    pub global_timeout: Option<Duration>,
    pub expansion_budget: u64,
    pub marking_cap: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            strategy: StrategyChoice::Auto,
            all_optimal: false,
            memo: true,
            threads: 0,
            trace_timeout: None,
            global_timeout: None,
            expansion_budget: DEFAULT_EXPANSION_BUDGET,
            marking_cap: DEFAULT_MARKING_CAP,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("invalid model: {0}")]
    InvalidNet(String),
    #[error("state space: {0}")]
    StateSpace(RgError),
    #[error("all-optimal alignment needs the monolithic strategy")]
    AllOptimalNeedsMonolithic,
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TraceAlignment {
    pub cost: u32,
    /// The reported alignment; the first optimum in all-optimal mode.
    pub moves: Vec<ComposedMove>,
    pub optima: usize,
    pub truncated: bool,
    pub stats: Option<SearchStats>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AlignedTrace {
    /// The strategy that produced the result; conflicts fall back to
    /// monolithic.
    pub strategy: Strategy,
    pub conflict: Option<Conflict>,
    pub result: Result<TraceAlignment, String>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Timings {
    pub model_ms: f64,
    pub align_ms: f64,
    pub total_ms: f64,
}

pub struct RunResult {
    /// Indexed like the log's traces.
    pub traces: Vec<AlignedTrace>,
    pub strategy: Strategy,
    /// Markings plus arcs of the silent-free graph of the whole net.
    pub global_size: Option<usize>,
    /// Why the net was not decomposed, when decomposition was attempted.
    pub decomposition_note: Option<String>,
    pub component_count: usize,
    pub component_size_total: Option<usize>,
    /// Cost of aligning the empty trace under the chosen strategy.
    pub min_model_skips: Option<u32>,
    pub global_timeout_hit: bool,
    pub timings: Timings,
    pub psp: Option<Psp>,
    pub global_model: Option<AlignModel>,
    pub dafsa: Dafsa,
}

/// 1 − cost / (|c| + minimal model skips), clamped to [0, 1].
pub fn fitness(cost: u32, trace_len: usize, min_model_skips: u32) -> f64 {
    let worst = trace_len as f64 + min_model_skips as f64;
    if worst == 0.0 {
        return if cost == 0 { 1.0 } else { 0.0 };
    }
    (1.0 - cost as f64 / worst).clamp(0.0, 1.0)
}

#[derive(Clone, Copy)]
struct Control {
    budget: u64,
    trace_timeout: Option<Duration>,
    deadline: Option<Instant>,
}

impl Control {
    fn with_limits<R>(&self, f: impl FnOnce(&SearchLimits<'_>) -> R) -> R {
        let trace_deadline = self.trace_timeout.map(|d| Instant::now() + d);
        let global = self.deadline;
        let stop = move || {
            let now = Instant::now();
            trace_deadline.is_some_and(|d| now >= d) || global.is_some_and(|d| now >= d)
        };
        let limits =
            SearchLimits { expansion_budget: self.budget, optima_limit: DEFAULT_OPTIMA_LIMIT, interrupt: Some(&stop) };
        f(&limits)
    }

    fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

fn describe(e: &AlignError) -> String {
    match e {
        AlignError::Interrupted { .. } | AlignError::Budget { .. } => format!("timeout: {e}"),
        _ => e.to_string(),
    }
}

/// Aligns every trace in [`waves`]; each wave reads the memo
/// tables as they stood before it, so results do not depend on threads.
fn align_waves(
    model: &AlignModel,
    dafsa: &Dafsa,
    log: &EventLog,
    mode: Mode,
    memo: bool,
    ctl: &Control,
) -> Vec<Result<SearchOutcome, AlignError>> {
    let mut tables = memo.then(|| MemoTables::new(mode));
    let mut results: Vec<Option<Result<SearchOutcome, AlignError>>> = vec![None; log.len()];
    let order = model.wave_order(log);
    for wave in waves(&order) {
        let outs: Vec<_> = wave
            .par_iter()
            .map(|&i| {
                ctl.with_limits(|limits| {
                    align_trace(model, dafsa, &log.traces()[i].labels, mode, tables.as_ref(), limits)
                })
            })
            .collect();
        for (&i, r) in wave.iter().zip(outs) {
            results[i] = Some(r.map(|(o, c)| {
                if let Some(t) = tables.as_mut() {
                    t.merge(c);
                }
                o
            }));
        }
    }
    results.into_iter().map(Option::unwrap).collect()
}

fn build_global(net: &SystemNet, alphabet: &Alphabet, cap: usize) -> Result<AlignModel, EngineError> {
    let rg = build_rg(net, cap).and_then(|rg| remove_tau(&rg)).map_err(|e| match e {
        RgError::Explosion { .. } => EngineError::StateSpace(e),
        other => EngineError::InvalidNet(other.to_string()),
    })?;
    AlignModel::new(rg, alphabet.ranks()).map_err(|e| EngineError::InvalidNet(e.to_string()))
}

fn build_components(net: &SystemNet, alphabet: &Alphabet, cap: usize) -> Result<Vec<ComponentModel>, String> {
    let d = decompose(net).map_err(|e| e.to_string())?;
    component_models(&d, &alphabet.ranks(), cap).map_err(|e| e.to_string())
}

fn monolithic_moves(model: &AlignModel, moves: &[Move]) -> Vec<ComposedMove> {
    moves
        .iter()
        .map(|m| ComposedMove {
            op: m.op,
            label: m.label,
            tau_trail: m.rg_arc.map(|a| model.rg().arc(a).label.tau_trail.clone()).unwrap_or_default(),
            parts: m.rg_arc.map(|a| vec![(0, a)]).unwrap_or_default(),
        })
        .collect()
}

fn one_trace_fallback(model: &AlignModel, trace: &[LabelId], ctl: &Control) -> Result<TraceAlignment, String> {
    let d = Dafsa::from_words([trace]);
    ctl.with_limits(|limits| align_trace(model, &d, trace, Mode::OneOptimal, None, limits))
        .map(|(o, _)| TraceAlignment {
            cost: o.cost,
            moves: monolithic_moves(model, &o.alignments[0].moves),
            optima: 1,
            truncated: false,
            stats: Some(o.stats),
        })
        .map_err(|e| describe(&e))
}

pub fn run(
    net: &SystemNet,
    alphabet: &Alphabet,
    log: &EventLog,
    opts: &EngineOptions,
) -> Result<RunResult, EngineError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| EngineError::Pool(e.to_string()))?;
    pool.install(|| run_in_pool(net, alphabet, log, opts))
}

fn run_in_pool(
    net: &SystemNet,
    alphabet: &Alphabet,
    log: &EventLog,
    opts: &EngineOptions,
) -> Result<RunResult, EngineError> {
    let t0 = Instant::now();
    let validation = net.validate();
    if !validation.workflow_ok {
        return Err(EngineError::InvalidNet(validation.problems.join("; ")));
    }
    let ctl = Control {
        budget: opts.expansion_budget,
        trace_timeout: opts.trace_timeout,
        deadline: opts.global_timeout.map(|d| t0 + d),
    };
    let cap = opts.marking_cap;
    let mut decomposition_note = None;
    let (global, comps, strategy) = match opts.strategy {
        StrategyChoice::Monolithic => (Some(build_global(net, alphabet, cap)?), None, Strategy::Monolithic),
        StrategyChoice::SComponent => {
            if opts.all_optimal {
                return Err(EngineError::AllOptimalNeedsMonolithic);
            }
            match build_components(net, alphabet, cap) {
                Ok(c) => (None, Some(c), Strategy::SComponent),
                Err(e) => {
                    decomposition_note = Some(e);
                    (Some(build_global(net, alphabet, cap)?), None, Strategy::Monolithic)
                }
            }
        }
        StrategyChoice::Auto => {
            let global = match build_global(net, alphabet, cap) {
                Ok(m) => Some(m),
                Err(EngineError::StateSpace(_)) => None,
                Err(e) => return Err(e),
            };
            let comps = if opts.all_optimal {
                None
            } else {
                build_components(net, alphabet, cap).map_err(|e| decomposition_note = Some(e)).ok()
            };
            let total = comps.as_ref().map(|c: &Vec<ComponentModel>| c.iter().map(ComponentModel::size).sum());
            let strategy = hybrid_select(global.as_ref().map(|m| m.rg().size()), total);
            if global.is_none() && strategy == Strategy::Monolithic {
                // Neither path is available.
                return Err(EngineError::StateSpace(RgError::Explosion { cap }));
            }
            (global, comps, strategy)
        }
    };
    let global_size = global.as_ref().map(|m| m.rg().size());
    let component_count = comps.as_ref().map_or(0, Vec::len);
    let component_size_total = comps.as_ref().map(|c| c.iter().map(ComponentModel::size).sum());
    let model_ms = t0.elapsed().as_secs_f64() * 1e3;
    let t1 = Instant::now();
    let dafsa = build_dafsa(log);
    let mode = if opts.all_optimal { Mode::AllOptimal } else { Mode::OneOptimal };

    let (traces, min_model_skips, psp, global) = match strategy {
        Strategy::Monolithic => {
            let model = global.expect("monolithic strategy has a global model");
            let results = align_waves(&model, &dafsa, log, mode, opts.memo, &ctl);
            let psp = build_psp(&dafsa, model.rg(), log, &results);
            let traces = results
                .iter()
                .map(|r| AlignedTrace {
                    strategy: Strategy::Monolithic,
                    conflict: None,
                    result: r
                        .as_ref()
                        .map(|o| TraceAlignment {
                            cost: o.cost,
                            moves: monolithic_moves(&model, &o.alignments[0].moves),
                            optima: o.alignments.len(),
                            truncated: o.truncated,
                            stats: Some(o.stats),
                        })
                        .map_err(describe),
                })
                .collect();
            (traces, Some(model.min_model_skips()), Some(psp), Some(model))
        }
        Strategy::SComponent => {
            let comps = comps.expect("decomposed strategy has components");
            let lazy_global: OnceLock<Option<AlignModel>> = OnceLock::new();
            if let Some(g) = global {
                let _ = lazy_global.set(Some(g));
            }
            let fallback_model = || lazy_global.get_or_init(|| build_global(net, alphabet, cap).ok()).as_ref();
            let projected = align_projections(&comps, log, opts.memo, &ctl);
            let ranks = alphabet.ranks();
            let compose = |labels: &[LabelId]| -> AlignedTrace {
                let mut parts: Vec<&[Move]> = Vec::with_capacity(comps.len());
                for (c, table) in comps.iter().zip(&projected) {
                    match &table[&project_labels(labels, &c.alphabet)] {
                        Ok(m) => parts.push(m),
                        Err(e) => {
                            return AlignedTrace {
                                strategy: Strategy::SComponent,
                                conflict: None,
                                result: Err(e.clone()),
                            }
                        }
                    }
                }
                let conflict = match recompose(labels, &comps, &parts, &ranks) {
                    Ok(moves) => match net_replays(net, &model_projection(&moves), REPLAY_CAP) {
                        Some(false) => Conflict::Replay,
                        _ => {
                            let cost = composed_cost(&moves);
                            let result = Ok(TraceAlignment { cost, moves, optima: 1, truncated: false, stats: None });
                            return AlignedTrace { strategy: Strategy::SComponent, conflict: None, result };
                        }
                    },
                    Err(c) => c,
                };
                let result = match fallback_model() {
                    Some(m) => one_trace_fallback(m, labels, &ctl),
                    None => Err("fallback needs the full state space, which exceeds the marking cap".into()),
                };
                AlignedTrace { strategy: Strategy::Monolithic, conflict: Some(conflict), result }
            };
            let traces: Vec<AlignedTrace> = log.traces().par_iter().map(|t| compose(&t.labels)).collect();
            let skips = compose(&[]).result.ok().map(|a| a.cost);
            let global = lazy_global.into_inner().flatten();
            (traces, skips, None, global)
        }
    };
    let align_ms = t1.elapsed().as_secs_f64() * 1e3;
    let global_timeout_hit = ctl.expired();
    Ok(RunResult {
        traces,
        strategy,
        global_size,
        decomposition_note,
        component_count,
        component_size_total,
        min_model_skips,
        global_timeout_hit,
        timings: Timings { model_ms, align_ms, total_ms: t0.elapsed().as_secs_f64() * 1e3 },
        psp,
        global_model: global,
        dafsa,
    })
}

type Projections = HashMap<Vec<LabelId>, Result<Vec<Move>, String>>;

/// One-optimal alignment of every distinct projected trace, per component.
/// The empty trace is always included.
fn align_projections(comps: &[ComponentModel], log: &EventLog, memo: bool, ctl: &Control) -> Vec<Projections> {
    comps
        .iter()
        .map(|c| {
            let mut b = pspalign_core::log::LogBuilder::new();
            for t in log.traces() {
                b.push(project_labels(&t.labels, &c.alphabet)).expect("projection keeps labels visible");
            }
            b.push(Vec::new()).expect("empty trace");
            let plog = b.finish();
            let d = build_dafsa(&plog);
            let res = align_waves(&c.model, &d, &plog, Mode::OneOptimal, memo, ctl);
            plog.traces()
                .iter()
                .zip(res)
                .map(|(t, r)| (t.labels.clone(), r.map(|o| o.alignments[0].moves.clone()).map_err(|e| describe(&e))))
                .collect()
        })
        .collect()
}
