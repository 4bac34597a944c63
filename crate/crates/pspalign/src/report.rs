//! JSON and CSV conformance reports.
//!
//! Field order is fixed by the struct definitions, so equal runs serialize to
//! equal bytes once [`Report::clear_timings`] is applied.

use std::io::Write;

use pspalign_core::align::Op;
use pspalign_core::recompose::Conflict;
use pspalign_core::{Alphabet, EventLog, SystemNet};
use serde::Serialize;

use crate::engine::{fitness, RunResult};

pub const SCHEMA: &str = "pspalign-report/1";

#[derive(Serialize, Clone, Debug, PartialEq)]
pub struct Report {
    pub schema: &'static str,
    pub log: LogSummary,
    pub model: ModelSummary,
    pub strategy: &'static str,
    pub aggregates: Aggregates,
    pub timings_ms: TimingsMs,
    pub traces: Vec<TraceRecord>,
}

#[derive(Serialize, Clone, Debug, PartialEq)]
pub struct LogSummary {
    pub traces: u64,
    pub distinct_traces: usize,
    pub events: u64,
    pub labels: usize,
    pub dafsa_states: usize,
    pub dafsa_arcs: usize,
}

#[derive(Serialize, Clone, Debug, PartialEq)]
pub struct ModelSummary {
    pub places: usize,
    pub transitions: usize,
    pub silent_transitions: usize,
    pub rg_size: Option<usize>,
    pub components: usize,
    pub component_rg_size_total: Option<usize>,
    pub decomposition_note: Option<String>,
}

#[derive(Serialize, Clone, Debug, PartialEq, Default)]
pub struct ConflictCounts {
    pub order: usize,
    pub operation: usize,
    pub extended_label: usize,
    pub replay: usize,
}

#[derive(Serialize, Clone, Debug, PartialEq)]
pub struct Aggregates {
    /// Σ frequency · cost over completed traces.
    pub raw_fitness_cost: u64,
    pub weighted_fitness: Option<f64>,
    pub unweighted_fitness: Option<f64>,
    pub min_model_skips: Option<u32>,
    pub traces_completed: u64,
    pub traces_failed: u64,
    pub distinct_completed: usize,
    pub distinct_failed: usize,
    pub conflicts: ConflictCounts,
    pub fallbacks: usize,
    pub global_timeout: bool,
}

#[derive(Serialize, Clone, Debug, PartialEq, Default)]
pub struct TimingsMs {
    pub model: f64,
    pub align: f64,
    pub total: f64,
}

#[derive(Serialize, Clone, Debug, PartialEq)]
pub struct MoveRecord {
    pub op: &'static str,
    pub label: String,
    pub tau_trail: Vec<String>,
}

#[derive(Serialize, Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub id: usize,
    pub frequency: u64,
    pub length: usize,
    pub cost: Option<u32>,
    pub fitness: Option<f64>,
    pub strategy: &'static str,
    pub conflict: Option<&'static str>,
    pub optima: Option<usize>,
    pub truncated: bool,
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moves: Option<Vec<MoveRecord>>,
}

fn op_name(op: Op) -> &'static str {
    match op {
        Op::Match => "match",
        Op::LHide => "lhide",
        Op::RHide => "rhide",
    }
}

impl Report {
    pub fn build(
        run: &RunResult,
        net: &SystemNet,
        alphabet: &Alphabet,
        log: &EventLog,
        emit_alignments: bool,
    ) -> Report {
        let mut conflicts = ConflictCounts::default();
        let mut fallbacks = 0;
        let (mut raw, mut done, mut failed, mut distinct_done) = (0u64, 0u64, 0u64, 0usize);
        let (mut wsum, mut usum) = (0.0f64, 0.0f64);
        let mut traces = Vec::with_capacity(log.len());
        for (id, (t, r)) in log.traces().iter().zip(&run.traces).enumerate() {
            if let Some(c) = r.conflict {
                fallbacks += 1;
                match c {
                    Conflict::Order => conflicts.order += 1,
                    Conflict::Operation => conflicts.operation += 1,
                    Conflict::ExtendedLabel => conflicts.extended_label += 1,
                    Conflict::Replay => conflicts.replay += 1,
                }
            }
            let mut rec = TraceRecord {
                id,
                frequency: t.frequency,
                length: t.labels.len(),
                cost: None,
                fitness: None,
                strategy: r.strategy.as_str(),
                conflict: r.conflict.map(Conflict::as_str),
                optima: None,
                truncated: false,
                error: None,
                moves: None,
            };
            match &r.result {
                Ok(a) => {
                    let f = run.min_model_skips.map(|s| fitness(a.cost, t.labels.len(), s));
                    raw += t.frequency * a.cost as u64;
                    done += t.frequency;
                    distinct_done += 1;
                    if let Some(f) = f {
                        wsum += f * t.frequency as f64;
                        usum += f;
                    }
                    rec.cost = Some(a.cost);
                    rec.fitness = f;
                    rec.optima = Some(a.optima);
                    rec.truncated = a.truncated;
                    if emit_alignments {
                        rec.moves = Some(
                            a.moves
                                .iter()
                                .map(|m| MoveRecord {
                                    op: op_name(m.op),
                                    label: alphabet.name(m.label).to_string(),
                                    tau_trail: m.tau_trail.iter().map(|&x| net.transition(x).name.clone()).collect(),
                                })
                                .collect(),
                        );
                    }
                }
                Err(e) => {
                    failed += t.frequency;
                    rec.error = Some(e.clone());
                }
            }
            traces.push(rec);
        }
        let have_fitness = run.min_model_skips.is_some() && distinct_done > 0;
        Report {
            schema: SCHEMA,
            log: LogSummary {
                traces: log.total_traces(),
                distinct_traces: log.len(),
                events: log.total_events(),
                labels: log.alphabet().len(),
                dafsa_states: run.dafsa.num_states(),
                dafsa_arcs: run.dafsa.num_arcs(),
            },
            model: ModelSummary {
                places: net.num_places(),
                transitions: net.num_transitions(),
                silent_transitions: net.transitions().iter().filter(|t| t.label.is_tau()).count(),
                rg_size: run.global_size,
                components: run.component_count,
                component_rg_size_total: run.component_size_total,
                decomposition_note: run.decomposition_note.clone(),
            },
            strategy: run.strategy.as_str(),
            aggregates: Aggregates {
                raw_fitness_cost: raw,
                weighted_fitness: have_fitness.then(|| wsum / done as f64),
                unweighted_fitness: have_fitness.then(|| usum / distinct_done as f64),
                min_model_skips: run.min_model_skips,
                traces_completed: done,
                traces_failed: failed,
                distinct_completed: distinct_done,
                distinct_failed: log.len() - distinct_done,
                conflicts,
                fallbacks,
                global_timeout: run.global_timeout_hit,
            },
            timings_ms: TimingsMs {
                model: run.timings.model_ms,
                align: run.timings.align_ms,
                total: run.timings.total_ms,
            },
            traces,
        }
    }

    pub fn clear_timings(&mut self) {
        self.timings_ms = TimingsMs::default();
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Columns: trace_id, frequency, cost, fitness, strategy, conflict.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["trace_id", "frequency", "cost", "fitness", "strategy", "conflict"])?;
        for t in &self.traces {
            out.write_record([
                t.id.to_string(),
                t.frequency.to_string(),
                t.cost.map(|c| c.to_string()).unwrap_or_default(),
                t.fitness.map(|f| format!("{f:.6}")).unwrap_or_default(),
                t.strategy.to_string(),
                t.conflict.unwrap_or("").to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}
