//! Deduplicated event logs.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::label::{LabelId, LabelSet};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Trace {
    pub labels: Vec<LabelId>,
    pub frequency: u64,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum LogError {
    /// An event carried the reserved silent label.
    SilentEvent { trace: usize, position: usize },
}

impl fmt::Display for LogError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogError::SilentEvent { trace, position } => {
                write!(f, "trace {trace}: event {position} carries the silent label")
            }
        }
    }
}

impl core::error::Error for LogError {}

/// Distinct traces in order of first appearance, with frequencies.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct EventLog {
    traces: Vec<Trace>,
    total_traces: u64,
    total_events: u64,
}

#[derive(Default)]
pub struct LogBuilder {
    index: BTreeMap<Vec<LabelId>, usize>,
    log: EventLog,
    raw: usize,
}

impl LogBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, labels: Vec<LabelId>) -> Result<(), LogError> {
        self.push_with_frequency(labels, 1)
    }

    pub fn push_with_frequency(&mut self, labels: Vec<LabelId>, frequency: u64) -> Result<(), LogError> {
        if let Some(position) = labels.iter().position(|l| l.is_tau()) {
            return Err(LogError::SilentEvent { trace: self.raw, position });
        }
        self.raw += 1;
        if frequency == 0 {
            return Ok(());
        }
        self.log.total_traces += frequency;
        self.log.total_events += frequency * labels.len() as u64;
        match self.index.get(&labels) {
            Some(&i) => self.log.traces[i].frequency += frequency,
            None => {
                self.index.insert(labels.clone(), self.log.traces.len());
                self.log.traces.push(Trace { labels, frequency });
            }
        }
        Ok(())
    }

    pub fn finish(self) -> EventLog {
        self.log
    }
}

impl EventLog {
    pub fn from_sequences<I>(sequences: I) -> Result<Self, LogError>
    where
        I: IntoIterator<Item = Vec<LabelId>>,
    {
        let mut b = LogBuilder::new();
        for s in sequences {
            b.push(s)?;
        }
        Ok(b.finish())
    }

    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn total_traces(&self) -> u64 {
        self.total_traces
    }

    pub fn total_events(&self) -> u64 {
        self.total_events
    }

    /// Events summed over distinct traces only.
    pub fn distinct_events(&self) -> u64 {
        self.traces.iter().map(|t| t.labels.len() as u64).sum()
    }

    pub fn alphabet(&self) -> LabelSet {
        self.traces.iter().flat_map(|t| t.labels.iter().copied()).collect()
    }

    /// Projects every trace and merges the ones that collapse together.
    pub fn project(&self, alphabet: &LabelSet) -> EventLog {
        let mut b = LogBuilder::new();
        for t in &self.traces {
            let p = project_trace(t, alphabet);
            b.push_with_frequency(p.labels, p.frequency).expect("projection keeps labels visible");
        }
        b.finish()
    }
}

pub fn project_labels(labels: &[LabelId], alphabet: &LabelSet) -> Vec<LabelId> {
    labels.iter().copied().filter(|l| alphabet.contains(*l)).collect()
}

pub fn project_trace(trace: &Trace, alphabet: &LabelSet) -> Trace {
    Trace { labels: project_labels(&trace.labels, alphabet), frequency: trace.frequency }
}
