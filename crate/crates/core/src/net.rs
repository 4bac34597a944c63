//! Labelled system nets.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::label::LabelId;
use crate::marking::Marking;

pub type PlaceId = u32;
pub type TransitionId = u32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Place {
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub name: String,
    pub label: LabelId,
    /// Index of this transition in the net it was cut from; its own index otherwise.
    pub origin: TransitionId,
}

#[derive(Clone, Debug)]
pub struct SystemNet {
    places: Vec<Place>,
    transitions: Vec<Transition>,
    pre: Vec<Vec<PlaceId>>,
    post: Vec<Vec<PlaceId>>,
    place_in: Vec<Vec<TransitionId>>,
    place_out: Vec<Vec<TransitionId>>,
    initial: Marking,
    finals: Vec<Marking>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NetError {
    NotWorkflow {
        problems: Vec<String>,
    },
    NotEnabled {
        transition: String,
    },
    /// Firing would put a second token on a place.
    Overflow {
        transition: String,
        place: String,
    },
}

impl fmt::Display for NetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetError::NotWorkflow { problems } => write!(f, "not a workflow net: {}", problems.join("; ")),
            NetError::NotEnabled { transition } => write!(f, "transition {transition} is not enabled"),
            NetError::Overflow { transition, place } => {
                write!(f, "firing {transition} puts a second token on {place}; the net is not 1-bounded")
            }
        }
    }
}

impl core::error::Error for NetError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub workflow_ok: bool,
    pub free_choice: bool,
    pub uniquely_labelled: bool,
    pub problems: Vec<String>,
}

impl ValidationReport {
    pub fn decomposable(&self) -> bool {
        self.workflow_ok && self.free_choice && self.uniquely_labelled
    }
}

#[derive(Clone, Debug)]
pub struct IncidenceMatrix {
    pub places: usize,
    pub transitions: usize,
    /// Row-major `places × transitions`.
    pub minus: Vec<i32>,
    pub plus: Vec<i32>,
}

impl IncidenceMatrix {
    #[inline]
    pub fn get(&self, p: usize, t: usize) -> i32 {
        self.plus[p * self.transitions + t] - self.minus[p * self.transitions + t]
    }

    pub fn column(&self, t: usize) -> Vec<i32> {
        (0..self.places).map(|p| self.get(p, t)).collect()
    }

    /// m + N·y
    pub fn apply(&self, m: &[i64], y: &[i64]) -> Vec<i64> {
        (0..self.places)
            .map(|p| m[p] + (0..self.transitions).map(|t| self.get(p, t) as i64 * y[t]).sum::<i64>())
            .collect()
    }
}

#[derive(Default, Clone, Debug)]
pub struct NetBuilder {
    places: Vec<Place>,
    transitions: Vec<Transition>,
    pre: Vec<Vec<PlaceId>>,
    post: Vec<Vec<PlaceId>>,
}

impl NetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn place(&mut self, name: &str) -> PlaceId {
        self.places.push(Place { name: name.into() });
        self.places.len() as PlaceId - 1
    }

    pub fn transition(&mut self, name: &str, label: LabelId) -> TransitionId {
        let id = self.transitions.len() as TransitionId;
        self.transition_with_origin(name, label, id)
    }

    pub fn transition_with_origin(&mut self, name: &str, label: LabelId, origin: TransitionId) -> TransitionId {
        self.transitions.push(Transition { name: name.into(), label, origin });
        self.pre.push(Vec::new());
        self.post.push(Vec::new());
        self.transitions.len() as TransitionId - 1
    }

    pub fn input(&mut self, p: PlaceId, t: TransitionId) -> &mut Self {
        if !self.pre[t as usize].contains(&p) {
            self.pre[t as usize].push(p);
        }
        self
    }

    pub fn output(&mut self, t: TransitionId, p: PlaceId) -> &mut Self {
        if !self.post[t as usize].contains(&p) {
            self.post[t as usize].push(p);
        }
        self
    }

    /// Connects `inputs → t → outputs`.
    pub fn connect(&mut self, inputs: &[PlaceId], t: TransitionId, outputs: &[PlaceId]) -> &mut Self {
        for &p in inputs {
            self.input(p, t);
        }
        for &p in outputs {
            self.output(t, p);
        }
        self
    }

    pub fn num_places(&self) -> usize {
        self.places.len()
    }

    /// Builds a workflow net with m0 = [i] and the single final marking [o].
    pub fn build_workflow(self) -> Result<SystemNet, NetError> {
        let net = self.build(Marking::empty(0), Vec::new());
        let (i, o) = net.workflow_places()?;
        let n = net.places.len();
        Ok(SystemNet {
            initial: Marking::from_places(n, &[i]),
            finals: alloc::vec![Marking::from_places(n, &[o])],
            ..net
        })
    }

    pub fn build(mut self, initial: Marking, finals: Vec<Marking>) -> SystemNet {
        let n = self.places.len();
        let mut place_in = alloc::vec![Vec::new(); n];
        let mut place_out = alloc::vec![Vec::new(); n];
        for t in 0..self.transitions.len() {
            self.pre[t].sort_unstable();
            self.post[t].sort_unstable();
            for &p in &self.pre[t] {
                place_out[p as usize].push(t as TransitionId);
            }
            for &p in &self.post[t] {
                place_in[p as usize].push(t as TransitionId);
            }
        }
        let fix = |m: Marking| if m.token_count() == 0 && n > 0 { Marking::empty(n) } else { m };
        SystemNet {
            places: self.places,
            transitions: self.transitions,
            pre: self.pre,
            post: self.post,
            place_in,
            place_out,
            initial: fix(initial),
            finals: finals.into_iter().map(fix).collect(),
        }
    }
}

impl SystemNet {
    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn num_places(&self) -> usize {
        self.places.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    pub fn transition(&self, t: TransitionId) -> &Transition {
        &self.transitions[t as usize]
    }

    pub fn preset(&self, t: TransitionId) -> &[PlaceId] {
        &self.pre[t as usize]
    }

    pub fn postset(&self, t: TransitionId) -> &[PlaceId] {
        &self.post[t as usize]
    }

    /// Transitions producing into `p`.
    pub fn place_preset(&self, p: PlaceId) -> &[TransitionId] {
        &self.place_in[p as usize]
    }

    /// Transitions consuming from `p`.
    pub fn place_postset(&self, p: PlaceId) -> &[TransitionId] {
        &self.place_out[p as usize]
    }

    pub fn initial(&self) -> &Marking {
        &self.initial
    }

    pub fn finals(&self) -> &[Marking] {
        &self.finals
    }

    pub fn find_place(&self, name: &str) -> Option<PlaceId> {
        self.places.iter().position(|p| p.name == name).map(|i| i as PlaceId)
    }

    pub fn find_transition(&self, name: &str) -> Option<TransitionId> {
        self.transitions.iter().position(|t| t.name == name).map(|i| i as TransitionId)
    }

    pub fn transitions_labelled(&self, l: LabelId) -> impl Iterator<Item = TransitionId> + '_ {
        (0..self.transitions.len() as TransitionId).filter(move |&t| self.transitions[t as usize].label == l)
    }

    pub fn marking(&self, places: &[&str]) -> Option<Marking> {
        let ids: Option<Vec<PlaceId>> = places.iter().map(|n| self.find_place(n)).collect();
        Some(Marking::from_places(self.num_places(), &ids?))
    }

    pub fn marking_names(&self, m: &Marking) -> Vec<&str> {
        m.places().map(|p| self.places[p as usize].name.as_str()).collect()
    }

    /// Source and sink place of a workflow net, or the list of violations.
    pub fn workflow_places(&self) -> Result<(PlaceId, PlaceId), NetError> {
        let mut problems = Vec::new();
        let sources: Vec<PlaceId> =
            (0..self.places.len() as PlaceId).filter(|&p| self.place_in[p as usize].is_empty()).collect();
        let sinks: Vec<PlaceId> =
            (0..self.places.len() as PlaceId).filter(|&p| self.place_out[p as usize].is_empty()).collect();
        let names =
            |ps: &[PlaceId]| ps.iter().map(|&p| self.places[p as usize].name.as_str()).collect::<Vec<_>>().join(", ");
        if sources.len() != 1 {
            problems.push(format!("expected one source place, found [{}]", names(&sources)));
        }
        if sinks.len() != 1 {
            problems.push(format!("expected one sink place, found [{}]", names(&sinks)));
        }
        for (t, tr) in self.transitions.iter().enumerate() {
            if self.pre[t].is_empty() || self.post[t].is_empty() {
                problems.push(format!("transition {} has an empty preset or postset", tr.name));
            }
        }
        if problems.is_empty() {
            let (i, o) = (sources[0], sinks[0]);
            let fwd = self.reach(i, true);
            let bwd = self.reach(o, false);
            for p in 0..self.places.len() {
                if !fwd.0[p] || !bwd.0[p] {
                    problems.push(format!("place {} is not on a path from source to sink", self.places[p].name));
                }
            }
            for t in 0..self.transitions.len() {
                if !fwd.1[t] || !bwd.1[t] {
                    problems
                        .push(format!("transition {} is not on a path from source to sink", self.transitions[t].name));
                }
            }
            if problems.is_empty() {
                return Ok((i, o));
            }
        }
        Err(NetError::NotWorkflow { problems })
    }

    fn reach(&self, from: PlaceId, forward: bool) -> (Vec<bool>, Vec<bool>) {
        let mut ps = alloc::vec![false; self.places.len()];
        let mut ts = alloc::vec![false; self.transitions.len()];
        let mut queue = VecDeque::from([from]);
        ps[from as usize] = true;
        while let Some(p) = queue.pop_front() {
            let next_t = if forward { &self.place_out[p as usize] } else { &self.place_in[p as usize] };
            for &t in next_t {
                if ts[t as usize] {
                    continue;
                }
                ts[t as usize] = true;
                let next_p = if forward { &self.post[t as usize] } else { &self.pre[t as usize] };
                for &q in next_p {
                    if !ps[q as usize] {
                        ps[q as usize] = true;
                        queue.push_back(q);
                    }
                }
            }
        }
        (ps, ts)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut problems = Vec::new();
        let workflow_ok = match self.workflow_places() {
            Ok(_) => true,
            Err(NetError::NotWorkflow { problems: p }) => {
                problems.extend(p);
                false
            }
            Err(_) => false,
        };
        let mut free_choice = true;
        for (p, consumers) in self.place_out.iter().enumerate() {
            if consumers.len() > 1 {
                for &t in consumers {
                    if self.pre[t as usize].len() != 1 {
                        free_choice = false;
                        problems.push(format!(
                            "place {} is shared but transition {} has a larger preset",
                            self.places[p].name, self.transitions[t as usize].name
                        ));
                    }
                }
            }
        }
        let mut uniquely_labelled = true;
        let mut seen = alloc::collections::BTreeMap::new();
        for tr in &self.transitions {
            if tr.label.is_tau() {
                continue;
            }
            if let Some(other) = seen.insert(tr.label, &tr.name) {
                uniquely_labelled = false;
                problems.push(format!("transitions {} and {} share a label", other, tr.name));
            }
        }
        ValidationReport { workflow_ok, free_choice, uniquely_labelled, problems }
    }

    #[inline]
    pub fn enabled(&self, m: &Marking, t: TransitionId) -> bool {
        self.pre[t as usize].iter().all(|&p| m.contains(p))
    }

    /// m − N⁻(t) + N⁺(t), refusing to build a marking with two tokens on a place.
    pub fn fire(&self, m: &Marking, t: TransitionId) -> Result<Marking, NetError> {
        if !self.enabled(m, t) {
            return Err(NetError::NotEnabled { transition: self.transitions[t as usize].name.clone() });
        }
        let mut next = m.clone();
        for &p in &self.pre[t as usize] {
            next.remove(p);
        }
        for &p in &self.post[t as usize] {
            if !next.insert(p) {
                return Err(NetError::Overflow {
                    transition: self.transitions[t as usize].name.clone(),
                    place: self.places[p as usize].name.clone(),
                });
            }
        }
        Ok(next)
    }

    pub fn incidence(&self) -> IncidenceMatrix {
        let (np, nt) = (self.places.len(), self.transitions.len());
        let mut minus = alloc::vec![0; np * nt];
        let mut plus = alloc::vec![0; np * nt];
        for t in 0..nt {
            for &p in &self.pre[t] {
                minus[p as usize * nt + t] = 1;
            }
            for &p in &self.post[t] {
                plus[p as usize * nt + t] = 1;
            }
        }
        IncidenceMatrix { places: np, transitions: nt, minus, plus }
    }
}
