//! Random block-structured workflow nets and traces for property tests.
//!
//! Nets come from random process trees (sequence, exclusive choice,
//! parallel, loop), which makes them sound, safe and free-choice.

use pspalign_core::net::{NetBuilder, PlaceId};
use pspalign_core::{Alphabet, EventLog, LabelId, ReachabilityGraph, SystemNet};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

#[derive(Clone, Debug)]
enum Node {
    Task(LabelId),
    Skip,
    Seq(Vec<Node>),
    Xor(Vec<Node>),
    And(Vec<Node>),
    Loop(Box<Node>, Box<Node>),
}

struct TreeGen<'a> {
    alphabet: &'a mut Alphabet,
    next: u8,
}

impl TreeGen<'_> {
    fn task(&mut self) -> Node {
        let name = ((b'a' + self.next) as char).to_string();
        self.next += 1;
        Node::Task(self.alphabet.intern(&name))
    }

    fn node(&mut self, rng: &mut StdRng, budget: usize, in_loop: bool) -> Node {
        if budget <= 1 || rng.gen_bool(0.3) {
            return self.task();
        }
        let kind = rng.gen_range(0..4);
        if kind == 3 && budget >= 2 {
            let body_budget = rng.gen_range(1..budget);
            let body = self.node(rng, body_budget, true);
            let redo = self.node(rng, budget - body_budget, true);
            return Node::Loop(Box::new(body), Box::new(redo));
        }
        let arity = rng.gen_range(2..=budget.min(3));
        let mut rest = budget;
        let mut children = Vec::with_capacity(arity);
        for i in 0..arity {
            let share = if i + 1 == arity { rest } else { rng.gen_range(1..=rest - (arity - i - 1)) };
            rest -= share;
            children.push(self.node(rng, share, in_loop));
        }
        match kind {
            0 => Node::Seq(children),
            1 => {
                if !in_loop && rng.gen_bool(0.25) {
                    children.push(Node::Skip);
                }
                Node::Xor(children)
            }
            _ => Node::And(children),
        }
    }
}

struct NetGen {
    b: NetBuilder,
    places: usize,
    silent: usize,
}

impl NetGen {
    fn place(&mut self) -> PlaceId {
        self.places += 1;
        self.b.place(&format!("p{}", self.places))
    }

    fn silent(&mut self, inputs: &[PlaceId], outputs: &[PlaceId]) {
        self.silent += 1;
        let t = self.b.transition(&format!("tau{}", self.silent), LabelId::TAU);
        self.b.connect(inputs, t, outputs);
    }

    fn emit(&mut self, node: &Node, alphabet: &Alphabet, from: PlaceId, to: PlaceId) {
        match node {
            Node::Task(l) => {
                let t = self.b.transition(alphabet.name(*l), *l);
                self.b.connect(&[from], t, &[to]);
            }
            Node::Skip => self.silent(&[from], &[to]),
            Node::Seq(children) => {
                let mut cur = from;
                for (i, c) in children.iter().enumerate() {
                    let next = if i + 1 == children.len() { to } else { self.place() };
                    self.emit(c, alphabet, cur, next);
                    cur = next;
                }
            }
            Node::Xor(children) => {
                for c in children {
                    self.emit(c, alphabet, from, to);
                }
            }
            Node::And(children) => {
                let starts: Vec<PlaceId> = children.iter().map(|_| self.place()).collect();
                let ends: Vec<PlaceId> = children.iter().map(|_| self.place()).collect();
                self.silent(&[from], &starts);
                for ((c, &s), &e) in children.iter().zip(&starts).zip(&ends) {
                    self.emit(c, alphabet, s, e);
                }
                self.silent(&ends, &[to]);
            }
            Node::Loop(body, redo) => {
                let (a, b) = (self.place(), self.place());
                self.silent(&[from], &[a]);
                self.emit(body, alphabet, a, b);
                self.emit(redo, alphabet, b, a);
                self.silent(&[b], &[to]);
            }
        }
    }
}

/// A random sound free-choice workflow net with unique visible labels and at
/// most `max_transitions` transitions, silent ones included.
pub fn random_net(rng: &mut StdRng, alphabet: &mut Alphabet, max_transitions: usize) -> SystemNet {
    loop {
        let mut scratch = alphabet.clone();
        let budget = rng.gen_range(2..=max_transitions.clamp(2, 8));
        let tree = TreeGen { alphabet: &mut scratch, next: 0 }.node(rng, budget, false);
        let mut g = NetGen { b: NetBuilder::new(), places: 0, silent: 0 };
        let start = g.b.place("start");
        let end = g.b.place("end");
        g.emit(&tree, &scratch, start, end);
        let net = g.b.build_workflow().expect("process trees give workflow nets");
        if net.num_transitions() <= max_transitions {
            *alphabet = scratch;
            return net;
        }
    }
}

/// Visible labels of a random run ending in a final marking, at most
/// `max_len` long. Falls back to the shortest attempt seen.
pub fn random_run(rng: &mut StdRng, net: &SystemNet, max_len: usize) -> Vec<LabelId> {
    let mut best: Option<Vec<LabelId>> = None;
    for _ in 0..50 {
        let mut m = net.initial().clone();
        let mut out = Vec::new();
        for _ in 0..200 {
            if net.finals().contains(&m) {
                break;
            }
            let enabled: Vec<u32> = (0..net.num_transitions() as u32).filter(|&t| net.enabled(&m, t)).collect();
            let Some(&t) = enabled.choose(rng) else { break };
            m = net.fire(&m, t).expect("enabled");
            let l = net.transition(t).label;
            if !l.is_tau() {
                out.push(l);
            }
        }
        if !net.finals().contains(&m) {
            continue;
        }
        if out.len() <= max_len {
            return out;
        }
        if best.as_ref().is_none_or(|b| out.len() < b.len()) {
            best = Some(out);
        }
    }
    let mut b = best.unwrap_or_default();
    b.truncate(max_len);
    b
}

/// Deletes, inserts or swaps events at random.
pub fn add_noise(rng: &mut StdRng, trace: &[LabelId], labels: &[LabelId], max_len: usize) -> Vec<LabelId> {
    let mut t = trace.to_vec();
    for _ in 0..rng.gen_range(0..=3) {
        match rng.gen_range(0..3) {
            0 if !t.is_empty() => {
                let i = rng.gen_range(0..t.len());
                t.remove(i);
            }
            1 if !labels.is_empty() => {
                let i = rng.gen_range(0..=t.len());
                t.insert(i, *labels.choose(rng).expect("non-empty"));
            }
            2 if t.len() >= 2 => {
                let i = rng.gen_range(0..t.len() - 1);
                t.swap(i, i + 1);
            }
            _ => {}
        }
    }
    t.truncate(max_len);
    t
}

/// Whether some initial-to-final path of a silent-free graph spells `word`.
pub fn rg_accepts(rg: &ReachabilityGraph, word: &[LabelId]) -> bool {
    let mut current = vec![rg.initial()];
    for &l in word {
        let mut next: Vec<u32> = current
            .iter()
            .flat_map(|&m| rg.out_arcs(m).iter().map(|&a| rg.arc(a)))
            .filter(|a| a.label.visible == l)
            .map(|a| a.target)
            .collect();
        next.sort_unstable();
        next.dedup();
        if next.is_empty() {
            return false;
        }
        current = next;
    }
    current.iter().any(|&m| rg.is_final(m))
}

pub struct RandomInstance {
    pub alphabet: Alphabet,
    pub net: SystemNet,
    pub log: EventLog,
}

/// A random net with `traces` runs, each noised with probability one half.
pub fn random_instance(seed: u64, traces: usize) -> RandomInstance {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut alphabet = Alphabet::new();
    let net = random_net(&mut rng, &mut alphabet, 12);
    let labels: Vec<LabelId> = net.transitions().iter().map(|t| t.label).filter(|l| !l.is_tau()).collect();
    let runs = (0..traces).map(|_| {
        let run = random_run(&mut rng, &net, 10);
        if rng.gen_bool(0.5) {
            add_noise(&mut rng, &run, &labels, 10)
        } else {
            run
        }
    });
    let log = EventLog::from_sequences(runs.collect::<Vec<_>>()).expect("visible labels only");
    RandomInstance { alphabet, net, log }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nets_are_decomposable_workflow_nets() {
        for seed in 0..50 {
            let inst = random_instance(seed, 3);
            let v = inst.net.validate();
            assert!(v.decomposable(), "seed {seed}: {:?}", v.problems);
            assert!(inst.net.num_transitions() <= 12);
            assert!(inst.log.traces().iter().all(|t| t.labels.len() <= 10));
        }
    }

    #[test]
    fn runs_are_accepted() {
        use pspalign_core::rg::{build_rg, remove_tau, DEFAULT_MARKING_CAP};
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..20 {
            let mut a = Alphabet::new();
            let net = random_net(&mut rng, &mut a, 12);
            let rg = remove_tau(&build_rg(&net, DEFAULT_MARKING_CAP).unwrap()).unwrap();
            let run = random_run(&mut rng, &net, 100);
            assert!(rg_accepts(&rg, &run));
        }
    }

    #[test]
    fn seeded() {
        let a = random_instance(7, 5);
        let b = random_instance(7, 5);
        assert_eq!(a.log, b.log);
        assert_eq!(a.net.num_places(), b.net.num_places());
    }
}
