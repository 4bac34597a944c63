//! Minimal place invariants and S-component decomposition.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::label::LabelSet;
use crate::net::{NetBuilder, PlaceId, SystemNet, TransitionId};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PlaceInvariant {
    pub weights: Vec<i64>,
    pub support: Vec<PlaceId>,
}

#[derive(Clone, Debug)]
pub struct SComponent {
    pub index: usize,
    pub places: Vec<PlaceId>,
    pub transitions: Vec<TransitionId>,
    /// Visible labels of the component's transitions.
    pub alphabet: LabelSet,
    /// The sub-net as a workflow net of its own; transition origins point
    /// back into the decomposed net.
    pub net: SystemNet,
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub invariants: Vec<PlaceInvariant>,
    pub components: Vec<SComponent>,
    pub place_cover: Vec<Vec<usize>>,
    pub transition_cover: Vec<Vec<usize>>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum DecompositionError {
    Preconditions(Vec<String>),
    NotSComponent { invariant: usize, reason: String },
    NotCovered(Vec<String>),
}

impl fmt::Display for DecompositionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecompositionError::Preconditions(p) => write!(f, "net is not decomposable: {}", p.join("; ")),
            DecompositionError::NotSComponent { invariant, reason } => {
                write!(f, "invariant {invariant} does not induce an S-component: {reason}")
            }
            DecompositionError::NotCovered(nodes) => write!(f, "components do not cover {}", nodes.join(", ")),
        }
    }
}

impl core::error::Error for DecompositionError {}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Clone)]
struct Row {
    /// Remaining incidence columns.
    c: Vec<i64>,
    /// Place weights.
    w: Vec<i64>,
    support: Vec<u64>,
}

impl Row {
    fn subset_of(&self, other: &Row) -> bool {
        self.support.iter().zip(&other.support).all(|(a, b)| a & !b == 0)
    }
}

/// Minimal semi-positive place invariants of the net closed by a transition
/// from its final marking back to its initial one, ordered by support.
pub fn minimal_place_invariants(net: &SystemNet) -> Vec<PlaceInvariant> {
    let inc = net.incidence();
    let (np, nt) = (net.num_places(), net.num_transitions());
    let closing: Option<Vec<i64>> = net.finals().first().map(|f| {
        let mut col = alloc::vec![0i64; np];
        for p in f.places() {
            col[p as usize] -= 1;
        }
        for p in net.initial().places() {
            col[p as usize] += 1;
        }
        col
    });
    let cols = nt + closing.is_some() as usize;
    let words = np.div_ceil(64).max(1);
    let mut rows: Vec<Row> = (0..np)
        .map(|p| {
            let mut c: Vec<i64> = (0..nt).map(|t| inc.get(p, t) as i64).collect();
            if let Some(cl) = &closing {
                c.push(cl[p]);
            }
            let mut w = alloc::vec![0i64; np];
            w[p] = 1;
            let mut support = alloc::vec![0u64; words];
            support[p / 64] |= 1 << (p % 64);
            Row { c, w, support }
        })
        .collect();

    for j in 0..cols {
        let mut next: Vec<Row> = rows.iter().filter(|r| r.c[j] == 0).cloned().collect();
        let pos: Vec<&Row> = rows.iter().filter(|r| r.c[j] > 0).collect();
        let neg: Vec<&Row> = rows.iter().filter(|r| r.c[j] < 0).collect();
        for a in &pos {
            for b in &neg {
                let (ka, kb) = (-b.c[j], a.c[j]);
                let mut c: Vec<i64> = a.c.iter().zip(&b.c).map(|(x, y)| ka * x + kb * y).collect();
                let mut w: Vec<i64> = a.w.iter().zip(&b.w).map(|(x, y)| ka * x + kb * y).collect();
                let g = c.iter().chain(&w).fold(0, |g, &x| gcd(g, x));
                if g > 1 {
                    c.iter_mut().chain(w.iter_mut()).for_each(|x| *x /= g);
                }
                let support = a.support.iter().zip(&b.support).map(|(x, y)| x | y).collect();
                next.push(Row { c, w, support });
            }
        }
        // Keep only support-minimal rows; among equal supports the first wins.
        let mut keep = alloc::vec![true; next.len()];
        for i in 0..next.len() {
            for k in 0..next.len() {
                if i == k || !keep[k] || !keep[i] {
                    continue;
                }
                if next[k].subset_of(&next[i]) && (!next[i].subset_of(&next[k]) || k < i) {
                    keep[i] = false;
                }
            }
        }
        rows = next.into_iter().zip(keep).filter(|(_, k)| *k).map(|(r, _)| r).collect();
    }

    let mut out: Vec<PlaceInvariant> = rows
        .into_iter()
        .map(|r| {
            let support = (0..np as PlaceId).filter(|&p| r.w[p as usize] > 0).collect();
            PlaceInvariant { weights: r.w, support }
        })
        .collect();
    out.sort_by(|a, b| a.support.cmp(&b.support));
    out
}

/// Splits a sound, free-choice, uniquely labelled workflow net into the
/// S-components induced by its minimal place invariants.
pub fn decompose(net: &SystemNet) -> Result<Decomposition, DecompositionError> {
    let report = net.validate();
    if !report.decomposable() {
        return Err(DecompositionError::Preconditions(report.problems));
    }
    let invariants = minimal_place_invariants(net);
    let mut components = Vec::new();
    let mut place_cover = alloc::vec![Vec::new(); net.num_places()];
    let mut transition_cover = alloc::vec![Vec::new(); net.num_transitions()];
    for (k, inv) in invariants.iter().enumerate() {
        let fail = |reason: String| DecompositionError::NotSComponent { invariant: k, reason };
        if inv.support.iter().any(|&p| inv.weights[p as usize] != 1) {
            return Err(fail("weights other than 0 and 1".into()));
        }
        let in_support = |p: &PlaceId| inv.support.binary_search(p).is_ok();
        let mut ts: Vec<TransitionId> =
            inv.support.iter().flat_map(|&p| net.place_preset(p).iter().chain(net.place_postset(p)).copied()).collect();
        ts.sort_unstable();
        ts.dedup();
        let mut b = NetBuilder::new();
        let local: Vec<PlaceId> = inv.support.iter().map(|&p| b.place(&net.places()[p as usize].name)).collect();
        let local_of = |p: PlaceId| local[inv.support.binary_search(&p).unwrap()];
        let mut alphabet = LabelSet::new();
        for &t in &ts {
            let pre: Vec<PlaceId> = net.preset(t).iter().copied().filter(in_support).collect();
            let post: Vec<PlaceId> = net.postset(t).iter().copied().filter(in_support).collect();
            let tr = net.transition(t);
            if pre.len() != 1 || post.len() != 1 {
                return Err(fail(format!("transition {} is not a single-token step inside the component", tr.name)));
            }
            let lt = b.transition_with_origin(&tr.name, tr.label, tr.origin);
            b.connect(&[local_of(pre[0])], lt, &[local_of(post[0])]);
            if !tr.label.is_tau() {
                alphabet.insert(tr.label);
            }
            transition_cover[t as usize].push(k);
        }
        for &p in &inv.support {
            place_cover[p as usize].push(k);
        }
        let sub = b.build_workflow().map_err(|e| fail(format!("{e}")))?;
        if !net.initial().places().all(|p| in_support(&p)) {
            return Err(fail("initial place outside the component".into()));
        }
        components.push(SComponent { index: k, places: inv.support.clone(), transitions: ts, alphabet, net: sub });
    }
    let mut missing: Vec<String> = Vec::new();
    for (p, c) in place_cover.iter().enumerate() {
        if c.is_empty() {
            missing.push(net.places()[p].name.clone());
        }
    }
    for (t, c) in transition_cover.iter().enumerate() {
        if c.is_empty() {
            missing.push(net.transitions()[t].name.clone());
        }
    }
    if !missing.is_empty() {
        return Err(DecompositionError::NotCovered(missing));
    }
    Ok(Decomposition { invariants, components, place_cover, transition_cover })
}

impl Decomposition {
    /// Components owning each visible label.
    pub fn owners(&self, label: crate::label::LabelId) -> impl Iterator<Item = usize> + '_ {
        self.components.iter().filter(move |c| c.alphabet.contains(label)).map(|c| c.index)
    }

    /// Checks that every transition's components equal those of its
    /// preset places and those of its postset places.
    pub fn check_transition_cover(&self, net: &SystemNet) -> Result<(), String> {
        for t in 0..net.num_transitions() as TransitionId {
            let own = &self.transition_cover[t as usize];
            for side in [net.preset(t), net.postset(t)] {
                let mut via: Vec<usize> =
                    side.iter().flat_map(|&p| self.place_cover[p as usize].iter().copied()).collect();
                via.sort_unstable();
                via.dedup();
                if &via != own {
                    return Err(format!(
                        "transition {} covered by {:?} but its places by {:?}",
                        net.transition(t).name,
                        own,
                        via
                    ));
                }
            }
        }
        Ok(())
    }
}
