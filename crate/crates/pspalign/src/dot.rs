//! Graphviz output for debugging.

use std::fmt::Write as _;

use pspalign_core::align::{Op, Psp};
use pspalign_core::{Alphabet, Dafsa, ReachabilityGraph, SystemNet};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn net_dot(net: &SystemNet, alphabet: &Alphabet) -> String {
    let mut s = String::from("digraph net {\n  rankdir=LR;\n");
    for (i, p) in net.places().iter().enumerate() {
        let style = if net.initial().contains(i as u32) { ",style=bold" } else { "" };
        let _ = writeln!(s, "  p{i} [shape=circle,label={}{style}];", quote(&p.name));
    }
    for (i, t) in net.transitions().iter().enumerate() {
        let label = if t.label.is_tau() { t.name.clone() } else { alphabet.name(t.label).to_string() };
        let fill = if t.label.is_tau() { ",style=filled,fillcolor=black,fontcolor=white" } else { "" };
        let _ = writeln!(s, "  t{i} [shape=box,label={}{fill}];", quote(&label));
        for &p in net.preset(i as u32) {
            let _ = writeln!(s, "  p{p} -> t{i};");
        }
        for &p in net.postset(i as u32) {
            let _ = writeln!(s, "  t{i} -> p{p};");
        }
    }
    s.push_str("}\n");
    s
}

pub fn rg_dot(rg: &ReachabilityGraph, net: &SystemNet, alphabet: &Alphabet) -> String {
    let mut s = String::from("digraph rg {\n");
    for m in 0..rg.num_markings() as u32 {
        let names = net.marking_names(rg.marking(m)).join(",");
        let shape = if rg.is_final(m) { "doublecircle" } else { "ellipse" };
        let _ = writeln!(s, "  m{m} [shape={shape},label={}];", quote(&format!("[{names}]")));
    }
    for a in rg.arcs() {
        let mut label = alphabet.name(a.label.visible).to_string();
        if !a.label.tau_trail.is_empty() {
            let trail: Vec<&str> = a.label.tau_trail.iter().map(|&t| net.transition(t).name.as_str()).collect();
            label = format!("({},{label})", trail.join(","));
        }
        let _ = writeln!(s, "  m{} -> m{} [label={}];", a.source, a.target, quote(&label));
    }
    s.push_str("}\n");
    s
}

pub fn dafsa_dot(d: &Dafsa, alphabet: &Alphabet) -> String {
    let mut s = String::from("digraph dafsa {\n  rankdir=LR;\n");
    for n in 0..d.num_states() as u32 {
        let shape = if d.is_final(n) { "doublecircle" } else { "circle" };
        let _ = writeln!(s, "  n{n} [shape={shape},label=\"n{n}\"];");
    }
    for a in d.arcs() {
        let _ = writeln!(s, "  n{} -> n{} [label={}];", a.source, a.target, quote(alphabet.name(a.label)));
    }
    s.push_str("}\n");
    s
}

pub fn psp_dot(psp: &Psp, alphabet: &Alphabet) -> String {
    let mut s = String::from("digraph psp {\n  rankdir=LR;\n");
    for (i, n) in psp.nodes().iter().enumerate() {
        let shape = if psp.is_final(i as u32) { "doublecircle" } else { "box" };
        let _ = writeln!(s, "  v{i} [shape={shape},label=\"n{} m{} @{}\"];", n.dafsa_state, n.marking, n.pos);
    }
    for a in psp.arcs() {
        let op = match a.mv.op {
            Op::Match => "m",
            Op::LHide => "l",
            Op::RHide => "r",
        };
        let label = format!("{op}({})", alphabet.name(a.mv.label));
        let _ = writeln!(s, "  v{} -> v{} [label={}];", a.source, a.target, quote(&label));
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use pspalign_core::samples;

    #[test]
    fn silent_transitions_are_filled() {
        let mut a = Alphabet::new();
        let net = samples::two_branch(&mut a);
        let dot = net_dot(&net, &a);
        assert_eq!(dot.matches("fillcolor=black").count(), 1);
        assert!(dot.starts_with("digraph net {"));
        assert_eq!(dot.matches(" -> ").count(), 10);
    }
}
