//! Small nets used throughout tests and documentation.

use alloc::format;

use crate::label::{Alphabet, LabelId};
use crate::net::{NetBuilder, SystemNet};

/// Loan-application net: four parallel checks, then a loop over
/// assessment (E) with an optional rework round (H, I) before the
/// decision (F approve, G reject).
pub fn running_example(a: &mut Alphabet) -> SystemNet {
    let mut b = NetBuilder::new();
    let start = b.place("start");
    let p: alloc::vec::Vec<_> = (1..=12).map(|i| b.place(&format!("p{i}"))).collect();
    let end = b.place("end");
    let pl = |i: usize| p[i - 1];
    let t1 = b.transition("t1", LabelId::TAU);
    b.connect(&[start], t1, &[pl(1), pl(2), pl(3), pl(4)]);
    for (i, name) in ["A", "B", "C", "D"].iter().enumerate() {
        let t = b.transition(name, a.intern(name));
        b.connect(&[pl(i + 1)], t, &[pl(i + 5)]);
    }
    let t2 = b.transition("t2", LabelId::TAU);
    b.connect(&[pl(5), pl(6), pl(7), pl(8)], t2, &[pl(9)]);
    let e = b.transition("E", a.intern("E"));
    b.connect(&[pl(9)], e, &[pl(10)]);
    let f = b.transition("F", a.intern("F"));
    b.connect(&[pl(10)], f, &[end]);
    let g = b.transition("G", a.intern("G"));
    b.connect(&[pl(10)], g, &[pl(11)]);
    let t3 = b.transition("t3", LabelId::TAU);
    b.connect(&[pl(11)], t3, &[end]);
    let h = b.transition("H", a.intern("H"));
    b.connect(&[pl(10)], h, &[pl(12)]);
    let i = b.transition("I", a.intern("I"));
    b.connect(&[pl(12)], i, &[pl(9)]);
    b.build_workflow().expect("running example is a workflow net")
}

/// The four traces of the running-example log.
pub const RUNNING_LOG: [&str; 4] = ["BDCEG", "BDAEFG", "CABEEG", "CABEHIEFG"];

/// Two-branch parallel net whose synchronising task C follows A and B.
pub fn two_branch(a: &mut Alphabet) -> SystemNet {
    let mut b = NetBuilder::new();
    let start = b.place("start");
    let p: alloc::vec::Vec<_> = (1..=4).map(|i| b.place(&format!("p{i}"))).collect();
    let end = b.place("end");
    let t1 = b.transition("t1", LabelId::TAU);
    b.connect(&[start], t1, &[p[0], p[1]]);
    let ta = b.transition("A", a.intern("A"));
    b.connect(&[p[0]], ta, &[p[2]]);
    let tb = b.transition("B", a.intern("B"));
    b.connect(&[p[1]], tb, &[p[3]]);
    let tc = b.transition("C", a.intern("C"));
    b.connect(&[p[2], p[3]], tc, &[end]);
    b.build_workflow().expect("workflow net")
}

/// A, then an optional parallel block of B and C, then D.
pub fn skippable_parallel(a: &mut Alphabet) -> SystemNet {
    let mut b = NetBuilder::new();
    let start = b.place("start");
    let p: alloc::vec::Vec<_> = (1..=6).map(|i| b.place(&format!("p{i}"))).collect();
    let end = b.place("end");
    let ta = b.transition("A", a.intern("A"));
    b.connect(&[start], ta, &[p[0]]);
    let t1 = b.transition("t1", LabelId::TAU);
    b.connect(&[p[0]], t1, &[p[5]]);
    let t2 = b.transition("t2", LabelId::TAU);
    b.connect(&[p[0]], t2, &[p[1], p[3]]);
    let tb = b.transition("B", a.intern("B"));
    b.connect(&[p[1]], tb, &[p[2]]);
    let tc = b.transition("C", a.intern("C"));
    b.connect(&[p[3]], tc, &[p[4]]);
    let t3 = b.transition("t3", LabelId::TAU);
    b.connect(&[p[2], p[4]], t3, &[p[5]]);
    let td = b.transition("D", a.intern("D"));
    b.connect(&[p[5]], td, &[end]);
    b.build_workflow().expect("workflow net")
}

/// `n` visible tasks T1..Tn between a silent split and a silent join.
pub fn parallel_tasks(a: &mut Alphabet, n: usize) -> SystemNet {
    let mut b = NetBuilder::new();
    let start = b.place("start");
    let before: alloc::vec::Vec<_> = (1..=n).map(|i| b.place(&format!("p{i}"))).collect();
    let after: alloc::vec::Vec<_> = (1..=n).map(|i| b.place(&format!("q{i}"))).collect();
    let end = b.place("end");
    let split = b.transition("split", LabelId::TAU);
    b.connect(&[start], split, &before);
    for i in 0..n {
        let name = format!("T{}", i + 1);
        let t = b.transition(&name, a.intern(&name));
        b.connect(&[before[i]], t, &[after[i]]);
    }
    let join = b.transition("join", LabelId::TAU);
    b.connect(&after, join, &[end]);
    b.build_workflow().expect("workflow net")
}

/// `n` visible tasks S1..Sn in sequence.
pub fn sequence(a: &mut Alphabet, n: usize) -> SystemNet {
    let mut b = NetBuilder::new();
    let mut prev = b.place("start");
    for i in 1..=n {
        let next = if i == n { b.place("end") } else { b.place(&format!("s{i}")) };
        let name = format!("S{i}");
        let t = b.transition(&name, a.intern(&name));
        b.connect(&[prev], t, &[next]);
        prev = next;
    }
    b.build_workflow().expect("workflow net")
}

/// Interns every character of `word` as a label.
pub fn word(a: &mut Alphabet, word: &str) -> alloc::vec::Vec<LabelId> {
    word.chars().map(|c| a.intern(c.encode_utf8(&mut [0; 4]))).collect()
}
