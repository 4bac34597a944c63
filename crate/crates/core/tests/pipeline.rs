use pspalign_core::align::{align_log, AlignModel, LogAlignOptions, Mode, SearchLimits};
use pspalign_core::oracle::brute_force_optimal_cost;
use pspalign_core::rg::{build_rg, remove_tau, DEFAULT_MARKING_CAP};
use pspalign_core::samples::{self, word, RUNNING_LOG};
use pspalign_core::scomp::decompose;
use pspalign_core::{build_dafsa, Alphabet, EventLog, LabelId, SystemNet};

fn model(a: &Alphabet, net: &SystemNet) -> AlignModel {
    AlignModel::new(remove_tau(&build_rg(net, DEFAULT_MARKING_CAP).unwrap()).unwrap(), a.ranks()).unwrap()
}

fn words(alphabet: &[LabelId], max_len: usize) -> Vec<Vec<LabelId>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for &l in alphabet {
                let mut x: Vec<LabelId> = w.clone();
                x.push(l);
                next.push(x);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn check_against_oracle(a: &Alphabet, net: &SystemNet, log: &EventLog) {
    let m = model(a, net);
    let dafsa = build_dafsa(log);
    for mode in [Mode::OneOptimal, Mode::AllOptimal] {
        for memo in [false, true] {
            let r = align_log(&m, &dafsa, log, &LogAlignOptions { mode, memo, limits: SearchLimits::default() });
            for (t, o) in log.traces().iter().zip(&r.results) {
                let o = o.as_ref().unwrap();
                let (want, _) = brute_force_optimal_cost(&t.labels, m.rg()).unwrap();
                assert_eq!(o.cost, want, "{mode:?} memo {memo}");
                assert!(o.alignments.iter().all(|al| al.is_proper(&t.labels, m.rg())));
            }
            if mode == Mode::OneOptimal {
                let from_psp = r.psp.alignments(10_000).unwrap();
                assert!(from_psp.len() >= log.len());
            }
        }
    }
}

#[test]
fn sequence_net_against_every_short_word() {
    let mut a = Alphabet::new();
    let net = samples::sequence(&mut a, 3);
    let labels: Vec<LabelId> = ["S1", "S2", "S3"].iter().map(|n| a.get(n).unwrap()).collect();
    let log = EventLog::from_sequences(words(&labels, 4)).unwrap();
    assert_eq!(log.len(), 1 + 3 + 9 + 27 + 81);
    check_against_oracle(&a, &net, &log);
}

#[test]
fn parallel_net_against_every_short_word() {
    let mut a = Alphabet::new();
    let net = samples::parallel_tasks(&mut a, 3);
    let labels: Vec<LabelId> = ["T1", "T2", "T3"].iter().map(|n| a.get(n).unwrap()).collect();
    check_against_oracle(&a, &net, &EventLog::from_sequences(words(&labels, 4)).unwrap());
    assert_eq!(decompose(&net).unwrap().components.len(), 3);
}

#[test]
fn running_example_with_unknown_labels() {
    let mut a = Alphabet::new();
    let net = samples::running_example(&mut a);
    let mut traces: Vec<Vec<LabelId>> = RUNNING_LOG.iter().map(|t| word(&mut a, t)).collect();
    traces.push(word(&mut a, "XBDCEG"));
    traces.push(word(&mut a, "BDCEGX"));
    traces.push(word(&mut a, "ABCDEFX"));
    let log = EventLog::from_sequences(traces).unwrap();
    check_against_oracle(&a, &net, &log);
}

#[test]
fn components_of_the_running_example_are_sequential() {
    let mut a = Alphabet::new();
    let net = samples::running_example(&mut a);
    let d = decompose(&net).unwrap();
    for c in &d.components {
        let rg = build_rg(&c.net, DEFAULT_MARKING_CAP).unwrap();
        assert!(rg.markings().iter().all(|m| m.token_count() == 1));
    }
}
