use std::path::{Path, PathBuf};

use pspalign::pnml::{parse_pnml, read_pnml, write_pnml};
use pspalign::xes::{parse_xes, read_log, write_xes};
use pspalign_core::rg::{build_rg, DEFAULT_MARKING_CAP};
use pspalign_core::samples::{self, word, RUNNING_LOG};
use pspalign_core::{Alphabet, EventLog};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

#[test]
fn fixture_net_has_the_running_example_state_space() {
    let mut a = Alphabet::new();
    let read = read_pnml(&data("running.pnml"), &mut a).unwrap();
    let mut b = Alphabet::new();
    let built = samples::running_example(&mut b);
    let (r1, r2) = (build_rg(&read, DEFAULT_MARKING_CAP).unwrap(), build_rg(&built, DEFAULT_MARKING_CAP).unwrap());
    assert_eq!((r1.num_markings(), r1.num_arcs()), (r2.num_markings(), r2.num_arcs()));
    assert_eq!(read.transitions().iter().filter(|t| t.label.is_tau()).count(), 3);
    assert!(read.validate().decomposable());
}

#[test]
fn fixture_log_is_the_running_log() {
    let mut a = Alphabet::new();
    let log = read_log(&data("running.xes"), &mut a).unwrap();
    let mut b = a.clone();
    let want = EventLog::from_sequences(RUNNING_LOG.iter().map(|t| word(&mut b, t))).unwrap();
    assert_eq!(log, want);
    assert_eq!(log.total_events(), 26);
}

#[test]
fn pnml_round_trip_is_stable() {
    let mut a = Alphabet::new();
    let net = read_pnml(&data("running.pnml"), &mut a).unwrap();
    let text = write_pnml(&net, &a);
    let mut b = a.clone();
    let again = parse_pnml(text.as_bytes(), &mut b).unwrap();
    assert_eq!(write_pnml(&again, &b), text);
}

#[test]
fn xes_round_trip_keeps_frequencies() {
    let mut a = Alphabet::new();
    let log = EventLog::from_sequences(["AB", "AB", "BA", ""].iter().map(|t| word(&mut a, t))).unwrap();
    let text = write_xes(&log, &a);
    let mut b = a.clone();
    let again = parse_xes(text.as_bytes(), &mut b).unwrap();
    assert_eq!(again, log);
    assert_eq!(again.total_traces(), 4);
}
