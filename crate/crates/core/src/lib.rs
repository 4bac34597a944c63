//! Alignment-based conformance checking of event logs against workflow Petri
//! nets, using the product of a log automaton with the net's reachability
//! graph and an optional decomposition into concurrency-free components.
#![no_std]

extern crate alloc;

pub mod align;
pub mod dafsa;
pub mod label;
pub mod log;
pub mod marking;
pub mod net;
pub mod oracle;
pub mod recompose;
pub mod rg;
pub mod samples;
pub mod scomp;

pub use dafsa::{build_dafsa, Dafsa};
pub use label::{Alphabet, LabelId, LabelSet};
pub use log::{EventLog, Trace};
pub use marking::Marking;
pub use net::{NetBuilder, SystemNet};
pub use rg::{build_rg, remove_tau, remove_tau_extended, ReachabilityGraph};
