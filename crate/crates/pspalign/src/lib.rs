//! File formats, the parallel alignment engine and reporting on top of
//! `pspalign-core`.

pub mod cli;
pub mod dot;
pub mod engine;
pub mod pnml;
pub mod report;
pub mod testkit;
pub mod xes;
