//! Command-line interface.

use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pspalign_core::align::DEFAULT_EXPANSION_BUDGET;
use pspalign_core::oracle::brute_force_optimal_cost;
use pspalign_core::rg::{build_rg, remove_tau, DEFAULT_MARKING_CAP};
use pspalign_core::Alphabet;

use crate::dot;
use crate::engine::{self, EngineError, EngineOptions, StrategyChoice};
use crate::pnml::read_pnml;
use crate::report::Report;
use crate::xes::read_log;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_TIMEOUT: i32 = 3;
pub const EXIT_STATE_SPACE: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "pspalign", version, about = "Alignment-based conformance checking of event logs against Petri nets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Align a log against a model and report costs and fitness.
    Check(CheckArgs),
    /// Exhaustive optimal costs, for cross-checking small inputs.
    #[command(hide = true)]
    Oracle(OracleArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrategyArg {
    Auto,
    Monolithic,
    Scomponent,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Event log: XES, or one comma-separated trace per line.
    #[arg(long)]
    pub log: PathBuf,
    /// Petri net in PNML.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    pub strategy: StrategyArg,
    /// Enumerate every optimal alignment (monolithic only).
    #[arg(long)]
    pub all_optimal: bool,
    #[arg(long)]
    pub no_memo: bool,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Per-trace time limit.
    #[arg(long)]
    pub timeout_ms: Option<u64>,
    #[arg(long)]
    pub global_timeout_ms: Option<u64>,
    /// Per-trace node expansion limit.
    #[arg(long, default_value_t = DEFAULT_EXPANSION_BUDGET)]
    pub expansion_budget: u64,
    #[arg(long, default_value_t = DEFAULT_MARKING_CAP)]
    pub marking_cap: usize,
    /// JSON report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Include the move list of every trace in the JSON report.
    #[arg(long)]
    pub emit_alignments: bool,
    /// Write Graphviz files of the net, DAFSA, reachability graph and PSP.
    #[arg(long)]
    pub dot_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long)]
    pub log: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MARKING_CAP)]
    pub marking_cap: usize,
}

pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Check(a) => check(&a),
        Command::Oracle(a) => oracle(&a),
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), i32> {
    std::fs::write(path, contents).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        EXIT_IO
    })
}

fn check(args: &CheckArgs) -> i32 {
    match check_inner(args) {
        Ok(code) | Err(code) => code,
    }
}

fn check_inner(args: &CheckArgs) -> Result<i32, i32> {
    let mut alphabet = Alphabet::new();
    let net = read_pnml(&args.model, &mut alphabet).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_INVALID
    })?;
    let log = read_log(&args.log, &mut alphabet).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_INVALID
    })?;
    let opts = EngineOptions {
        strategy: match args.strategy {
            StrategyArg::Auto => StrategyChoice::Auto,
            StrategyArg::Monolithic => StrategyChoice::Monolithic,
            StrategyArg::Scomponent => StrategyChoice::SComponent,
        },
        all_optimal: args.all_optimal,
        memo: !args.no_memo,
        threads: args.threads,
        trace_timeout: args.timeout_ms.map(Duration::from_millis),
        global_timeout: args.global_timeout_ms.map(Duration::from_millis),
        expansion_budget: args.expansion_budget,
        marking_cap: args.marking_cap,
    };
    let result = engine::run(&net, &alphabet, &log, &opts).map_err(|e| {
        eprintln!("error: {e}");
        match e {
            EngineError::StateSpace(_) => EXIT_STATE_SPACE,
            EngineError::Pool(_) => EXIT_IO,
            EngineError::InvalidNet(_) | EngineError::AllOptimalNeedsMonolithic => EXIT_INVALID,
        }
    })?;
    let report = Report::build(&result, &net, &alphabet, &log, args.emit_alignments);
    let json = report.to_json();
    match &args.out {
        Some(p) => write_file(p, json.as_bytes())?,
        None => print!("{json}"),
    }
    if let Some(p) = &args.csv {
        let mut buf = Vec::new();
        report.write_csv(&mut buf).map_err(|e| {
            eprintln!("error: {}: {e}", p.display());
            EXIT_IO
        })?;
        write_file(p, &buf)?;
    }
    if let Some(dir) = &args.dot_dir {
        std::fs::create_dir_all(dir).map_err(|e| {
            eprintln!("error: {}: {e}", dir.display());
            EXIT_IO
        })?;
        write_file(&dir.join("net.dot"), dot::net_dot(&net, &alphabet).as_bytes())?;
        write_file(&dir.join("dafsa.dot"), dot::dafsa_dot(&result.dafsa, &alphabet).as_bytes())?;
        if let Some(m) = &result.global_model {
            write_file(&dir.join("rg.dot"), dot::rg_dot(m.rg(), &net, &alphabet).as_bytes())?;
        }
        if let Some(psp) = &result.psp {
            write_file(&dir.join("psp.dot"), dot::psp_dot(psp, &alphabet).as_bytes())?;
        }
    }
    let agg = &report.aggregates;
    eprintln!(
        "{} traces ({} distinct), strategy {}, raw fitness cost {}, failed {}",
        report.log.traces, report.log.distinct_traces, report.strategy, agg.raw_fitness_cost, agg.distinct_failed
    );
    Ok(if result.global_timeout_hit { EXIT_TIMEOUT } else { EXIT_OK })
}

fn oracle(args: &OracleArgs) -> i32 {
    let mut alphabet = Alphabet::new();
    let net = match read_pnml(&args.model, &mut alphabet) {
        Ok(n) => n,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    let log = match read_log(&args.log, &mut alphabet) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    let rg = match build_rg(&net, args.marking_cap).and_then(|rg| remove_tau(&rg)) {
        Ok(rg) => rg,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_STATE_SPACE;
        }
    };
    for (id, t) in log.traces().iter().enumerate() {
        match brute_force_optimal_cost(&t.labels, &rg) {
            Ok((cost, _)) => println!("{id}\t{cost}"),
            Err(e) => println!("{id}\terror: {e}"),
        }
    }
    EXIT_OK
}
