use clap::Parser;
use pspalign::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
