use clap::Parser;
use rlncsim::output::{run_cli, Cli};

fn main() {
    std::process::exit(run_cli(&Cli::parse()));
}
