use clap::Parser;
use qburgers::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
