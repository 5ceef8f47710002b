use clap::Parser;
use reset_fpt::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(&cli));
}
