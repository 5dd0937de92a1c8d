use std::process::ExitCode;

use clap::Parser;
use tgv1d::cli::Cli;
use tgv1d::commands::run;

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(run(cli, std::env::args().collect()))
}
