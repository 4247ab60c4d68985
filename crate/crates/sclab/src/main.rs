use std::process::ExitCode;

use clap::Parser;

use sclab::cli::{main_with, Cli};

fn main() -> ExitCode {
    main_with(Cli::parse(), &mut std::io::stdout(), &mut std::io::stderr())
}
