use clap::Parser;
use nls_gibbs_lab::cli::{main_with, Cli};

fn main() -> std::process::ExitCode {
    main_with(Cli::parse())
}
