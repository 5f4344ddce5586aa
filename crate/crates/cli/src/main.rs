use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = c2e_cli::Cli::parse();
    ExitCode::from(c2e_cli::run(&cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock()))
}
