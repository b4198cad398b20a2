use std::process::ExitCode;

use clap::Parser;
use w2lab::cli::{resolve, Cli};
use w2lab::{experiments, Result};

fn run(cli: &Cli) -> Result<()> {
    let cfg = resolve(&cli.command)?;
    let report = experiments::run(&cfg)?;
    for path in report.write(&cfg, &cfg.output)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.machine_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
