use std::process::ExitCode;

use clap::Parser;
use cosetlab::run::{EXIT_ASSERTION, EXIT_OK, EXIT_USAGE};
use cosetlab::{exit_code, run, Cli, RunConfig};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, invocation) = cli.command.split();
    let result = RunConfig::from_invocation(command, invocation).and_then(|cfg| run(&cfg).map(|out| (cfg, out)));
    let (cfg, out) = match result {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e) as u8);
        }
    };
    match &cfg.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &out.artifact) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_USAGE as u8);
            }
        }
        None => print!("{}", out.artifact),
    }
    eprintln!("{}", out.summary);
    ExitCode::from(if out.success { EXIT_OK } else { EXIT_ASSERTION } as u8)
}
