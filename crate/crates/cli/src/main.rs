use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use fdbounds_cli::args::Cli;
use fdbounds_cli::jobs::{run, EXIT_INPUT};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Help and version requests are not errors.
            return if e.use_stderr() { ExitCode::from(EXIT_INPUT as u8) } else { ExitCode::SUCCESS };
        }
    };
    let out_path = cli.global.out.clone();
    let result = cli.into_spec().and_then(|spec| run(&spec));
    let output = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(report) = &output.report {
        // A closed pipe is not worth a panic.
        let _ = writeln!(std::io::stderr(), "{report}");
    }
    match out_path {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, &output.body) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(EXIT_INPUT as u8);
            }
        }
        None => {
            let _ = std::io::stdout().write_all(output.body.as_bytes());
        }
    }
    ExitCode::from(output.exit as u8)
}
