use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let run = comcat::execute(&comcat::Cli::parse());
    if let Some(text) = run.stdout {
        // a closed pipe (`| head`) is not an error for the verdict
        let _ = writeln!(std::io::stdout().lock(), "{text}");
    }
    if let Some(e) = run.error {
        eprintln!("comcat: {e}");
    }
    ExitCode::from(run.code)
}
