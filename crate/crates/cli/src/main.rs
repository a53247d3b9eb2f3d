use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use panelbounds::args::Cli;
use panelbounds::commands::run;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli.command) {
        Ok(doc) => {
            let mut out = std::io::stdout().lock();
            let text = serde_json::to_string_pretty(&doc).expect("json values serialize");
            if writeln!(out, "{text}").is_err() {
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
