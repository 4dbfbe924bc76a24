use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use weierdiv_cli::commands::{run, Cli};

fn fail(value: serde_json::Value) -> ExitCode {
    let _ = writeln!(std::io::stderr(), "{value}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            return fail(json!({"error": {"kind": "usage", "message": message.trim_end()}}));
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return fail(json!({"error": {"kind": "input", "field": "threads", "message": "--threads must be at least 1"}}));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(json!({"error": {"kind": "input", "field": "threads", "message": e.to_string()}}));
        }
    }
    match run(cli) {
        Ok(outcome) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(outcome.stdout.as_bytes());
            let _ = stdout.flush();
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => fail(e.to_json()),
    }
}
