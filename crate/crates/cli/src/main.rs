//! `magbound`: torsion, disk spectra, bounds and comparisons from the
//! command line.
//!
//! Exit codes: 0 success, 1 module error, 2 usage error, 3 a validation
//! check failed. Errors are written to stderr as one JSON record.

mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use args::{Cli, Command};
use commands::{Emitted, Failure};

const EXIT_MODULE_ERROR: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CHECK_FAILED: u8 = 3;

fn error_record(module: &str, kind: &str, message: &str) -> String {
    json!({ "error": { "module": module, "kind": kind, "message": message } }).to_string()
}

fn jobs(cli: &Cli) -> Option<usize> {
    match &cli.command {
        Command::Torsion(a) => a.common.jobs,
        Command::Spectrum(a) => a.common.jobs,
        Command::Bound(a) | Command::Compare(a) => a.domain.common.jobs,
        Command::Sweep(a) => a.common.jobs,
        Command::Validate(a) => a.common.jobs,
    }
}

fn run(cli: &Cli) -> Result<Emitted, Failure> {
    match &cli.command {
        Command::Torsion(a) => commands::torsion(a),
        Command::Spectrum(a) => commands::spectrum(a),
        Command::Bound(a) => commands::bound(a, false),
        Command::Compare(a) => commands::bound(a, true),
        Command::Sweep(a) => commands::sweep(a),
        Command::Validate(a) => commands::validate(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            eprintln!("{}", error_record("cli_reporting", "usage", message.trim_end()));
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Some(n) = jobs(&cli) {
        if n == 0 {
            eprintln!("{}", error_record("cli_reporting", "usage", "--jobs must be at least 1"));
            return ExitCode::from(EXIT_USAGE);
        }
        // the global pool can only be built once per process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    // sequential dense kernels keep reports byte-identical across runs
    faer::set_global_parallelism(faer::Par::Seq);
    match run(&cli) {
        Ok(emitted) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(emitted.stdout.as_bytes()).and_then(|_| out.flush()).is_err() {
                return ExitCode::from(EXIT_MODULE_ERROR);
            }
            if emitted.all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CHECK_FAILED)
            }
        }
        Err(f) => {
            let kind = if f.usage { "usage" } else { f.error.kind() };
            eprintln!("{}", error_record(f.module, kind, &f.error.to_string()));
            ExitCode::from(if f.usage { EXIT_USAGE } else { EXIT_MODULE_ERROR })
        }
    }
}
