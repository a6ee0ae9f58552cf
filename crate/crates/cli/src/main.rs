use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use germ_forge::dsl::{parse_problem, run_task, Overrides, TaskReport};

/// Exact jet-level first-integral engine for integrable 1-forms.
#[derive(Parser, Debug)]
#[command(name = "germ-forge", version)]
struct Cli {
    /// Problem file with declarations, definitions and one task.
    task_file: PathBuf,
    /// Write the JSON certificate document to this path.
    #[arg(long, value_name = "PATH")]
    certificate: Option<PathBuf>,
    /// Truncation degree D, overriding the file.
    #[arg(long, value_name = "D", value_parser = clap::value_parser!(u32).range(1..))]
    degree: Option<u32>,
    /// Truncation t-order K, overriding the file.
    #[arg(long, value_name = "K", value_parser = clap::value_parser!(u32).range(1..))]
    torder: Option<u32>,
    /// Print per-step details.
    #[arg(long)]
    verbose: bool,
}

const USAGE_ERROR: u8 = 1;

fn run(cli: &Cli) -> Result<TaskReport, String> {
    let path = cli.task_file.display();
    let text = std::fs::read_to_string(&cli.task_file).map_err(|e| format!("{path}: {e}"))?;
    let problem = parse_problem(&text).map_err(|e| format!("{path}:{e}"))?;
    let overrides = Overrides {
        degree: cli.degree,
        torder: cli.torder,
    };
    let report = run_task(&problem, overrides).map_err(|e| format!("{path}:{e}"))?;
    if let Some(out) = &cli.certificate {
        std::fs::write(out, report.json()).map_err(|e| format!("{}: {e}", out.display()))?;
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => USAGE_ERROR,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(report) => {
            for line in &report.summary {
                println!("{line}");
            }
            if cli.verbose {
                for line in &report.details {
                    println!("{line}");
                }
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(USAGE_ERROR)
        }
    }
}
