use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use shiftlab_cli::{configure_threads, run, CliError};

/// Run a shiftlab configuration and emit a JSON report.
#[derive(Parser)]
#[command(name = "shiftlab", version)]
struct Args {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Report path; the report goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write `<out>.plot.csv` (classify and orbit).
    #[arg(long)]
    emit_plot_data: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let threads = std::env::var("SHIFTLAB_THREADS").ok();
    let outcome = configure_threads(threads.as_deref())
        .map_err(CliError::from)
        .and_then(|_| run(&args.config, args.out.as_deref(), args.emit_plot_data));
    match outcome {
        Ok(report) => {
            if args.out.is_none() {
                print!("{report}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.envelope());
            ExitCode::from(e.exit_code())
        }
    }
}
