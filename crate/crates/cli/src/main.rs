use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use fcs_tempo_cli::{outcome_code, run_job, CliError, Command, RawConfig};

/// Heat statistics of a spin coupled to a harmonic bath.
#[derive(Debug, Parser)]
#[command(name = "fcs-tempo", version)]
struct Args {
    /// heat, dynamics, oracle-ibm, variational, sweep, converge or compare.
    command: Option<String>,

    /// Alternative to the positional command.
    #[arg(long = "command", value_name = "NAME")]
    command_flag: Option<String>,

    /// `key = value` configuration file; defaults apply to missing keys.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// CSV destination; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Worker threads for row-parallel commands (default: all cores).
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
}

fn command(args: &Args) -> Result<Command, CliError> {
    match (&args.command, &args.command_flag) {
        (Some(a), Some(b)) if a != b => Err(CliError::Config(format!("conflicting commands `{a}` and `{b}`"))),
        (Some(name), _) | (None, Some(name)) => name.parse(),
        (None, None) => Err(CliError::Config("no command given".into())),
    }
}

fn run(args: &Args) -> Result<i32, CliError> {
    let cmd = command(args)?;
    let raw = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            RawConfig::parse(&text)?
        }
        None => RawConfig::default(),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.workers {
        if n == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    // Open the destination first so an unwritable path fails before any work.
    let sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let outcome = pool.install(|| run_job(cmd, &raw))?;
    let mut sink = BufWriter::new(sink);
    outcome.table.write_to(&mut sink)?;
    sink.flush()?;
    if outcome.failed_rows > 0 {
        eprintln!("{} of {} rows failed", outcome.failed_rows, outcome.table.rows.len());
    }
    Ok(outcome_code(&outcome))
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("fcs-tempo: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
