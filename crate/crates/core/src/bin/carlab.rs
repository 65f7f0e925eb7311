use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use carlab::harness::{run, Command, RunOptions, MAX_MODES_ENV};

/// Verification campaigns for the CAR algebra on finite mode spaces.
#[derive(Parser)]
#[command(name = "carlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Anticommutation relations, the commutator identity and |a(f)| = |f|.
    VerifyCar(Common),
    /// Commutator bound for the module twirl over a refinement schedule.
    TwirlBound(Common),
    /// Restriction maps onto local algebras, vacuum projection and ideal test.
    Localize(Common),
    /// Fixed spaces of site-phase tori and gauge groups.
    NetFixedPoints(Common),
    /// Partitions with small block norms for a given vector.
    Partition(Common),
}

#[derive(Args)]
struct Common {
    /// JSON scenario file; defaults apply to omitted keys and to a missing file argument.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV report destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the seed of the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Dense cap on the mode count.
    #[arg(long, env = MAX_MODES_ENV)]
    max_modes: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Sub::VerifyCar(c) => (Command::VerifyCar, c),
        Sub::TwirlBound(c) => (Command::TwirlBound, c),
        Sub::Localize(c) => (Command::Localize, c),
        Sub::NetFixedPoints(c) => (Command::NetFixedPoints, c),
        Sub::Partition(c) => (Command::Partition, c),
    };
    match execute(command, &common) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("carlab {}: error: {msg}", command.name());
            ExitCode::from(2)
        }
    }
}

fn execute(command: Command, common: &Common) -> Result<bool, String> {
    let text = match &common.config {
        Some(path) => Some(fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?),
        None => None,
    };
    let options = RunOptions {
        seed: common.seed,
        max_modes: common.max_modes,
    };
    let report = run(command, text.as_deref(), &options).map_err(|e| e.to_string())?;
    match &common.out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
            report.write_csv(io::BufWriter::new(file)).map_err(|e| e.to_string())?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            report.write_csv(&mut lock).map_err(|e| e.to_string())?;
            lock.flush().map_err(|e| e.to_string())?;
        }
    }
    let failures = report.failures();
    if failures.is_empty() {
        eprintln!("{}: {} checks passed", report.command(), report.row_count());
    } else {
        eprintln!("{}: {} of {} checks failed", report.command(), failures.len(), report.row_count());
        for f in failures {
            eprintln!("  FAIL {f}");
        }
    }
    Ok(report.passed())
}
