use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use novikov_core::cli::{
    generate_instance, parse_monoid_descriptor, parse_rational, parse_ring_descriptor, run_text, serialize_problem,
    Command, GenParams, InstanceKind, Report,
};
use novikov_core::{Error, Result};

#[derive(Parser)]
#[command(name = "novikov", version, about = "Exact descent computations over Novikov rings")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and check a problem file.
    Validate { file: PathBuf },
    /// Check the cocycle condition of a `phi:` datum.
    Cocycle { file: PathBuf },
    /// Compute the isocrystal matrix of a `phi:` datum.
    Isocrystal { file: PathBuf },
    /// Trivialize a datum or isocrystal, or report an obstruction.
    Descend { file: PathBuf },
    /// Solve `z - F(z) = c` for a `twist:` series.
    TwistSolve { file: PathBuf },
    /// Print a seeded random problem with a known trivialization.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        rank: usize,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value = "fp 5")]
        ring: String,
        #[arg(long, default_value = "zp 2")]
        monoid: String,
        #[arg(long, default_value = "2")]
        lambda: String,
        #[arg(long, default_value = "16")]
        prec: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Coboundary,
    Nilpotent,
}

fn run_file(cmd: Command, file: &PathBuf) -> Report {
    match std::fs::read_to_string(file) {
        Ok(text) => run_text(cmd, &text),
        Err(e) => Report::error(&Error::Io(format!("{}: {e}", file.display()))),
    }
}

fn gen(seed: u64, rank: usize, kind: Kind, ring: &str, monoid: &str, lambda: &str, prec: &str) -> Result<String> {
    let params = GenParams {
        seed,
        rank,
        ring: parse_ring_descriptor(ring)?,
        monoid: parse_monoid_descriptor(monoid)?,
        lambda: parse_rational(lambda)?,
        prec: parse_rational(prec)?,
        kind: match kind {
            Kind::Coboundary => InstanceKind::Coboundary,
            Kind::Nilpotent => InstanceKind::Nilpotent,
        },
    };
    Ok(serialize_problem(&generate_instance(&params)?.problem))
}

fn emit(report: Report) -> ExitCode {
    print!("{}", report.render());
    if report.exit_code == 2 {
        if let Some(msg) = report.json["error"].as_str() {
            eprintln!("novikov: {msg}");
        }
    }
    ExitCode::from(report.exit_code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Cmd::Validate { file } => emit(run_file(Command::Validate, &file)),
        Cmd::Cocycle { file } => emit(run_file(Command::Cocycle, &file)),
        Cmd::Isocrystal { file } => emit(run_file(Command::Isocrystal, &file)),
        Cmd::Descend { file } => emit(run_file(Command::Descend, &file)),
        Cmd::TwistSolve { file } => emit(run_file(Command::TwistSolve, &file)),
        Cmd::Gen {
            seed,
            rank,
            kind,
            ring,
            monoid,
            lambda,
            prec,
        } => match gen(seed, rank, kind, &ring, &monoid, &lambda, &prec) {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => emit(Report::error(&e)),
        },
    }
}
