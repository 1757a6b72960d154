use std::path::PathBuf;

use clap::{Parser, Subcommand};
use ellvar_cli::{run, Command, RunOptions};

#[derive(Parser)]
#[command(
    name = "ellvar",
    version,
    about = "Two-solution solver for a coupled quasilinear elliptic system"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Configuration file (`section.key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed; overrides `solver.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Run the solvers even when the hypotheses are not verified.
    #[arg(long)]
    force: bool,
    #[arg(long, hide = true)]
    corrupt_gradient: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Certify the φ conditions for both components.
    CheckPhi(Common),
    /// Sobolev constants and admissibility thresholds.
    Thresholds(Common),
    /// Ball minimizer and mountain-pass point.
    Solve(Common),
    /// Solve over a grid of parameter fractions.
    Sweep(Common),
    /// Finite-difference check of the energy gradient.
    Gradcheck(Common),
}

fn main() {
    let cli = Cli::parse();
    let (command, c) = match cli.command {
        Cmd::CheckPhi(c) => (Command::CheckPhi, c),
        Cmd::Thresholds(c) => (Command::Thresholds, c),
        Cmd::Solve(c) => (Command::Solve, c),
        Cmd::Sweep(c) => (Command::Sweep, c),
        Cmd::Gradcheck(c) => (Command::Gradcheck, c),
    };
    let opts = RunOptions {
        out: c.out,
        seed: c.seed,
        force: c.force,
        corrupt_gradient: c.corrupt_gradient,
    };
    std::process::exit(run(command, &c.config, &opts));
}
