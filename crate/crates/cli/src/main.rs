//! `qevo`: reproducible experiments on measuring, storing and compressing
//! quantum evolutions. Every run prints a report whose invariant checks
//! decide the exit code.

mod commands;
mod report;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "qevo", version, about = "Measure, store and compress quantum evolutions")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Seed for every sampled quantity; required when shots, trials or samples are nonzero.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Print the JSON report instead of the table.
    #[arg(long, global = true)]
    pub json: bool,
    /// Tolerance for the invariant checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Also write the JSON report to this path.
    #[arg(long, global = true)]
    pub out: Option<std::path::PathBuf>,
    /// Add wall time to the report (makes output run-dependent).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    Pauli,
    Weyl,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AncillaBasis {
    Computational,
    Fourier,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Exact,
    Comb,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
pub enum Command {
    /// Build an orthogonal unitary basis and check its Gram matrix.
    Basis {
        #[arg(long, value_enum, default_value = "pauli")]
        basis: BasisKind,
        /// System dimension (a power of two for Pauli).
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Prefactor U0 of the basis (gate name or matrix file).
        #[arg(long)]
        u0: Option<String>,
    },
    /// Which-unitary measurement of a unitary through the two-time circuit.
    Measure {
        #[arg(long)]
        unitary: String,
        #[arg(long, value_enum, default_value = "pauli")]
        basis: BasisKind,
        #[arg(long)]
        u0: Option<String>,
        /// `random:<seed>`, `basis:<k>` or a state file.
        #[arg(long, default_value = "basis:0")]
        state: String,
        #[arg(long, default_value_t = 0)]
        shots: u64,
    },
    /// Choi state, canonical Kraus set, entropy and dilation of a map.
    Channel {
        /// `dephasing:p`, `depolarizing:p[:d]`, `identity:d`, `unitary:<gate>` or a Kraus file.
        #[arg(long)]
        map: String,
    },
    /// Typical-subspace compression of n uses of a map.
    Compress {
        #[arg(long)]
        map: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        /// Also report the smallest subspace with at most this tail mass.
        #[arg(long)]
        tail: Option<f64>,
    },
    /// Heralded retrieval of a stored Kraus operator onto a state.
    Retrieve {
        #[arg(long)]
        map: String,
        #[arg(long, default_value_t = 0)]
        op_index: usize,
        #[arg(long, default_value = "basis:0")]
        state: String,
        #[arg(long, default_value_t = 0)]
        trials: u64,
    },
    /// Operator Schmidt decomposition and interaction entanglement.
    Schmidt {
        #[arg(long)]
        unitary: String,
        /// `dA,dB`.
        #[arg(long, default_value = "2,2")]
        dims: String,
    },
    /// Concentration of n copies of α I⊗I + β σx⊗σx.
    Concentrate {
        #[arg(long)]
        n: usize,
        /// Real amplitude α; β = √(1 − α²) unless given.
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, value_enum, default_value = "comb")]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        samples: u64,
    },
    /// Super-dense coding of a unitary through a shared pair.
    Superdense {
        #[arg(long)]
        unitary: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        shots: u64,
    },
    /// Replay a claimed Kraus-index record through the map's dilation.
    Verify {
        #[arg(long)]
        map: String,
        /// Comma-separated operator indices, one per step.
        #[arg(long)]
        claimed: String,
        #[arg(long, value_enum, default_value = "computational")]
        ancilla: AncillaBasis,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let mut report = match commands::run(&cli.command, &cli.global) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    if cli.global.timing {
        report.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    let json = report.to_json();
    if let Some(path) = &cli.global.out {
        if let Err(e) = std::fs::write(path, format!("{json}\n")) {
            eprintln!("error: cannot write '{}': {e}", path.display());
            return ExitCode::from(2);
        }
    }
    let text = if cli.global.json { format!("{json}\n") } else { report.to_table() };
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
    if report.all_passed {
        ExitCode::SUCCESS
    } else {
        for c in report.checks.iter().filter(|c| !c.pass) {
            eprintln!("invariant check failed: {} = {:.3e} (tol {:.1e})", c.name, c.value, c.tolerance);
        }
        ExitCode::from(1)
    }
}
