//! `subshift`: command-line front end for the symbolic dynamics toolkit.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use report::{Format, Report, Status};

#[derive(Parser, Debug)]
#[command(name = "subshift", version, about = "Subshifts of finite type over Z^d x G")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value = "json", global = true)]
    format: Format,
    /// Seed for randomized searches.
    #[arg(long, default_value_t = 7, global = true)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
pub struct SpecArg {
    /// SFT specification file.
    #[arg(long)]
    pub spec: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Entropy bounds or exact values.
    Entropy {
        #[command(flatten)]
        spec: SpecArg,
        /// Side of the box {0..n-1}^d for the upper bound.
        #[arg(long)]
        r#box: Option<i64>,
        /// Strip direction "a,b" for ⟨n·v⟩-periodic points (Z² only).
        #[arg(long)]
        strip: Option<String>,
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// Lower bound from boxes of this side glued along safe-symbol corridors.
        #[arg(long)]
        periodic_side: Option<i64>,
    },
    /// Size of the language on a box.
    Language {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        r#box: i64,
        /// Also list the patterns.
        #[arg(long)]
        list: bool,
    },
    /// Periodic points for a finite-index subgroup.
    Periodic {
        #[command(flatten)]
        spec: SpecArg,
        /// Generator rows, e.g. "2,0;0,2".
        #[arg(long)]
        subgroup: String,
        /// Keep only points whose stabilizer is exactly the subgroup.
        #[arg(long)]
        exact_stab: bool,
        #[arg(long)]
        list: bool,
    },
    /// Points of least period n for a Z-SFT.
    LeastPeriods {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, default_value_t = 12)]
        max: usize,
    },
    /// Disjointified truncated Voronoi tiling.
    Voronoi {
        /// File of center offsets.
        #[arg(long)]
        centers: PathBuf,
        #[arg(long)]
        radius2: i128,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// Torsion moduli, e.g. "2,3".
        #[arg(long, default_value = "")]
        torsion: String,
    },
    /// Marker set for offsets P inside a cylinder V.
    MarkerLemma {
        #[command(flatten)]
        spec: SpecArg,
        /// Offsets P, e.g. "-1,1" or "(1,0),(-1,0)".
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        /// Pattern file describing the cylinder V (default: all of X).
        #[arg(long)]
        v: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        max_radius: i64,
        /// Radius of the box on which the output is re-verified.
        #[arg(long, default_value_t = 4)]
        verify_radius: i64,
    },
    /// Pattern on Q_n without self-overlaps outside the kernel.
    FindMarker {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        n: i64,
    },
    /// Safe-symbol or coloring retraction of a pattern.
    Retract {
        #[arg(long, value_enum)]
        mode: commands::RetractMode,
        #[command(flatten)]
        spec: SpecArg,
        /// Pattern file.
        #[arg(long)]
        input: PathBuf,
        /// Safe symbol (safe mode).
        #[arg(long)]
        symbol: Option<String>,
        /// Number of colors (coloring mode).
        #[arg(long)]
        k: Option<usize>,
        /// Neighbour offsets F (coloring mode).
        #[arg(long, allow_hyphen_values = true)]
        f: Option<String>,
        #[arg(long, default_value_t = 3)]
        max_window: i64,
    },
    /// Checks a homotopy candidate ψ: {0,1} × Y × Y → Y.
    VerifyHomotopy {
        #[command(flatten)]
        spec: SpecArg,
        /// "selector", "projection", or a JSON sliding block code file.
        #[arg(long)]
        psi: String,
        #[arg(long, default_value_t = 6)]
        period_bound: u64,
        /// Also require ψ(z, y, y) = y.
        #[arg(long)]
        strong: bool,
    },
    /// Freeness of X for a family of subgroups.
    Gfree {
        #[command(flatten)]
        spec: SpecArg,
        /// Subgroups separated by '|', each as generator rows.
        #[arg(long)]
        groups: String,
        #[arg(long, default_value_t = 6)]
        max_window: i64,
    },
    /// Embedding conditions into a full shift.
    CheckEmbed {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y_full_alphabet: Option<usize>,
        /// A Z-SFT target instead of a full shift.
        #[arg(long)]
        y: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 12)]
        max_period: usize,
        #[arg(long, default_value_t = 6)]
        max_index: u64,
        #[arg(long, default_value_t = 3)]
        max_prim_norm: i64,
        #[arg(long, default_value_t = 4)]
        max_n: u32,
    },
    /// Builds a certified embedding of a Z-SFT into a full shift.
    BuildEmbedding {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        target: usize,
        #[arg(long, default_value_t = 8)]
        period_bound: u64,
        #[arg(long, default_value_t = 9)]
        max_radius: i64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Entropy { .. } => "entropy",
            Command::Language { .. } => "language",
            Command::Periodic { .. } => "periodic",
            Command::LeastPeriods { .. } => "least-periods",
            Command::Voronoi { .. } => "voronoi",
            Command::MarkerLemma { .. } => "marker-lemma",
            Command::FindMarker { .. } => "find-marker",
            Command::Retract { .. } => "retract",
            Command::VerifyHomotopy { .. } => "verify-homotopy",
            Command::Gfree { .. } => "gfree",
            Command::CheckEmbed { .. } => "check-embed",
            Command::BuildEmbedding { .. } => "build-embedding",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    #[cfg(feature = "parallel")]
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("subshift: cannot configure {j} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = cli.jobs;
    let name = cli.command.name();
    let report = match commands::run(&cli.command, cli.seed) {
        Ok((status, result)) => Report { command: name.into(), seed: cli.seed, status, result },
        Err(e) => {
            let status = commands::classify(&e);
            Report { command: name.into(), seed: cli.seed, status, result: commands::error_payload(&e) }
        }
    };
    print!("{}", report.emit(cli.format));
    if report.status == Status::InputError {
        eprintln!("subshift: {}", report.result["error"].as_str().unwrap_or("input error"));
    }
    ExitCode::from(report.status.exit_code() as u8)
}
