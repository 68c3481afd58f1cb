//! `fdiv`: command-line front end for fdiv-core.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Mode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, unreadable or malformed input. Exit code 2.
    #[error("{0}")]
    Usage(String),
    /// A check ran and failed. Exit code 1.
    #[error("{0}")]
    Check(String),
}

impl From<fdiv_core::Error> for CliError {
    fn from(e: fdiv_core::Error) -> Self {
        use fdiv_core::Error as E;
        match e {
            E::InvalidField(_) | E::InvalidInput(_) | E::NotATransitionMatrix(_) | E::InvalidTower(_) | E::Json(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Check(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fdiv", version, about = "Divided-power D-modules, F-divided bundles and twisted towers over finite fields")]
pub struct Cli {
    /// Field as JSON, e.g. '{"p":2,"e":2,"modulus":[1,1,1]}' [default: {"p":2}]
    #[arg(long, global = true)]
    pub field: Option<String>,

    /// Seed for every random choice; recorded in all outputs
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Emit JSON (default)
    #[arg(long, global = true, conflicts_with = "table")]
    pub json: bool,

    /// Emit a human-readable table
    #[arg(long, global = true)]
    pub table: bool,

    /// Truncation cap (cohomological degree for `dcoh`, doublings for `dmod extract`)
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub cap: Option<u32>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Divided-power differential operators
    #[command(subcommand)]
    Diffop(DiffopCmd),
    /// O-coherent D-modules on the affine line
    #[command(subcommand)]
    Dmod(DmodCmd),
    /// Vector bundles and F-divided towers on the projective line
    #[command(subcommand)]
    P1(P1Cmd),
    /// Frobenius-twisted towers of vector spaces
    #[command(subcommand)]
    Tower(TowerCmd),
    /// Bounded first-quadrant spectral sequences
    #[command(subcommand)]
    Spectral(SpectralCmd),
    /// D-module cohomology through lim and R^1 lim
    #[command(subcommand)]
    Dcoh(DcohCmd),
    /// Run the full check suite
    VerifyPaper(VerifyArgs),
}

#[derive(Debug, Subcommand)]
pub enum DiffopCmd {
    /// Apply an operator {"k": poly} to a polynomial
    Apply {
        /// Operator JSON, inline or a file path
        #[arg(long)]
        op: String,
        /// Laurent polynomial JSON, inline or a file path
        #[arg(long)]
        poly: String,
        #[arg(long)]
        p: Option<u64>,
    },
    /// Compose two operators, checked on monomials
    Compose {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        p: Option<u64>,
        /// Highest monomial degree for the check
        #[arg(long)]
        max_degree: Option<usize>,
    },
    /// Check D_k D_l = C(k+l,k) D_{k+l} for all k, l up to the order bound
    CheckRelations {
        #[arg(long)]
        p: Option<u64>,
        #[arg(long, default_value_t = 10)]
        max_order: usize,
        #[arg(long, default_value_t = 30)]
        max_degree: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum DmodCmd {
    /// Check Leibniz, commutation and nilpotence of a presentation
    Validate {
        #[arg(long)]
        module: String,
        /// Highest monomial degree tested
        #[arg(long, default_value_t = 4)]
        degree: usize,
    },
    /// Generators of the level-n flat sections
    Extract {
        #[arg(long)]
        module: String,
        #[arg(long)]
        level: u32,
        /// Starting degree bound
        #[arg(long, default_value_t = 1)]
        degree: usize,
    },
    /// Presentation built from a list of tower matrices
    FromTower {
        #[arg(long)]
        tower: String,
    },
    /// dim k[x]_{<=d} / k[x^p]_{<=d}
    Witness {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        degree: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum P1Cmd {
    /// Splitting type by Birkhoff factorization, cross-checked by h^0 of twists
    Split {
        #[arg(long)]
        bundle: String,
    },
    /// dim H^i(E(t)) by Čech cohomology
    Cohomology {
        #[arg(long)]
        bundle: String,
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
        i: u8,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        twist: i64,
    },
    /// Frobenius pullback of a bundle
    Pullback {
        #[arg(long)]
        bundle: String,
    },
    /// h^0 monotonicity, degree divisibility and rigidity of a tower
    CheckTower {
        #[arg(long)]
        tower: String,
    },
    /// chi(E(t)) by Čech cohomology
    Euler {
        #[arg(long)]
        bundle: String,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        twist: i64,
    },
}

#[derive(Debug, Args)]
pub struct TowerArg {
    #[arg(long)]
    pub tower: String,
}

#[derive(Debug, Subcommand)]
pub enum TowerCmd {
    /// Stable subspaces with stabilization depths
    Stable(TowerArg),
    /// Mittag-Leffler certificate
    Ml(TowerArg),
    /// dim lim
    Lim(TowerArg),
    /// dim R^1 lim
    R1lim(TowerArg),
    /// dim lim <= sup dim V_i
    Bound(TowerArg),
}

#[derive(Debug, Subcommand)]
pub enum SpectralCmd {
    /// Upper and edge bounds on H^n
    Bounds {
        #[arg(long)]
        page: String,
        #[arg(long)]
        n: usize,
        /// List of dim H^k
        #[arg(long)]
        abutment: Option<String>,
    },
    /// Seeded simulation with admissible random ranks
    Simulate {
        /// Page to run; a random page is drawn from the seed when absent
        #[arg(long)]
        page: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum DcohCmd {
    /// H^i_D of an F-divided tower on the projective line
    P1 {
        #[arg(long)]
        tower: String,
    },
    /// Truncated witnesses for a D-module on the affine line
    Affine {
        #[arg(long)]
        module: String,
        #[arg(long, value_delimiter = ',', default_value = "4,8,16")]
        truncations: Vec<usize>,
    },
    /// Assemble from user-supplied towers {"towers":[...]}
    FromTowers { towers: String },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FaultArg {
    CorruptRelationTable,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Run a single check by name
    #[arg(long)]
    pub only: Option<String>,
    /// Corrupt internal data to confirm that the suite can fail
    #[arg(long, hide = true)]
    pub inject_fault: Option<FaultArg>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let mode = if cli.table { Mode::Table } else { Mode::Json };
    match commands::run(&cli) {
        Ok(out) => {
            print!("{}", output::render(&out.value, mode, out.table.as_deref()));
            match out.failure {
                Some(msg) => {
                    eprintln!("check failed: {msg}");
                    ExitCode::from(1)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
    }
}
