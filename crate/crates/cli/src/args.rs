use std::hash::{BuildHasher, RandomState};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mflab_core::experiments::Family;

use crate::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(
    name = "mflab",
    version,
    about = "Matrix factorizations and MCM lattices over truncated hypersurface rings"
)]
pub struct Cli {
    /// Truncation degree N (at least 4). Defaults to the input ring's truncation, then 12.
    #[arg(long, global = true, env = "MFLAB_TRUNC")]
    pub trunc: Option<usize>,
    /// Seed for randomized searches, or `random`.
    #[arg(long, global = true, default_value = "42")]
    pub seed: String,
    /// Upper bound on worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Shorthand for `--format csv`.
    #[arg(long, global = true)]
    pub csv: bool,
    /// Timing and progress on stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
    Csv,
}

/// Settings shared by every subcommand.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub trunc: Option<usize>,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub format: Format,
    pub verbosity: u8,
}

pub const MIN_TRUNC: usize = 4;

impl Cli {
    pub fn config(&self) -> CliResult<RunConfig> {
        let seed = match self.seed.as_str() {
            "random" => RandomState::new().hash_one(std::time::SystemTime::now()),
            s => s
                .parse()
                .map_err(|_| CliError::Input(format!("--seed expects an integer or `random`, got `{s}`")))?,
        };
        if let Some(t) = self.trunc {
            check_trunc(t)?;
        }
        Ok(RunConfig {
            trunc: self.trunc,
            seed,
            jobs: self.jobs,
            format: if self.csv { Format::Csv } else { self.format },
            verbosity: self.verbose,
        })
    }
}

pub fn check_trunc(t: usize) -> CliResult<usize> {
    if t < MIN_TRUNC {
        return Err(CliError::Input(format!(
            "truncation must be at least {MIN_TRUNC}, got {t}"
        )));
    }
    Ok(t)
}

impl RunConfig {
    /// The explicit truncation, else the input's, else the default.
    pub fn trunc_or(&self, fallback: Option<usize>) -> CliResult<usize> {
        check_trunc(self.trunc.or(fallback).unwrap_or(mflab_core::context::DEFAULT_TRUNC))
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Ring and curve descriptors.
    #[command(subcommand)]
    Ring(RingCmd),
    /// Structural operations on matrix factorizations.
    #[command(subcommand)]
    Mf(MfCmd),
    /// Double branched cover functors.
    #[command(subcommand)]
    Knoerrer(KnoerrerCmd),
    /// Homomorphism spaces.
    #[command(subcommand)]
    Hom(HomCmd),
    /// Module invariants.
    #[command(subcommand)]
    Invariant(InvariantCmd),
    /// Minimal free resolution.
    Resolve {
        file: PathBuf,
        #[arg(long, default_value_t = 6)]
        steps: usize,
    },
    /// Minimal lattice approximation of the residue field.
    ApproxK {
        #[arg(long)]
        ring: PathBuf,
    },
    /// Experiments.
    #[command(subcommand)]
    Exp(ExpCmd),
}

#[derive(Subcommand, Debug)]
pub enum RingCmd {
    /// Basic data of a hypersurface ring or a monomial curve descriptor.
    Check { file: PathBuf },
}

#[derive(Args, Debug)]
pub struct Transform {
    pub file: PathBuf,
    /// Also write the resulting factorization to this path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum MfCmd {
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    Shift(Transform),
    Reduce(Transform),
    Transpose(Transform),
    /// Auslander-Reiten translate with d = ring dimension.
    Tau(Transform),
    Iso {
        a: PathBuf,
        b: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RoundTrip {
    Both,
    SharpFlat,
    FlatSharp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CatalogSel {
    Ade,
}

#[derive(Subcommand, Debug)]
pub enum KnoerrerCmd {
    Sharp(Transform),
    Flat(Transform),
    Verify {
        files: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = RoundTrip::Both)]
        roundtrip: RoundTrip,
        /// Run over the built-in catalog instead of files.
        #[arg(long, value_enum)]
        catalog: Option<CatalogSel>,
        /// Also exhibit N as a direct summand of (N-bar)^#.
        #[arg(long)]
        section: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum HomCmd {
    /// dim of stable Hom(M, N).
    Stable { m: PathBuf, n: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum InvariantCmd {
    Hlength { file: PathBuf },
    Betti { file: PathBuf },
    Mult { file: PathBuf },
    Annexp { file: PathBuf },
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse::<Family>().map_err(|e| e.to_string())
}

#[derive(Subcommand, Debug)]
pub enum ExpCmd {
    /// ADE catalog with validation and pairwise non-isomorphism.
    Catalog {
        /// Restrict to one family; all families otherwise.
        #[arg(long, value_parser = parse_family)]
        family: Option<Family>,
        #[arg(long)]
        min: Option<usize>,
        #[arg(long, default_value_t = 6)]
        max: usize,
        #[arg(long, default_value_t = 7)]
        field: u64,
    },
    /// Betti growth of high syzygies of R/m^n.
    Kawasaki {
        #[arg(long)]
        ring: PathBuf,
        #[arg(long)]
        n: usize,
    },
    /// Vanishing of compositions modulo x^2 along a chain.
    HaradaSai {
        #[arg(long, conflicts_with = "standard", required_unless_present = "standard")]
        chain: Option<PathBuf>,
        /// Use the built-in chain with this many maps.
        #[arg(long)]
        standard: Option<usize>,
        #[arg(long)]
        x: Option<String>,
    },
    /// The rank-one family M_tau over a monomial curve.
    BtFamily {
        /// Semigroup generators, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "3,7")]
        curve: Vec<u32>,
        #[arg(long, default_value_t = 101)]
        field: u64,
        /// tau = 1..=count.
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Explicit tau values; overrides --count.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        taus: Option<Vec<i64>>,
        /// Truncation in t of the curve ring; defaults to max(40, c + 2 a_g).
        #[arg(long)]
        curve_trunc: Option<usize>,
    },
    /// Sharp images of a family over R and their iso classes over the cover.
    KnoerrerTransfer {
        /// Factorization files; the ring is taken from the first one.
        files: Vec<PathBuf>,
        /// Use a catalog entry as the family.
        #[arg(long, value_parser = parse_family, conflicts_with = "files")]
        family: Option<Family>,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        field: u64,
    },
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Ring(RingCmd::Check { .. }) => "ring check".into(),
            Command::Mf(c) => format!(
                "mf {}",
                match c {
                    MfCmd::Validate { .. } => "validate",
                    MfCmd::Shift(_) => "shift",
                    MfCmd::Reduce(_) => "reduce",
                    MfCmd::Transpose(_) => "transpose",
                    MfCmd::Tau(_) => "tau",
                    MfCmd::Iso { .. } => "iso",
                }
            ),
            Command::Knoerrer(c) => format!(
                "knoerrer {}",
                match c {
                    KnoerrerCmd::Sharp(_) => "sharp",
                    KnoerrerCmd::Flat(_) => "flat",
                    KnoerrerCmd::Verify { .. } => "verify",
                }
            ),
            Command::Hom(HomCmd::Stable { .. }) => "hom stable".into(),
            Command::Invariant(c) => format!(
                "invariant {}",
                match c {
                    InvariantCmd::Hlength { .. } => "hlength",
                    InvariantCmd::Betti { .. } => "betti",
                    InvariantCmd::Mult { .. } => "mult",
                    InvariantCmd::Annexp { .. } => "annexp",
                }
            ),
            Command::Resolve { .. } => "resolve".into(),
            Command::ApproxK { .. } => "approx-k".into(),
            Command::Exp(c) => format!(
                "exp {}",
                match c {
                    ExpCmd::Catalog { .. } => "catalog",
                    ExpCmd::Kawasaki { .. } => "kawasaki",
                    ExpCmd::HaradaSai { .. } => "harada-sai",
                    ExpCmd::BtFamily { .. } => "bt-family",
                    ExpCmd::KnoerrerTransfer { .. } => "knoerrer-transfer",
                }
            ),
        }
    }
}
