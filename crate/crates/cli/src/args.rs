use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tqc_core::counting::CountMode;

/// Default exponent for `N = ceil(q^theta)`: `11/24 + 0.02`.
pub const DEFAULT_THETA: f64 = 11.0 / 24.0 + 0.02;

#[derive(Debug, Parser)]
#[command(
    name = "tqc",
    version,
    about = "Experiments on small solutions of ternary quadratic congruences"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write results here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Directory for cached results; caching is off when unset.
    #[arg(long, global = true, env = "TQC_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// S(a3), M and E for one or more a3.
    Count(CountArgs),
    /// S(a3) for every (or a sample of) a3, with the exceptional fraction.
    #[command(name = "scan-alpha3")]
    ScanAlpha3(ScanArgs),
    /// V from its definition and split into V1 + V2.
    Variance(VarianceArgs),
    /// Smallest admissible solution by height.
    Smallest(SmallestArgs),
    /// Conjectured height bound and the small-solution exclusion test.
    Conjecture(ConjectureArgs),
    /// Number of a3 with an unusually good small-r approximation.
    #[command(name = "exceptional-count")]
    ExceptionalCount(ModuliArgs),
    /// Gauss-sum closed form, Jacobi relation and T(q1) = 0.
    #[command(name = "gauss-audit")]
    GaussAudit(GaussAuditArgs),
    /// Burgess, Heath-Brown and Polya-Vinogradov tables.
    #[command(name = "charsum-audit")]
    CharsumAudit(CharsumArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModuliArgs {
    /// Odd modulus q >= 3.
    #[arg(long, conflicts_with = "q_range", required_unless_present = "q_range")]
    pub q: Option<u64>,
    /// Every odd q in LO:HI (inclusive).
    #[arg(long, value_parser = parse_range)]
    pub q_range: Option<(u64, u64)>,
}

#[derive(Debug, Clone, Args)]
pub struct SizeArgs {
    /// Box radius.
    #[arg(long = "N", conflicts_with = "theta")]
    pub n: Option<u64>,
    /// N = ceil(q^theta), theta in (0, 1].
    #[arg(long)]
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct CountArgs {
    #[command(flatten)]
    pub moduli: ModuliArgs,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub alpha1: i64,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub alpha2: i64,
    #[arg(long, value_delimiter = ',', default_value = "1", allow_negative_numbers = true)]
    pub alpha3: Vec<i64>,
    #[command(flatten)]
    pub size: SizeArgs,
    #[arg(long, default_value = "coprime-x3")]
    pub mode: CountMode,
    /// Only used to annotate whether N lies in the proven range.
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MainTermArg {
    Exact,
    Approx,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub moduli: ModuliArgs,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub alpha2: i64,
    /// Explicit a3 values; default is every unit.
    #[arg(
        long,
        value_delimiter = ',',
        conflicts_with = "sample",
        allow_negative_numbers = true
    )]
    pub alpha3: Vec<i64>,
    /// Scan a seeded uniform sample of this many units.
    #[arg(long)]
    pub sample: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sample this many units when phi(q) exceeds it.
    #[arg(long, default_value_t = 20_000)]
    pub max_phi: u64,
    #[command(flatten)]
    pub size: SizeArgs,
    #[arg(long, default_value = "coprime-x3")]
    pub mode: CountMode,
    /// Relative threshold for |S/M - 1|.
    #[arg(long, default_value_t = 0.2)]
    pub delta: f64,
    #[arg(long, value_enum, default_value_t = MainTermArg::Exact)]
    pub main_term: MainTermArg,
}

#[derive(Debug, Clone, Args)]
pub struct VarianceArgs {
    #[command(flatten)]
    pub moduli: ModuliArgs,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub alpha2: i64,
    #[command(flatten)]
    pub size: SizeArgs,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.2)]
    pub delta: f64,
    /// Refuse moduli with more characters than this.
    #[arg(long, default_value_t = 20_000)]
    pub max_phi: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SmallestArgs {
    #[command(flatten)]
    pub moduli: ModuliArgs,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub alpha1: i64,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub alpha2: i64,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub alpha3: i64,
    #[arg(long, default_value = "coprime-x3")]
    pub mode: CountMode,
    /// Largest height searched (default ceil(q^0.725), at most 10000).
    #[arg(long)]
    pub height_cap: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanArg {
    /// Every r modulo q.
    Full,
    /// r < q^(1/3) only; requires alpha1 = 1.
    Fast,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct ConjectureArgs {
    #[command(flatten)]
    pub moduli: ModuliArgs,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub alpha1: i64,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub alpha2: i64,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub alpha3: i64,
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value_t = ScanArg::Full)]
    pub scan: ScanArg,
    /// Also run the exclusion test at the maximising r for this height.
    #[arg(long = "N")]
    pub n: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct GaussAuditArgs {
    #[arg(long, default_value_t = 201)]
    pub max_c: u64,
}

#[derive(Debug, Clone, Args)]
pub struct CharsumArgs {
    #[command(flatten)]
    pub moduli: ModuliArgs,
    /// Sampled configurations per table and modulus.
    #[arg(long, default_value_t = 10)]
    pub configs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    /// r in the Heath-Brown bounds (>= 3).
    #[arg(long, default_value_t = 3)]
    pub hb_r: u32,
    /// Binary form a,b,c for the disc sums.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [1, 0, 1], allow_negative_numbers = true)]
    pub form: Vec<i64>,
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected LO:HI, got '{s}'"))?;
    let lo: u64 = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: u64 = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
    if lo > hi {
        return Err(format!("empty range {lo}:{hi}"));
    }
    Ok((lo, hi))
}
