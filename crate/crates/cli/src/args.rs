use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use retrowpt_core::{V2fConvention, ValueFormat};

#[derive(Debug, Parser)]
#[command(
    name = "retrowpt",
    version,
    about = "Beam-mode analysis and retrodirective loop simulation for wireless power transfer"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Beam-mode summary and marginal gain as JSON
    Analyze(AnalyzeArgs),
    /// Per-mode eigenvalues and drive vectors as CSV
    Modes(ModesArgs),
    /// Time series of the loop as CSV
    Simulate(SimulateArgs),
    /// High-to-low gain sweep as CSV, with the detected transition
    Sweep(SweepArgs),
    /// Write a synthetic channel as a Touchstone file
    Synth(SynthArgs),
    /// Loss regression over the measurement cases as JSON
    Regress(RegressArgs),
    /// Echo the bundled case table with recomputed columns
    Table2(Table2Args),
}

/// Where the transmission block comes from: a Touchstone file with a port
/// partition, or a synthetic channel with given singular values.
#[derive(Debug, Args, Clone)]
pub struct ChannelArgs {
    /// Touchstone `.sNp` file
    #[arg(conflicts_with = "sigmas")]
    pub file: Option<PathBuf>,
    /// Receiver ports, e.g. `1,2`
    #[arg(long, value_parser = parse_ports, requires = "file")]
    pub rx: Option<PortList>,
    /// Generator ports, e.g. `7,8`
    #[arg(long, value_parser = parse_ports, requires = "file")]
    pub tx: Option<PortList>,
    /// Port count, when the file name does not carry it
    #[arg(long, requires = "file")]
    pub ports: Option<usize>,
    /// Frequency to pick from a multi-point file
    #[arg(long, requires = "file")]
    pub freq_ghz: Option<f64>,
    /// Allowed distance to the nearest frequency point
    #[arg(long, default_value_t = 1.0)]
    pub freq_tol_mhz: f64,
    /// Singular values of a synthetic channel, e.g. `0.6,0.8`
    #[arg(long, value_parser = parse_reals)]
    pub sigmas: Option<Reals>,
    /// Mixing seed for the synthetic channel; 0 keeps it diagonal
    #[arg(long, default_value_t = 0)]
    pub mix_seed: u64,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Loop loss in dB used for the marginal gain
    #[arg(long, default_value_t = 0.0)]
    pub loss_db: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModesArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ConventionArg {
    Direct,
    Conjugate,
}

impl From<ConventionArg> for V2fConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Direct => V2fConvention::Direct,
            ConventionArg::Conjugate => V2fConvention::Conjugate,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InitArg {
    /// Seeded complex Gaussian waves on both sides
    Random,
    /// Start from rest
    Zero,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, default_value_t = 0.0)]
    pub loss_db: f64,
    /// Generator gain in dB; defaults to the marginal gain
    #[arg(long, allow_negative_numbers = true)]
    pub gain_db: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub steps: u64,
    #[arg(long, default_value_t = 0.0)]
    pub noise_power: f64,
    /// Soft-clip amplitude
    #[arg(long)]
    pub sat: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = InitArg::Random)]
    pub init: InitArg,
    #[arg(long, value_enum, default_value_t = ConventionArg::Conjugate)]
    pub convention: ConventionArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Gain grid `start:stop:step` in dB, swept from high to low
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub gains: Grid,
    #[arg(long, default_value_t = 0.0)]
    pub loss_db: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub noise_power: f64,
    /// Soft-clip amplitude
    #[arg(long, default_value_t = 1.0, conflicts_with = "no_sat")]
    pub sat: f64,
    /// Run the loop without saturation
    #[arg(long)]
    pub no_sat: bool,
    /// Receiver measurement floor added to the generator power
    #[arg(long, default_value_t = 1e-3)]
    pub floor: f64,
    #[arg(long, default_value_t = 1500)]
    pub steps: u64,
    /// Leading steps per gain excluded from the statistics
    #[arg(long, default_value_t = 500)]
    pub discard: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ConventionArg::Conjugate)]
    pub convention: ConventionArg,
    /// CSV destination; the summary then goes to stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Ri,
    Ma,
    Db,
}

impl From<FormatArg> for ValueFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Ri => ValueFormat::RI,
            FormatArg::Ma => ValueFormat::MA,
            FormatArg::Db => ValueFormat::DB,
        }
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Random lossless reciprocal channel with this many ports
    #[arg(long, required_unless_present = "sigmas", conflicts_with = "sigmas")]
    pub ports: Option<usize>,
    /// Embed these singular values in a `2m`-port channel instead
    #[arg(long, value_parser = parse_reals)]
    pub sigmas: Option<Reals>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = FormatArg::Ri)]
    pub format: FormatArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RegressArgs {
    /// Use the bundled measurement cases
    #[arg(long, required_unless_present = "cases", conflicts_with = "cases")]
    pub table2: bool,
    /// Case CSV in the bundled table's schema
    #[arg(long)]
    pub cases: Option<PathBuf>,
    /// Also write `g_db, y_db, y_fit_free, y_fit_fixed` here
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Table2Args {
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortList(pub Vec<usize>);

#[derive(Debug, Clone, PartialEq)]
pub struct Reals(pub Vec<f64>);

#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

pub fn parse_ports(s: &str) -> Result<PortList, String> {
    let ports = s
        .split([',', ';'])
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|e| format!("bad port {p:?}: {e}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if ports.contains(&0) {
        return Err("ports are numbered from 1".into());
    }
    Ok(PortList(ports))
}

pub fn parse_reals(s: &str) -> Result<Reals, String> {
    reals(s).map(Reals)
}

fn reals(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("bad number {x:?}"))
        })
        .collect()
}

/// `start:stop:step`, returned in descending order.
pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts = reals(&s.replace(':', ","))?;
    let [start, stop, step] = parts[..] else {
        return Err(format!("expected start:stop:step, got {s:?}"));
    };
    if !(step > 0.0) {
        return Err("grid step must be positive".into());
    }
    let (hi, lo) = if start >= stop {
        (start, stop)
    } else {
        (stop, start)
    };
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    if n > 1_000_000 {
        return Err("grid has too many points".into());
    }
    Ok(Grid((0..=n).map(|i| hi - step * i as f64).collect()))
}
