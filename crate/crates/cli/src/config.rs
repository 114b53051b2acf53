use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use itflow::Units;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Demo {
    /// Two-state chain `x ← 0.7x + y`, `y ← μy`.
    TwoState,
    /// Two masses on springs, states z1..z4.
    MassSpring,
    /// Upper-triangular system with identity participation.
    PfCounterexample,
    /// Generator, infinite bus and dynamic load; parameter is Q1.
    ThreeBus,
    /// New England 39-bus system; parameter is the loading factor.
    Ieee39,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnitsArg {
    Nats,
    Bits,
}

impl From<UnitsArg> for Units {
    fn from(u: UnitsArg) -> Self {
        match u {
            UnitsArg::Nats => Units::Nats,
            UnitsArg::Bits => Units::Bits,
        }
    }
}

/// Information transfer analysis of linear and linearized power-system models.
///
/// States are addressed by label. A label list is comma separated; `G10/*`
/// expands to every state whose label starts with `G10/`, and a lone `*`
/// means every state not named on the other side.
#[derive(Debug, Clone, Parser)]
#[command(name = "itflow", version)]
pub struct AnalysisConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Built-in model.
    #[arg(long, global = true, value_enum, conflicts_with = "model")]
    pub demo: Option<Demo>,

    /// Network file in `itflow-net/1` format.
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,

    /// Noise standard deviation per step.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub sigma: f64,

    /// Sampling interval in seconds for continuous-time models.
    #[arg(long, global = true, default_value_t = 0.2)]
    pub tau: f64,

    #[arg(long, global = true, value_enum, default_value = "nats")]
    pub units: UnitsArg,

    /// Pole of the two-state demo.
    #[arg(long, global = true, default_value_t = 0.5)]
    pub mu: f64,

    /// Operating point: Q1 for three-bus (default: just above the fold),
    /// loading factor for networks (default 1).
    #[arg(long, global = true)]
    pub param: Option<f64>,

    /// Write here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Transfer between two groups of states.
    Transfer {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        /// Emit the series over this many steps, starting from the noise
        /// covariance, instead of the steady-state value.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Steady-state transfer between every ordered pair of groups.
    TransferMatrix {
        /// `NAME=labels`, repeatable. Defaults to one group per generator for
        /// networks and one per state otherwise.
        #[arg(long = "group")]
        groups: Vec<String>,
    },
    /// Steady-state transfer from states into eigen-modes.
    ModeTransfer {
        /// Source states; each state on its own when omitted.
        #[arg(long)]
        from: Option<String>,
        /// Mode index in order of decreasing real part; all modes when omitted.
        #[arg(long)]
        mode: Option<usize>,
    },
    /// Participation factor magnitudes, one column per mode.
    Participation {
        #[arg(long)]
        mode: Option<usize>,
    },
    /// Parameter sweep with stability classification and optional transfers.
    Sweep {
        /// `LO:HI`. Defaults to 0:15 for three-bus and 1:10 for networks.
        #[arg(long)]
        range: Option<String>,
        /// Nominal number of steps across the range.
        #[arg(long)]
        points: Option<usize>,
        /// Transfer column `SOURCE->TARGET`, repeatable.
        #[arg(long = "transfer")]
        transfers: Vec<String>,
    },
    /// Closed-form one-step transfer against a Monte-Carlo estimate.
    Oracle {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Headline analysis of a built-in model.
    Demo {
        #[arg(value_enum)]
        name: Demo,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Transfer { .. } => "transfer",
            Command::TransferMatrix { .. } => "transfer-matrix",
            Command::ModeTransfer { .. } => "mode-transfer",
            Command::Participation { .. } => "participation",
            Command::Sweep { .. } => "sweep",
            Command::Oracle { .. } => "oracle",
            Command::Demo { .. } => "demo",
        }
    }
}
