//! `qcoord`: rate regions, protocol simulation, nonlocal games and converse audits from
//! the command line.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 guard violation, 3 infeasible input.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "qcoord", version, about = "Coordination rate regions and protocol simulation for quantum networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Worker threads for seed batches (0 = all cores). Output does not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    /// Leave out wall-clock fields so identical runs give identical bytes.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Entropic quantities of a state file.
    Entropy(EntropyArgs),
    /// Optimal rate region of a target state.
    Region {
        #[command(subcommand)]
        network: RegionCommand,
    },
    /// Finite-blocklength protocol simulation.
    Simulate {
        #[command(subcommand)]
        protocol: SimulateCommand,
    },
    /// Mean errors over a grid of rates and blocklengths.
    Sweep {
        #[command(subcommand)]
        protocol: SweepCommand,
    },
    /// Classical value, strategy value and required broadcast rates of a nonlocal game.
    Game {
        #[command(subcommand)]
        game: GameCommand,
    },
    /// Numeric audits of the converse inequalities.
    Audit {
        #[command(subcommand)]
        kind: AuditCommand,
    },
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[arg(long)]
    pub state: PathBuf,
    /// Quantity to evaluate; without it, S of the whole state and of every subsystem.
    #[arg(long, value_enum, requires = "systems")]
    pub quantity: Option<QuantityArg>,
    /// One comma-separated label group per argument, e.g. `--systems A --systems B,C`
    /// for `I(A;BC)`. Conditioning groups come last.
    #[arg(long)]
    pub systems: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QuantityArg {
    S,
    SCond,
    I,
    ICond,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[arg(long)]
    pub state: PathBuf,
    /// Optional rate point to test for membership.
    #[arg(long)]
    pub q1: Option<f64>,
    #[arg(long)]
    pub q2: Option<f64>,
    #[arg(long)]
    pub e1: Option<f64>,
    #[arg(long)]
    pub e2: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum RegionCommand {
    /// Target density operator on A, B, C.
    Cascade(RegionArgs),
    /// Classical-quantum ensemble file with classical X, Y and quantum B, C (and optionally A).
    Broadcast(RegionArgs),
    /// Pure target state on A, B, C.
    Mac(RegionArgs),
    /// Pure state on A, G, B, R (G optional); `--q1` and `--e1` test the point (Q, E).
    Stateredist(RegionArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub q1: f64,
    #[arg(long)]
    pub q2: f64,
    #[arg(long, default_value_t = 0.25)]
    pub delta: f64,
    /// First codebook seed; seeds are `seed, seed + 1, ...`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub num_seeds: usize,
}

#[derive(Debug, Subcommand)]
enum SimulateCommand {
    Broadcast(SimulateArgs),
    Mac(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub state: PathBuf,
    /// Blocklengths, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// Bob's rates, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub q1: Vec<f64>,
    /// Charlie's rates, paired with `--q1`; a single value is used for every pair.
    #[arg(long, value_delimiter = ',', required = true)]
    pub q2: Vec<f64>,
    #[arg(long, default_value_t = 0.25)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub num_seeds: usize,
}

#[derive(Debug, Subcommand)]
enum SweepCommand {
    Broadcast(SweepArgs),
}

#[derive(Debug, Subcommand)]
enum GameCommand {
    Chsh,
    MagicSquare,
    /// Game from a JSON file; a `correlation` field in it is evaluated too.
    Custom {
        #[arg(long)]
        spec: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long, value_enum, default_value_t = NetworkArg::Cascade)]
    pub network: NetworkArg,
    /// Target state. Without it the cascade audit runs the Bell-forwarding code.
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Seed of the first random code; one code per seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub num_seeds: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NetworkArg {
    Cascade,
    Mac,
}

#[derive(Debug, Subcommand)]
enum AuditCommand {
    /// Run codes through the converse chains and report every slack.
    Converse(AuditArgs),
}

/// Why a run stopped.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Library(qcoord::Error),
}

impl From<qcoord::Error> for Failure {
    fn from(e: qcoord::Error) -> Self {
        Failure::Library(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Library(e) if e.is_guard() => 2,
            Failure::Library(e) if e.is_infeasible() => 3,
            Failure::Library(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Library(e) => write!(f, "{e}"),
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| Failure::Usage(format!("cannot start {} worker threads: {e}", cli.jobs)))?;
    let report = pool.install(|| match &cli.command {
        Command::Entropy(a) => commands::entropy(a),
        Command::Region { network } => match network {
            RegionCommand::Cascade(a) => commands::region_cascade(a),
            RegionCommand::Broadcast(a) => commands::region_broadcast(a),
            RegionCommand::Mac(a) => commands::region_mac(a),
            RegionCommand::Stateredist(a) => commands::region_stateredist(a),
        },
        Command::Simulate { protocol } => match protocol {
            SimulateCommand::Broadcast(a) => commands::simulate_broadcast(a),
            SimulateCommand::Mac(a) => commands::simulate_mac(a),
        },
        Command::Sweep { protocol: SweepCommand::Broadcast(a) } => commands::sweep_broadcast(a),
        Command::Game { game } => match game {
            GameCommand::Chsh => commands::game_builtin("chsh"),
            GameCommand::MagicSquare => commands::game_builtin("magic-square"),
            GameCommand::Custom { spec } => commands::game_custom(spec),
        },
        Command::Audit { kind: AuditCommand::Converse(a) } => commands::audit_converse(a),
    })?;
    output::emit(&report, cli.format, !cli.no_timestamp, cli.output.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
