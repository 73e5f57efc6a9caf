//! `mpe`: run substrates, evaluate populations on scenarios, normalize
//! scores and render episodes.

mod bench;
mod episode;
mod eval;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mpe_core::{Error, Registry, Result};

use manifest::Manifest;

#[derive(Parser)]
#[command(name = "mpe", version, about = "Multi-agent gridworld substrates and scenario evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play one episode of a substrate (or scenario) and write its returns and event log.
    Run(RunArgs),
    /// Evaluate a focal population on a set of scenarios.
    Eval(EvalArgs),
    /// Min-max normalize focal per-capita returns of several eval CSVs.
    Normalize(NormalizeArgs),
    /// Write one PNG per step of the global view, frame 0 being the reset state.
    Render(RenderArgs),
    /// List registered substrates, scenarios or bots.
    List(ListArgs),
    /// Measure environment steps per second with random policies.
    Bench(BenchArgs),
}

/// Options shared by every command that touches the registry.
#[derive(Args, Clone, Default)]
pub struct Common {
    /// TOML file of substrate overrides, one table per substrate id.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub struct EpisodeArgs {
    /// Substrate id.
    #[arg(value_name = "SUBSTRATE", conflicts_with_all = ["substrate", "scenario"])]
    pub target: Option<String>,
    #[arg(long)]
    pub substrate: Option<String>,
    /// Scenario id; focal slots are filled from --focal.
    #[arg(long, conflicts_with = "substrate")]
    pub scenario: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// One policy per player: `random` or a bot name.
    #[arg(long, value_delimiter = ',')]
    pub policies: Vec<String>,
    /// Roles per player; defaults to the substrate's default roles.
    #[arg(long, value_delimiter = ',')]
    pub roles: Vec<String>,
    /// Focal population for --scenario.
    #[arg(long, value_delimiter = ',', default_value = "random")]
    pub focal: Vec<String>,
    #[arg(long)]
    pub max_steps: Option<u64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub episode: EpisodeArgs,
    /// Result file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub episode: EpisodeArgs,
    /// Directory for the frames.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Scenario ids, or substrate ids meaning all of their scenarios.
    #[arg(long, value_delimiter = ',', required = true)]
    pub scenario: Vec<String>,
    /// Focal population: `random` and/or bot names, sampled uniformly per slot.
    #[arg(long, value_delimiter = ',', default_value = "random")]
    pub focal: Vec<String>,
    #[arg(long, default_value_t = 30)]
    pub episodes: usize,
    /// Seed of the first episode; episode i uses seed + i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 means one per core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long)]
    pub max_steps: Option<u64>,
    /// Output directory for report.json and episodes.csv.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args)]
pub struct NormalizeArgs {
    /// Eval CSVs, one per agent; the agent is named after the file stem.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ListArgs {
    #[arg(value_enum, default_value = "all")]
    pub what: ListKind,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Clone, Copy, clap::ValueEnum)]
pub enum ListKind {
    All,
    Substrates,
    Scenarios,
    Bots,
}

#[derive(Args)]
pub struct BenchArgs {
    /// Substrates to measure; all when absent.
    #[arg(long, value_delimiter = ',')]
    pub substrate: Vec<String>,
    /// Timed steps per substrate.
    #[arg(long, default_value_t = 2000)]
    pub steps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

/// Built-in registry, `MPE_REGISTRY_PATH` overlays, then `--config`.
pub fn registry(common: &Common) -> Result<Registry> {
    let mut reg = Registry::load()?;
    if let Some(path) = &common.config {
        let table = read_config(path)?;
        for (id, v) in &table {
            let t = v
                .as_table()
                .ok_or_else(|| Error::config(format!("{}: `{id}` must be a table", path.display())))?;
            reg.override_substrate(id, t)?;
        }
        reg.check()?;
    }
    Ok(reg)
}

pub fn read_config(path: &std::path::Path) -> Result<toml::Table> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
}

/// Writes `bytes` to `path`, or stdout when `path` is `None`.
pub fn emit(path: Option<&std::path::Path>, bytes: &[u8]) -> Result<()> {
    use std::io::Write;
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("{}: {e}", dir.display())))?;
            }
            std::fs::write(p, bytes).map_err(|e| Error::io(format!("{}: {e}", p.display())))
        }
        None => std::io::stdout().write_all(bytes).map_err(Error::from),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Registry { .. } => 2,
        Error::Io(_) => 3,
        Error::Contract(_) => 4,
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(a) => episode::run(&a, Manifest::run(&a)?),
        Command::Render(a) => episode::render(&a, Manifest::render(&a)?),
        Command::Eval(a) => eval::eval(&a, Manifest::eval(&a)?),
        Command::Normalize(a) => eval::normalize(&a, Manifest::normalize(&a)),
        Command::List(a) => list(&a),
        Command::Bench(a) => bench::bench(&a, Manifest::bench(&a)?),
    }
}

fn list(a: &ListArgs) -> Result<()> {
    let reg = registry(&a.common)?;
    let mut out = String::new();
    let show = |k: ListKind| matches!(a.what, ListKind::All) || std::mem::discriminant(&a.what) == std::mem::discriminant(&k);
    if show(ListKind::Substrates) {
        for id in reg.substrate_ids() {
            let cfg = reg.substrate_config(&id)?;
            out += &format!("substrate {id}\t{}..={} players\t{}\n", cfg.min_players, cfg.max_players, cfg.description);
        }
    }
    if show(ListKind::Scenarios) {
        for s in reg.scenarios() {
            out += &format!("scenario {}\t{} focal of {}\t{}\n", s.id, s.focal, s.players(), s.description);
        }
    }
    if show(ListKind::Bots) {
        for b in reg.bot_names() {
            out += &format!("bot {b}\n");
        }
    }
    emit(None, out.as_bytes())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mpe: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
