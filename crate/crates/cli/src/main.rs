mod commands;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use commands::Task;
use config::RunConfig;
use error::CliError;
use output::{sha256_hex, Manifest, MANIFEST};

/// Transfer operators, zeta functions and orbit statistics on subshifts of
/// finite type.
#[derive(Parser)]
#[command(name = "ruelle", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one computation from a TOML config.
    #[command(flatten)]
    Task(TaskCommand),
    /// Re-run the computation recorded in a manifest and compare outputs.
    Rerun {
        #[arg(long)]
        manifest: PathBuf,
        /// Defaults to the manifest's directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Subcommand)]
enum TaskCommand {
    Pressure(RunArgs),
    Rpf(RunArgs),
    SolvePf(RunArgs),
    SolveSz(RunArgs),
    Zn(RunArgs),
    Zeta(RunArgs),
    RuelleCheck(RunArgs),
    EtaG(RunArgs),
    Residue(RunArgs),
    Orbits(RunArgs),
    PiF(RunArgs),
    HannayOzorio(RunArgs),
    Decay(RunArgs),
    LyCheck(RunArgs),
    LatticeTest(RunArgs),
}

impl TaskCommand {
    fn split(self) -> (Task, RunArgs) {
        use TaskCommand as C;
        match self {
            C::Pressure(a) => (Task::Pressure, a),
            C::Rpf(a) => (Task::Rpf, a),
            C::SolvePf(a) => (Task::SolvePf, a),
            C::SolveSz(a) => (Task::SolveSz, a),
            C::Zn(a) => (Task::Zn, a),
            C::Zeta(a) => (Task::Zeta, a),
            C::RuelleCheck(a) => (Task::RuelleCheck, a),
            C::EtaG(a) => (Task::EtaG, a),
            C::Residue(a) => (Task::Residue, a),
            C::Orbits(a) => (Task::Orbits, a),
            C::PiF(a) => (Task::PiF, a),
            C::HannayOzorio(a) => (Task::HannayOzorio, a),
            C::Decay(a) => (Task::Decay, a),
            C::LyCheck(a) => (Task::LyCheck, a),
            C::LatticeTest(a) => (Task::LatticeTest, a),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config, default `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides `params.depth`.
    #[arg(long)]
    depth: Option<usize>,
}

fn init_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        // a second initialisation only happens in-process and is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Runs a task and writes its artifacts; nothing is written on failure.
fn execute(task: Task, cfg: &RunConfig, out: &Path, threads: Option<usize>) -> Result<Manifest, CliError> {
    let start = Instant::now();
    let outcome = commands::run(task, cfg)?;
    let manifest = Manifest::new(&task.name(), cfg, threads, start.elapsed().as_secs_f64(), &outcome.artifacts);
    output::write_all(out, &outcome.artifacts, &manifest)?;
    println!("{}", outcome.summary);
    Ok(manifest)
}

fn run_task(task: Task, args: RunArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::io(format!("reading {}", args.config.display()), e))?;
    let mut cfg = config::parse(&text)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(depth) = args.depth {
        cfg.params.depth = depth;
    }
    let out = args.out.or_else(|| cfg.out.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"));
    init_threads(args.threads);
    execute(task, &cfg, &out, args.threads).map(|_| ())
}

fn rerun(path: &Path, out: Option<PathBuf>, threads: Option<usize>) -> Result<(), CliError> {
    let old = Manifest::read(path)?;
    let task = Task::from_name(&old.command).ok_or_else(|| CliError::Manifest(format!("unknown command `{}`", old.command)))?;
    if sha256_hex(old.config.to_toml().as_bytes()) != old.config_sha256 {
        return Err(CliError::Manifest("embedded config does not match its hash".into()));
    }
    let out = out.unwrap_or_else(|| path.parent().map(Path::to_path_buf).unwrap_or_default());
    init_threads(threads.or(old.threads));
    let new = execute(task, &old.config, &out, threads.or(old.threads))?;
    let differing: Vec<&str> = old
        .outputs
        .iter()
        .filter(|o| !new.outputs.iter().any(|n| n.name == o.name && n.sha256 == o.sha256))
        .map(|o| o.name.as_str())
        .collect();
    if !differing.is_empty() || new.outputs.len() != old.outputs.len() {
        return Err(CliError::Mismatch(differing.join(", ")));
    }
    eprintln!("outputs match {}", out.join(MANIFEST).display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Task(t) => {
            let (task, args) = t.split();
            run_task(task, args)
        }
        Command::Rerun { manifest, out, threads } => rerun(&manifest, out, threads),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
