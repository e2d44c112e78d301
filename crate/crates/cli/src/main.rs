mod error;
mod serve;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use kondo::agents::AgentPolicy;
use kondo::harness::{default_bins_path, load_bins_file, load_map_file, map_name, run_batch, write_batch, ExperimentConfig};
use kondo::planner::{solve, validate, Instance, PlanResult, Prefix, SolverPolicy, DEFAULT_BUDGET};
use kondo::session::AssistanceFidelity;
use kondo::task::{index_locations, SceneGenerator, Scenario};
use serde::Serialize;

use crate::error::CliError;

#[derive(Parser)]
#[command(name = "kondo", version, about = "Plan, simulate and serve object-rearrangement episodes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a scenario file.
    Generate(GenerateArgs),
    /// Solve one routing instance or scenario and report the plan.
    Solve(SolveArgs),
    /// Run a batch experiment from a config file.
    Batch(BatchArgs),
    /// Serve interactive sessions over newline-delimited JSON and web sockets.
    Serve(ServeArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    map: PathBuf,
    /// Bin placements; defaults to `<map stem>.bins.json` beside the map.
    #[arg(long)]
    bins: Option<PathBuf>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    n: usize,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance JSON, or a scenario JSON when `--map` is given.
    input: PathBuf,
    /// Map the scenario is played on.
    #[arg(long)]
    map: Option<PathBuf>,
    #[arg(long, default_value_t = SolverPolicy::Auto)]
    policy: SolverPolicy,
    #[arg(long, conflicts_with_all = ["policy", "heuristic"])]
    exact: bool,
    #[arg(long, conflicts_with = "policy")]
    heuristic: bool,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    /// Executed history, comma separated, starting at the depot (e.g. `0,3,1`).
    #[arg(long, value_delimiter = ',')]
    prefix: Option<Vec<usize>>,
    /// Re-check the returned route against every constraint.
    #[arg(long)]
    validate: bool,
    /// Also write the report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BatchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Run only this difficulty.
    #[arg(long)]
    n: Option<usize>,
    /// Run only this fidelity.
    #[arg(long)]
    fidelity: Option<AssistanceFidelity>,
    /// Run only this agent policy, e.g. `greedy_nearest` or `noisy_compliant:0.3`.
    #[arg(long)]
    policy: Option<AgentPolicy>,
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Args)]
struct ServeArgs {
    /// Map files to offer; each is known by its file stem.
    #[arg(long, required = true)]
    map: Vec<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:7878")]
    addr: String,
    /// Directory for finished session traces.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    /// Idle minutes before a session is dropped.
    #[arg(long, default_value_t = 30)]
    idle_minutes: u64,
    /// Static files served to plain HTTP requests.
    #[arg(long)]
    ui: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("KONDO_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => generate(args),
        Command::Solve(args) => solve_cmd(args),
        Command::Batch(args) => batch(args),
        Command::Serve(args) => serve(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kondo: {e}");
            e.exit_code()
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn generate(args: GenerateArgs) -> Result<(), CliError> {
    let map = load_map_file(&args.map)?;
    let bins = load_bins_file(&args.bins.unwrap_or_else(|| default_bins_path(&args.map)))?;
    let generator = SceneGenerator { map: &map, map_name: map_name(&args.map), bins, seed: args.seed };
    let scenario = generator.generate(args.n)?;
    log::info!("generated {} objects from seed {}", scenario.objects.len(), args.seed);
    write_or_print(args.out.as_deref(), &scenario.to_json())
}

#[derive(Serialize)]
struct SolveReport<'a> {
    solver: String,
    route: &'a [usize],
    cost: f64,
    nodes_expanded: u64,
    elapsed_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    valid: Option<bool>,
}

fn solve_cmd(args: SolveArgs) -> Result<(), CliError> {
    let text = read(&args.input)?;
    let (pairing, dist, capacity, stored_prefix) = match &args.map {
        Some(map_path) => {
            let map = load_map_file(map_path)?;
            let scenario = Scenario::from_json(&text)?;
            scenario.validate(&map)?;
            let index = index_locations(&scenario);
            let dist = index.distances(&map)?;
            (index.pairing, dist, kondo::planner::DEFAULT_CAPACITY, Prefix::depot())
        }
        None => {
            let instance = Instance::from_json(&text)?;
            let (pairing, dist, prefix) = instance.parts()?;
            (pairing, dist, instance.capacity, prefix)
        }
    };
    let prefix = args.prefix.map(Prefix).unwrap_or(stored_prefix);
    let policy = if args.exact {
        SolverPolicy::Exact
    } else if args.heuristic {
        SolverPolicy::Heuristic
    } else {
        args.policy
    };
    let plan: PlanResult = solve(&pairing, &dist, capacity, &prefix, policy, args.budget)?;
    let valid = if args.validate {
        let violations = validate(&plan.route, &pairing, capacity, &prefix);
        if let Some(v) = violations.first() {
            return Err(CliError::Internal(format!("solver returned an invalid route: {v}")));
        }
        Some(true)
    } else {
        None
    };
    let report = SolveReport {
        solver: plan.solver.to_string(),
        route: plan.route.visits(),
        cost: plan.cost,
        nodes_expanded: plan.nodes_expanded,
        elapsed_ms: plan.elapsed.as_secs_f64() * 1e3,
        valid,
    };
    println!("route: {}", plan.route);
    println!("cost: {}", plan.cost);
    println!("solver: {} ({} nodes, {:.3} ms)", report.solver, report.nodes_expanded, report.elapsed_ms);
    if valid.is_some() {
        println!("valid: yes");
    }
    if let Some(out) = &args.out {
        let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
        write_or_print(Some(out), &json)?;
    }
    Ok(())
}

fn batch(args: BatchArgs) -> Result<(), CliError> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(n) = args.n {
        config.difficulties = vec![n];
    }
    if let Some(f) = args.fidelity {
        config.fidelities = vec![f];
    }
    if let Some(p) = args.policy {
        config.policies = vec![p];
    }
    if let Some(b) = args.budget {
        config.budget = b;
    }
    config.check()?;
    let out = args
        .out
        .or_else(|| config.out_dir.clone())
        .ok_or_else(|| CliError::Usage("no output directory: pass --out or set out_dir".into()))?;
    log::info!("running {} episodes", config.episode_count());
    let output = run_batch(&config)?;
    write_batch(&output, &out)?;
    println!("{} episodes written to {}", output.traces.len(), out.display());
    Ok(())
}

fn serve(args: ServeArgs) -> Result<(), CliError> {
    let config = kondo::service::ServerConfig {
        idle_timeout: Duration::from_secs(args.idle_minutes * 60),
        trace_dir: args.out,
        budget: args.budget,
    };
    let mut server = kondo::service::SessionServer::new(config);
    for path in &args.map {
        let map = load_map_file(path)?;
        let bins = load_bins_file(&default_bins_path(path))?;
        server.add_map(&map_name(path), map, bins);
    }
    serve::run(Arc::new(server), &args.addr, args.ui)
}
