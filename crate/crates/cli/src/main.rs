use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pipesizer_cli::artifacts::write_run_artifacts;
use pipesizer_cli::error::CliError;
use pipesizer_cli::evaluate::{evaluate_design, render_text};
use pipesizer_cli::fixtures::load_network;
use pipesizer_cli::format::parse_design;
use pipesizer_cli::suite::{aggregate, run_suite, AlgoKind, InitSpec, RunConfig, Scenario};
use pipesizer_core::cost::PenaltyMode;
use pipesizer_core::hybrid::Phases;
use pipesizer_core::local_search::SigmaSchedule;
use pipesizer_core::network::search_space_size;
use pipesizer_core::units::{DiameterUnit, METERS_PER_INCH, METERS_PER_MM};

/// Pipe-diameter optimization for water distribution networks.
#[derive(Parser)]
#[command(name = "pipesizer", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an optimizer (or a greedy pass) over one or more seeds.
    Solve(SolveArgs),
    /// Evaluate a design file: cost breakdown and per-node head excesses.
    Evaluate(EvaluateArgs),
    /// Show a network's structure and search-space size.
    Info(InfoArgs),
}

#[derive(Args)]
struct NetworkArg {
    /// Bundled name (nytp, nytp2, nytp50, hanoi) or a network file path.
    #[arg(long)]
    network: String,
    /// Extra [DESIGN] sidecar appended to the network file (for plain
    /// EPANET exports).
    #[arg(long)]
    design_file: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    network: NetworkArg,
    /// cmaes | rls | opo_ea | hybrid | gsu | gsd
    #[arg(long)]
    algo: String,
    /// CMA-ES population size.
    #[arg(long, default_value_t = 100)]
    lambda: usize,
    /// Mutation scale for rls/opo_ea: 0.1, 0.25, 0.5 or `linear`.
    #[arg(long, default_value = "0.5")]
    sigma: String,
    /// Evaluation budget per run.
    #[arg(long, default_value_t = 100_000)]
    budget: u64,
    /// Seed count `5` (runs seeds 1..=5) or an explicit list `3,7,11`.
    #[arg(long, default_value = "1")]
    seeds: String,
    /// Relative function tolerance for CMA-ES termination.
    #[arg(long, default_value_t = 1e-5)]
    xi: f64,
    /// Repair trigger cost; defaults to the network's fixture value.
    #[arg(long)]
    phi: Option<f64>,
    /// linear | severe
    #[arg(long, default_value = "linear")]
    penalty_mode: String,
    /// continuous | discrete | rounded (cmaes/rls/opo_ea only).
    #[arg(long, default_value = "continuous")]
    scenario: String,
    /// Hybrid phases: cma | cma+gsu | cma+gsu+gsd.
    #[arg(long, default_value = "cma+gsu+gsd")]
    phases: String,
    /// Greedy start: zero | min | max | uniform:<size>[mm|in] | a design file.
    #[arg(long)]
    init: Option<String>,
    /// Round repair candidates from the best-ever path only (hybrid).
    #[arg(long)]
    no_generation_harvest: bool,
    /// Output directory for run artifacts.
    #[arg(long, default_value = "runs")]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    network: NetworkArg,
    /// Design file: one diameter per line, native unit.
    #[arg(long)]
    design: PathBuf,
    /// Emit the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct InfoArgs {
    #[command(flatten)]
    network: NetworkArg,
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>, CliError> {
    let spec = spec.trim();
    if spec.contains(',') {
        spec.split(',')
            .map(|t| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|_| CliError::Usage(format!("bad seed `{t}`")))
            })
            .collect()
    } else {
        let n: u64 = spec
            .parse()
            .map_err(|_| CliError::Usage(format!("bad seed count `{spec}`")))?;
        if n == 0 {
            return Err(CliError::Usage("need at least one seed".to_string()));
        }
        Ok((1..=n).collect())
    }
}

fn parse_sigma(spec: &str) -> Result<SigmaSchedule, CliError> {
    if spec.eq_ignore_ascii_case("linear") {
        return Ok(SigmaSchedule::Linear);
    }
    let f: f64 = spec
        .parse()
        .map_err(|_| CliError::Usage(format!("bad sigma `{spec}` (number or `linear`)")))?;
    if !(f > 0.0 && f <= 1.0) {
        return Err(CliError::Usage("sigma fraction must be in (0, 1]".to_string()));
    }
    Ok(SigmaSchedule::Fixed(f))
}

fn parse_init(spec: &str, native: DiameterUnit) -> Result<InitSpec, CliError> {
    match spec.to_ascii_lowercase().as_str() {
        "zero" => return Ok(InitSpec::Zero),
        "min" => return Ok(InitSpec::Min),
        "max" => return Ok(InitSpec::Max),
        _ => {}
    }
    if let Some(rest) = spec.strip_prefix("uniform:") {
        let (num, unit) = if let Some(v) = rest.strip_suffix("mm") {
            (v, Some(METERS_PER_MM))
        } else if let Some(v) = rest.strip_suffix("in") {
            (v, Some(METERS_PER_INCH))
        } else if let Some(v) = rest.strip_suffix('m') {
            (v, Some(1.0))
        } else {
            (rest, None)
        };
        let v: f64 = num
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("bad init size `{rest}`")))?;
        let si = match unit {
            Some(k) => v * k,
            None => native.to_si(v),
        };
        return Ok(InitSpec::Uniform(si));
    }
    // otherwise a design file in native units
    let text = std::fs::read_to_string(spec).map_err(|e| {
        CliError::Usage(format!("init `{spec}`: not a keyword and not readable ({e})"))
    })?;
    let values = parse_design(&text, native).map_err(|e| CliError::Parse(spec.to_string(), e))?;
    Ok(InitSpec::Design(values))
}

fn cmd_solve(args: SolveArgs) -> Result<(), CliError> {
    let net = load_network(
        &args.network.network,
        args.network.design_file.as_deref().and_then(|p| p.to_str()),
    )?;
    let algo = AlgoKind::parse(&args.algo)
        .ok_or_else(|| CliError::Usage(format!("unknown --algo `{}`", args.algo)))?;
    let mut cfg = RunConfig::new(algo);
    cfg.lambda = args.lambda;
    if args.lambda < 2 && matches!(algo, AlgoKind::Cmaes | AlgoKind::Hybrid) {
        return Err(CliError::Usage("--lambda must be at least 2".to_string()));
    }
    cfg.sigma = parse_sigma(&args.sigma)?;
    cfg.budget = args.budget;
    if cfg.budget == 0 {
        return Err(CliError::Usage("--budget must be positive".to_string()));
    }
    cfg.xi = args.xi;
    cfg.phi = args.phi;
    cfg.penalty_mode = match args.penalty_mode.to_ascii_lowercase().as_str() {
        "linear" => PenaltyMode::Linear,
        "severe" => PenaltyMode::Severe,
        other => return Err(CliError::Usage(format!("unknown --penalty-mode `{other}`"))),
    };
    cfg.scenario = match args.scenario.to_ascii_lowercase().as_str() {
        "continuous" => Scenario::Continuous,
        "discrete" => Scenario::Discrete,
        "rounded" | "possible" => Scenario::Rounded,
        other => return Err(CliError::Usage(format!("unknown --scenario `{other}`"))),
    };
    cfg.phases = match args.phases.to_ascii_lowercase().as_str() {
        "cma" | "cma-only" => Phases::CmaOnly,
        "cma+gsu" => Phases::CmaGsu,
        "cma+gsu+gsd" | "full" => Phases::CmaGsuGsd,
        other => return Err(CliError::Usage(format!("unknown --phases `{other}`"))),
    };
    if let Some(init) = &args.init {
        cfg.init = Some(parse_init(init, net.units.diameter)?);
    }
    cfg.harvest_generation = !args.no_generation_harvest;
    let seeds = parse_seeds(&args.seeds)?;

    let rows = run_suite(&net, std::slice::from_ref(&cfg), &seeds)?;
    let stats = aggregate(&rows, std::slice::from_ref(&cfg), net.defaults.target_cost);
    write_run_artifacts(&args.out, &rows, &stats)?;

    for r in &rows {
        println!(
            "{} seed {:>3}: cost {:>14.2} feasible {:5} evals_to_best {:>8} ({:.1}s)",
            r.config_id,
            r.seed,
            r.record.reported_cost(),
            r.record.feasible(),
            r.record.evaluations_to_best,
            r.runtime_s
        );
    }
    for s in &stats {
        println!(
            "{}: runs {} best {:.2} mean {:.2} success {:.1}% mean_evals {:.0}",
            s.config_id,
            s.runs,
            s.best_cost,
            s.mean_cost,
            100.0 * s.success_rate,
            s.mean_evals_to_best
        );
    }
    println!("artifacts written to {}", args.out.display());

    let expects_feasible =
        matches!(algo, AlgoKind::Hybrid | AlgoKind::UpwardGreedy | AlgoKind::DownwardGreedy);
    if expects_feasible && !rows.iter().any(|r| r.record.feasible()) {
        return Err(CliError::InfeasibleOutcome);
    }
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let net = load_network(
        &args.network.network,
        args.network.design_file.as_deref().and_then(|p| p.to_str()),
    )?;
    let text = std::fs::read_to_string(&args.design).map_err(|e| {
        CliError::Io(format!("cannot read design `{}`: {e}", args.design.display()))
    })?;
    let design = parse_design(&text, net.units.diameter)
        .map_err(|e| CliError::Parse(args.design.display().to_string(), e))?;
    let report = evaluate_design(&net, design)?;
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report)
                .map_err(|e| CliError::Io(format!("serializing report: {e}")))?
        );
    } else {
        print!("{}", render_text(&report));
    }
    Ok(())
}

fn cmd_info(args: InfoArgs) -> Result<(), CliError> {
    let net = load_network(
        &args.network.network,
        args.network.design_file.as_deref().and_then(|p| p.to_str()),
    )?;
    println!("network      {}", net.name);
    println!("nodes        {} ({} junctions)", net.nodes.len(), net.junction_count());
    println!("pipes        {}", net.pipes.len());
    println!("decisions    {}", net.decision_count);
    println!("sizes        {}", net.table.len());
    let digits = search_space_size(&net).to_string();
    let approx = if digits.len() > 8 {
        format!(" (~{}.{}e{})", &digits[..1], &digits[1..4], digits.len() - 1)
    } else {
        String::new()
    };
    println!("search space {digits}{approx}");
    if let Some(t) = net.defaults.target_cost {
        println!("target cost  {t}");
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Info(a) => cmd_info(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
