use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use swarm_inspect::baseline::plan_nearest_neighbor;
use swarm_inspect::energy::UavSpec;
use swarm_inspect::graph::{Area, Scenario};
use swarm_inspect::harness::{
    generate_scenario, read_json, run_experiment, write_json, ExperimentConfig, HarnessError, PlanDocument,
};
use swarm_inspect::metrics::energy_breakdown;
use swarm_inspect::oracle::exact_plan_with_budgets;
use swarm_inspect::planner::{build_graphs, plan, unlimited_budget, BudgetMode, PlanResult};
use swarm_inspect::validate::validate;

#[derive(Parser)]
#[command(version, about = "Energy-aware inspection planning for UAV swarms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random scenario.
    Generate {
        #[arg(long, short = 'n')]
        points: usize,
        #[arg(long, default_value_t = 200.0)]
        width: f64,
        #[arg(long, default_value_t = 200.0)]
        height: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plan a scenario with the swarm planner.
    Plan(PlanArgs),
    /// Plan a scenario with the nearest-neighbour baseline.
    Baseline(PlanArgs),
    /// Solve a small scenario exactly.
    Oracle(PlanArgs),
    /// Run a Monte Carlo experiment and write CSV aggregates.
    Experiment {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long = "delta-e")]
        delta_e: Option<f64>,
        #[arg(long)]
        budget: Option<String>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Check a plan file against a scenario.
    Validate {
        plan: PathBuf,
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct PlanArgs {
    scenario: PathBuf,
    /// Fleet, model and planner settings (experiment config JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    uavs: usize,
    /// Seeds per-UAV efficiencies and the baseline's first targets.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long = "delta-e")]
    delta_e: Option<f64>,
    /// Comma-separated per-UAV budgets in J, or `unlimited`.
    #[arg(long)]
    budget: Option<String>,
    #[arg(long)]
    jobs: Option<usize>,
}

enum Failure {
    Validation(String),
    Config(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn parse_budget(s: &str) -> Result<BudgetMode, Failure> {
    if s.trim().eq_ignore_ascii_case("unlimited") {
        return Ok(BudgetMode::Unlimited);
    }
    s.split(',')
        .map(|b| {
            b.trim()
                .parse::<f64>()
                .map_err(|e| Failure::Config(format!("budget {b:?}: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(BudgetMode::Override)
}

fn apply_overrides(
    cfg: &mut ExperimentConfig,
    lambda: Option<f64>,
    delta_e: Option<f64>,
    budget: Option<&str>,
    jobs: Option<usize>,
) -> Result<(), Failure> {
    if let Some(l) = lambda {
        cfg.planner.lambda = l;
    }
    if delta_e.is_some() {
        cfg.planner.delta_e = delta_e;
    }
    if let Some(b) = budget {
        cfg.planner.budgets = parse_budget(b)?;
    }
    if jobs.is_some() {
        cfg.jobs = jobs;
    }
    Ok(())
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig, Failure> {
    match path {
        Some(p) => Ok(ExperimentConfig::from_json_file(p)?),
        None => Ok(ExperimentConfig::default()),
    }
}

fn emit<T: serde::Serialize>(out: Option<&Path>, value: &T) -> Result<(), Failure> {
    match out {
        Some(p) => Ok(write_json(p, value)?),
        None => {
            let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Config(e.to_string()))?;
            match writeln!(std::io::stdout(), "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::Config(e.to_string())),
                _ => Ok(()),
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Which {
    Proposed,
    Baseline,
    Oracle,
}

fn run_plan(args: &PlanArgs, which: Which) -> Result<(), Failure> {
    let mut cfg = load_config(args.config.as_deref())?;
    apply_overrides(&mut cfg, args.lambda, args.delta_e, args.budget.as_deref(), args.jobs)?;
    if args.uavs == 0 {
        return Err(Failure::Config("--uavs must be at least 1".into()));
    }
    cfg.validate()?;
    let sc: Scenario = read_json(&args.scenario)?;
    sc.validate().map_err(|e| Failure::Config(e.to_string()))?;
    let env = cfg.environment();
    let mut fleet = cfg.fleet(args.uavs, args.seed);
    if let BudgetMode::Override(b) = &cfg.planner.budgets {
        if b.len() != fleet.len() {
            return Err(Failure::Config(format!("{} budgets for {} UAVs", b.len(), fleet.len())));
        }
        fleet = fleet.into_iter().zip(b).map(|(u, &e)| u.with_budget(e)).collect();
    }
    let plan_err = |e: swarm_inspect::error::PlanError| Failure::Config(e.to_string());

    let result: PlanResult = match which {
        Which::Proposed => plan(&sc, &fleet, &env, &cfg.radio, &cfg.planner).map_err(plan_err)?,
        Which::Baseline | Which::Oracle => {
            let budgets = if cfg.planner.budgets == BudgetMode::Unlimited {
                let graphs = build_graphs(&sc, &fleet, &env, &cfg.radio).map_err(plan_err)?;
                vec![unlimited_budget(&graphs, cfg.planner.lambda); fleet.len()]
            } else {
                fleet.iter().map(|u| u.energy_budget).collect()
            };
            fleet = fleet
                .into_iter()
                .zip(&budgets)
                .map(|(u, &e)| u.with_budget(e))
                .collect();
            if let Which::Baseline = which {
                plan_nearest_neighbor(&sc, &fleet, &env, &cfg.radio, args.seed).map_err(plan_err)?
            } else {
                let r = exact_plan_with_budgets(&sc, &fleet, &env, &cfg.radio, &budgets).map_err(plan_err)?;
                match r.plan {
                    Some(p) => p,
                    None => return Err(Failure::Validation("no feasible assignment exists".into())),
                }
            }
        }
    };
    let budgeted: Vec<UavSpec> = fleet;
    let metrics = energy_breakdown(&sc, &result, &budgeted, &env, &cfg.radio).map_err(plan_err)?;
    let report = validate(&sc, &budgeted, &env, &cfg.radio, &result);
    emit(
        args.out.as_deref(),
        &PlanDocument::new(&result, &budgeted, &env, &cfg.radio, Some(metrics)),
    )?;
    if !report.consistent() {
        return Err(Failure::Validation(format!("plan failed validation: {report:?}")));
    }
    if !result.feasible {
        log::warn!(
            "plan is infeasible: uncovered points {:?}, costs {:?}, budgets {:?}",
            result.uncovered_points,
            result.costs,
            result.budgets
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate {
            points,
            width,
            height,
            seed,
            out,
        } => {
            if !(width > 0.0 && height > 0.0) {
                return Err(Failure::Config("area must be positive".into()));
            }
            emit(
                out.as_deref(),
                &generate_scenario(points, Area { w: width, h: height }, seed),
            )
        }
        Command::Plan(a) => run_plan(&a, Which::Proposed),
        Command::Baseline(a) => run_plan(&a, Which::Baseline),
        Command::Oracle(a) => run_plan(&a, Which::Oracle),
        Command::Experiment {
            config,
            seed,
            out,
            lambda,
            delta_e,
            budget,
            jobs,
        } => {
            let mut cfg = load_config(Some(&config))?;
            apply_overrides(&mut cfg, lambda, delta_e, budget.as_deref(), jobs)?;
            if let Some(s) = seed {
                cfg.base_seed = s;
            }
            if let Some(o) = out {
                cfg.output_dir = o;
            }
            let outcome = run_experiment(&cfg)?;
            if outcome.validation_failures.is_empty() {
                Ok(())
            } else {
                Err(Failure::Validation(format!(
                    "{} plans failed validation; see summary.json",
                    outcome.validation_failures.len()
                )))
            }
        }
        Command::Validate { plan, scenario, out } => {
            let doc: PlanDocument = read_json(&plan)?;
            let sc: Scenario = read_json(&scenario)?;
            let result = doc.to_result(&sc).map_err(|e| Failure::Validation(e.to_string()))?;
            let report = validate(&sc, &doc.fleet, &doc.environment, &doc.radio, &result);
            emit(out.as_deref(), &report)?;
            if report.consistent() {
                Ok(())
            } else {
                Err(Failure::Validation("plan is inconsistent with its scenario".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
