//! Scenario generation, plan documents, and the Monte Carlo experiment
//! runner that produces per-run CSV rows and per-figure aggregates.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baseline::plan_nearest_neighbor;
use crate::energy::{Environment, UavSpec};
use crate::error::{GraphError, PlanError};
use crate::graph::{Area, Scenario, TrajectoryRecord};
use crate::metrics::{empirical_cdf, energy_breakdown, MetricsReport};
use crate::par;
use crate::planner::{plan, BudgetMode, PlanResult, PlannerConfig, PlannerKind};
use crate::radio::{Point, RadioConfig, Shadowing};
use crate::validate::{validate, ValidationReport};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("i/o on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<GraphError> for HarnessError {
    fn from(e: GraphError) -> Self {
        HarnessError::Plan(e.into())
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic seed derived from a base seed and a sequence of labels.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(mix(base), |acc, &p| mix(acc ^ mix(p)))
}

const TAG_SCENARIO: u64 = 0x5C;
const TAG_FLEET: u64 = 0xF1;
const TAG_CELL: u64 = 0xCE;

/// `n` points uniform over `area`, with the BS at the origin as point 0.
pub fn generate_scenario(n: usize, area: Area, seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n + 1);
    points.push(Point::new(0, 0.0, 0.0));
    for id in 1..=n {
        let x1 = rng.random::<f64>() * area.w;
        let x2 = rng.random::<f64>() * area.h;
        points.push(Point::new(id, x1, x2));
    }
    Scenario {
        seed,
        area,
        points,
        shadowing_db: None,
    }
}

/// Attach one shadowing sample per point when the channel is random.
pub fn sample_shadowing(sc: &mut Scenario, radio: &RadioConfig) {
    if let Shadowing::Gaussian { sigma_db } = radio.shadowing {
        if sigma_db > 0.0 {
            let normal = Normal::new(0.0, sigma_db).expect("validated sigma");
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(sc.seed, &[0x5AD0]));
            let mut s: Vec<f64> = (0..sc.points.len()).map(|_| normal.sample(&mut rng)).collect();
            s[0] = 0.0;
            sc.shadowing_db = Some(s);
        }
    }
}

/// Scenario, fleet template and planner settings shared by the CLI
/// subcommands and the experiment runner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub area: Area,
    pub point_counts: Vec<usize>,
    pub fleet_sizes: Vec<usize>,
    pub runs_per_cell: usize,
    /// Template for every UAV; efficiency is resampled per UAV.
    pub uav: UavSpec,
    /// Per-UAV efficiency is drawn uniformly from `[lo, hi]`.
    pub efficiency_range: (f64, f64),
    /// Defaults to the pitch angle balanced for the template UAV.
    pub environment: Option<Environment>,
    pub radio: RadioConfig,
    pub planner: PlannerConfig,
    pub base_seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads for independent cells; `None` uses all cores.
    pub jobs: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            area: Area { w: 200.0, h: 200.0 },
            point_counts: vec![100],
            fleet_sizes: (2..=12).collect(),
            runs_per_cell: 50,
            uav: UavSpec::reference(0.0),
            efficiency_range: (0.5, 0.9),
            environment: None,
            radio: RadioConfig::default(),
            planner: PlannerConfig::unlimited(),
            base_seed: 1,
            output_dir: PathBuf::from("results"),
            jobs: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn environment(&self) -> Environment {
        self.environment
            .clone()
            .unwrap_or_else(|| Environment::balanced_for(&self.uav))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let cfg_err = |m: String| Err(HarnessError::Config(m));
        if self.runs_per_cell == 0 {
            return cfg_err("runs_per_cell must be at least 1".into());
        }
        if self.fleet_sizes.contains(&0) {
            return cfg_err("fleet sizes must be at least 1".into());
        }
        let (lo, hi) = self.efficiency_range;
        if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
            return cfg_err(format!("efficiency range ({lo}, {hi}) must lie in (0, 1]"));
        }
        if !(self.area.w > 0.0 && self.area.h > 0.0) {
            return cfg_err(format!("area {:?}", self.area));
        }
        let model = |e: crate::error::ModelError| HarnessError::Config(e.to_string());
        self.uav.validate().map_err(model)?;
        self.environment().validate().map_err(model)?;
        self.radio.validate().map_err(model)?;
        let k_max = self.fleet_sizes.iter().copied().max().unwrap_or(1);
        if !matches!(self.planner.budgets, BudgetMode::Override(_)) {
            self.planner
                .validate(k_max)
                .map_err(|e| HarnessError::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// `k` UAVs from the template with efficiencies drawn from `seed`. The
    /// first `k` UAVs are the same for every larger `k`.
    pub fn fleet(&self, k: usize, seed: u64) -> Vec<UavSpec> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = self.efficiency_range;
        (0..k)
            .map(|_| {
                let eta = if hi > lo { rng.random_range(lo..=hi) } else { lo };
                self.uav.clone().with_efficiency(eta)
            })
            .collect()
    }

    pub fn scenario_seed(&self, n: usize, run: usize) -> u64 {
        derive_seed(self.base_seed, &[TAG_SCENARIO, n as u64, run as u64])
    }

    pub fn fleet_seed(&self, n: usize, run: usize) -> u64 {
        derive_seed(self.base_seed, &[TAG_FLEET, n as u64, run as u64])
    }

    pub fn cell_seed(&self, n: usize, k: usize, run: usize) -> u64 {
        derive_seed(self.base_seed, &[TAG_CELL, n as u64, k as u64, run as u64])
    }

    pub fn scenario(&self, n: usize, run: usize) -> Scenario {
        let mut sc = generate_scenario(n, self.area, self.scenario_seed(n, run));
        sample_shadowing(&mut sc, &self.radio);
        sc
    }
}

/// One CSV row: one planner on one (N, K, run) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub run: usize,
    pub planner: String,
    #[serde(rename = "total_J")]
    pub total_j: f64,
    #[serde(rename = "flight_J")]
    pub flight_j: f64,
    #[serde(rename = "hover_tx_J")]
    pub hover_tx_j: f64,
    #[serde(rename = "planning_cost_J")]
    pub planning_cost_j: f64,
    pub inspection_time_s: f64,
    pub feasible: bool,
    pub plan_wall_ms: f64,
}

/// Columns excluded from reproducibility comparisons.
pub const TIMING_COLUMNS: &[&str] = &["plan_wall_ms"];

impl ResultRow {
    fn new(n: usize, k: usize, run: usize, planner: PlannerKind, m: &MetricsReport, wall: f64) -> Self {
        Self {
            n,
            k,
            run,
            planner: planner.as_str().to_string(),
            total_j: m.total_energy,
            flight_j: m.flight_energy,
            hover_tx_j: m.hover_tx_energy,
            planning_cost_j: m.planning_cost,
            inspection_time_s: m.inspection_time,
            feasible: m.feasible,
            plan_wall_ms: wall * 1e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationFailure {
    pub n: usize,
    pub k: usize,
    pub run: usize,
    pub planner: String,
    pub report: ValidationReport,
}

/// Both planners on one scenario, with a fleet of `k`.
#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<ValidationFailure>,
}

pub fn run_cell(cfg: &ExperimentConfig, n: usize, k: usize, run: usize) -> Result<CellOutcome, HarnessError> {
    let sc = cfg.scenario(n, run);
    let env = cfg.environment();
    let fleet = cfg.fleet(k, cfg.fleet_seed(n, run));
    let mut rows = Vec::with_capacity(2);
    let mut failures = Vec::new();

    let proposed = plan(&sc, &fleet, &env, &cfg.radio, &cfg.planner)?;
    // the baseline is judged against the same budgets, including the
    // unlimited-mode sentinel
    let budgeted: Vec<UavSpec> = fleet
        .iter()
        .zip(&proposed.budgets)
        .map(|(u, &b)| u.clone().with_budget(b))
        .collect();
    let baseline = plan_nearest_neighbor(&sc, &budgeted, &env, &cfg.radio, cfg.cell_seed(n, k, run))?;

    for (result, wall) in [(&proposed, proposed.wall_time), (&baseline, baseline.wall_time)] {
        let report = validate(&sc, &budgeted, &env, &cfg.radio, result);
        if !report.consistent() {
            failures.push(ValidationFailure {
                n,
                k,
                run,
                planner: result.planner.as_str().into(),
                report,
            });
        }
        let m = energy_breakdown(&sc, result, &budgeted, &env, &cfg.radio)?;
        rows.push(ResultRow::new(n, k, run, result.planner, &m, wall));
    }
    Ok(CellOutcome { rows, failures })
}

/// Mean metrics of one (N, K, planner) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub planner: String,
    pub runs: usize,
    pub mean_total_j: f64,
    pub mean_flight_j: f64,
    pub mean_hover_tx_j: f64,
    pub mean_planning_cost_j: f64,
    pub mean_inspection_time_s: f64,
    pub feasible_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub planner: String,
    pub inspection_time_s: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub rows: Vec<ResultRow>,
    pub aggregates: Vec<Aggregate>,
    pub cdf: Vec<CdfPoint>,
    pub validation_failures: Vec<ValidationFailure>,
}

impl ExperimentOutcome {
    pub fn aggregate(&self, n: usize, k: usize, planner: PlannerKind) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.n == n && a.k == k && a.planner == planner.as_str())
    }

    pub fn samples(&self, n: usize, k: usize, planner: PlannerKind) -> impl Iterator<Item = &ResultRow> + '_ {
        self.rows
            .iter()
            .filter(move |r| r.n == n && r.k == k && r.planner == planner.as_str())
    }
}

fn aggregate(rows: &[ResultRow]) -> (Vec<Aggregate>, Vec<CdfPoint>) {
    let mut groups: BTreeMap<(usize, usize, String), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.n, r.k, r.planner.clone())).or_default().push(r);
    }
    let mut aggs = Vec::new();
    let mut cdf = Vec::new();
    for ((n, k, planner), g) in groups {
        let runs = g.len();
        let mean = |f: fn(&ResultRow) -> f64| g.iter().map(|r| f(r)).sum::<f64>() / runs as f64;
        aggs.push(Aggregate {
            n,
            k,
            planner: planner.clone(),
            runs,
            mean_total_j: mean(|r| r.total_j),
            mean_flight_j: mean(|r| r.flight_j),
            mean_hover_tx_j: mean(|r| r.hover_tx_j),
            mean_planning_cost_j: mean(|r| r.planning_cost_j),
            mean_inspection_time_s: mean(|r| r.inspection_time_s),
            feasible_fraction: g.iter().filter(|r| r.feasible).count() as f64 / runs as f64,
        });
        let times: Vec<f64> = g.iter().map(|r| r.inspection_time_s).collect();
        for (t, p) in empirical_cdf(&times).expect("group is non-empty") {
            cdf.push(CdfPoint {
                n,
                k,
                planner: planner.clone(),
                inspection_time_s: t,
                probability: p,
            });
        }
    }
    (aggs, cdf)
}

/// All cells of the experiment, in `(N, K, run)` order.
pub fn cells(cfg: &ExperimentConfig) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for &n in &cfg.point_counts {
        for &k in &cfg.fleet_sizes {
            for run in 0..cfg.runs_per_cell {
                out.push((n, k, run));
            }
        }
    }
    out
}

/// Evaluate every cell, in parallel when `parallel` is set and the crate
/// was built with the `parallel` feature. Output order never depends on
/// scheduling.
pub fn evaluate(cfg: &ExperimentConfig, parallel: bool) -> Result<ExperimentOutcome, HarnessError> {
    cfg.validate()?;
    let work = cells(cfg);
    let eval = |&(n, k, run): &(usize, usize, usize)| run_cell(cfg, n, k, run);
    let outcomes = if parallel {
        par::with_threads(cfg.jobs, || par::map(&work, eval))
    } else {
        par::map_serial(&work, eval)
    };
    let mut rows = Vec::with_capacity(2 * work.len());
    let mut validation_failures = Vec::new();
    for o in outcomes {
        let o = o?;
        rows.extend(o.rows);
        validation_failures.extend(o.failures);
    }
    let (aggregates, cdf) = aggregate(&rows);
    Ok(ExperimentOutcome {
        rows,
        aggregates,
        cdf,
        validation_failures,
    })
}

fn write_csv<T: Serialize>(path: &Path, records: impl IntoIterator<Item = T>) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

#[derive(Serialize)]
struct Fig1Row<'a> {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    planner: &'a str,
    mean_total_j: f64,
    mean_planning_cost_j: f64,
    runs: usize,
}

#[derive(Serialize)]
struct MeanRow<'a> {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    planner: &'a str,
    mean: f64,
    runs: usize,
}

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a ExperimentConfig,
    cells: usize,
    aggregates: &'a [Aggregate],
    validation_failures: &'a [ValidationFailure],
}

/// File names written by [`write_outputs`].
pub const OUTPUT_FILES: &[&str] = &[
    "results.csv",
    "fig1_total_energy.csv",
    "fig2_inspection_time.csv",
    "fig3_flight_energy.csv",
    "fig4_hover_tx_energy.csv",
    "fig5_inspection_time_cdf.csv",
    "fig6_time_vs_points.csv",
    "summary.json",
];

pub fn write_outputs(cfg: &ExperimentConfig, out: &ExperimentOutcome, dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_csv(&dir.join("results.csv"), &out.rows)?;
    write_csv(
        &dir.join("fig1_total_energy.csv"),
        out.aggregates.iter().map(|a| Fig1Row {
            n: a.n,
            k: a.k,
            planner: &a.planner,
            mean_total_j: a.mean_total_j,
            mean_planning_cost_j: a.mean_planning_cost_j,
            runs: a.runs,
        }),
    )?;
    let means = |f: fn(&Aggregate) -> f64| {
        out.aggregates.iter().map(move |a| MeanRow {
            n: a.n,
            k: a.k,
            planner: &a.planner,
            mean: f(a),
            runs: a.runs,
        })
    };
    write_csv(
        &dir.join("fig2_inspection_time.csv"),
        means(|a| a.mean_inspection_time_s),
    )?;
    write_csv(&dir.join("fig3_flight_energy.csv"), means(|a| a.mean_flight_j))?;
    write_csv(&dir.join("fig4_hover_tx_energy.csv"), means(|a| a.mean_hover_tx_j))?;
    write_csv(&dir.join("fig5_inspection_time_cdf.csv"), &out.cdf)?;
    let mut by_k: Vec<&Aggregate> = out.aggregates.iter().collect();
    by_k.sort_by(|a, b| (a.k, &a.planner, a.n).cmp(&(b.k, &b.planner, b.n)));
    write_csv(
        &dir.join("fig6_time_vs_points.csv"),
        by_k.iter().map(|a| MeanRow {
            n: a.n,
            k: a.k,
            planner: &a.planner,
            mean: a.mean_inspection_time_s,
            runs: a.runs,
        }),
    )?;
    let summary = Summary {
        config: cfg,
        cells: out.rows.len() / 2,
        aggregates: &out.aggregates,
        validation_failures: &out.validation_failures,
    };
    let path = dir.join("summary.json");
    fs::write(&path, serde_json::to_string_pretty(&summary)?).map_err(io_err(&path))?;
    Ok(())
}

/// Evaluate and write all outputs to `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, HarnessError> {
    let started = Instant::now();
    let out = evaluate(cfg, par::PARALLEL)?;
    write_outputs(cfg, &out, &cfg.output_dir)?;
    log::info!(
        "{} cells in {:.1} s, {} validation failures",
        out.rows.len() / 2,
        started.elapsed().as_secs_f64(),
        out.validation_failures.len()
    );
    Ok(out)
}

/// Self-contained plan file: trajectories plus the models needed to
/// re-check them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanDocument {
    pub planner: PlannerKind,
    pub feasible: bool,
    pub objective_j: f64,
    pub costs_j: Vec<f64>,
    pub budgets_j: Vec<f64>,
    pub iterations: u64,
    pub wall_time_s: f64,
    pub uncovered_points: Vec<usize>,
    pub trajectories: Vec<TrajectoryRecord>,
    pub fleet: Vec<UavSpec>,
    pub environment: Environment,
    pub radio: RadioConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsReport>,
}

impl PlanDocument {
    pub fn new(
        result: &PlanResult,
        fleet: &[UavSpec],
        env: &Environment,
        radio: &RadioConfig,
        metrics: Option<MetricsReport>,
    ) -> Self {
        Self {
            planner: result.planner,
            feasible: result.feasible,
            objective_j: result.objective(),
            costs_j: result.costs.clone(),
            budgets_j: result.budgets.clone(),
            iterations: result.iterations,
            wall_time_s: result.wall_time,
            uncovered_points: result.uncovered_points.clone(),
            trajectories: result.trajectories.iter().map(TrajectoryRecord::from).collect(),
            fleet: fleet.to_vec(),
            environment: env.clone(),
            radio: radio.clone(),
            metrics,
        }
    }

    /// Rebuild the plan. Tree structure and stored costs come from the
    /// document; cumulative energies are recomputed on `sc`.
    pub fn to_result(&self, sc: &Scenario) -> Result<PlanResult, HarnessError> {
        let graphs = crate::planner::build_graphs(sc, &self.fleet, &self.environment, &self.radio)?;
        let trajectories = self
            .trajectories
            .iter()
            .map(|rec| {
                let g = graphs
                    .get(rec.uav)
                    .ok_or_else(|| HarnessError::Config(format!("trajectory for unknown UAV {}", rec.uav)))?;
                rec.to_trajectory(|p, v| g.weight(p, v)).map_err(HarnessError::from)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PlanResult {
            planner: self.planner,
            trajectories,
            costs: self.costs_j.clone(),
            budgets: self.budgets_j.clone(),
            feasible: self.feasible,
            uncovered_points: self.uncovered_points.clone(),
            iterations: self.iterations,
            wall_time: self.wall_time_s,
        })
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, HarnessError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, serde_json::to_string_pretty(value)?).map_err(io_err(path))
}
