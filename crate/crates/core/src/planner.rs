//! Joint trajectory assignment for an energy-constrained swarm.
//!
//! UAVs are sorted by budget. Each round raises a shared budget `E_i` by
//! `ΔE` and lets every remaining UAV, in order, grow a budgeted j-MST over
//! the points not yet taken in this round. A UAV whose tree would exceed its
//! own budget after one more increment is retired and its points are
//! claimed for good. The loop ends once a round covers every point.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::energy::{Environment, UavSpec};
use crate::error::PlanError;
use crate::graph::{EnergyGraph, Scenario, Trajectory};
use crate::jmst::{grow_within, JmstConfig};
use crate::radio::RadioConfig;

/// `ΔE` used when no finite budget is available to scale from, J.
pub const UNLIMITED_DELTA_E: f64 = 100.0;

/// Where per-UAV energy budgets come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", content = "budgets_j", rename_all = "snake_case")]
pub enum BudgetMode {
    /// Each UAV's own `energy_budget`.
    #[default]
    Fleet,
    /// A per-scenario sentinel large enough never to bind.
    Unlimited,
    /// Explicit values, one per UAV.
    Override(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    /// Budget increment per round, J. `None` picks 1% of the smallest
    /// positive budget, or [`UNLIMITED_DELTA_E`] under unlimited budgets.
    pub delta_e: Option<f64>,
    pub lambda: f64,
    /// Absent from JSON means unlimited.
    #[serde(default = "unlimited_mode")]
    pub budgets: BudgetMode,
    /// Cap on vertices per budgeted j-MST call.
    pub max_vertices: Option<usize>,
    /// Skip rounds whose outcome provably equals the previous round's. The
    /// returned plan is identical either way; only the work differs.
    pub fast_forward: bool,
}

fn unlimited_mode() -> BudgetMode {
    BudgetMode::Unlimited
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            delta_e: None,
            lambda: 2.0,
            budgets: BudgetMode::Fleet,
            max_vertices: None,
            fast_forward: true,
        }
    }
}

impl PlannerConfig {
    pub fn unlimited() -> Self {
        Self {
            budgets: BudgetMode::Unlimited,
            ..Self::default()
        }
    }

    fn jmst(&self) -> JmstConfig {
        JmstConfig {
            lambda: self.lambda,
            max_vertices: self.max_vertices,
        }
    }

    pub fn validate(&self, fleet_len: usize) -> Result<(), PlanError> {
        if !(self.lambda >= 1.0 && self.lambda.is_finite()) {
            return Err(PlanError::InvalidConfig(format!("lambda {} must be >= 1", self.lambda)));
        }
        if let Some(d) = self.delta_e {
            if !(d > 0.0 && d.is_finite()) {
                return Err(PlanError::InvalidConfig(format!("delta_e {d} must be > 0")));
            }
        }
        if let BudgetMode::Override(b) = &self.budgets {
            if b.len() != fleet_len {
                return Err(PlanError::InvalidConfig(format!(
                    "{} budget overrides for {fleet_len} UAVs",
                    b.len()
                )));
            }
            if b.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                return Err(PlanError::InvalidConfig(
                    "budget overrides must be finite and >= 0".into(),
                ));
            }
        }
        if self.max_vertices == Some(0) {
            return Err(PlanError::InvalidConfig("max_vertices must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerKind {
    Proposed,
    Baseline,
    Oracle,
}

impl PlannerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PlannerKind::Proposed => "proposed",
            PlannerKind::Baseline => "baseline",
            PlannerKind::Oracle => "oracle",
        }
    }
}

/// Trajectories for the whole fleet, indexed by UAV.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub planner: PlannerKind,
    pub trajectories: Vec<Trajectory>,
    /// Cumulative-energy cost per UAV, J.
    pub costs: Vec<f64>,
    /// Budget each UAV was planned against, J.
    pub budgets: Vec<f64>,
    pub feasible: bool,
    pub uncovered_points: Vec<usize>,
    pub iterations: u64,
    pub wall_time: f64,
}

impl PlanResult {
    /// Sum of per-UAV costs: the swarm objective.
    pub fn objective(&self) -> f64 {
        self.costs.iter().sum()
    }

    pub fn from_trajectories(
        planner: PlannerKind,
        trajectories: Vec<Trajectory>,
        budgets: Vec<f64>,
        point_count: usize,
    ) -> Self {
        let costs: Vec<f64> = trajectories.iter().map(Trajectory::cost).collect();
        let mut seen = vec![false; point_count];
        seen[0] = true;
        for t in &trajectories {
            for &v in t.inspected() {
                seen[v] = true;
            }
        }
        let uncovered_points: Vec<usize> = (0..point_count).filter(|&v| !seen[v]).collect();
        let within = costs.iter().zip(&budgets).all(|(c, b)| *c <= *b);
        Self {
            planner,
            feasible: uncovered_points.is_empty() && within,
            trajectories,
            costs,
            budgets,
            uncovered_points,
            iterations: 0,
            wall_time: 0.0,
        }
    }
}

pub fn build_graphs(
    sc: &Scenario,
    fleet: &[UavSpec],
    env: &Environment,
    radio: &RadioConfig,
) -> Result<Vec<EnergyGraph>, PlanError> {
    if fleet.is_empty() {
        return Err(PlanError::EmptyFleet);
    }
    fleet
        .iter()
        .enumerate()
        .map(|(k, u)| EnergyGraph::build(sc, k, u, env, radio).map_err(PlanError::from))
        .collect()
}

/// Budget that never binds on this scenario: the fleet size times the most
/// expensive single-UAV tree over all points.
pub fn unlimited_budget(graphs: &[EnergyGraph], lambda: f64) -> f64 {
    let full = graphs
        .iter()
        .map(|g| grow_within(g, 0, |_| true, f64::INFINITY, None).tree.cost())
        .fold(0.0, f64::max);
    // at least one increment of headroom, and the j-MST may overshoot by lambda
    (graphs.len() as f64 * full * lambda).max(UNLIMITED_DELTA_E)
}

fn resolve_budgets(fleet: &[UavSpec], graphs: &[EnergyGraph], cfg: &PlannerConfig) -> Vec<f64> {
    match &cfg.budgets {
        BudgetMode::Fleet => fleet.iter().map(|u| u.energy_budget).collect(),
        BudgetMode::Override(b) => b.clone(),
        BudgetMode::Unlimited => vec![unlimited_budget(graphs, cfg.lambda); fleet.len()],
    }
}

fn resolve_delta(cfg: &PlannerConfig, budgets: &[f64]) -> f64 {
    if let Some(d) = cfg.delta_e {
        return d;
    }
    if cfg.budgets == BudgetMode::Unlimited {
        return UNLIMITED_DELTA_E;
    }
    budgets
        .iter()
        .copied()
        .filter(|b| *b > 0.0)
        .reduce(f64::min)
        .map_or(UNLIMITED_DELTA_E, |b| 0.01 * b)
}

/// Plan trajectories for `fleet` over `sc`.
///
/// When the fleet runs out of UAVs with points still unassigned, the
/// partial plan is returned with `feasible == false` and the leftover points
/// in `uncovered_points`.
pub fn plan(
    sc: &Scenario,
    fleet: &[UavSpec],
    env: &Environment,
    radio: &RadioConfig,
    cfg: &PlannerConfig,
) -> Result<PlanResult, PlanError> {
    let started = Instant::now();
    cfg.validate(fleet.len())?;
    let graphs = build_graphs(sc, fleet, env, radio)?;
    let budgets = resolve_budgets(fleet, &graphs, cfg);
    let delta = resolve_delta(cfg, &budgets);
    let mut result = plan_on_graphs(&graphs, &budgets, delta, cfg);
    result.wall_time = started.elapsed().as_secs_f64();
    Ok(result)
}

/// Round loop over prebuilt graphs (one per UAV, same vertex set).
pub fn plan_on_graphs(graphs: &[EnergyGraph], budgets: &[f64], delta: f64, cfg: &PlannerConfig) -> PlanResult {
    let n = graphs[0].len();
    let jmst = cfg.jmst();
    let k_count = graphs.len();

    let mut active: Vec<usize> = (0..k_count).collect();
    active.sort_by(|&a, &b| budgets[a].total_cmp(&budgets[b]).then(a.cmp(&b)));

    let mut committed: Vec<Trajectory> = (0..k_count).map(|k| Trajectory::root_only(k, 0)).collect();
    let mut claimed = vec![false; n];
    claimed[0] = true;
    let mut round: u64 = 0;
    let mut rounds_run: u64;

    let feasible_end = loop {
        let budget_now = delta * (round + 1) as f64;
        let mut taken = claimed.clone();
        let mut retired_any = false;
        let mut next_breakpoint = f64::INFINITY;

        active.retain(|&k| {
            let g = &graphs[k];
            let grown = grow_within(g, 0, |v| !taken[v], jmst.lambda * budget_now, jmst.max_vertices);
            let mut tree = grown.tree;
            let cost = tree.cost();
            if cost <= budgets[k] {
                committed[k] = tree.clone();
            }
            let retire = cost + delta > budgets[k];
            if retire {
                if cost > budgets[k] {
                    // the round's tree is over budget; keep the largest prefix that fits
                    tree = grow_within(g, 0, |v| !taken[v], budgets[k], jmst.max_vertices).tree;
                    committed[k] = tree.clone();
                }
                for &v in tree.inspected() {
                    claimed[v] = true;
                }
                retired_any = true;
            } else if let Some(c) = grown.next_cost {
                next_breakpoint = next_breakpoint.min(c / jmst.lambda);
            }
            for &v in tree.inspected() {
                taken[v] = true;
            }
            !retire
        });
        rounds_run = round + 1;

        if taken.iter().all(|&t| t) {
            break true;
        }
        if active.is_empty() {
            break false;
        }
        if retired_any || !cfg.fast_forward {
            round += 1;
            continue;
        }
        if !next_breakpoint.is_finite() {
            // no active UAV can grow any further: later rounds repeat this one
            log::warn!(
                "planner stalled with {} points unassigned",
                taken.iter().filter(|t| !**t).count()
            );
            break false;
        }
        round = first_round_reaching(round, delta, next_breakpoint);
    };

    let mut result = PlanResult::from_trajectories(PlannerKind::Proposed, committed, budgets.to_vec(), n);
    result.feasible &= feasible_end;
    result.iterations = rounds_run;
    result
}

/// Smallest round index after `round` whose budget `delta * (r + 1)`
/// reaches `target`.
fn first_round_reaching(round: u64, delta: f64, target: f64) -> u64 {
    let guess = (target / delta).ceil() - 1.0;
    let mut r = if guess.is_finite() && guess > round as f64 {
        guess as u64
    } else {
        round + 1
    };
    while delta * ((r + 1) as f64) < target {
        r += 1;
    }
    while r > round + 1 && delta * (r as f64) >= target {
        r -= 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{tree_cost, Area};
    use crate::radio::Point;

    fn setup(pts: &[(f64, f64)]) -> (Scenario, Environment, RadioConfig) {
        let mut points = vec![Point::new(0, 0.0, 0.0)];
        points.extend(pts.iter().enumerate().map(|(i, &(x, y))| Point::new(i + 1, x, y)));
        let sc = Scenario {
            seed: 0,
            area: Area { w: 200.0, h: 200.0 },
            points,
            shadowing_db: None,
        };
        let env = Environment::balanced_for(&UavSpec::reference(0.0));
        (sc, env, RadioConfig::default())
    }

    #[test]
    fn single_point_single_uav() {
        let (sc, env, radio) = setup(&[(30.0, 40.0)]);
        let fleet = [UavSpec::reference(1e7)];
        let r = plan(&sc, &fleet, &env, &radio, &PlannerConfig::default()).unwrap();
        assert!(r.feasible);
        let inc = crate::graph::visit_increment(&fleet[0], &env, &radio, &sc.points[0], &sc.points[1], 0.0).unwrap();
        assert!((r.objective() - inc).abs() / inc < 1e-12);
        assert_eq!(r.trajectories[0].parent(1), Some(0));
        // first round whose budget lets the tree in: lambda * E_i >= inc
        let delta = 0.01 * 1e7;
        let expected = (inc / (2.0 * delta)).ceil() as u64;
        assert_eq!(r.iterations, expected);
    }

    #[test]
    fn zero_budgets_are_infeasible() {
        let (sc, env, radio) = setup(&[(30.0, 40.0), (100.0, 10.0)]);
        let fleet = [UavSpec::reference(0.0), UavSpec::reference(0.0)];
        let r = plan(&sc, &fleet, &env, &radio, &PlannerConfig::default()).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.uncovered_points, vec![1, 2]);
        assert!(r.trajectories.iter().all(Trajectory::is_root_only));
    }

    #[test]
    fn collinear_two_uavs_split_points() {
        let (sc, env, radio) = setup(&[(10.0, 0.0), (20.0, 0.0)]);
        let g = EnergyGraph::build(&sc, 0, &UavSpec::reference(0.0), &env, &radio).unwrap();
        // enough for the costlier single-vertex tree, not for both vertices
        let budget = g.weight(0, 2) * 1.01;
        let fleet = [UavSpec::reference(budget), UavSpec::reference(budget)];
        let cfg = PlannerConfig {
            lambda: 1.0,
            ..PlannerConfig::default()
        };
        let r = plan(&sc, &fleet, &env, &radio, &cfg).unwrap();
        assert!(r.feasible, "{r:?}");
        let sets: Vec<&[usize]> = r.trajectories.iter().map(|t| t.inspected()).collect();
        assert_eq!(sets.iter().map(|s| s.len()).sum::<usize>(), 2);
        assert!(sets.iter().all(|s| s.len() == 1));
        for (c, b) in r.costs.iter().zip(&r.budgets) {
            assert!(c <= b);
        }
    }

    #[test]
    fn single_uav_unlimited_matches_full_tree() {
        let pts: Vec<(f64, f64)> = (0..12)
            .map(|i| ((i * 37 % 200) as f64, (i * 91 % 200) as f64))
            .collect();
        let (sc, env, radio) = setup(&pts);
        let fleet = [UavSpec::reference(0.0)];
        let r = plan(&sc, &fleet, &env, &radio, &PlannerConfig::unlimited()).unwrap();
        assert!(r.feasible);
        let g = EnergyGraph::build(&sc, 0, &fleet[0], &env, &radio).unwrap();
        let full = crate::jmst::prim_tree(&g, 0, 12).unwrap();
        assert_eq!(r.trajectories[0], full);
        assert_eq!(r.objective(), tree_cost(&full));
    }

    #[test]
    fn fast_forward_matches_literal_rounds() {
        let pts: Vec<(f64, f64)> = (0..9)
            .map(|i| ((i * 53 % 190) as f64 + 3.0, (i * 71 % 180) as f64 + 7.0))
            .collect();
        let (sc, env, radio) = setup(&pts);
        let fleet: Vec<UavSpec> = [0.6, 0.9, 0.75]
            .iter()
            .zip([4e5, 6e5, 5e5])
            .map(|(&eta, b)| UavSpec::reference(b).with_efficiency(eta))
            .collect();
        for delta in [2_000.0, 7_500.0] {
            let fast = PlannerConfig {
                delta_e: Some(delta),
                ..PlannerConfig::default()
            };
            let slow = PlannerConfig {
                fast_forward: false,
                ..fast.clone()
            };
            let mut a = plan(&sc, &fleet, &env, &radio, &fast).unwrap();
            let mut b = plan(&sc, &fleet, &env, &radio, &slow).unwrap();
            a.wall_time = 0.0;
            b.wall_time = 0.0;
            assert_eq!(a, b);
        }
    }

    #[test]
    fn round_jump_lands_on_first_sufficient_budget() {
        assert_eq!(first_round_reaching(0, 10.0, 35.0), 3);
        assert_eq!(first_round_reaching(0, 10.0, 40.0), 3);
        assert_eq!(first_round_reaching(5, 10.0, 20.0), 6);
        assert_eq!(first_round_reaching(0, 0.1, 0.3), 2);
    }

    #[test]
    fn config_errors() {
        let (sc, env, radio) = setup(&[(1.0, 1.0)]);
        let fleet = [UavSpec::reference(1.0)];
        assert_eq!(
            plan(&sc, &[], &env, &radio, &PlannerConfig::default()).unwrap_err(),
            PlanError::EmptyFleet
        );
        let bad = PlannerConfig {
            lambda: 0.5,
            ..PlannerConfig::default()
        };
        assert!(plan(&sc, &fleet, &env, &radio, &bad).is_err());
        let bad = PlannerConfig {
            budgets: BudgetMode::Override(vec![1.0, 2.0]),
            ..PlannerConfig::default()
        };
        assert!(plan(&sc, &fleet, &env, &radio, &bad).is_err());
    }
}
