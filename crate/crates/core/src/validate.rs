//! Independent re-check of a plan against coverage, disjointness and budget
//! constraints. Every cost is recomputed from the energy and radio models
//! along each tree's root paths; stored cumulative energies are not used.

use serde::{Deserialize, Serialize};

use crate::energy::{Environment, UavSpec};
use crate::graph::{visit_increment, Scenario, Trajectory};
use crate::planner::PlanResult;
use crate::radio::RadioConfig;

/// Relative tolerance between stored and recomputed costs.
pub const COST_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetViolation {
    pub uav: usize,
    pub cost_j: f64,
    pub budget_j: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostMismatch {
    pub uav: usize,
    pub stored_j: f64,
    pub recomputed_j: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Points no trajectory visits.
    pub missing: Vec<usize>,
    /// Points visited by more than one trajectory.
    pub duplicated: Vec<usize>,
    pub budget_violations: Vec<BudgetViolation>,
    pub cost_mismatches: Vec<CostMismatch>,
    pub structural_errors: Vec<String>,
    /// Recomputed cost per UAV, J.
    pub recomputed_costs: Vec<f64>,
    pub claimed_feasible: bool,
}

impl ValidationReport {
    pub fn covers_all(&self) -> bool {
        self.missing.is_empty()
    }

    pub fn disjoint(&self) -> bool {
        self.duplicated.is_empty()
    }

    pub fn within_budgets(&self) -> bool {
        self.budget_violations.is_empty()
    }

    /// All three plan constraints hold.
    pub fn constraints_hold(&self) -> bool {
        self.structural_errors.is_empty() && self.covers_all() && self.disjoint() && self.within_budgets()
    }

    /// The plan's own claims agree with the recomputation: stored costs
    /// match and the feasibility flag matches the constraints.
    pub fn consistent(&self) -> bool {
        self.structural_errors.is_empty()
            && self.cost_mismatches.is_empty()
            && self.claimed_feasible == self.constraints_hold()
    }
}

fn recompute_cost(
    sc: &Scenario,
    t: &Trajectory,
    uav: &UavSpec,
    env: &Environment,
    radio: &RadioConfig,
) -> Result<f64, String> {
    let mut total = 0.0;
    for &v in t.inspected() {
        let mut here = v;
        let mut hops = 0;
        while let Some(p) = t.parent(here) {
            total += visit_increment(
                uav,
                env,
                radio,
                &sc.points[p],
                &sc.points[here],
                sc.shadow_db(here, radio),
            )
            .map_err(|e| e.to_string())?;
            here = p;
            hops += 1;
            if hops > t.len() {
                return Err(format!("cycle through vertex {v}"));
            }
        }
    }
    Ok(total)
}

pub fn validate(
    sc: &Scenario,
    fleet: &[UavSpec],
    env: &Environment,
    radio: &RadioConfig,
    result: &PlanResult,
) -> ValidationReport {
    let mut report = ValidationReport {
        claimed_feasible: result.feasible,
        ..Default::default()
    };
    let n = sc.points.len();
    if let Err(e) = sc.validate() {
        report.structural_errors.push(e.to_string());
        return report;
    }
    if result.trajectories.len() != fleet.len()
        || result.costs.len() != fleet.len()
        || result.budgets.len() != fleet.len()
    {
        report.structural_errors.push(format!(
            "{} trajectories / {} costs / {} budgets for {} UAVs",
            result.trajectories.len(),
            result.costs.len(),
            result.budgets.len(),
            fleet.len()
        ));
        return report;
    }

    let mut visits = vec![0usize; n];
    for (k, t) in result.trajectories.iter().enumerate() {
        if t.uav() != k {
            report
                .structural_errors
                .push(format!("trajectory {k} labelled for UAV {}", t.uav()));
        }
        if t.root() != 0 {
            report
                .structural_errors
                .push(format!("trajectory {k} rooted at {}", t.root()));
            continue;
        }
        if let Some(&v) = t.inspected().iter().find(|&&v| v >= n) {
            report
                .structural_errors
                .push(format!("trajectory {k} visits unknown point {v}"));
            continue;
        }
        for &v in t.inspected() {
            visits[v] += 1;
        }
        match recompute_cost(sc, t, &fleet[k], env, radio) {
            Ok(cost) => {
                let stored = result.costs[k];
                if (stored - cost).abs() > COST_RTOL * cost.abs().max(1.0) {
                    report.cost_mismatches.push(CostMismatch {
                        uav: k,
                        stored_j: stored,
                        recomputed_j: cost,
                    });
                }
                if cost > result.budgets[k] * (1.0 + 1e-12) {
                    report.budget_violations.push(BudgetViolation {
                        uav: k,
                        cost_j: cost,
                        budget_j: result.budgets[k],
                    });
                }
                report.recomputed_costs.push(cost);
            }
            Err(e) => report.structural_errors.push(format!("trajectory {k}: {e}")),
        }
    }
    report.missing = (1..n).filter(|&v| visits[v] == 0).collect();
    report.duplicated = (1..n).filter(|&v| visits[v] > 1).collect();
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Area;
    use crate::planner::{plan, PlannerConfig};
    use crate::radio::Point;

    fn instance() -> (Scenario, Vec<UavSpec>, Environment, RadioConfig) {
        let pts = [(20.0, 30.0), (90.0, 10.0), (150.0, 160.0), (40.0, 120.0)];
        let mut points = vec![Point::new(0, 0.0, 0.0)];
        points.extend(pts.iter().enumerate().map(|(i, &(x, y))| Point::new(i + 1, x, y)));
        let sc = Scenario {
            seed: 0,
            area: Area { w: 200.0, h: 200.0 },
            points,
            shadowing_db: None,
        };
        let fleet = vec![UavSpec::reference(2e5), UavSpec::reference(3e5).with_efficiency(0.8)];
        (
            sc,
            fleet,
            Environment::balanced_for(&UavSpec::reference(0.0)),
            RadioConfig::default(),
        )
    }

    #[test]
    fn planner_output_validates() {
        let (sc, fleet, env, radio) = instance();
        let r = plan(&sc, &fleet, &env, &radio, &PlannerConfig::default()).unwrap();
        assert!(r.feasible);
        let rep = validate(&sc, &fleet, &env, &radio, &r);
        assert!(rep.constraints_hold() && rep.consistent(), "{rep:?}");
    }

    #[test]
    fn duplicated_vertex_is_flagged() {
        let (sc, fleet, env, radio) = instance();
        let mut r = plan(&sc, &fleet, &env, &radio, &PlannerConfig::unlimited()).unwrap();
        let (donor, taker) = if r.trajectories[0].is_root_only() {
            (1, 0)
        } else {
            (0, 1)
        };
        let v = r.trajectories[donor].inspected()[0];
        let mut t = r.trajectories[taker].clone();
        t.attach(0, v, 1.0).unwrap();
        r.trajectories[taker] = t;
        let rep = validate(&sc, &fleet, &env, &radio, &r);
        assert_eq!(rep.duplicated, vec![v]);
        assert!(!rep.consistent());
    }

    #[test]
    fn corrupted_cost_is_flagged() {
        let (sc, fleet, env, radio) = instance();
        let mut r = plan(&sc, &fleet, &env, &radio, &PlannerConfig::default()).unwrap();
        let k = r.costs.iter().position(|&c| c > 0.0).unwrap();
        r.costs[k] += 1.0;
        let rep = validate(&sc, &fleet, &env, &radio, &r);
        assert_eq!(rep.cost_mismatches.len(), 1);
        assert_eq!(rep.cost_mismatches[0].uav, k);
        assert!(!rep.consistent());
    }

    #[test]
    fn missing_point_and_budget_violation() {
        let (sc, fleet, env, radio) = instance();
        let mut r = plan(&sc, &fleet, &env, &radio, &PlannerConfig::default()).unwrap();
        r.trajectories[0] = Trajectory::root_only(0, 0);
        r.costs[0] = 0.0;
        r.budgets[1] = 1.0;
        let rep = validate(&sc, &fleet, &env, &radio, &r);
        assert!(!rep.covers_all() || r.trajectories[1].inspected().len() == 4);
        assert!(!rep.within_budgets());
        assert!(!rep.consistent());
    }
}
