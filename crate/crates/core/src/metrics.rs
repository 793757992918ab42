//! Realized routes, inspection time, energy breakdowns, empirical CDFs.
//!
//! A trajectory tree is flown in depth-first preorder (children by ascending
//! id) with straight legs between consecutive points; edges are never
//! retraced.

use serde::{Deserialize, Serialize};

use crate::energy::{Environment, PowerProfile, UavSpec};
use crate::error::{MetricsError, PlanError};
use crate::graph::{station_energy, Scenario, Trajectory};
use crate::planner::PlanResult;
use crate::radio::RadioConfig;

/// Depth-first preorder of `t` from its root, children ascending by id.
pub fn traversal_order(t: &Trajectory) -> Vec<usize> {
    let children = t.children();
    let mut order = Vec::with_capacity(t.len());
    let mut stack = vec![t.root()];
    while let Some(v) = stack.pop() {
        order.push(v);
        if let Some(c) = children.get(&v) {
            stack.extend(c.iter().rev());
        }
    }
    order
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UavMetrics {
    pub uav: usize,
    pub route: Vec<usize>,
    pub flight_energy: f64,
    pub hover_tx_energy: f64,
    /// Completion time of the UAV's last point, s.
    pub finish_time: f64,
    pub planning_cost: f64,
}

/// Swarm-level metrics of one plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub total_energy: f64,
    pub flight_energy: f64,
    pub hover_tx_energy: f64,
    pub inspection_time: f64,
    /// Sum of cumulative-energy tree costs, as used by the planner.
    pub planning_cost: f64,
    pub per_uav: Vec<UavMetrics>,
    pub feasible: bool,
}

/// Completion time of every point on each realized route, `(point, time)`.
fn completion_times(sc: &Scenario, route: &[usize], profile: &PowerProfile, dwell: f64) -> Vec<(usize, f64)> {
    let mut clock = 0.0;
    route
        .windows(2)
        .map(|w| {
            clock += profile.flight_time(sc.points[w[0]].distance(&sc.points[w[1]])) + dwell;
            (w[1], clock)
        })
        .collect()
}

/// Time until every point has been inspected, with all UAVs departing the
/// BS at `t = 0`, s.
pub fn inspection_time(
    sc: &Scenario,
    plan: &PlanResult,
    fleet: &[UavSpec],
    env: &Environment,
    radio: &RadioConfig,
) -> Result<f64, PlanError> {
    Ok(energy_breakdown(sc, plan, fleet, env, radio)?.inspection_time)
}

pub fn energy_breakdown(
    sc: &Scenario,
    plan: &PlanResult,
    fleet: &[UavSpec],
    env: &Environment,
    radio: &RadioConfig,
) -> Result<MetricsReport, PlanError> {
    let dwell = radio.airtime();
    let mut per_uav = Vec::with_capacity(plan.trajectories.len());
    for (t, cost) in plan.trajectories.iter().zip(&plan.costs) {
        let uav = &fleet[t.uav()];
        let profile = PowerProfile::new(uav, env)?;
        let route = traversal_order(t);
        let distance: f64 = route
            .windows(2)
            .map(|w| sc.points[w[0]].distance(&sc.points[w[1]]))
            .sum();
        let hover_tx: f64 = route[1..]
            .iter()
            .map(|&v| station_energy(uav, env, radio, &sc.points[v], sc.shadow_db(v, radio)))
            .sum();
        let finish_time = completion_times(sc, &route, &profile, dwell)
            .last()
            .map_or(0.0, |&(_, t)| t);
        per_uav.push(UavMetrics {
            uav: t.uav(),
            route,
            flight_energy: profile.flight_energy(distance),
            hover_tx_energy: hover_tx,
            finish_time,
            planning_cost: *cost,
        });
    }
    let flight_energy: f64 = per_uav.iter().map(|u| u.flight_energy).sum();
    let hover_tx_energy: f64 = per_uav.iter().map(|u| u.hover_tx_energy).sum();
    Ok(MetricsReport {
        total_energy: flight_energy + hover_tx_energy,
        flight_energy,
        hover_tx_energy,
        inspection_time: per_uav.iter().map(|u| u.finish_time).fold(0.0, f64::max),
        planning_cost: plan.objective(),
        per_uav,
        feasible: plan.feasible,
    })
}

/// Right-continuous empirical CDF as `(value, P[X <= value])` at each
/// distinct sample value, ascending.
pub fn empirical_cdf(samples: &[f64]) -> Result<Vec<(f64, f64)>, MetricsError> {
    if samples.is_empty() {
        return Err(MetricsError::EmptySample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        let p = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 = p,
            _ => out.push((x, p)),
        }
    }
    Ok(out)
}

/// Evaluate a step CDF produced by [`empirical_cdf`] at `x`.
pub fn cdf_at(cdf: &[(f64, f64)], x: f64) -> f64 {
    match cdf.partition_point(|&(v, _)| v <= x) {
        0 => 0.0,
        i => cdf[i - 1].1,
    }
}
