//! Distance-based baseline: every UAV leaves the BS towards a random point,
//! then repeatedly claims the nearest unclaimed point. Budgets are ignored.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::Instant;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::energy::{Environment, PowerProfile, UavSpec};
use crate::error::PlanError;
use crate::graph::{Scenario, Trajectory};
use crate::planner::{build_graphs, PlanResult, PlannerKind};
use crate::radio::RadioConfig;

/// Event time paired with the UAV index so simultaneous completions are
/// processed lowest index first.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Completion {
    time: f64,
    uav: usize,
}

impl Eq for Completion {}

impl Ord for Completion {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.time.total_cmp(&other.time).then(self.uav.cmp(&other.uav))
    }
}

impl PartialOrd for Completion {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Simulation state of the nearest-neighbour claiming process.
#[derive(Debug, Clone)]
pub struct BaselineState {
    /// Current position of each UAV, as a point index.
    pub location: Vec<usize>,
    pub routes: Vec<Vec<usize>>,
    pub unclaimed: Vec<bool>,
    /// Completion time of each UAV's latest claimed point, s.
    pub clock: Vec<f64>,
}

impl BaselineState {
    fn new(uavs: usize, points: usize) -> Self {
        let mut unclaimed = vec![true; points];
        unclaimed[0] = false;
        Self {
            location: vec![0; uavs],
            routes: vec![Vec::new(); uavs],
            unclaimed,
            clock: vec![0.0; uavs],
        }
    }

    fn claim(&mut self, uav: usize, target: usize, leg_time: f64, dwell: f64) -> f64 {
        debug_assert!(self.unclaimed[target]);
        self.unclaimed[target] = false;
        self.routes[uav].push(target);
        self.location[uav] = target;
        self.clock[uav] += leg_time + dwell;
        self.clock[uav]
    }

    fn any_unclaimed(&self) -> bool {
        self.unclaimed.iter().any(|&u| u)
    }
}

/// Visit order of each UAV under the nearest-neighbour rule.
pub fn nearest_neighbor_routes(
    sc: &Scenario,
    fleet: &[UavSpec],
    env: &Environment,
    radio: &RadioConfig,
    seed: u64,
) -> Result<Vec<Vec<usize>>, PlanError> {
    if fleet.is_empty() {
        return Err(PlanError::EmptyFleet);
    }
    sc.validate()?;
    let profiles = fleet
        .iter()
        .map(|u| PowerProfile::new(u, env))
        .collect::<Result<Vec<_>, _>>()?;
    let dwell = radio.airtime();
    let pts = &sc.points;
    let mut state = BaselineState::new(fleet.len(), pts.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut events = BinaryHeap::new();

    for (k, prof) in profiles.iter().enumerate() {
        let open: Vec<usize> = (1..pts.len()).filter(|&v| state.unclaimed[v]).collect();
        let Some(&first) = open.choose(&mut rng) else { break };
        let leg = prof.flight_time(pts[0].distance(&pts[first]));
        let done = state.claim(k, first, leg, dwell);
        events.push(Reverse(Completion { time: done, uav: k }));
    }

    while state.any_unclaimed() {
        let Some(Reverse(Completion { uav, .. })) = events.pop() else {
            break;
        };
        let here = &pts[state.location[uav]];
        let next = (1..pts.len())
            .filter(|&v| state.unclaimed[v])
            .min_by(|&a, &b| {
                here.distance(&pts[a])
                    .total_cmp(&here.distance(&pts[b]))
                    .then(a.cmp(&b))
            })
            .expect("an unclaimed point exists");
        let leg = profiles[uav].flight_time(here.distance(&pts[next]));
        let done = state.claim(uav, next, leg, dwell);
        events.push(Reverse(Completion { time: done, uav }));
    }
    Ok(state.routes)
}

/// Baseline plan: nearest-neighbour routes as chain trajectories, costed
/// with each UAV's energy graph. Budgets are reported, not enforced.
pub fn plan_nearest_neighbor(
    sc: &Scenario,
    fleet: &[UavSpec],
    env: &Environment,
    radio: &RadioConfig,
    seed: u64,
) -> Result<PlanResult, PlanError> {
    let started = Instant::now();
    let graphs = build_graphs(sc, fleet, env, radio)?;
    let routes = nearest_neighbor_routes(sc, fleet, env, radio, seed)?;
    let trajectories = routes
        .iter()
        .enumerate()
        .map(|(k, route)| {
            let mut t = Trajectory::root_only(k, 0);
            let mut prev = 0;
            for &v in route {
                t.attach(prev, v, graphs[k].weight(prev, v))
                    .expect("route visits distinct points");
                prev = v;
            }
            t
        })
        .collect();
    let budgets = fleet.iter().map(|u| u.energy_budget).collect();
    let mut result = PlanResult::from_trajectories(PlannerKind::Baseline, trajectories, budgets, sc.points.len());
    result.wall_time = started.elapsed().as_secs_f64();
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Area;
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
        (
            sc,
            Environment::balanced_for(&UavSpec::reference(0.0)),
            RadioConfig::default(),
        )
    }

    #[test]
    fn single_point_matches_proposed() {
        let (sc, env, radio) = setup(&[(60.0, 80.0)]);
        let fleet = [UavSpec::reference(1e9)];
        let base = plan_nearest_neighbor(&sc, &fleet, &env, &radio, 1).unwrap();
        let prop = crate::planner::plan(&sc, &fleet, &env, &radio, &Default::default()).unwrap();
        assert_eq!(base.trajectories, prop.trajectories);
        assert_eq!(base.objective(), prop.objective());
    }

    #[test]
    fn collinear_far_first_target() {
        let (sc, env, radio) = setup(&[(10.0, 0.0), (20.0, 0.0)]);
        let fleet = [UavSpec::reference(1e9)];
        let seed = (0..64)
            .find(|&s| nearest_neighbor_routes(&sc, &fleet, &env, &radio, s).unwrap()[0][0] == 2)
            .expect("some seed picks the far point first");
        let routes = nearest_neighbor_routes(&sc, &fleet, &env, &radio, seed).unwrap();
        assert_eq!(routes[0], vec![2, 1]);
        let flown: f64 = [0, 2, 1]
            .windows(2)
            .map(|w| sc.points[w[0]].distance(&sc.points[w[1]]))
            .sum();
        assert_eq!(flown, 30.0);
    }

    #[test]
    fn saturated_fleet_claims_one_each() {
        let (sc, env, radio) = setup(&[(10.0, 0.0), (50.0, 50.0), (120.0, 30.0)]);
        let fleet = vec![UavSpec::reference(1e9); 3];
        let routes = nearest_neighbor_routes(&sc, &fleet, &env, &radio, 9).unwrap();
        assert!(routes.iter().all(|r| r.len() == 1));
        let mut all: Vec<usize> = routes.concat();
        all.sort_unstable();
        assert_eq!(all, vec![1, 2, 3]);
    }

    #[test]
    fn more_uavs_than_points() {
        let (sc, env, radio) = setup(&[(10.0, 0.0)]);
        let fleet = vec![UavSpec::reference(1e9); 3];
        let r = plan_nearest_neighbor(&sc, &fleet, &env, &radio, 0).unwrap();
        assert!(r.feasible);
        assert_eq!(r.trajectories.iter().filter(|t| !t.is_root_only()).count(), 1);
    }

    #[test]
    fn budgets_are_reported_not_enforced() {
        let (sc, env, radio) = setup(&[(10.0, 0.0), (150.0, 150.0)]);
        let fleet = [UavSpec::reference(1.0)];
        let r = plan_nearest_neighbor(&sc, &fleet, &env, &radio, 0).unwrap();
        assert!(r.uncovered_points.is_empty());
        assert!(!r.feasible);
        assert_eq!(r.trajectories[0].len(), 3);
    }

    #[test]
    fn deterministic_given_seed() {
        let pts: Vec<(f64, f64)> = (0..20)
            .map(|i| ((i * 37 % 200) as f64, (i * 91 % 200) as f64))
            .collect();
        let (sc, env, radio) = setup(&pts);
        let fleet = vec![UavSpec::reference(1e9); 4];
        let a = nearest_neighbor_routes(&sc, &fleet, &env, &radio, 42).unwrap();
        let b = nearest_neighbor_routes(&sc, &fleet, &env, &radio, 42).unwrap();
        assert_eq!(a, b);
    }
}
