//! Per-UAV energy graphs over the inspection points, rooted trajectories,
//! and their cumulative energy cost.
//!
//! The weight of the ordered pair `(from, to)` is the energy a UAV spends to
//! fly from `from` to `to`, hover there for one packet airtime, and upload
//! the packet. It depends on the destination through the transmit power, so
//! weights are stored per ordered pair and trajectory edges are always
//! evaluated directed away from the root.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::energy::{Environment, PowerProfile, UavSpec};
use crate::error::{GraphError, ModelError};
use crate::radio::{min_tx_power, Point, RadioConfig};

/// Width and height of the inspection area, m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Area {
    pub w: f64,
    pub h: f64,
}

/// Inspection instance. Point 0 is the base station and the root of every
/// trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub seed: u64,
    pub area: Area,
    pub points: Vec<Point>,
    /// Per-point shadowing sample, dB, aligned with `points`. Absent when
    /// the channel uses a fixed shadowing value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shadowing_db: Option<Vec<f64>>,
}

impl Scenario {
    /// Number of inspection points, excluding the BS.
    pub fn inspection_count(&self) -> usize {
        self.points.len().saturating_sub(1)
    }

    pub fn root(&self) -> &Point {
        &self.points[0]
    }

    pub fn shadow_db(&self, idx: usize, radio: &RadioConfig) -> f64 {
        match &self.shadowing_db {
            Some(s) => s[idx],
            None => radio.default_shadow_db(),
        }
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        let bad = |m: String| Err(GraphError::InvalidScenario(m));
        if self.points.is_empty() {
            return bad("no base-station point".into());
        }
        if !(self.area.w >= 0.0 && self.area.h >= 0.0) {
            return bad(format!("invalid area {:?}", self.area));
        }
        for (idx, p) in self.points.iter().enumerate() {
            if p.id != idx {
                return bad(format!("point at position {idx} has id {}", p.id));
            }
            if !(p.x1.is_finite() && p.x2.is_finite()) {
                return bad(format!("point {idx} has non-finite coordinates"));
            }
            if idx > 0 && !((0.0..=self.area.w).contains(&p.x1) && (0.0..=self.area.h).contains(&p.x2)) {
                return bad(format!("point {idx} lies outside the area"));
            }
        }
        if let Some(s) = &self.shadowing_db {
            if s.len() != self.points.len() || s.iter().any(|v| !v.is_finite()) {
                return bad("shadowing samples do not match the point list".into());
            }
        }
        Ok(())
    }

    pub(crate) fn check_root(&self, radio: &RadioConfig) -> Result<(), GraphError> {
        let root = self.root();
        if root.distance_to(radio.bs_location) > 1e-9 {
            return Err(GraphError::InvalidScenario(format!(
                "point 0 at ({}, {}) is not at the BS location {:?}",
                root.x1, root.x2, radio.bs_location
            )));
        }
        Ok(())
    }
}

/// Energy spent at `to` regardless of where the UAV came from: hovering and
/// uploading for one packet airtime, J.
pub fn station_energy(uav: &UavSpec, env: &Environment, radio: &RadioConfig, to: &Point, shadow_db: f64) -> f64 {
    radio.airtime() / uav.efficiency * (min_tx_power(to, radio, shadow_db) + crate::energy::min_hover_power(uav, env))
}

/// Energy increment for inspecting `to` immediately after `from`: flight
/// over the straight-line distance plus hover and upload at `to`, J.
pub fn visit_increment(
    uav: &UavSpec,
    env: &Environment,
    radio: &RadioConfig,
    from: &Point,
    to: &Point,
    shadow_db: f64,
) -> Result<f64, ModelError> {
    let flight = crate::energy::flight_energy(uav, env, from.distance(to))?;
    Ok(flight + station_energy(uav, env, radio, to, shadow_db))
}

/// Complete directed energy graph of one UAV over all scenario points.
#[derive(Debug, Clone)]
pub struct EnergyGraph {
    uav: usize,
    n: usize,
    weights: Vec<f64>,
    station: Vec<f64>,
    flight_per_metre: f64,
}

impl EnergyGraph {
    pub fn build(
        sc: &Scenario,
        uav_index: usize,
        uav: &UavSpec,
        env: &Environment,
        radio: &RadioConfig,
    ) -> Result<Self, GraphError> {
        sc.validate()?;
        radio.validate()?;
        sc.check_root(radio)?;
        let profile = PowerProfile::new(uav, env)?;
        let n = sc.points.len();
        let airtime = radio.airtime();
        let station: Vec<f64> = sc
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                if i == 0 {
                    0.0
                } else {
                    let tx = min_tx_power(p, radio, sc.shadow_db(i, radio));
                    airtime * (tx + profile.min_hover_power) / profile.efficiency
                }
            })
            .collect();
        let flight_per_metre = profile.flight_energy(1.0);
        let mut weights = vec![0.0; n * n];
        for (i, a) in sc.points.iter().enumerate() {
            for (j, b) in sc.points.iter().enumerate() {
                if i != j {
                    weights[i * n + j] = profile.flight_energy(a.distance(b)) + station[j];
                }
            }
        }
        Ok(Self {
            uav: uav_index,
            n,
            weights,
            station,
            flight_per_metre,
        })
    }

    /// Graph from an explicit weight matrix, mainly for tests and tools.
    /// Row `i`, column `j` is the weight of `i -> j`.
    pub fn from_matrix(uav: usize, matrix: Vec<Vec<f64>>) -> Result<Self, GraphError> {
        let n = matrix.len();
        if n == 0 || matrix.iter().any(|row| row.len() != n) {
            return Err(GraphError::InvalidScenario(
                "weight matrix must be square and non-empty".into(),
            ));
        }
        let mut weights = Vec::with_capacity(n * n);
        for (i, row) in matrix.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                if i != j && !(w >= 0.0 && w.is_finite()) {
                    return Err(GraphError::InvalidScenario(format!("weight ({i}, {j}) = {w}")));
                }
                weights.push(if i == j { 0.0 } else { w });
            }
        }
        Ok(Self {
            uav,
            n,
            weights,
            station: vec![0.0; n],
            flight_per_metre: f64::NAN,
        })
    }

    pub fn uav(&self) -> usize {
        self.uav
    }

    /// Number of vertices, including the root.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Number of ordered pairs carrying a weight.
    pub fn edge_count(&self) -> usize {
        self.n * (self.n - 1)
    }

    #[inline]
    pub fn weight(&self, from: usize, to: usize) -> f64 {
        self.weights[from * self.n + to]
    }

    /// Hover-plus-upload part of every edge entering `v`.
    pub fn station_energy(&self, v: usize) -> f64 {
        self.station[v]
    }

    pub fn flight_energy_per_metre(&self) -> f64 {
        self.flight_per_metre
    }
}

/// A rooted tree of points assigned to one UAV, with the cumulative energy
/// at each vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    uav: usize,
    /// Vertices in insertion order, root first.
    vertices: Vec<usize>,
    parents: Vec<Option<usize>>,
    cumulative: Vec<f64>,
    slot: BTreeMap<usize, usize>,
}

impl Trajectory {
    pub fn root_only(uav: usize, root: usize) -> Self {
        Self {
            uav,
            vertices: vec![root],
            parents: vec![None],
            cumulative: vec![0.0],
            slot: BTreeMap::from([(root, 0)]),
        }
    }

    /// Attach `vertex` below `parent` with edge weight `weight`.
    pub fn attach(&mut self, parent: usize, vertex: usize, weight: f64) -> Result<(), GraphError> {
        let Some(&ps) = self.slot.get(&parent) else {
            return Err(GraphError::InvalidTree(format!("parent {parent} not in tree")));
        };
        if self.slot.contains_key(&vertex) {
            return Err(GraphError::InvalidTree(format!("vertex {vertex} already in tree")));
        }
        if weight.is_nan() || weight < 0.0 {
            return Err(GraphError::InvalidTree(format!("edge weight {weight}")));
        }
        let cum = self.cumulative[ps] + weight;
        self.slot.insert(vertex, self.vertices.len());
        self.vertices.push(vertex);
        self.parents.push(Some(parent));
        self.cumulative.push(cum);
        Ok(())
    }

    /// Build from `(vertex, parent)` pairs in any order, weighting edges with
    /// `weight(parent, vertex)`. Pairs already listed parent-first are
    /// attached in the given order.
    pub fn from_parents(
        uav: usize,
        root: usize,
        pairs: &[(usize, usize)],
        weight: impl Fn(usize, usize) -> f64,
    ) -> Result<Self, GraphError> {
        let mut seen = BTreeSet::new();
        for &(v, _) in pairs {
            if v == root || !seen.insert(v) {
                return Err(GraphError::InvalidTree(format!(
                    "vertex {v} listed twice or is the root"
                )));
            }
        }
        let mut t = Self::root_only(uav, root);
        let mut pending: Vec<(usize, usize)> = pairs.to_vec();
        while !pending.is_empty() {
            let before = pending.len();
            let mut rest = Vec::new();
            for (v, p) in pending {
                if t.contains(p) {
                    t.attach(p, v, weight(p, v))?;
                } else {
                    rest.push((v, p));
                }
            }
            if rest.len() == before {
                return Err(GraphError::InvalidTree(
                    "parent links do not all reach the root".to_string(),
                ));
            }
            pending = rest;
        }
        Ok(t)
    }

    pub fn uav(&self) -> usize {
        self.uav
    }

    pub fn root(&self) -> usize {
        self.vertices[0]
    }

    /// Vertices in insertion order, root first.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// Non-root vertices in insertion order.
    pub fn inspected(&self) -> &[usize] {
        &self.vertices[1..]
    }

    // never empty: the root is always present
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_root_only(&self) -> bool {
        self.vertices.len() == 1
    }

    pub fn contains(&self, v: usize) -> bool {
        self.slot.contains_key(&v)
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.slot.get(&v).and_then(|&s| self.parents[s])
    }

    pub fn cumulative_energy(&self, v: usize) -> Option<f64> {
        self.slot.get(&v).map(|&s| self.cumulative[s])
    }

    /// `(vertex, parent)` for every non-root vertex, insertion order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.vertices[1..]
            .iter()
            .zip(&self.parents[1..])
            .map(|(&v, p)| (v, p.expect("non-root vertex has a parent")))
    }

    /// Children of each vertex, ascending by id.
    pub fn children(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (v, p) in self.edges() {
            out.entry(p).or_default().push(v);
        }
        for c in out.values_mut() {
            c.sort_unstable();
        }
        out
    }

    /// Cumulative energy of every vertex, summed: the trajectory's cost.
    pub fn cost(&self) -> f64 {
        self.cost_with(None)
    }

    /// Cost after a hypothetical attachment of `(vertex, cumulative)`.
    /// Terms are summed by ascending vertex id so the result depends only
    /// on the tree, not on the order vertices were attached.
    pub(crate) fn cost_with(&self, extra: Option<(usize, f64)>) -> f64 {
        let mut total = 0.0;
        let mut pending = extra;
        for (&v, &i) in &self.slot {
            if let Some((x, cum)) = pending {
                if x < v {
                    total += cum;
                    pending = None;
                }
            }
            total += self.cumulative[i];
        }
        if let Some((_, cum)) = pending {
            total += cum;
        }
        total
    }
}

/// Sum of cumulative root-to-vertex energy over the vertices of `t`.
pub fn tree_cost(t: &Trajectory) -> f64 {
    t.cost()
}

/// Serialized form of a trajectory: parallel vertex/parent arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub uav: usize,
    pub vertices: Vec<usize>,
    pub parents: Vec<Option<usize>>,
    pub cumulative_energy_j: Vec<f64>,
    pub cost_j: f64,
}

impl From<&Trajectory> for TrajectoryRecord {
    fn from(t: &Trajectory) -> Self {
        Self {
            uav: t.uav,
            vertices: t.vertices.clone(),
            parents: t.parents.clone(),
            cumulative_energy_j: t.cumulative.clone(),
            cost_j: t.cost(),
        }
    }
}

impl TrajectoryRecord {
    /// Rebuild the tree structure, recomputing cumulative energy with
    /// `weight`. Stored energies are ignored.
    pub fn to_trajectory(&self, weight: impl Fn(usize, usize) -> f64) -> Result<Trajectory, GraphError> {
        if self.vertices.len() != self.parents.len() || self.vertices.is_empty() {
            return Err(GraphError::InvalidTree("vertex/parent arrays differ in length".into()));
        }
        let roots: Vec<usize> = self
            .vertices
            .iter()
            .zip(&self.parents)
            .filter(|(_, p)| p.is_none())
            .map(|(&v, _)| v)
            .collect();
        let [root] = roots[..] else {
            return Err(GraphError::InvalidTree(format!("{} roots", roots.len())));
        };
        let pairs: Vec<(usize, usize)> = self
            .vertices
            .iter()
            .zip(&self.parents)
            .filter_map(|(&v, p)| p.map(|p| (v, p)))
            .collect();
        Trajectory::from_parents(self.uav, root, &pairs, weight)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> (UavSpec, Environment, RadioConfig) {
        let uav = UavSpec::reference(1e9);
        let env = Environment::balanced_for(&uav);
        (uav, env, RadioConfig::default())
    }

    fn scenario(pts: &[(f64, f64)]) -> Scenario {
        let mut points = vec![Point::new(0, 0.0, 0.0)];
        points.extend(pts.iter().enumerate().map(|(i, &(x, y))| Point::new(i + 1, x, y)));
        Scenario {
            seed: 0,
            area: Area { w: 200.0, h: 200.0 },
            points,
            shadowing_db: None,
        }
    }

    #[test]
    fn visit_increment_reference_values() {
        let (uav, env, radio) = reference();
        let o = Point::new(0, 0.0, 0.0);
        let p = Point::new(1, 100.0, 100.0);
        let inc = visit_increment(&uav, &env, &radio, &o, &p, 0.0).unwrap();
        assert!((inc - 34_077.042).abs() < 1e-2, "{inc}");

        let q = Point::new(2, 100.0, 100.0);
        let dwell = visit_increment(&uav, &env, &radio, &p, &q, 0.0).unwrap();
        assert!((dwell - 1_333.028_6).abs() < 1e-3, "{dwell}");

        let unit = uav.clone().with_efficiency(1.0);
        let inc1 = visit_increment(&unit, &env, &radio, &o, &p, 0.0).unwrap();
        assert!((inc - inc1 / 0.7).abs() / inc < 1e-12);
    }

    #[test]
    fn single_point_graph() {
        let (uav, env, radio) = reference();
        let g = EnergyGraph::build(&scenario(&[(10.0, 0.0)]), 0, &uav, &env, &radio).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.edge_count(), 2);
        assert!(g.weight(0, 1) > 0.0);
        assert!(g.weight(1, 0) > 0.0);
    }

    #[test]
    fn graph_weights_match_raw_increment() {
        let (uav, env, radio) = reference();
        let sc = scenario(&[(10.0, 5.0), (150.0, 20.0), (33.0, 190.0)]);
        let g = EnergyGraph::build(&sc, 0, &uav, &env, &radio).unwrap();
        assert_eq!(g.edge_count(), 12);
        for a in &sc.points {
            for b in &sc.points {
                if a.id == b.id || b.id == 0 {
                    continue;
                }
                let raw = visit_increment(&uav, &env, &radio, a, b, 0.0).unwrap();
                assert!((g.weight(a.id, b.id) - raw).abs() / raw < 1e-12);
            }
        }
    }

    #[test]
    fn graph_weights_scale_with_efficiency() {
        let (uav, env, radio) = reference();
        let sc = scenario(&[(10.0, 5.0), (150.0, 20.0)]);
        let g1 = EnergyGraph::build(&sc, 0, &uav.clone().with_efficiency(0.5), &env, &radio).unwrap();
        let g2 = EnergyGraph::build(&sc, 1, &uav.with_efficiency(0.8), &env, &radio).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!((g1.weight(i, j) / g2.weight(i, j) - 0.8 / 0.5).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn scenario_validation() {
        let mut sc = scenario(&[(10.0, 0.0)]);
        assert!(sc.validate().is_ok());
        sc.points[1].id = 7;
        assert!(sc.validate().is_err());
        let mut sc = scenario(&[(250.0, 0.0)]);
        assert!(sc.validate().is_err());
        sc.points[1].x1 = 1.0;
        sc.points[0].x1 = 3.0;
        let (uav, env, radio) = reference();
        assert!(EnergyGraph::build(&sc, 0, &uav, &env, &radio).is_err());
    }

    #[test]
    fn tree_cost_examples() {
        assert_eq!(tree_cost(&Trajectory::root_only(0, 0)), 0.0);

        let mut chain = Trajectory::root_only(0, 0);
        chain.attach(0, 1, 3.0).unwrap();
        chain.attach(1, 2, 5.0).unwrap();
        assert_eq!(tree_cost(&chain), 2.0 * 3.0 + 5.0);

        let mut star = Trajectory::root_only(0, 0);
        star.attach(0, 1, 3.0).unwrap();
        star.attach(0, 2, 5.0).unwrap();
        assert_eq!(tree_cost(&star), 8.0);
        let w = |_p: usize, v: usize| if v == 1 { 3.0 } else { 5.0 };
        let reordered = Trajectory::from_parents(0, 0, &[(2, 0), (1, 0)], w).unwrap();
        assert_eq!(tree_cost(&reordered), 8.0);
    }

    #[test]
    fn malformed_trees_rejected() {
        let w = |_: usize, _: usize| 1.0;
        assert!(Trajectory::from_parents(0, 0, &[(1, 2), (2, 1)], w).is_err());
        assert!(Trajectory::from_parents(0, 0, &[(1, 0), (1, 0)], w).is_err());
        let mut t = Trajectory::root_only(0, 0);
        assert!(t.attach(5, 1, 1.0).is_err());
        t.attach(0, 1, 1.0).unwrap();
        assert!(t.attach(0, 1, 1.0).is_err());
    }

    #[test]
    fn record_round_trip_recomputes_energy() {
        let mut t = Trajectory::root_only(3, 0);
        t.attach(0, 4, 2.0).unwrap();
        t.attach(4, 2, 1.0).unwrap();
        let mut rec = TrajectoryRecord::from(&t);
        rec.cumulative_energy_j = vec![99.0; 3];
        let back = rec
            .to_trajectory(|p, v| if (p, v) == (0, 4) { 2.0 } else { 1.0 })
            .unwrap();
        assert_eq!(back, t);
    }
}
