//! Energy-aware multi-UAV inspection planning.
//!
//! Every UAV starts at a base station (BS) and must visit a subset of
//! inspection points, hovering at each while it uploads a fixed-size
//! packet. The planner grows budget-limited trees with Prim's algorithm over
//! a per-UAV energy graph and hands out budget in rounds, smallest budget
//! first. A nearest-neighbour baseline and an exhaustive oracle are provided
//! for comparison, along with metrics, a plan validator and an experiment
//! harness.

pub mod baseline;
pub mod energy;
pub mod error;
pub mod graph;
pub mod harness;
pub mod jmst;
pub mod metrics;
pub mod oracle;
pub mod par;
pub mod planner;
pub mod radio;
pub mod roots;
pub mod validate;

pub use baseline::plan_nearest_neighbor;
pub use energy::{Environment, PowerProfile, UavSpec};
pub use error::{GraphError, MetricsError, ModelError, PlanError};
pub use graph::{Area, EnergyGraph, Scenario, Trajectory};
pub use jmst::{budgeted_jmst, JmstConfig};
pub use metrics::{empirical_cdf, energy_breakdown, inspection_time, MetricsReport};
pub use oracle::{exact_plan, OracleResult};
pub use planner::{plan, BudgetMode, PlanResult, PlannerConfig, PlannerKind};
pub use radio::{Point, RadioConfig, Shadowing};
pub use validate::{validate, ValidationReport};
