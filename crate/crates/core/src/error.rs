use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter `{name}` = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("induced-velocity solve did not converge within {iterations} iterations")]
    NonConvergence { iterations: u32 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("scenario: {0}")]
    InvalidScenario(String),
    #[error("requested {requested} vertices but only {available} are available")]
    InsufficientVertices { requested: usize, available: usize },
    #[error("invalid tree: {0}")]
    InvalidTree(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("empty fleet")]
    EmptyFleet,
    #[error("planner config: {0}")]
    InvalidConfig(String),
    #[error("instance too large for exact enumeration: {points} points, {uavs} UAVs (caps {max_points}, {max_uavs})")]
    InstanceTooLarge {
        points: usize,
        uavs: usize,
        max_points: usize,
        max_uavs: usize,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("empirical CDF of an empty sample")]
    EmptySample,
}
