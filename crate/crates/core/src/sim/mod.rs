//! Agent-based traffic simulation.
//!
//! Each step: drop stale reservations, move every airborne craft, assign
//! ground-truth channels, log no-link and conflict events, land arrivals,
//! then (on generation boundaries) create launch requests and gate them
//! through the configured router.

pub mod engine;
pub mod metrics;
pub mod mission;
pub mod scenario;

pub use engine::{detect_conflicts, run, SimError, World};
pub use metrics::{Metrics, MetricsReport, RouteRecord};
pub use mission::{generate_missions, manhattan_path, Mission, MissionStatus};
pub use scenario::{
    ConfigError, EnergyConfig, GridConfig, LaunchArea, OutputConfig, Rect, RouterKind, Scenario,
    StationConfig, TrafficConfig,
};
