//! Spatio-temporal routing and agent-based traffic simulation for small UAS
//! flying in a gridded urban airspace.

pub mod comms;
pub mod energy;
pub mod io;
pub mod reactive;
pub mod router;
pub mod sim;
pub mod tsmaze;

pub use comms::{BaseStation, ChannelLedger, CommsModel, LinkResult, PathLossParams};
pub use router::{
    route_bfs, route_srts, DeadlinePolicy, RouteError, RouteOutcome, RouteRequest, RouteStats,
    RoutingConfig,
};
pub use sim::{
    run, Metrics, MetricsReport, Mission, MissionStatus, RouterKind, Scenario, SimError,
};
pub use tsmaze::{
    AirspaceEnv, Direction, GridGeometry, MazeError, Occupancy, OwnerId, StaticMap, TSCell,
    Trajectory,
};
