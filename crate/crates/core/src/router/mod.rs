//! Trajectory planning in the temporal-spatial maze.
//!
//! Two planners share the same move set (four Manhattan moves plus a wait,
//! one time step each) and the same request type:
//!
//! * [`bfs`]: the baseline flood-and-traceback maze router over a dense
//!   time-expanded grid,
//! * [`srts`]: A* over the 2-D map that looks up the sparse per-step
//!   reservation store and optionally the cellular link model.
//!
//! Both reserve the returned trajectory in the environment.

pub mod bfs;
pub mod srts;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::comms::CommsModel;
use crate::tsmaze::{AirspaceEnv, MazeError, OwnerId, TSCell, Trajectory};

pub use bfs::{flood, flood_layers, route_bfs, traceback, FloodResult};
pub use srts::{
    candidate_selection, default_turn_penalty, route_srts, Candidate, ClosedSet, RoutingConfig,
    SearchNode, SignalBelief, StateKey,
};

/// Arrival deadline rule: `t_s + per_cell * manhattan + slack`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeadlinePolicy {
    pub per_cell: u32,
    pub slack: u32,
}

impl Default for DeadlinePolicy {
    fn default() -> Self {
        Self {
            per_cell: 4,
            slack: 64,
        }
    }
}

impl DeadlinePolicy {
    pub fn deadline(&self, source: TSCell, destination: (u32, u32)) -> u32 {
        source.t + self.per_cell * source.manhattan(destination) + self.slack
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RouteRequest {
    pub owner: OwnerId,
    pub source: TSCell,
    pub destination: (u32, u32),
    /// Latest allowed arrival step, inclusive.
    pub deadline: u32,
}

impl RouteRequest {
    pub fn new(
        owner: OwnerId,
        source: TSCell,
        destination: (u32, u32),
        policy: &DeadlinePolicy,
    ) -> Self {
        Self {
            owner,
            source,
            destination,
            deadline: policy.deadline(source, destination),
        }
    }
}

/// Effort spent by one route call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RouteStats {
    /// Nodes taken off the queue (BFS) or popped and expanded (A*).
    pub expanded: usize,
    /// Cells of the dense time-expanded label array, `X * Y * layers`.
    /// Zero for the sparse router.
    pub dense_cells: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteOutcome {
    pub trajectory: Option<Trajectory>,
    pub stats: RouteStats,
}

impl RouteOutcome {
    pub fn expanded_node_count(&self) -> usize {
        self.stats.expanded
    }

    fn unroutable(stats: RouteStats) -> Self {
        Self {
            trajectory: None,
            stats,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RouteError {
    #[error(transparent)]
    Maze(#[from] MazeError),
    #[error("source {0} is occupied")]
    SourceOccupied(TSCell),
    #[error("destination ({0}, {1}) is inside a no-fly zone")]
    DestinationBlocked(u32, u32),
    #[error("deadline t={deadline} precedes the start time t={start}")]
    DeadlineBeforeStart { deadline: u32, start: u32 },
    #[error("request starts at t={start} but the environment clock is at t={now}")]
    StartInPast { start: u32, now: u32 },
    #[error("connectivity checking requested without a communication model")]
    MissingComms,
    #[error("internal routing error: {0}")]
    Internal(String),
}

/// Precondition checks shared by both routers.
pub(crate) fn validate_request(env: &AirspaceEnv, req: &RouteRequest) -> Result<(), RouteError> {
    let g = env.geometry();
    g.check(req.source.x as i64, req.source.y as i64)?;
    g.check(req.destination.0 as i64, req.destination.1 as i64)?;
    if req.source.t < env.current_time() {
        return Err(RouteError::StartInPast {
            start: req.source.t,
            now: env.current_time(),
        });
    }
    if req.deadline < req.source.t {
        return Err(RouteError::DeadlineBeforeStart {
            deadline: req.deadline,
            start: req.source.t,
        });
    }
    if !env.is_free(req.source) {
        return Err(RouteError::SourceOccupied(req.source));
    }
    if env
        .static_map()
        .is_blocked(req.destination.0, req.destination.1)
    {
        return Err(RouteError::DestinationBlocked(
            req.destination.0,
            req.destination.1,
        ));
    }
    Ok(())
}

/// Whether source and destination are joined on the 2-D map through cells
/// that are not statically blocked (and, when `coverage` is given, within
/// line-of-sight range of some station). A failure here means no trajectory
/// can exist at any time, so the time-expanded search can be skipped.
pub(crate) fn statically_connected(
    env: &AirspaceEnv,
    from: (u32, u32),
    to: (u32, u32),
    coverage: Option<&CommsModel>,
) -> bool {
    let g = env.geometry();
    let passable = |x: u32, y: u32| {
        !env.static_map().is_blocked(x, y) && coverage.is_none_or(|c| c.is_covered(x, y))
    };
    if !passable(from.0, from.1) || !passable(to.0, to.1) {
        return false;
    }
    let mut seen = vec![false; g.cell_count()];
    let mut queue = VecDeque::from([from]);
    seen[g.index(from.0, from.1)] = true;
    while let Some((x, y)) = queue.pop_front() {
        if (x, y) == to {
            return true;
        }
        for dir in crate::tsmaze::Direction::MOVES {
            let (dx, dy) = dir.delta();
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            if !g.contains(nx, ny) {
                continue;
            }
            let (nx, ny) = (nx as u32, ny as u32);
            let idx = g.index(nx, ny);
            if !seen[idx] && passable(nx, ny) {
                seen[idx] = true;
                queue.push_back((nx, ny));
            }
        }
    }
    false
}
