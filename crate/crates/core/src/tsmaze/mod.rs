//! The temporal-spatial maze.
//!
//! Space is cut into `W x W` cells and time into steps of `δ = W / v`, so a
//! craft flying at cruise speed crosses exactly one cell per step. A cell of
//! the maze is an `(x, y, t)` triple and is either free or occupied: occupied
//! because `(x, y)` is a no-fly cell (for every `t`), or because some planned
//! trajectory passes through `(x, y)` at `t`.
//!
//! Static blockage is kept as one dense 2-D bitmap. Reservations are kept
//! sparsely, one hash table per time step, and everything strictly before the
//! current step can be dropped with [`AirspaceEnv::instant_refresh`].

mod env;
mod geometry;
mod static_map;
mod trajectory;

pub use env::{AirspaceEnv, Occupancy, OwnerId};
pub(crate) use geometry::{is_turn, next_heading};
pub use geometry::{Direction, GridGeometry, TSCell};
pub use static_map::StaticMap;
pub use trajectory::Trajectory;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MazeError {
    #[error("invalid grid geometry: {0}")]
    InvalidGeometry(String),
    #[error("cell ({x}, {y}) is outside the {width}x{height} grid")]
    OutOfBounds {
        x: i64,
        y: i64,
        width: u32,
        height: u32,
    },
    #[error("cell ({x}, {y}, t={t}) is already occupied")]
    ReservationConflict { x: u32, y: u32, t: u32 },
    #[error("cannot refresh to t={requested}: environment clock is already at t={current}")]
    TimeRegression { requested: u32, current: u32 },
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
    #[error("static map: {0}")]
    StaticMap(String),
}
