use std::collections::BTreeMap;
use std::fmt::Write as _;

use rustc_hash::FxHashMap;

use super::{GridGeometry, MazeError, StaticMap, TSCell, Trajectory};

/// Identifies the craft a reservation belongs to. Owners are numbered in
/// launch order.
pub type OwnerId = u64;

/// Label of one maze cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Occupancy {
    Free,
    Occupied,
}

impl Occupancy {
    /// `0` for free, `-1` for occupied.
    pub fn label(self) -> i8 {
        match self {
            Occupancy::Free => 0,
            Occupancy::Occupied => -1,
        }
    }

    pub fn is_free(self) -> bool {
        self == Occupancy::Free
    }
}

/// The airspace as seen by the routers: a static no-fly bitmap plus a sparse
/// store of reserved `(x, y)` positions keyed by time step.
#[derive(Debug, Clone)]
pub struct AirspaceEnv {
    geometry: GridGeometry,
    static_map: StaticMap,
    dynamic: BTreeMap<u32, FxHashMap<(u32, u32), OwnerId>>,
    live_entries: usize,
    current_time: u32,
}

impl AirspaceEnv {
    pub fn new(geometry: GridGeometry) -> Self {
        Self {
            static_map: StaticMap::empty(geometry.width(), geometry.height()),
            geometry,
            dynamic: BTreeMap::new(),
            live_entries: 0,
            current_time: 0,
        }
    }

    pub fn with_static_map(
        geometry: GridGeometry,
        static_map: StaticMap,
    ) -> Result<Self, MazeError> {
        if static_map.width() != geometry.width() || static_map.height() != geometry.height() {
            return Err(MazeError::StaticMap(format!(
                "map is {}x{} but the grid is {}x{}",
                static_map.width(),
                static_map.height(),
                geometry.width(),
                geometry.height()
            )));
        }
        let mut env = Self::new(geometry);
        env.static_map = static_map;
        Ok(env)
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn static_map(&self) -> &StaticMap {
        &self.static_map
    }

    pub fn block_rect(&mut self, x: u32, y: u32, w: u32, h: u32) {
        self.static_map.block_rect(x, y, w, h);
    }

    pub fn set_blocked(&mut self, x: u32, y: u32, blocked: bool) -> Result<(), MazeError> {
        self.geometry.check(x as i64, y as i64)?;
        self.static_map.set_blocked(x, y, blocked);
        Ok(())
    }

    pub fn is_static_blocked(&self, x: u32, y: u32) -> Result<bool, MazeError> {
        self.geometry.check(x as i64, y as i64)?;
        Ok(self.static_map.is_blocked(x, y))
    }

    pub fn current_time(&self) -> u32 {
        self.current_time
    }

    /// Latest reserved time step, or the current time when nothing is reserved.
    pub fn horizon(&self) -> u32 {
        self.dynamic
            .last_key_value()
            .map_or(self.current_time, |(&t, _)| t)
    }

    /// `M(x, y, t)`: whether the maze cell is free.
    pub fn occupancy(&self, cell: TSCell) -> Result<Occupancy, MazeError> {
        self.geometry.check(cell.x as i64, cell.y as i64)?;
        Ok(if self.is_free(cell) {
            Occupancy::Free
        } else {
            Occupancy::Occupied
        })
    }

    /// Unchecked variant of [`occupancy`](Self::occupancy) for in-bounds cells.
    #[inline]
    pub fn is_free(&self, cell: TSCell) -> bool {
        !self.static_map.is_blocked(cell.x, cell.y) && !self.is_reserved(cell)
    }

    #[inline]
    pub fn is_reserved(&self, cell: TSCell) -> bool {
        self.dynamic
            .get(&cell.t)
            .is_some_and(|slice| slice.contains_key(&(cell.x, cell.y)))
    }

    pub fn owner_at(&self, cell: TSCell) -> Option<OwnerId> {
        self.dynamic.get(&cell.t)?.get(&(cell.x, cell.y)).copied()
    }

    /// Records every cell of `traj` as occupied by `owner`. Either all cells
    /// are recorded or none are.
    pub fn reserve_trajectory(
        &mut self,
        traj: &Trajectory,
        owner: OwnerId,
    ) -> Result<(), MazeError> {
        for &cell in traj.cells() {
            if self.occupancy(cell)? == Occupancy::Occupied {
                return Err(MazeError::ReservationConflict {
                    x: cell.x,
                    y: cell.y,
                    t: cell.t,
                });
            }
        }
        for &cell in traj.cells() {
            self.dynamic
                .entry(cell.t)
                .or_default()
                .insert((cell.x, cell.y), owner);
        }
        self.live_entries += traj.len();
        Ok(())
    }

    /// Drops every reservation strictly before `now` and advances the clock.
    /// Returns the number of `(t, x, y)` records removed.
    pub fn instant_refresh(&mut self, now: u32) -> Result<usize, MazeError> {
        if now < self.current_time {
            return Err(MazeError::TimeRegression {
                requested: now,
                current: self.current_time,
            });
        }
        let kept = self.dynamic.split_off(&now);
        let removed: usize = self.dynamic.values().map(|slice| slice.len()).sum();
        self.dynamic = kept;
        self.live_entries -= removed;
        self.current_time = now;
        Ok(removed)
    }

    /// Number of `(t, x, y)` reservation records held. Static cells are not counted.
    pub fn live_entry_count(&self) -> usize {
        self.live_entries
    }

    /// Positions reserved at `t` with their owners, ordered by owner.
    pub fn occupants_at(&self, t: u32) -> Vec<(OwnerId, (u32, u32))> {
        let mut out: Vec<_> = self
            .dynamic
            .get(&t)
            .map(|slice| slice.iter().map(|(&xy, &owner)| (owner, xy)).collect())
            .unwrap_or_default();
        out.sort_unstable();
        out
    }

    /// Debug dump of the dynamic store, one `t x y` line per record sorted
    /// by `(t, x, y)`.
    pub fn dump_dynamic(&self) -> String {
        let mut out = String::new();
        for (&t, slice) in &self.dynamic {
            let mut cells: Vec<_> = slice.keys().copied().collect();
            cells.sort_unstable();
            for (x, y) in cells {
                let _ = writeln!(out, "{t} {x} {y}");
            }
        }
        out
    }
}
