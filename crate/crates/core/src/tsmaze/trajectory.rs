use super::geometry::{is_turn, next_heading, Direction, TSCell};
use super::MazeError;

/// A time-monotone path through the maze: one cell per time step, each step
/// either a wait or a single Manhattan move.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Trajectory {
    cells: Vec<TSCell>,
    destination: (u32, u32),
}

impl Trajectory {
    pub fn new(cells: Vec<TSCell>, destination: (u32, u32)) -> Result<Self, MazeError> {
        let Some(last) = cells.last() else {
            return Err(MazeError::InvalidTrajectory("empty trajectory".into()));
        };
        if last.xy() != destination {
            return Err(MazeError::InvalidTrajectory(format!(
                "ends at ({}, {}) instead of destination ({}, {})",
                last.x, last.y, destination.0, destination.1
            )));
        }
        for pair in cells.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if b.t != a.t + 1 {
                return Err(MazeError::InvalidTrajectory(format!(
                    "time jumps from {} to {} between {a} and {b}",
                    a.t, b.t
                )));
            }
            if Direction::between(a.xy(), b.xy()).is_none() {
                return Err(MazeError::InvalidTrajectory(format!(
                    "{a} -> {b} is not a Manhattan move or a wait"
                )));
            }
        }
        Ok(Self { cells, destination })
    }

    pub fn cells(&self) -> &[TSCell] {
        &self.cells
    }

    pub fn source(&self) -> TSCell {
        self.cells[0]
    }

    pub fn destination(&self) -> (u32, u32) {
        self.destination
    }

    pub fn departure_time(&self) -> u32 {
        self.cells[0].t
    }

    pub fn arrival_time(&self) -> u32 {
        self.cells[self.cells.len() - 1].t
    }

    /// Number of time steps spent in the air (moves plus waits).
    pub fn steps(&self) -> usize {
        self.cells.len() - 1
    }

    /// Number of cells, including the source.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// The cell occupied at time `t`, if the trajectory covers it.
    pub fn cell_at(&self, t: u32) -> Option<TSCell> {
        let start = self.departure_time();
        if t < start {
            return None;
        }
        self.cells.get((t - start) as usize).copied()
    }

    pub fn directions(&self) -> impl Iterator<Item = Direction> + '_ {
        self.cells
            .windows(2)
            .map(|w| Direction::between(w[0].xy(), w[1].xy()).expect("validated on construction"))
    }

    /// Number of Manhattan moves, i.e. cells actually travelled.
    pub fn distance_cells(&self) -> usize {
        self.directions().filter(|d| !d.is_wait()).count()
    }

    pub fn wait_count(&self) -> usize {
        self.directions().filter(|d| d.is_wait()).count()
    }

    /// Heading changes between consecutive non-wait moves.
    pub fn turn_count(&self) -> usize {
        let mut heading = None;
        let mut turns = 0;
        for dir in self.directions() {
            if is_turn(heading, dir) {
                turns += 1;
            }
            heading = next_heading(heading, dir);
        }
        turns
    }
}
