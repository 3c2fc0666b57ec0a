use super::MazeError;

/// Tolerance used when checking `δ = W / v`.
const STEP_TOLERANCE: f64 = 1e-9;

/// Dimensions of the maze and the physical size of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    width_cells: u32,
    height_cells: u32,
    cell_size_m: f64,
    step_seconds: f64,
    cruise_speed_mps: f64,
}

impl GridGeometry {
    /// Builds a geometry whose time step is the time needed to cross one cell
    /// at cruise speed.
    pub fn new(
        width_cells: u32,
        height_cells: u32,
        cell_size_m: f64,
        cruise_speed_mps: f64,
    ) -> Result<Self, MazeError> {
        if !(cruise_speed_mps > 0.0 && cruise_speed_mps.is_finite()) {
            return Err(MazeError::InvalidGeometry(format!(
                "cruise speed must be positive, got {cruise_speed_mps}"
            )));
        }
        Self::with_step(
            width_cells,
            height_cells,
            cell_size_m,
            cell_size_m / cruise_speed_mps,
            cruise_speed_mps,
        )
    }

    /// Builds a geometry from all three physical quantities, checking that
    /// they agree.
    pub fn with_step(
        width_cells: u32,
        height_cells: u32,
        cell_size_m: f64,
        step_seconds: f64,
        cruise_speed_mps: f64,
    ) -> Result<Self, MazeError> {
        if width_cells == 0 || height_cells == 0 {
            return Err(MazeError::InvalidGeometry(format!(
                "grid must be at least 1x1, got {width_cells}x{height_cells}"
            )));
        }
        if !(cell_size_m > 0.0 && cell_size_m.is_finite()) {
            return Err(MazeError::InvalidGeometry(format!(
                "cell size must be positive, got {cell_size_m}"
            )));
        }
        if !(step_seconds > 0.0 && step_seconds.is_finite()) {
            return Err(MazeError::InvalidGeometry(format!(
                "time step must be positive, got {step_seconds}"
            )));
        }
        if !(cruise_speed_mps > 0.0) {
            return Err(MazeError::InvalidGeometry(format!(
                "cruise speed must be positive, got {cruise_speed_mps}"
            )));
        }
        let expected = cell_size_m / cruise_speed_mps;
        if (expected - step_seconds).abs() > STEP_TOLERANCE * expected.max(1.0) {
            return Err(MazeError::InvalidGeometry(format!(
                "time step {step_seconds} s does not match cell size / cruise speed = {expected} s"
            )));
        }
        Ok(Self {
            width_cells,
            height_cells,
            cell_size_m,
            step_seconds,
            cruise_speed_mps,
        })
    }

    /// Number of cells along one side of a square area of `side_m` meters.
    pub fn cells_for_side(side_m: f64, cell_size_m: f64) -> u32 {
        (side_m / cell_size_m).floor() as u32
    }

    pub fn width(&self) -> u32 {
        self.width_cells
    }

    pub fn height(&self) -> u32 {
        self.height_cells
    }

    pub fn cell_size_m(&self) -> f64 {
        self.cell_size_m
    }

    pub fn step_seconds(&self) -> f64 {
        self.step_seconds
    }

    pub fn cruise_speed_mps(&self) -> f64 {
        self.cruise_speed_mps
    }

    pub fn cell_count(&self) -> usize {
        self.width_cells as usize * self.height_cells as usize
    }

    #[inline]
    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && x < self.width_cells as i64 && y < self.height_cells as i64
    }

    pub fn check(&self, x: i64, y: i64) -> Result<(), MazeError> {
        if self.contains(x, y) {
            Ok(())
        } else {
            Err(MazeError::OutOfBounds {
                x,
                y,
                width: self.width_cells,
                height: self.height_cells,
            })
        }
    }

    /// Row-major index of an in-bounds cell.
    #[inline]
    pub fn index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width_cells as usize + x as usize
    }

    /// Position of the cell center in meters.
    pub fn cell_center_m(&self, x: u32, y: u32) -> (f64, f64) {
        (
            (x as f64 + 0.5) * self.cell_size_m,
            (y as f64 + 0.5) * self.cell_size_m,
        )
    }

    /// The cell whose `W x W` square contains the point, if any.
    pub fn cell_of_point(&self, px: f64, py: f64) -> Option<(u32, u32)> {
        let x = (px / self.cell_size_m).floor();
        let y = (py / self.cell_size_m).floor();
        if x.is_finite() && y.is_finite() && self.contains(x as i64, y as i64) {
            Some((x as u32, y as u32))
        } else {
            None
        }
    }

    pub fn width_m(&self) -> f64 {
        self.width_cells as f64 * self.cell_size_m
    }

    pub fn height_m(&self) -> f64 {
        self.height_cells as f64 * self.cell_size_m
    }
}

/// A point of the maze.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TSCell {
    pub x: u32,
    pub y: u32,
    pub t: u32,
}

impl TSCell {
    pub const fn new(x: u32, y: u32, t: u32) -> Self {
        Self { x, y, t }
    }

    pub fn xy(&self) -> (u32, u32) {
        (self.x, self.y)
    }

    /// The cell reached after one step in `dir`, without bounds checking
    /// beyond the lower edge.
    pub fn step(&self, dir: Direction) -> Option<TSCell> {
        let (dx, dy) = dir.delta();
        let x = self.x as i64 + dx;
        let y = self.y as i64 + dy;
        if x < 0 || y < 0 {
            return None;
        }
        Some(TSCell::new(x as u32, y as u32, self.t + 1))
    }

    pub fn manhattan(&self, xy: (u32, u32)) -> u32 {
        self.x.abs_diff(xy.0) + self.y.abs_diff(xy.1)
    }
}

impl std::fmt::Display for TSCell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.t)
    }
}

/// One move of a trajectory. `y` grows southward, the same way rows are
/// printed in the text map format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    East,
    West,
    North,
    South,
    Wait,
}

impl Direction {
    /// Expansion and tie-breaking priority used by both routers.
    pub const PRIORITY: [Direction; 5] = [
        Direction::East,
        Direction::West,
        Direction::North,
        Direction::South,
        Direction::Wait,
    ];

    pub const MOVES: [Direction; 4] = [
        Direction::East,
        Direction::West,
        Direction::North,
        Direction::South,
    ];

    pub fn delta(self) -> (i64, i64) {
        match self {
            Direction::East => (1, 0),
            Direction::West => (-1, 0),
            Direction::North => (0, -1),
            Direction::South => (0, 1),
            Direction::Wait => (0, 0),
        }
    }

    /// Position in [`Direction::PRIORITY`].
    pub fn rank(self) -> u8 {
        match self {
            Direction::East => 0,
            Direction::West => 1,
            Direction::North => 2,
            Direction::South => 3,
            Direction::Wait => 4,
        }
    }

    pub fn is_wait(self) -> bool {
        self == Direction::Wait
    }

    /// Direction of the single step between two cells at consecutive times.
    pub fn between(from: (u32, u32), to: (u32, u32)) -> Option<Direction> {
        let dx = to.0 as i64 - from.0 as i64;
        let dy = to.1 as i64 - from.1 as i64;
        match (dx, dy) {
            (1, 0) => Some(Direction::East),
            (-1, 0) => Some(Direction::West),
            (0, -1) => Some(Direction::North),
            (0, 1) => Some(Direction::South),
            (0, 0) => Some(Direction::Wait),
            _ => None,
        }
    }

    /// Unit vector of the move in map coordinates.
    pub fn unit(self) -> (f64, f64) {
        let (dx, dy) = self.delta();
        (dx as f64, dy as f64)
    }
}

/// Whether moving in `next` after flying with `heading` changes heading.
/// Waits never turn and leave the heading untouched.
#[inline]
pub(crate) fn is_turn(heading: Option<Direction>, next: Direction) -> bool {
    match heading {
        Some(h) => !next.is_wait() && h != next,
        None => false,
    }
}

/// Heading after applying `next`.
#[inline]
pub(crate) fn next_heading(heading: Option<Direction>, next: Direction) -> Option<Direction> {
    if next.is_wait() {
        heading
    } else {
        Some(next)
    }
}
