use rand::Rng;

use super::scenario::{Rect, Scenario};
use crate::comms::LinkResult;
use crate::tsmaze::{Direction, OwnerId, TSCell, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MissionStatus {
    Pending,
    InFlight,
    Completed,
    Rejected,
    /// A reactive flight that ran past its time limit without arriving.
    Aborted,
}

impl MissionStatus {
    pub fn label(self) -> &'static str {
        match self {
            MissionStatus::Pending => "pending",
            MissionStatus::InFlight => "in_flight",
            MissionStatus::Completed => "completed",
            MissionStatus::Rejected => "rejected",
            MissionStatus::Aborted => "aborted",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mission {
    pub id: u64,
    pub source_area: usize,
    pub dest_area: usize,
    pub source: (u32, u32),
    pub destination: (u32, u32),
    pub request_time: u32,
    pub launch_time: Option<u32>,
    pub landing_time: Option<u32>,
    /// Owner id used for reservations and channel priority; assigned in
    /// launch order.
    pub flight_id: Option<OwnerId>,
    /// Planned (or, when unmanaged, flown) grid path. `None` for reactive
    /// flights.
    pub trajectory: Option<Trajectory>,
    /// Reactive flights: position at every step since launch.
    pub track: Vec<(f64, f64)>,
    /// Ground-truth link outcome for every airborne step.
    pub links: Vec<LinkResult>,
    pub conflict_steps: Vec<u32>,
    pub status: MissionStatus,
    pub route_expanded: usize,
    pub route_dense_cells: usize,
}

impl Mission {
    pub fn new(
        id: u64,
        source_area: usize,
        dest_area: usize,
        source: (u32, u32),
        destination: (u32, u32),
        t: u32,
    ) -> Self {
        Self {
            id,
            source_area,
            dest_area,
            source,
            destination,
            request_time: t,
            launch_time: None,
            landing_time: None,
            flight_id: None,
            trajectory: None,
            track: Vec::new(),
            links: Vec::new(),
            conflict_steps: Vec::new(),
            status: MissionStatus::Pending,
            route_expanded: 0,
            route_dense_cells: 0,
        }
    }

    pub fn was_launched(&self) -> bool {
        self.launch_time.is_some()
    }

    pub fn flight_steps(&self) -> Option<u32> {
        Some(self.landing_time? - self.launch_time?)
    }

    pub fn no_link_steps(&self) -> usize {
        self.links.iter().filter(|l| !l.is_linked()).count()
    }

    /// Heading changes of the flown path. Reactive tracks count a turn when
    /// the direction of travel swings by more than 45° between steps.
    pub fn turn_count(&self) -> usize {
        if let Some(traj) = &self.trajectory {
            return traj.turn_count();
        }
        let mut turns = 0;
        let mut heading: Option<(f64, f64)> = None;
        for w in self.track.windows(2) {
            let d = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            let n = d.0.hypot(d.1);
            if n == 0.0 {
                continue;
            }
            let d = (d.0 / n, d.1 / n);
            if let Some(h) = heading {
                if h.0 * d.0 + h.1 * d.1 < std::f64::consts::FRAC_1_SQRT_2 {
                    turns += 1;
                }
            }
            heading = Some(d);
        }
        turns
    }
}

fn pick_cell<R: Rng + ?Sized>(rect: &Rect, rng: &mut R) -> (u32, u32) {
    (
        rng.random_range(rect.x..rect.x + rect.w),
        rng.random_range(rect.y..rect.y + rect.h),
    )
}

/// Launch requests for generation step `t`: one Bernoulli draw per launch
/// area, a uniformly chosen landing area, and uniform cells within both.
/// Ids continue from `next_id`.
pub fn generate_missions<R: Rng + ?Sized>(
    scenario: &Scenario,
    t: u32,
    next_id: &mut u64,
    rng: &mut R,
) -> Vec<Mission> {
    let mut out = Vec::new();
    for (i, area) in scenario.launch_areas.iter().enumerate() {
        if !rng.random_bool(area.probability) {
            continue;
        }
        let dest_area = rng.random_range(0..scenario.landing_areas.len());
        let source = pick_cell(&area.area, rng);
        let destination = pick_cell(&scenario.landing_areas[dest_area], rng);
        out.push(Mission::new(*next_id, i, dest_area, source, destination, t));
        *next_id += 1;
    }
    out
}

/// Unmanaged flight path: all east/west moves first, then north/south,
/// ignoring no-fly zones and other traffic.
pub fn manhattan_path(source: (u32, u32), destination: (u32, u32), t0: u32) -> Trajectory {
    let mut cells = vec![TSCell::new(source.0, source.1, t0)];
    let (mut x, mut y, mut t) = (source.0, source.1, t0);
    let horizontal = if destination.0 >= x {
        Direction::East
    } else {
        Direction::West
    };
    while x != destination.0 {
        x = (x as i64 + horizontal.delta().0) as u32;
        t += 1;
        cells.push(TSCell::new(x, y, t));
    }
    let vertical = if destination.1 >= y {
        Direction::South
    } else {
        Direction::North
    };
    while y != destination.1 {
        y = (y as i64 + vertical.delta().1) as u32;
        t += 1;
        cells.push(TSCell::new(x, y, t));
    }
    Trajectory::new(cells, destination).expect("unit moves by construction")
}
