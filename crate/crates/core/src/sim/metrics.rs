use super::mission::{Mission, MissionStatus};

/// Per-replication (or averaged) results. Counts are stored as `f64` so the
/// aggregate row can hold their means.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Metrics {
    pub requests: f64,
    /// Launched missions.
    pub throughput: f64,
    pub rejected: f64,
    pub completed: f64,
    /// Mean flight time of completed missions.
    pub avg_flight_time_s: f64,
    /// Launched missions with at least one conflict step, over launched.
    pub conflict_ratio: f64,
    /// Launched missions with at least one no-link step, over launched.
    pub no_link_rate: f64,
    pub avg_in_flight: f64,
    /// Mean heading changes of completed missions.
    pub avg_turns: f64,
    pub energy_small: f64,
    pub energy_medium: f64,
    pub energy_large: f64,
    /// Mean router effort per routed request.
    pub mean_route_expanded: f64,
    pub mean_route_dense_cells: f64,
    pub live_entry_peak: f64,
    /// `X * Y * T'` at the step of the live-entry peak, `T'` being the
    /// number of steps up to the last reservation.
    pub dense_cells_at_peak: f64,
    /// Steps at which the reservation count differed from the summed
    /// remaining trajectory lengths (always 0 unless something is broken).
    pub sparsity_violations: f64,
}

impl Metrics {
    pub const COLUMNS: [&'static str; 17] = [
        "requests",
        "throughput",
        "rejected",
        "completed",
        "avg_flight_time_s",
        "conflict_ratio",
        "no_link_rate",
        "avg_in_flight",
        "avg_turns",
        "energy_small",
        "energy_medium",
        "energy_large",
        "mean_route_expanded",
        "mean_route_dense_cells",
        "live_entry_peak",
        "dense_cells_at_peak",
        "sparsity_violations",
    ];

    pub fn values(&self) -> [f64; 17] {
        [
            self.requests,
            self.throughput,
            self.rejected,
            self.completed,
            self.avg_flight_time_s,
            self.conflict_ratio,
            self.no_link_rate,
            self.avg_in_flight,
            self.avg_turns,
            self.energy_small,
            self.energy_medium,
            self.energy_large,
            self.mean_route_expanded,
            self.mean_route_dense_cells,
            self.live_entry_peak,
            self.dense_cells_at_peak,
            self.sparsity_violations,
        ]
    }

    fn from_values(v: [f64; 17]) -> Self {
        Self {
            requests: v[0],
            throughput: v[1],
            rejected: v[2],
            completed: v[3],
            avg_flight_time_s: v[4],
            conflict_ratio: v[5],
            no_link_rate: v[6],
            avg_in_flight: v[7],
            avg_turns: v[8],
            energy_small: v[9],
            energy_medium: v[10],
            energy_large: v[11],
            mean_route_expanded: v[12],
            mean_route_dense_cells: v[13],
            live_entry_peak: v[14],
            dense_cells_at_peak: v[15],
            sparsity_violations: v[16],
        }
    }

    /// Field-wise arithmetic mean.
    pub fn mean(reports: &[Metrics]) -> Metrics {
        if reports.is_empty() {
            return Metrics::default();
        }
        let mut sum = [0.0; 17];
        for r in reports {
            for (s, v) in sum.iter_mut().zip(r.values()) {
                *s += v;
            }
        }
        Metrics::from_values(sum.map(|s| s / reports.len() as f64))
    }
}

/// Per-mission record for `routes.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteRecord {
    pub replication: u32,
    pub mission: u64,
    pub request_time: u32,
    pub launch_time: Option<u32>,
    pub status: MissionStatus,
    pub flight_time_s: Option<f64>,
    pub distance_cells: Option<usize>,
    pub turns: usize,
    pub expanded: usize,
    pub dense_cells: usize,
    pub no_link_steps: usize,
    pub conflict_steps: usize,
}

impl RouteRecord {
    pub fn from_mission(replication: u32, m: &Mission, step_seconds: f64) -> Self {
        Self {
            replication,
            mission: m.id,
            request_time: m.request_time,
            launch_time: m.launch_time,
            status: m.status,
            flight_time_s: m.flight_steps().map(|s| s as f64 * step_seconds),
            distance_cells: m.trajectory.as_ref().map(|t| t.distance_cells()),
            turns: m.turn_count(),
            expanded: m.route_expanded,
            dense_cells: m.route_dense_cells,
            no_link_steps: m.no_link_steps(),
            conflict_steps: m.conflict_steps.len(),
        }
    }
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub replications: Vec<Metrics>,
    pub aggregate: Metrics,
    /// Row-major maximum number of craft seen in each cell at one step,
    /// maximised over replications.
    pub density: Vec<u32>,
    /// Free channels of the best station per cell, from the first
    /// replication, keyed by step.
    pub channel_snapshots: Vec<(u32, Vec<u32>)>,
    pub routes: Vec<RouteRecord>,
    /// Cells (row-major index) where a conflict was logged at some step.
    pub conflict_cells: Vec<usize>,
}
