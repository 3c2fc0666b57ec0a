use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use thiserror::Error;

use super::metrics::{Metrics, MetricsReport, RouteRecord};
use super::mission::{generate_missions, manhattan_path, Mission, MissionStatus};
use super::scenario::{ConfigError, RouterKind, Scenario};
use crate::comms::CommsModel;
use crate::energy::{
    energy_per_second, thrust_of_profile, SizeClass, ThrustParams, TurnKinematics, VelocityProfile,
};
use crate::reactive::{reactive_step, Obstacles, Point};
use crate::router::{route_bfs, route_srts, RouteError, RouteRequest};
use crate::tsmaze::{AirspaceEnv, GridGeometry, MazeError, TSCell};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Config(#[from] ConfigError),
    #[error("routing failed: {0}")]
    Route(#[from] RouteError),
    #[error("maze error: {0}")]
    Maze(#[from] MazeError),
}

/// Conflicting pairs (by index into `positions`) at one time step: Chebyshev
/// distance strictly below `separation_m`.
pub fn detect_conflicts(positions: &[(f64, f64)], separation_m: f64) -> Vec<(usize, usize)> {
    let bucket = |p: (f64, f64)| {
        (
            (p.0 / separation_m).floor() as i64,
            (p.1 / separation_m).floor() as i64,
        )
    };
    let mut grid: FxHashMap<(i64, i64), Vec<usize>> = FxHashMap::default();
    for (i, &p) in positions.iter().enumerate() {
        grid.entry(bucket(p)).or_default().push(i);
    }
    let mut pairs = Vec::new();
    for (i, &p) in positions.iter().enumerate() {
        let (bx, by) = bucket(p);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let Some(cell) = grid.get(&(bx + dx, by + dy)) else {
                    continue;
                };
                for &j in cell {
                    if j <= i {
                        continue;
                    }
                    let q = positions[j];
                    if (p.0 - q.0).abs().max((p.1 - q.1).abs()) < separation_m {
                        pairs.push((i, j));
                    }
                }
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// One replication of a scenario, advanced a step at a time.
pub struct World<'a> {
    scenario: &'a Scenario,
    replication: u32,
    geometry: GridGeometry,
    env: AirspaceEnv,
    comms: CommsModel,
    missions: Vec<Mission>,
    /// Indices of in-flight missions, in launch order.
    active: Vec<usize>,
    retry: Vec<usize>,
    t: u32,
    generation_every: u32,
    snapshot_steps: Vec<u32>,
    next_mission_id: u64,
    next_flight_id: u64,
    mission_rng: ChaCha8Rng,
    comms_rng: ChaCha8Rng,
    density: Vec<u32>,
    conflict_cells: BTreeSet<usize>,
    in_flight_series: Vec<u32>,
    channel_snapshots: Vec<(u32, Vec<u32>)>,
    live_entry_peak: usize,
    dense_cells_at_peak: usize,
    sparsity_violations: usize,
}

impl<'a> World<'a> {
    pub fn new(scenario: &'a Scenario, replication: u32) -> Result<Self, SimError> {
        scenario.validate()?;
        let geometry = scenario.geometry();
        let env = AirspaceEnv::with_static_map(geometry, scenario.static_map())?;
        let seed = scenario.seed.wrapping_add(replication as u64);
        let mut comms_rng = ChaCha8Rng::seed_from_u64(seed);
        comms_rng.set_stream(1);
        Ok(Self {
            scenario,
            replication,
            density: vec![0; geometry.cell_count()],
            comms: scenario.comms(),
            geometry,
            env,
            missions: Vec::new(),
            active: Vec::new(),
            retry: Vec::new(),
            t: 0,
            generation_every: scenario.generation_every_steps(),
            snapshot_steps: scenario.snapshot_steps(),
            next_mission_id: 0,
            next_flight_id: 0,
            mission_rng: ChaCha8Rng::seed_from_u64(seed),
            comms_rng,
            conflict_cells: BTreeSet::new(),
            in_flight_series: Vec::new(),
            channel_snapshots: Vec::new(),
            live_entry_peak: 0,
            dense_cells_at_peak: 0,
            sparsity_violations: 0,
        })
    }

    pub fn time(&self) -> u32 {
        self.t
    }

    pub fn env(&self) -> &AirspaceEnv {
        &self.env
    }

    pub fn missions(&self) -> &[Mission] {
        &self.missions
    }

    pub fn in_flight_series(&self) -> &[u32] {
        &self.in_flight_series
    }

    fn center(&self, xy: (u32, u32)) -> (f64, f64) {
        self.geometry.cell_center_m(xy.0, xy.1)
    }

    fn position(&self, m: &Mission, t: u32) -> (f64, f64) {
        match &m.trajectory {
            Some(traj) => self.center(traj.cell_at(t).expect("active within its trajectory").xy()),
            None => *m.track.last().expect("reactive track starts at launch"),
        }
    }

    /// Reservations that should be live: remaining cells of every managed
    /// flight from `t` on.
    fn expected_live_entries(&self, t: u32) -> usize {
        if !self.scenario.router.is_managed() {
            return 0;
        }
        self.active
            .iter()
            .filter_map(|&i| self.missions[i].trajectory.as_ref())
            .map(|traj| {
                (traj.arrival_time() + 1).saturating_sub(t.max(traj.departure_time())) as usize
            })
            .sum()
    }

    fn check_sparsity(&mut self, t: u32, landed_now: usize) {
        if self.env.live_entry_count() != self.expected_live_entries(t) + landed_now {
            self.sparsity_violations += 1;
        }
    }

    /// Advances the world by one time step.
    pub fn step(&mut self) -> Result<(), SimError> {
        let t = self.t;
        self.env.instant_refresh(t)?;
        self.check_sparsity(t, 0);

        // Move every craft launched before this step.
        if self.scenario.router == RouterKind::Reactive && t > 0 {
            let snapshot: Vec<Point> = self
                .active
                .iter()
                .map(|&i| {
                    let p = self.missions[i].track.last().unwrap();
                    Point::new(p.0, p.1)
                })
                .collect();
            let obstacles = Obstacles {
                geometry: &self.geometry,
                map: self.env.static_map(),
            };
            let step_s = self.geometry.step_seconds();
            let mut next = Vec::with_capacity(snapshot.len());
            for (k, &i) in self.active.iter().enumerate() {
                let m = &self.missions[i];
                let dest = self.center(m.destination);
                let neighbors: Vec<Point> = snapshot
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != k)
                    .map(|(_, &p)| p)
                    .collect();
                let p = reactive_step(
                    snapshot[k],
                    Point::new(dest.0, dest.1),
                    &neighbors,
                    Some(obstacles),
                    &self.scenario.reactive,
                    step_s,
                );
                next.push((p.x, p.y));
            }
            for (&i, p) in self.active.iter().zip(next) {
                self.missions[i].track.push(p);
            }
        }
        let positions: Vec<(f64, f64)> = self
            .active
            .iter()
            .map(|&i| self.position(&self.missions[i], t))
            .collect();

        // Ground-truth links.
        let airborne: Vec<_> = self
            .active
            .iter()
            .zip(&positions)
            .map(|(&i, &p)| (self.missions[i].flight_id.expect("launched"), p))
            .collect();
        let (ledger, links) = self
            .comms
            .ground_truth_assign(&airborne, &mut self.comms_rng);
        let by_flight: FxHashMap<u64, usize> = self
            .active
            .iter()
            .map(|&i| (self.missions[i].flight_id.unwrap(), i))
            .collect();
        for (flight, link) in links {
            self.missions[by_flight[&flight]].links.push(link);
        }
        if self.replication == 0 && self.snapshot_steps.binary_search(&t).is_ok() {
            self.channel_snapshots
                .push((t, self.comms.coverage_snapshot(&ledger)));
        }

        // Conflicts and density.
        let cells: Vec<Option<(u32, u32)>> = positions
            .iter()
            .map(|&(x, y)| self.geometry.cell_of_point(x, y))
            .collect();
        let mut in_conflict = vec![false; positions.len()];
        for (a, b) in detect_conflicts(&positions, self.scenario.separation_m) {
            in_conflict[a] = true;
            in_conflict[b] = true;
        }
        for (k, cell) in cells.iter().enumerate() {
            if let Some((x, y)) = *cell {
                if self.env.static_map().is_blocked(x, y) {
                    in_conflict[k] = true;
                }
            }
        }
        let mut counts: FxHashMap<usize, u32> = FxHashMap::default();
        for cell in cells.iter().flatten() {
            *counts
                .entry(self.geometry.index(cell.0, cell.1))
                .or_default() += 1;
        }
        for (idx, n) in counts {
            self.density[idx] = self.density[idx].max(n);
        }
        for (k, &i) in self.active.iter().enumerate() {
            if in_conflict[k] {
                self.missions[i].conflict_steps.push(t);
                if let Some((x, y)) = cells[k] {
                    self.conflict_cells.insert(self.geometry.index(x, y));
                }
            }
        }

        // Landings.
        let limit_policy = self.scenario.routing.deadline_policy;
        let mut still_active = Vec::with_capacity(self.active.len());
        // Craft landing now keep their final reservation until the next refresh.
        let mut landed_now = 0;
        for (k, &i) in self.active.iter().enumerate() {
            let m = &mut self.missions[i];
            let launch = m.launch_time.unwrap();
            let landed = match &m.trajectory {
                Some(traj) => traj.arrival_time() == t,
                None => {
                    positions[k]
                        == self
                            .geometry
                            .cell_center_m(m.destination.0, m.destination.1)
                }
            };
            if landed {
                m.status = MissionStatus::Completed;
                m.landing_time = Some(t);
                if self.scenario.router.is_managed() {
                    landed_now += 1;
                }
            } else if m.trajectory.is_none()
                && t >= limit_policy
                    .deadline(TSCell::new(m.source.0, m.source.1, launch), m.destination)
            {
                m.status = MissionStatus::Aborted;
            } else {
                still_active.push(i);
            }
        }
        self.active = still_active;

        // New requests and launches.
        if t % self.generation_every == 0 {
            let queued = std::mem::take(&mut self.retry);
            let fresh = generate_missions(
                self.scenario,
                t,
                &mut self.next_mission_id,
                &mut self.mission_rng,
            );
            let start = self.missions.len();
            self.missions.extend(fresh);
            let candidates: Vec<usize> = queued
                .into_iter()
                .chain(start..self.missions.len())
                .collect();
            for i in candidates {
                self.attempt_launch(i, t)?;
            }
        }
        self.check_sparsity(t, landed_now);
        let live = self.env.live_entry_count();
        if live > self.live_entry_peak {
            self.live_entry_peak = live;
            let layers = (self.env.horizon() + 1).saturating_sub(t) as usize;
            self.dense_cells_at_peak = self.geometry.cell_count() * layers;
        }
        self.in_flight_series.push(self.active.len() as u32);
        self.t += 1;
        Ok(())
    }

    /// Tries to put mission `i` in the air at step `t`.
    fn attempt_launch(&mut self, i: usize, t: u32) -> Result<(), SimError> {
        let flight_id = self.next_flight_id;
        let (source, destination) = (self.missions[i].source, self.missions[i].destination);
        let request = RouteRequest::new(
            flight_id,
            TSCell::new(source.0, source.1, t),
            destination,
            &self.scenario.routing.deadline_policy,
        );
        let routed = match self.scenario.router {
            RouterKind::None => Some(manhattan_path(source, destination, t)),
            RouterKind::Reactive => None,
            kind => {
                let outcome = match kind {
                    RouterKind::Bfs => route_bfs(&mut self.env, &request),
                    _ => {
                        let comms = self
                            .scenario
                            .routing
                            .connectivity_check
                            .then_some(&self.comms);
                        route_srts(&mut self.env, comms, &request, &self.scenario.routing)
                    }
                };
                match outcome {
                    Ok(out) => {
                        let m = &mut self.missions[i];
                        m.route_expanded += out.stats.expanded;
                        m.route_dense_cells += out.stats.dense_cells;
                        match out.trajectory {
                            Some(traj) => Some(traj),
                            None => {
                                self.reject(i);
                                return Ok(());
                            }
                        }
                    }
                    // Someone else is parked on the launch pad at this step.
                    Err(RouteError::SourceOccupied(_)) => {
                        self.reject(i);
                        return Ok(());
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        };
        let center = self.center(source);
        let m = &mut self.missions[i];
        if routed.is_none() {
            m.track.push(center);
        }
        m.trajectory = routed;
        m.flight_id = Some(flight_id);
        m.launch_time = Some(t);
        m.status = MissionStatus::InFlight;
        self.next_flight_id += 1;
        self.active.push(i);
        Ok(())
    }

    fn reject(&mut self, i: usize) {
        if self.scenario.traffic.retry_rejected {
            self.missions[i].status = MissionStatus::Pending;
            self.retry.push(i);
        } else {
            self.missions[i].status = MissionStatus::Rejected;
        }
    }

    /// Runs to the configured length.
    pub fn run_to_end(&mut self) -> Result<(), SimError> {
        while self.t < self.scenario.traffic.sim_length_steps {
            self.step()?;
        }
        Ok(())
    }

    pub fn metrics(&self) -> Metrics {
        let s = self.scenario;
        let burn_in = s.traffic.burn_in_steps;
        let counted: Vec<&Mission> = self
            .missions
            .iter()
            .filter(|m| m.request_time >= burn_in)
            .collect();
        let launched: Vec<&&Mission> = counted.iter().filter(|m| m.was_launched()).collect();
        let completed: Vec<&&Mission> = counted
            .iter()
            .filter(|m| m.status == MissionStatus::Completed)
            .collect();
        let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        let mean = |xs: &[f64]| {
            if xs.is_empty() {
                0.0
            } else {
                xs.iter().sum::<f64>() / xs.len() as f64
            }
        };
        let step_s = self.geometry.step_seconds();

        let flight_times: Vec<f64> = completed
            .iter()
            .map(|m| m.flight_steps().unwrap() as f64 * step_s)
            .collect();
        let turns: Vec<f64> = completed.iter().map(|m| m.turn_count() as f64).collect();

        let kinematics = TurnKinematics::for_geometry(&self.geometry);
        let classes: Vec<ThrustParams> = SizeClass::ALL
            .iter()
            .map(|&c| {
                let cal = ThrustParams::calibrated(c, &kinematics);
                ThrustParams {
                    alpha: s.energy.alpha,
                    beta: cal.beta * s.energy.alpha,
                    class: c,
                }
            })
            .collect();
        let mut energy: [Vec<f64>; 3] = Default::default();
        for m in completed.iter().filter(|m| m.flight_steps().unwrap() > 0) {
            let mut profile = match &m.trajectory {
                Some(traj) => VelocityProfile::for_trajectory(traj, &self.geometry),
                None => VelocityProfile::from_positions(step_s, &m.track),
            };
            profile.include_transients = s.energy.include_transients;
            for (k, p) in classes.iter().enumerate() {
                let e = match &m.trajectory {
                    Some(traj) => {
                        energy_per_second(traj, &profile, p).expect("profile built from trajectory")
                    }
                    None => thrust_of_profile(&profile, p) / profile.duration_s(),
                };
                energy[k].push(e);
            }
        }

        let routed: Vec<&&Mission> = if s.router.is_managed() {
            counted
                .iter()
                .filter(|m| matches!(m.status, MissionStatus::Rejected) || m.was_launched())
                .collect()
        } else {
            Vec::new()
        };
        let series: Vec<f64> = self
            .in_flight_series
            .iter()
            .enumerate()
            .filter(|&(t, _)| t as u32 >= burn_in)
            .map(|(_, &n)| n as f64)
            .collect();

        Metrics {
            requests: counted.len() as f64,
            throughput: launched.len() as f64,
            rejected: counted
                .iter()
                .filter(|m| m.status == MissionStatus::Rejected)
                .count() as f64,
            completed: completed.len() as f64,
            avg_flight_time_s: mean(&flight_times),
            conflict_ratio: ratio(
                launched
                    .iter()
                    .filter(|m| !m.conflict_steps.is_empty())
                    .count(),
                launched.len(),
            ),
            no_link_rate: ratio(
                launched.iter().filter(|m| m.no_link_steps() > 0).count(),
                launched.len(),
            ),
            avg_in_flight: mean(&series),
            avg_turns: mean(&turns),
            energy_small: mean(&energy[0]),
            energy_medium: mean(&energy[1]),
            energy_large: mean(&energy[2]),
            mean_route_expanded: mean(
                &routed
                    .iter()
                    .map(|m| m.route_expanded as f64)
                    .collect::<Vec<_>>(),
            ),
            mean_route_dense_cells: mean(
                &routed
                    .iter()
                    .map(|m| m.route_dense_cells as f64)
                    .collect::<Vec<_>>(),
            ),
            live_entry_peak: self.live_entry_peak as f64,
            dense_cells_at_peak: self.dense_cells_at_peak as f64,
            sparsity_violations: self.sparsity_violations as f64,
        }
    }

    pub fn route_records(&self) -> Vec<RouteRecord> {
        let step_s = self.geometry.step_seconds();
        self.missions
            .iter()
            .map(|m| RouteRecord::from_mission(self.replication, m, step_s))
            .collect()
    }
}

/// Runs every replication of `scenario` (seeds `seed`, `seed + 1`, ...).
pub fn run(scenario: &Scenario) -> Result<MetricsReport, SimError> {
    scenario.validate()?;
    let geometry = scenario.geometry();
    let mut replications = Vec::new();
    let mut density = vec![0u32; geometry.cell_count()];
    let mut conflict_cells = BTreeSet::new();
    let mut channel_snapshots = Vec::new();
    let mut routes = Vec::new();
    for rep in 0..scenario.replications {
        let mut world = World::new(scenario, rep)?;
        world.run_to_end()?;
        replications.push(world.metrics());
        for (d, &w) in density.iter_mut().zip(&world.density) {
            *d = (*d).max(w);
        }
        conflict_cells.extend(world.conflict_cells.iter().copied());
        if rep == 0 {
            channel_snapshots = std::mem::take(&mut world.channel_snapshots);
        }
        routes.extend(world.route_records());
    }
    Ok(MetricsReport {
        aggregate: Metrics::mean(&replications),
        replications,
        density,
        channel_snapshots,
        routes,
        conflict_cells: conflict_cells.into_iter().collect(),
    })
}
