//! A* over the 2-D map with per-step sparse reservation lookups.
//!
//! Search states are `(x, y, t)` when no turn penalty is applied. With a
//! positive penalty the arrival heading becomes part of the state, since two
//! partial paths meeting in the same cell can differ in their future turns.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use super::{
    statically_connected, validate_request, DeadlinePolicy, RouteError, RouteOutcome, RouteRequest,
    RouteStats,
};
use crate::comms::CommsModel;
use crate::tsmaze::{
    is_turn, next_heading, AirspaceEnv, Direction, GridGeometry, TSCell, Trajectory,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoutingConfig {
    /// Cost added per heading change. `None` picks `1 / (2 (X + Y))`, small
    /// enough that turns only break ties between equally short paths.
    pub turn_penalty_weight: Option<f64>,
    pub connectivity_check: bool,
    pub deadline_policy: DeadlinePolicy,
    pub allow_wait: bool,
}

impl Default for RoutingConfig {
    fn default() -> Self {
        Self {
            turn_penalty_weight: None,
            connectivity_check: false,
            deadline_policy: DeadlinePolicy::default(),
            allow_wait: true,
        }
    }
}

impl RoutingConfig {
    pub fn without_turn_penalty() -> Self {
        Self {
            turn_penalty_weight: Some(0.0),
            ..Self::default()
        }
    }

    pub fn lambda(&self, geometry: &GridGeometry) -> f64 {
        self.turn_penalty_weight
            .unwrap_or_else(|| default_turn_penalty(geometry))
    }

    pub fn validate(&self) -> Result<(), String> {
        match self.turn_penalty_weight {
            Some(l) if !(l.is_finite() && l >= 0.0) => Err(format!(
                "turn_penalty_weight must be finite and >= 0, got {l}"
            )),
            _ => Ok(()),
        }
    }
}

pub fn default_turn_penalty(geometry: &GridGeometry) -> f64 {
    1.0 / (2.0 * (geometry.width() as f64 + geometry.height() as f64))
}

/// One entry of the search tree.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchNode {
    pub cell: TSCell,
    /// Steps since departure, waits included.
    pub movement_cost: u32,
    /// Manhattan distance to the destination in cells.
    pub destination_cost: u32,
    pub turns: u32,
    pub turn_cost: f64,
    /// Last non-wait move, `None` at the source.
    pub heading: Option<Direction>,
    /// The move that produced this node, `None` at the source.
    pub incoming: Option<Direction>,
    pub parent: Option<usize>,
}

impl SearchNode {
    pub fn overall_cost(&self) -> f64 {
        (self.movement_cost + self.destination_cost) as f64 + self.turn_cost
    }
}

/// Identity of a search state for the open and closed lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StateKey {
    pub cell: TSCell,
    pub heading: Option<Direction>,
}

/// Closed list. When `by_heading` is false, the heading is dropped from keys.
#[derive(Debug, Clone, Default)]
pub struct ClosedSet {
    by_heading: bool,
    set: FxHashSet<StateKey>,
}

impl ClosedSet {
    pub fn new(by_heading: bool) -> Self {
        Self {
            by_heading,
            set: FxHashSet::default(),
        }
    }

    pub fn key(&self, cell: TSCell, heading: Option<Direction>) -> StateKey {
        StateKey {
            cell,
            heading: if self.by_heading { heading } else { None },
        }
    }

    pub fn contains(&self, cell: TSCell, heading: Option<Direction>) -> bool {
        self.set.contains(&self.key(cell, heading))
    }

    pub fn insert(&mut self, cell: TSCell, heading: Option<Direction>) -> bool {
        let key = self.key(cell, heading);
        self.set.insert(key)
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }
}

/// Inner-belief link availability, cached per time step for one route call.
#[derive(Debug)]
pub struct SignalBelief<'a> {
    comms: &'a CommsModel,
    free: FxHashMap<u32, Vec<u32>>,
}

impl<'a> SignalBelief<'a> {
    pub fn new(comms: &'a CommsModel) -> Self {
        Self {
            comms,
            free: FxHashMap::default(),
        }
    }

    pub fn check(&mut self, env: &AirspaceEnv, cell: TSCell) -> bool {
        let comms = self.comms;
        let free = self
            .free
            .entry(cell.t)
            .or_insert_with(|| comms.belief_free_channels(&env.occupants_at(cell.t)));
        comms.signal_check_with(cell.xy(), free)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate {
    pub cell: TSCell,
    pub direction: Direction,
}

/// Neighbours of `node` at `t + 1` that are in bounds, outside no-fly zones,
/// not reserved, linkable when `signal` is given, and not closed.
pub fn candidate_selection(
    env: &AirspaceEnv,
    mut signal: Option<&mut SignalBelief<'_>>,
    node: &SearchNode,
    closed: &ClosedSet,
    cfg: &RoutingConfig,
) -> Vec<Candidate> {
    let g = env.geometry();
    let mut out = Vec::with_capacity(5);
    for dir in Direction::PRIORITY {
        if dir.is_wait() && !cfg.allow_wait {
            continue;
        }
        let Some(next) = node.cell.step(dir) else {
            continue;
        };
        if !g.contains(next.x as i64, next.y as i64)
            || env.static_map().is_blocked(next.x, next.y)
            || env.is_reserved(next)
        {
            continue;
        }
        if let Some(s) = signal.as_deref_mut() {
            if !s.check(env, next) {
                continue;
            }
        }
        if closed.contains(next, next_heading(node.heading, dir)) {
            continue;
        }
        out.push(Candidate {
            cell: next,
            direction: dir,
        });
    }
    out
}

#[derive(Debug, Clone, Copy)]
struct OpenEntry {
    cost: f64,
    rank: u8,
    seq: u64,
    node: usize,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenEntry {}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenEntry {
    // Reversed: BinaryHeap is a max-heap and the smallest entry must pop first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then(other.rank.cmp(&self.rank))
            .then(other.seq.cmp(&self.seq))
    }
}

/// Sparse temporal-spatial A*. `comms` must be given when
/// `cfg.connectivity_check` is set.
pub fn route_srts(
    env: &mut AirspaceEnv,
    comms: Option<&CommsModel>,
    req: &RouteRequest,
    cfg: &RoutingConfig,
) -> Result<RouteOutcome, RouteError> {
    validate_request(env, req)?;
    let coverage = if cfg.connectivity_check {
        Some(comms.ok_or(RouteError::MissingComms)?)
    } else {
        None
    };
    let stats = RouteStats::default();
    if !statically_connected(env, req.source.xy(), req.destination, coverage) {
        return Ok(RouteOutcome::unroutable(stats));
    }
    let mut signal = coverage.map(SignalBelief::new);
    if let Some(s) = signal.as_mut() {
        if !s.check(env, req.source) {
            return Ok(RouteOutcome::unroutable(stats));
        }
    }

    let lambda = cfg.lambda(env.geometry());
    let mut closed = ClosedSet::new(lambda > 0.0);
    let mut best: FxHashMap<StateKey, (f64, usize)> = FxHashMap::default();
    let mut nodes = vec![SearchNode {
        cell: req.source,
        movement_cost: 0,
        destination_cost: req.source.manhattan(req.destination),
        turns: 0,
        turn_cost: 0.0,
        heading: None,
        incoming: None,
        parent: None,
    }];
    let mut open = BinaryHeap::new();
    let mut seq = 0u64;
    open.push(OpenEntry {
        cost: nodes[0].overall_cost(),
        rank: 0,
        seq,
        node: 0,
    });
    best.insert(closed.key(req.source, None), (nodes[0].overall_cost(), 0));

    let mut expanded = 0usize;
    let mut goal = None;
    while let Some(entry) = open.pop() {
        let node = nodes[entry.node].clone();
        if !closed.insert(node.cell, node.heading) {
            continue;
        }
        expanded += 1;
        if node.cell.xy() == req.destination {
            goal = Some(entry.node);
            break;
        }
        if node.cell.t >= req.deadline {
            continue;
        }
        for cand in candidate_selection(env, signal.as_mut(), &node, &closed, cfg) {
            let turned = is_turn(node.heading, cand.direction);
            let turns = node.turns + turned as u32;
            let child = SearchNode {
                cell: cand.cell,
                movement_cost: node.movement_cost + 1,
                destination_cost: cand.cell.manhattan(req.destination),
                turns,
                turn_cost: lambda * turns as f64,
                heading: next_heading(node.heading, cand.direction),
                incoming: Some(cand.direction),
                parent: Some(entry.node),
            };
            let cost = child.overall_cost();
            let key = closed.key(child.cell, child.heading);
            if best.get(&key).is_some_and(|&(c, _)| c <= cost) {
                continue;
            }
            let idx = nodes.len();
            nodes.push(child);
            best.insert(key, (cost, idx));
            seq += 1;
            open.push(OpenEntry {
                cost,
                rank: cand.direction.rank(),
                seq,
                node: idx,
            });
        }
    }

    let stats = RouteStats {
        expanded,
        dense_cells: 0,
    };
    let Some(goal) = goal else {
        return Ok(RouteOutcome::unroutable(stats));
    };
    let mut cells = Vec::with_capacity(nodes[goal].movement_cost as usize + 1);
    let mut cursor = Some(goal);
    while let Some(i) = cursor {
        cells.push(nodes[i].cell);
        cursor = nodes[i].parent;
    }
    cells.reverse();
    let trajectory = Trajectory::new(cells, req.destination)?;
    env.reserve_trajectory(&trajectory, req.owner)?;
    Ok(RouteOutcome {
        trajectory: Some(trajectory),
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comms::{BaseStation, PathLossParams};

    fn env(w: u32, h: u32) -> AirspaceEnv {
        AirspaceEnv::new(GridGeometry::new(w, h, 18.0, 18.0).unwrap())
    }

    fn root(cell: TSCell) -> SearchNode {
        SearchNode {
            cell,
            movement_cost: 0,
            destination_cost: 0,
            turns: 0,
            turn_cost: 0.0,
            heading: None,
            incoming: None,
            parent: None,
        }
    }

    fn request(source: TSCell, dest: (u32, u32)) -> RouteRequest {
        RouteRequest::new(1, source, dest, &DeadlinePolicy::default())
    }

    fn dirs(c: &[Candidate]) -> Vec<Direction> {
        c.iter().map(|c| c.direction).collect()
    }

    #[test]
    fn candidates_interior_and_corner() {
        let e = env(5, 5);
        let closed = ClosedSet::new(false);
        let cfg = RoutingConfig::default();
        let c = candidate_selection(&e, None, &root(TSCell::new(2, 2, 0)), &closed, &cfg);
        assert_eq!(c.len(), 5);
        let no_wait = RoutingConfig {
            allow_wait: false,
            ..RoutingConfig::default()
        };
        let c = candidate_selection(&e, None, &root(TSCell::new(0, 0, 0)), &closed, &no_wait);
        // y grows southward, so the in-bounds moves from the origin are E and S.
        assert_eq!(dirs(&c), vec![Direction::East, Direction::South]);
    }

    #[test]
    fn candidates_skip_static_dynamic_and_closed() {
        let mut e = env(5, 5);
        e.set_blocked(3, 2, true).unwrap();
        let other =
            Trajectory::new(vec![TSCell::new(2, 0, 0), TSCell::new(2, 1, 1)], (2, 1)).unwrap();
        e.reserve_trajectory(&other, 7).unwrap();
        let cfg = RoutingConfig {
            allow_wait: false,
            ..RoutingConfig::default()
        };
        let mut closed = ClosedSet::new(false);
        let node = root(TSCell::new(2, 2, 0));
        let c = candidate_selection(&e, None, &node, &closed, &cfg);
        assert_eq!(dirs(&c), vec![Direction::West, Direction::South]);
        closed.insert(TSCell::new(1, 2, 1), None);
        let c = candidate_selection(&e, None, &node, &closed, &cfg);
        assert_eq!(dirs(&c), vec![Direction::South]);
    }

    #[test]
    fn candidates_respect_signal_support() {
        let g = GridGeometry::new(10, 1, 18.0, 18.0).unwrap();
        let params = PathLossParams {
            ref_loss_db: 70.0,
            ..PathLossParams::default()
        };
        // LoS range is about 215 m, i.e. up to cell 12 from a station at x = 9 m.
        let comms = CommsModel::new(
            g,
            vec![BaseStation {
                id: 0,
                position_m: (-120.0, 9.0),
                channel_count: 1,
            }],
            params,
        );
        let e = AirspaceEnv::new(g);
        let mut belief = SignalBelief::new(&comms);
        let closed = ClosedSet::new(false);
        let cfg = RoutingConfig::default();
        let c = candidate_selection(
            &e,
            Some(&mut belief),
            &root(TSCell::new(4, 0, 0)),
            &closed,
            &cfg,
        );
        assert_eq!(dirs(&c), vec![Direction::West, Direction::Wait]);
    }

    #[test]
    fn turn_penalty_gives_single_turn() {
        let mut e = env(5, 5);
        let out = route_srts(
            &mut e,
            None,
            &request(TSCell::new(0, 0, 0), (4, 4)),
            &RoutingConfig::default(),
        )
        .unwrap();
        let traj = out.trajectory.unwrap();
        assert_eq!(traj.arrival_time(), 8);
        assert_eq!(traj.turn_count(), 1);
    }

    #[test]
    fn straight_route_pops_only_the_path() {
        for cfg in [
            RoutingConfig::default(),
            RoutingConfig::without_turn_penalty(),
        ] {
            let mut e = env(20, 5);
            let out =
                route_srts(&mut e, None, &request(TSCell::new(0, 2, 0), (10, 2)), &cfg).unwrap();
            assert_eq!(out.trajectory.unwrap().arrival_time(), 10);
            assert!(out.stats.expanded <= 11, "{}", out.stats.expanded);
        }
    }

    #[test]
    fn reserves_the_result() {
        let mut e = env(6, 6);
        route_srts(
            &mut e,
            None,
            &request(TSCell::new(0, 0, 0), (5, 0)),
            &RoutingConfig::default(),
        )
        .unwrap();
        assert_eq!(e.live_entry_count(), 6);
        let mut second = request(TSCell::new(0, 0, 1), (5, 0));
        second.owner = 2;
        let traj = route_srts(&mut e, None, &second, &RoutingConfig::default())
            .unwrap()
            .trajectory
            .unwrap();
        // Following one step behind the first craft is conflict-free.
        assert_eq!(traj.arrival_time(), 6);
    }

    #[test]
    fn connectivity_requires_comms_and_source_cover() {
        let mut e = env(5, 5);
        let cfg = RoutingConfig {
            connectivity_check: true,
            ..RoutingConfig::default()
        };
        assert!(matches!(
            route_srts(&mut e, None, &request(TSCell::new(0, 0, 0), (4, 4)), &cfg),
            Err(RouteError::MissingComms)
        ));
        let far = CommsModel::new(
            *e.geometry(),
            vec![BaseStation {
                id: 0,
                position_m: (1.0e5, 0.0),
                channel_count: 4,
            }],
            PathLossParams::default(),
        );
        let out = route_srts(
            &mut e,
            Some(&far),
            &request(TSCell::new(0, 0, 0), (4, 4)),
            &cfg,
        )
        .unwrap();
        assert!(out.trajectory.is_none());
    }

    #[test]
    fn past_start_is_an_input_error() {
        let mut e = env(5, 5);
        e.instant_refresh(10).unwrap();
        assert!(matches!(
            route_srts(
                &mut e,
                None,
                &request(TSCell::new(0, 0, 3), (4, 4)),
                &RoutingConfig::default()
            ),
            Err(RouteError::StartInPast { start: 3, now: 10 })
        ));
    }
}
