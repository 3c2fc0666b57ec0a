//! Cellular link model.
//!
//! Path loss follows the log-distance model
//! `PL(d) = PL(d0) + 10 n log10(d / d0) + x`. A craft can link to a base
//! station when the loss is within the threshold and the station still has a
//! free channel; each station owns `N` orthogonal channels, one craft each.
//!
//! Two views of the same network exist. The *inner belief* used while
//! routing assumes every link is line-of-sight and is therefore
//! deterministic. The *ground truth* used while simulating samples
//! line-of-sight per link and time step.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::tsmaze::{GridGeometry, OwnerId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathLossParams {
    pub ref_distance_m: f64,
    pub ref_loss_db: f64,
    pub exponent_los: f64,
    pub exponent_nlos: f64,
    /// Standard deviation of the Gaussian shadowing term, in dB.
    pub shadowing_db: f64,
    pub los_probability: f64,
    pub loss_threshold_db: f64,
}

impl Default for PathLossParams {
    fn default() -> Self {
        Self {
            ref_distance_m: 1.0,
            ref_loss_db: 38.0,
            exponent_los: 3.0,
            exponent_nlos: 3.5,
            shadowing_db: 0.0,
            los_probability: 0.9,
            loss_threshold_db: 140.0,
        }
    }
}

impl PathLossParams {
    /// Largest distance at which a link with exponent `n` stays within the
    /// threshold (without shadowing).
    pub fn range_m(&self, exponent: f64) -> f64 {
        self.ref_distance_m
            * 10f64.powf((self.loss_threshold_db - self.ref_loss_db) / (10.0 * exponent))
    }

    pub fn los_range_m(&self) -> f64 {
        self.range_m(self.exponent_los)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.ref_distance_m > 0.0) {
            return Err("ref_distance_m must be > 0".into());
        }
        if !(self.exponent_los > 0.0) {
            return Err("exponent_los must be > 0".into());
        }
        if !(self.exponent_nlos > 0.0) {
            return Err("exponent_nlos must be > 0".into());
        }
        if !(0.0..=1.0).contains(&self.los_probability) {
            return Err("los_probability must lie in [0, 1]".into());
        }
        if !(self.shadowing_db >= 0.0) {
            return Err("shadowing_db must be >= 0".into());
        }
        if !self.ref_loss_db.is_finite() || !self.loss_threshold_db.is_finite() {
            return Err("ref_loss_db and loss_threshold_db must be finite".into());
        }
        Ok(())
    }
}

/// Result of one path-loss evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLoss {
    pub db: f64,
    /// Set when the distance was below `d0` and the loss was clamped to `PL(d0)`.
    pub near_field: bool,
}

/// Log-distance path loss without the random shadowing term.
pub fn path_loss(distance_m: f64, exponent: f64, params: &PathLossParams) -> PathLoss {
    let d0 = params.ref_distance_m;
    if distance_m < d0 {
        return PathLoss {
            db: params.ref_loss_db,
            near_field: true,
        };
    }
    PathLoss {
        db: params.ref_loss_db + 10.0 * exponent * (distance_m / d0).log10(),
        near_field: false,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseStation {
    pub id: u32,
    pub position_m: (f64, f64),
    pub channel_count: u32,
}

/// Channel assignments for one time step, indexed like the model's stations.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ChannelLedger {
    assigned: Vec<Vec<OwnerId>>,
    capacity: Vec<u32>,
}

impl ChannelLedger {
    pub fn for_stations(stations: &[BaseStation]) -> Self {
        Self {
            assigned: vec![Vec::new(); stations.len()],
            capacity: stations.iter().map(|s| s.channel_count).collect(),
        }
    }

    pub fn free(&self, station: usize) -> u32 {
        self.capacity[station] - self.assigned[station].len() as u32
    }

    pub fn free_channels(&self) -> Vec<u32> {
        (0..self.capacity.len()).map(|s| self.free(s)).collect()
    }

    pub fn assigned(&self, station: usize) -> &[OwnerId] {
        &self.assigned[station]
    }

    pub fn total_assigned(&self) -> usize {
        self.assigned.iter().map(Vec::len).sum()
    }

    pub fn station_of(&self, craft: OwnerId) -> Option<usize> {
        self.assigned.iter().position(|list| list.contains(&craft))
    }

    fn assign(&mut self, station: usize, craft: OwnerId) {
        debug_assert!(self.free(station) > 0);
        self.assigned[station].push(craft);
    }
}

/// Outcome of link assignment for one craft at one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkResult {
    Linked { station_id: u32 },
    NoLink,
}

impl LinkResult {
    pub fn is_linked(self) -> bool {
        matches!(self, LinkResult::Linked { .. })
    }
}

/// Base stations plus the propagation model, bound to a grid so cells can be
/// located in meters.
#[derive(Debug, Clone)]
pub struct CommsModel {
    stations: Vec<BaseStation>,
    params: PathLossParams,
    geometry: GridGeometry,
    /// Per grid cell: station indices within line-of-sight range, lowest
    /// loss (that is, nearest) first, ties by id.
    los_cover: Vec<Vec<u16>>,
}

impl CommsModel {
    pub fn new(
        geometry: GridGeometry,
        mut stations: Vec<BaseStation>,
        params: PathLossParams,
    ) -> Self {
        stations.sort_by_key(|s| s.id);
        let mut los_cover = Vec::with_capacity(geometry.cell_count());
        for y in 0..geometry.height() {
            for x in 0..geometry.width() {
                let p = geometry.cell_center_m(x, y);
                los_cover.push(Self::sorted_in_range(&stations, &params, p));
            }
        }
        Self {
            stations,
            params,
            geometry,
            los_cover,
        }
    }

    fn sorted_in_range(
        stations: &[BaseStation],
        params: &PathLossParams,
        p: (f64, f64),
    ) -> Vec<u16> {
        let mut near: Vec<(f64, u32, u16)> = stations
            .iter()
            .enumerate()
            .filter_map(|(i, s)| {
                let d = distance(p, s.position_m);
                let loss = path_loss(d, params.exponent_los, params).db;
                (loss <= params.loss_threshold_db).then_some((loss, s.id, i as u16))
            })
            .collect();
        near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        near.into_iter().map(|(_, _, i)| i).collect()
    }

    pub fn stations(&self) -> &[BaseStation] {
        &self.stations
    }

    pub fn params(&self) -> &PathLossParams {
        &self.params
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn empty_ledger(&self) -> ChannelLedger {
        ChannelLedger::for_stations(&self.stations)
    }

    /// Whether the cell lies within line-of-sight range of any station,
    /// regardless of channel use.
    pub fn is_covered(&self, x: u32, y: u32) -> bool {
        !self.los_cover[self.geometry.index(x, y)].is_empty()
    }

    /// Fraction of grid cells within line-of-sight range of some station.
    pub fn coverage_fraction(&self) -> f64 {
        let covered = self.los_cover.iter().filter(|c| !c.is_empty()).count();
        covered as f64 / self.los_cover.len() as f64
    }

    /// Inner-belief station choice for a cell: the nearest in-range station
    /// with a free channel.
    fn belief_pick(&self, x: u32, y: u32, free: &[u32]) -> Option<usize> {
        self.los_cover[self.geometry.index(x, y)]
            .iter()
            .map(|&s| s as usize)
            .find(|&s| free[s] > 0)
    }

    /// Free channels per station after the craft already in the air at some
    /// step have been served, in ascending owner order.
    pub fn belief_free_channels(&self, in_flight: &[(OwnerId, (u32, u32))]) -> Vec<u32> {
        let mut free: Vec<u32> = self.stations.iter().map(|s| s.channel_count).collect();
        for &(_, (x, y)) in in_flight {
            if let Some(s) = self.belief_pick(x, y, &free) {
                free[s] -= 1;
            }
        }
        free
    }

    /// Whether a craft at `cell` could link to some station once the craft
    /// in `in_flight` have been served. The trial allocation happens on a
    /// scratch copy, so nothing outlives the call.
    pub fn signal_check(&self, cell: (u32, u32), in_flight: &[(OwnerId, (u32, u32))]) -> bool {
        let free = self.belief_free_channels(in_flight);
        self.signal_check_with(cell, &free)
    }

    /// [`signal_check`](Self::signal_check) against precomputed free counts.
    pub fn signal_check_with(&self, cell: (u32, u32), free: &[u32]) -> bool {
        self.belief_pick(cell.0, cell.1, free).is_some()
    }

    /// Ground-truth link assignment for one time step. Craft are served in
    /// ascending id order and each one samples line-of-sight independently
    /// towards every station.
    pub fn ground_truth_assign<R: Rng + ?Sized>(
        &self,
        active: &[(OwnerId, (f64, f64))],
        rng: &mut R,
    ) -> (ChannelLedger, Vec<(OwnerId, LinkResult)>) {
        let mut order: Vec<&(OwnerId, (f64, f64))> = active.iter().collect();
        order.sort_by_key(|(id, _)| *id);
        let shadow = (self.params.shadowing_db > 0.0)
            .then(|| Normal::new(0.0, self.params.shadowing_db).expect("validated shadowing"));
        let mut ledger = self.empty_ledger();
        let mut results = Vec::with_capacity(order.len());
        for &&(id, pos) in &order {
            let mut best: Option<(f64, usize)> = None;
            for (s, station) in self.stations.iter().enumerate() {
                let los = rng.random_bool(self.params.los_probability);
                let exponent = if los {
                    self.params.exponent_los
                } else {
                    self.params.exponent_nlos
                };
                let mut loss =
                    path_loss(distance(pos, station.position_m), exponent, &self.params).db;
                if let Some(normal) = &shadow {
                    loss += normal.sample(rng);
                }
                if loss <= self.params.loss_threshold_db
                    && ledger.free(s) > 0
                    && best.is_none_or(|(b, _)| loss < b)
                {
                    best = Some((loss, s));
                }
            }
            let result = match best {
                Some((_, s)) => {
                    ledger.assign(s, id);
                    LinkResult::Linked {
                        station_id: self.stations[s].id,
                    }
                }
                None => LinkResult::NoLink,
            };
            results.push((id, result));
        }
        (ledger, results)
    }

    /// Free-channel count of the best admissible station for every grid
    /// cell (row-major), `0` where no station can serve the cell.
    pub fn coverage_snapshot(&self, ledger: &ChannelLedger) -> Vec<u32> {
        let free = ledger.free_channels();
        (0..self.geometry.height())
            .flat_map(|y| (0..self.geometry.width()).map(move |x| (x, y)))
            .map(|(x, y)| self.belief_pick(x, y, &free).map_or(0, |s| free[s]))
            .collect()
    }
}

pub fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn geometry(w: u32, h: u32) -> GridGeometry {
        GridGeometry::new(w, h, 18.0, 18.0).unwrap()
    }

    fn station(id: u32, x: f64, y: f64, n: u32) -> BaseStation {
        BaseStation {
            id,
            position_m: (x, y),
            channel_count: n,
        }
    }

    #[test]
    fn loss_at_reference_distance() {
        let p = PathLossParams::default();
        let pl = path_loss(1.0, 3.0, &p);
        assert_eq!(pl.db, 38.0);
        assert!(!pl.near_field);
    }

    #[test]
    fn loss_at_hundred_meters() {
        let p = PathLossParams::default();
        assert!((path_loss(100.0, 3.0, &p).db - 98.0).abs() < 1e-12);
    }

    #[test]
    fn doubling_distance_adds_constant() {
        let p = PathLossParams::default();
        let step = 30.0 * 2f64.log10();
        for d in [3.0, 50.0, 1234.5] {
            let diff = path_loss(2.0 * d, 3.0, &p).db - path_loss(d, 3.0, &p).db;
            assert!((diff - step).abs() < 1e-9);
            assert!((diff - 9.031).abs() < 1e-3);
        }
    }

    #[test]
    fn near_field_is_clamped_and_flagged() {
        let p = PathLossParams::default();
        let pl = path_loss(0.2, 3.0, &p);
        assert_eq!(pl.db, 38.0);
        assert!(pl.near_field);
    }

    #[test]
    fn ranges_follow_threshold() {
        let p = PathLossParams::default();
        assert!((path_loss(p.los_range_m(), 3.0, &p).db - 140.0).abs() < 1e-9);
        assert!(p.range_m(3.5) < p.los_range_m());
        assert!((p.los_range_m() - 2511.886).abs() < 1e-3);
    }

    #[test]
    fn single_station_in_range_supports_cell() {
        // Cell (0, 0) has its center at (9, 9); put the station 100 m away.
        let g = geometry(4, 4);
        let model = CommsModel::new(
            g,
            vec![station(0, 9.0 + 100.0, 9.0, 8)],
            PathLossParams::default(),
        );
        assert!(model.signal_check((0, 0), &[]));
    }

    #[test]
    fn full_station_blocks_when_nothing_else_in_range() {
        let g = geometry(4, 4);
        let params = PathLossParams::default();
        let far = 10.0 * params.los_range_m();
        let model = CommsModel::new(
            g,
            vec![station(0, 36.0, 36.0, 2), station(1, far, far, 8)],
            params,
        );
        let in_flight = vec![(1, (0, 0)), (2, (3, 3))];
        assert!(!model.signal_check((1, 1), &in_flight));
        assert!(model.signal_check((1, 1), &in_flight[..1]));
    }

    #[test]
    fn cell_beyond_every_station_fails() {
        let g = geometry(4, 4);
        let params = PathLossParams::default();
        let r = params.los_range_m();
        let model = CommsModel::new(g, vec![station(0, 9.0 + r + 1.0, 9.0, 8)], params);
        assert!(!model.signal_check((0, 0), &[]));
        assert!(!model.is_covered(0, 0));
    }

    #[test]
    fn in_flight_craft_take_priority_nearest_first() {
        // Two stations, one channel each. The in-flight craft sits nearer to
        // station 0 and takes it; the candidate can still use station 1.
        let g = geometry(10, 1);
        let model = CommsModel::new(
            g,
            vec![station(0, 9.0, 9.0, 1), station(1, 171.0, 9.0, 1)],
            PathLossParams::default(),
        );
        assert_eq!(model.belief_free_channels(&[(4, (1, 0))]), vec![0, 1]);
        assert!(model.signal_check((0, 0), &[(4, (1, 0))]));
        assert!(!model.signal_check((0, 0), &[(4, (1, 0)), (5, (2, 0))]));
    }

    #[test]
    fn ground_truth_picks_lowest_loss() {
        let g = geometry(10, 10);
        let mut params = PathLossParams::default();
        params.los_probability = 1.0;
        let model = CommsModel::new(
            g,
            vec![station(7, 500.0, 0.0, 8), station(3, 50.0, 0.0, 8)],
            params,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (ledger, links) = model.ground_truth_assign(&[(1, (0.0, 0.0))], &mut rng);
        assert_eq!(links, vec![(1, LinkResult::Linked { station_id: 3 })]);
        assert_eq!(ledger.station_of(1), Some(0));
    }

    #[test]
    fn pigeonhole_leaves_one_craft_without_link() {
        let g = geometry(10, 10);
        let n = 8;
        let model = CommsModel::new(
            g,
            vec![station(0, 90.0, 90.0, n)],
            PathLossParams::default(),
        );
        let craft: Vec<_> = (0..=n as u64).map(|id| (id, (90.0, 90.0))).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (ledger, links) = model.ground_truth_assign(&craft, &mut rng);
        let no_link = links.iter().filter(|(_, l)| !l.is_linked()).count();
        assert_eq!(no_link, 1);
        assert_eq!(ledger.total_assigned(), n as usize);
        // Highest id loses.
        assert_eq!(links.last().unwrap().1, LinkResult::NoLink);
    }

    #[test]
    fn certain_los_makes_truth_match_belief() {
        let g = geometry(30, 30);
        let mut params = PathLossParams::default();
        params.los_probability = 1.0;
        params.ref_loss_db = 70.0;
        let model = CommsModel::new(
            g,
            vec![station(0, 100.0, 100.0, 2), station(1, 400.0, 300.0, 3)],
            params,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for x in 0..30 {
            for y in 0..30 {
                let p = g.cell_center_m(x, y);
                let (_, links) = model.ground_truth_assign(&[(0, p)], &mut rng);
                assert_eq!(
                    links[0].1.is_linked(),
                    model.signal_check((x, y), &[]),
                    "({x},{y})"
                );
            }
        }
    }

    #[test]
    fn snapshot_shows_free_channels() {
        let g = geometry(6, 6);
        let far = 1.0e7;
        let model = CommsModel::new(
            g,
            vec![station(0, 54.0, 54.0, 8), station(1, far, far, 8)],
            PathLossParams::default(),
        );
        let empty = model.empty_ledger();
        assert!(model.coverage_snapshot(&empty).iter().all(|&c| c == 8));

        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut p = *model.params();
        p.los_probability = 1.0;
        let model = CommsModel::new(g, model.stations().to_vec(), p);
        let craft: Vec<_> = (0..3).map(|id| (id, (54.0, 54.0))).collect();
        let (ledger, _) = model.ground_truth_assign(&craft, &mut rng);
        assert!(model.coverage_snapshot(&ledger).iter().all(|&c| c == 5));

        let craft: Vec<_> = (0..8).map(|id| (id, (54.0, 54.0))).collect();
        let (ledger, _) = model.ground_truth_assign(&craft, &mut rng);
        assert!(model.coverage_snapshot(&ledger).iter().all(|&c| c == 0));
    }
}
