//! Flood-and-traceback router over the dense time-expanded maze.
//!
//! The BFS label of `(x, y, t)` is always `t - t_s`, so a label array reduces
//! to one visited bitset per time layer. Layers are allocated as the flood
//! reaches them; their total size is reported as the dense-maze footprint.
//!
//! [`flood`] is the plain FIFO formulation. [`flood_layers`] computes the
//! same labels a whole layer at a time with word-parallel bit operations and
//! is what [`route_bfs`] uses.

use std::collections::VecDeque;

use super::{
    statically_connected, validate_request, RouteError, RouteOutcome, RouteRequest, RouteStats,
};
use crate::tsmaze::{AirspaceEnv, Direction, TSCell, Trajectory};

/// Labels produced by one flooding pass.
#[derive(Debug, Clone)]
pub struct FloodResult {
    source: TSCell,
    width: u32,
    height: u32,
    /// 64-bit words per grid row; rows are padded so shifts stay in-row.
    row_words: usize,
    layers: Vec<Vec<u64>>,
    reached: Option<TSCell>,
    dequeued: usize,
}

impl FloodResult {
    fn new(source: TSCell, width: u32, height: u32) -> Self {
        let mut out = Self {
            source,
            width,
            height,
            row_words: (width as usize).div_ceil(64),
            layers: Vec::new(),
            reached: None,
            dequeued: 0,
        };
        out.mark(source);
        out
    }

    fn words(&self) -> usize {
        self.row_words * self.height as usize
    }

    fn bit(&self, x: u32, y: u32) -> (usize, u64) {
        (
            y as usize * self.row_words + x as usize / 64,
            1u64 << (x % 64),
        )
    }

    fn mark(&mut self, cell: TSCell) {
        let layer = (cell.t - self.source.t) as usize;
        while self.layers.len() <= layer {
            self.layers.push(vec![0; self.words()]);
        }
        let (w, b) = self.bit(cell.x, cell.y);
        self.layers[layer][w] |= b;
    }

    fn is_marked(&self, cell: TSCell) -> bool {
        if cell.t < self.source.t || cell.x >= self.width || cell.y >= self.height {
            return false;
        }
        let Some(layer) = self.layers.get((cell.t - self.source.t) as usize) else {
            return false;
        };
        let (w, b) = self.bit(cell.x, cell.y);
        layer[w] & b != 0
    }

    /// BFS distance from the source, or `None` if the cell was never labelled.
    pub fn label(&self, cell: TSCell) -> Option<u32> {
        self.is_marked(cell).then(|| cell.t - self.source.t)
    }

    pub fn source(&self) -> TSCell {
        self.source
    }

    /// The destination cell popped by the flood, if any.
    pub fn reached(&self) -> Option<TSCell> {
        self.reached
    }

    pub fn dequeued(&self) -> usize {
        self.dequeued
    }

    /// Number of labelled cells in layer `k` (time `t_s + k`).
    pub fn layer_size(&self, k: usize) -> usize {
        self.layers
            .get(k)
            .map_or(0, |l| l.iter().map(|w| w.count_ones() as usize).sum())
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    /// Number of labelled cells.
    pub fn labelled(&self) -> usize {
        (0..self.layers.len()).map(|k| self.layer_size(k)).sum()
    }

    /// `X * Y * layers`: size of the dense label array touched so far.
    pub fn dense_cells(&self) -> usize {
        self.width as usize * self.height as usize * self.layers.len()
    }
}

/// Breadth-first flooding from `source` until `destination` is dequeued or
/// the frontier passes `deadline`. Neighbours are expanded in the order
/// E, W, N, S, Wait; a cell is marked when enqueued.
pub fn flood(
    env: &AirspaceEnv,
    source: TSCell,
    destination: (u32, u32),
    deadline: u32,
) -> FloodResult {
    let g = env.geometry();
    let mut result = FloodResult::new(source, g.width(), g.height());
    let mut queue = VecDeque::from([source]);
    while let Some(node) = queue.pop_front() {
        result.dequeued += 1;
        if node.xy() == destination {
            result.reached = Some(node);
            break;
        }
        if node.t >= deadline {
            continue;
        }
        for dir in Direction::PRIORITY {
            let Some(next) = node.step(dir) else { continue };
            if !g.contains(next.x as i64, next.y as i64)
                || env.static_map().is_blocked(next.x, next.y)
                || env.is_reserved(next)
                || result.is_marked(next)
            {
                continue;
            }
            result.mark(next);
            queue.push_back(next);
        }
    }
    result
}

/// Layer-at-a-time flooding. Produces the labels of [`flood`] for every
/// layer before the destination layer, and the full destination layer.
///
/// The dequeue count is taken as every label of the earlier layers plus the
/// destination itself, which never exceeds the FIFO count (the FIFO flood
/// may dequeue other cells of the destination layer first).
pub fn flood_layers(
    env: &AirspaceEnv,
    source: TSCell,
    destination: (u32, u32),
    deadline: u32,
) -> FloodResult {
    let g = env.geometry();
    let mut result = FloodResult::new(source, g.width(), g.height());
    let rw = result.row_words;
    let height = g.height() as usize;

    let mut static_free = vec![0u64; result.words()];
    for y in 0..g.height() {
        for x in 0..g.width() {
            if !env.static_map().is_blocked(x, y) {
                let (w, b) = result.bit(x, y);
                static_free[w] |= b;
            }
        }
    }
    let (dw, db) = result.bit(destination.0, destination.1);
    let mut dequeued = 0usize;
    let mut t = source.t;
    loop {
        let k = (t - source.t) as usize;
        if result.layers[k][dw] & db != 0 {
            result.reached = Some(TSCell::new(destination.0, destination.1, t));
            dequeued += 1;
            break;
        }
        dequeued += result.layer_size(k);
        if t >= deadline {
            break;
        }
        let mut free = static_free.clone();
        for (_, (x, y)) in env.occupants_at(t + 1) {
            let (w, b) = result.bit(x, y);
            free[w] &= !b;
        }
        let cur = &result.layers[k];
        let mut next = vec![0u64; cur.len()];
        for y in 0..height {
            let row = &cur[y * rw..(y + 1) * rw];
            for i in 0..rw {
                let c = row[i];
                let east = (c << 1) | if i > 0 { row[i - 1] >> 63 } else { 0 };
                let west = (c >> 1) | if i + 1 < rw { row[i + 1] << 63 } else { 0 };
                let north = if y + 1 < height {
                    cur[(y + 1) * rw + i]
                } else {
                    0
                };
                let south = if y > 0 { cur[(y - 1) * rw + i] } else { 0 };
                next[y * rw + i] = (c | east | west | north | south) & free[y * rw + i];
            }
        }
        if next.iter().all(|&w| w == 0) {
            break;
        }
        result.layers.push(next);
        t += 1;
    }
    result.dequeued = dequeued;
    result
}

/// Walks labels downward from `dest` to the source. At each step the
/// predecessor that keeps the current heading is preferred, then the fixed
/// order E, W, N, S, Wait (naming the forward move into the current cell).
pub fn traceback(labels: &FloodResult, dest: TSCell) -> Result<Trajectory, RouteError> {
    if labels.label(dest).is_none() {
        return Err(RouteError::Internal(format!(
            "traceback from unlabelled cell {dest}"
        )));
    }
    let source = labels.source();
    let mut reversed = vec![dest];
    let mut current = dest;
    let mut heading: Option<Direction> = None;
    while current.t > source.t {
        let predecessor = |dir: Direction| -> Option<TSCell> {
            let (dx, dy) = dir.delta();
            let px = current.x as i64 - dx;
            let py = current.y as i64 - dy;
            if px < 0 || py < 0 {
                return None;
            }
            let p = TSCell::new(px as u32, py as u32, current.t - 1);
            labels.is_marked(p).then_some(p)
        };
        let preferred = heading.and_then(|h| predecessor(h).map(|p| (h, p)));
        let (dir, prev) = preferred
            .or_else(|| {
                Direction::PRIORITY
                    .into_iter()
                    .find_map(|d| predecessor(d).map(|p| (d, p)))
            })
            .ok_or_else(|| RouteError::Internal(format!("no labelled predecessor of {current}")))?;
        if !dir.is_wait() {
            heading = Some(dir);
        }
        reversed.push(prev);
        current = prev;
    }
    if current != source {
        return Err(RouteError::Internal(format!(
            "traceback ended at {current}, not {source}"
        )));
    }
    reversed.reverse();
    Ok(Trajectory::new(reversed, dest.xy())?)
}

/// Baseline router: flood, trace back and reserve the result for `req.owner`.
pub fn route_bfs(env: &mut AirspaceEnv, req: &RouteRequest) -> Result<RouteOutcome, RouteError> {
    validate_request(env, req)?;
    if !statically_connected(env, req.source.xy(), req.destination, None) {
        return Ok(RouteOutcome::unroutable(RouteStats::default()));
    }
    let labels = flood_layers(env, req.source, req.destination, req.deadline);
    let stats = RouteStats {
        expanded: labels.dequeued(),
        dense_cells: labels.dense_cells(),
    };
    let Some(dest) = labels.reached() else {
        return Ok(RouteOutcome::unroutable(stats));
    };
    let trajectory = traceback(&labels, dest)?;
    env.reserve_trajectory(&trajectory, req.owner)?;
    Ok(RouteOutcome {
        trajectory: Some(trajectory),
        stats,
    })
}
