//! Random maze instances and brute-force reference solvers shared by the
//! integration tests. Nothing here calls into the routers.

#![allow(dead_code)]

use std::collections::HashSet;

use rand::seq::IndexedRandom;
use rand::Rng;
use srts_core::{AirspaceEnv, Direction, GridGeometry, RouteRequest, TSCell, Trajectory};

pub struct Instance {
    pub env: AirspaceEnv,
    pub request: RouteRequest,
}

const MOVES5: [(i64, i64); 5] = [(1, 0), (-1, 0), (0, -1), (0, 1), (0, 0)];

fn usable(env: &AirspaceEnv, x: i64, y: i64, t: u32) -> bool {
    let g = env.geometry();
    if !g.contains(x, y) {
        return false;
    }
    let (x, y) = (x as u32, y as u32);
    !env.static_map().is_blocked(x, y) && env.is_free(TSCell::new(x, y, t))
}

/// A `w x h` maze over times `0..horizon` with up to 20% no-fly cells and a
/// handful of random-walk reservations. The request starts at `t = 0` and
/// must arrive by `horizon - 1`.
pub fn random_instance<R: Rng>(rng: &mut R, max_side: u32, horizon: u32) -> Instance {
    loop {
        let w = rng.random_range(3..=max_side);
        let h = rng.random_range(3..=max_side);
        let geometry = GridGeometry::new(w, h, 18.0, 18.0).unwrap();
        let mut env = AirspaceEnv::new(geometry);
        let density = rng.random_range(0.0..0.2);
        for y in 0..h {
            for x in 0..w {
                if rng.random_bool(density) {
                    env.set_blocked(x, y, true).unwrap();
                }
            }
        }
        let walkers = rng.random_range(0..=(w * h / 6).max(1));
        for owner in 0..walkers {
            let start_t = rng.random_range(0..horizon / 2);
            let (x, y) = (rng.random_range(0..w), rng.random_range(0..h));
            if !usable(&env, x as i64, y as i64, start_t) {
                continue;
            }
            let mut cells = vec![TSCell::new(x, y, start_t)];
            let len = rng.random_range(1..horizon - start_t);
            for _ in 0..len {
                let c = *cells.last().unwrap();
                let options: Vec<_> = MOVES5
                    .iter()
                    .filter(|(dx, dy)| usable(&env, c.x as i64 + dx, c.y as i64 + dy, c.t + 1))
                    .collect();
                let Some(&&(dx, dy)) = options.choose(rng) else {
                    break;
                };
                cells.push(TSCell::new(
                    (c.x as i64 + dx) as u32,
                    (c.y as i64 + dy) as u32,
                    c.t + 1,
                ));
            }
            let end = cells.last().unwrap().xy();
            let traj = Trajectory::new(cells, end).unwrap();
            env.reserve_trajectory(&traj, 1000 + owner as u64).unwrap();
        }
        let free: Vec<(u32, u32)> = (0..h)
            .flat_map(|y| (0..w).map(move |x| (x, y)))
            .filter(|&(x, y)| !env.static_map().is_blocked(x, y))
            .collect();
        if free.len() < 2 {
            continue;
        }
        let src = *free.choose(rng).unwrap();
        let dst = *free.choose(rng).unwrap();
        let source = TSCell::new(src.0, src.1, 0);
        if src == dst || !env.is_free(source) {
            continue;
        }
        let request = RouteRequest {
            owner: 1,
            source,
            destination: dst,
            deadline: horizon - 1,
        };
        return Instance { env, request };
    }
}

/// Earliest arrival by propagating the set of reachable cells one time
/// layer at a time.
pub fn earliest_arrival(env: &AirspaceEnv, req: &RouteRequest) -> Option<u32> {
    let g = env.geometry();
    let (w, h) = (g.width() as usize, g.height() as usize);
    let mut reach = vec![false; w * h];
    reach[req.source.y as usize * w + req.source.x as usize] = true;
    for t in req.source.t..=req.deadline {
        if reach[req.destination.1 as usize * w + req.destination.0 as usize] {
            return Some(t);
        }
        if t == req.deadline {
            break;
        }
        let mut next = vec![false; w * h];
        for y in 0..h {
            for x in 0..w {
                if !reach[y * w + x] {
                    continue;
                }
                for (dx, dy) in MOVES5 {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if usable(env, nx, ny, t + 1) {
                        next[ny as usize * w + nx as usize] = true;
                    }
                }
            }
        }
        reach = next;
    }
    None
}

/// Earliest arrival by enumerating every time-monotone path depth-first.
/// Only for tiny mazes.
pub fn exhaustive_arrival(env: &AirspaceEnv, req: &RouteRequest) -> Option<u32> {
    fn walk(env: &AirspaceEnv, req: &RouteRequest, c: TSCell, best: &mut Option<u32>) {
        if c.xy() == req.destination {
            *best = Some(best.map_or(c.t, |b| b.min(c.t)));
            return;
        }
        if c.t >= req.deadline {
            return;
        }
        for (dx, dy) in MOVES5 {
            let (nx, ny) = (c.x as i64 + dx, c.y as i64 + dy);
            if usable(env, nx, ny, c.t + 1) {
                walk(env, req, TSCell::new(nx as u32, ny as u32, c.t + 1), best);
            }
        }
    }
    let mut best = None;
    walk(env, req, req.source, &mut best);
    best
}

/// Earliest arrival by iterative deepening: for each candidate arrival time
/// every time-monotone path of that length is enumerated, skipping branches
/// whose Manhattan distance exceeds the remaining steps and states already
/// shown to be dead ends for this arrival time.
pub fn exhaustive_arrival_pruned(env: &AirspaceEnv, req: &RouteRequest) -> Option<u32> {
    fn walk(
        env: &AirspaceEnv,
        req: &RouteRequest,
        c: TSCell,
        arrival: u32,
        dead: &mut HashSet<TSCell>,
    ) -> bool {
        if c.t == arrival {
            return c.xy() == req.destination;
        }
        // An earlier arrival ends the path; a shallower pass covered it.
        if c.xy() == req.destination
            || c.manhattan(req.destination) > arrival - c.t
            || dead.contains(&c)
        {
            return false;
        }
        let found = MOVES5.iter().any(|&(dx, dy)| {
            let (nx, ny) = (c.x as i64 + dx, c.y as i64 + dy);
            usable(env, nx, ny, c.t + 1)
                && walk(
                    env,
                    req,
                    TSCell::new(nx as u32, ny as u32, c.t + 1),
                    arrival,
                    dead,
                )
        });
        if !found {
            dead.insert(c);
        }
        found
    }
    (req.source.t..=req.deadline)
        .find(|&arrival| walk(env, req, req.source, arrival, &mut HashSet::new()))
}

fn heading_index(d: Option<Direction>) -> usize {
    d.map_or(4, |d| d.rank() as usize)
}

/// Fewest heading changes over all paths that reach the destination exactly
/// at `arrival`, by dynamic programming over (cell, heading) per layer.
pub fn min_turns_at(env: &AirspaceEnv, req: &RouteRequest, arrival: u32) -> Option<u32> {
    let g = env.geometry();
    let (w, h) = (g.width() as usize, g.height() as usize);
    const INF: u32 = u32::MAX;
    let idx = |x: usize, y: usize, hd: usize| (y * w + x) * 5 + hd;
    let mut cur = vec![INF; w * h * 5];
    cur[idx(req.source.x as usize, req.source.y as usize, 4)] = 0;
    for t in req.source.t..arrival {
        let mut next = vec![INF; w * h * 5];
        for y in 0..h {
            for x in 0..w {
                if (x as u32, y as u32) == req.destination {
                    // Arriving earlier would end the path there.
                    continue;
                }
                for hd in 0..5 {
                    let turns = cur[idx(x, y, hd)];
                    if turns == INF {
                        continue;
                    }
                    for dir in Direction::PRIORITY {
                        let (dx, dy) = dir.delta();
                        let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                        if !usable(env, nx, ny, t + 1) {
                            continue;
                        }
                        let heading = if hd == 4 {
                            None
                        } else {
                            Some(Direction::PRIORITY[hd])
                        };
                        let turned = matches!(heading, Some(hh) if !dir.is_wait() && hh != dir);
                        let new_heading = if dir.is_wait() { heading } else { Some(dir) };
                        let slot = idx(nx as usize, ny as usize, heading_index(new_heading));
                        next[slot] = next[slot].min(turns + turned as u32);
                    }
                }
            }
        }
        cur = next;
    }
    let (dx, dy) = (req.destination.0 as usize, req.destination.1 as usize);
    (0..5)
        .map(|hd| cur[idx(dx, dy, hd)])
        .filter(|&t| t != INF)
        .min()
}

/// Checks a returned trajectory against the maze it was planned in (before
/// its own reservation was added).
pub fn assert_valid(env_before: &AirspaceEnv, req: &RouteRequest, traj: &Trajectory) {
    assert_eq!(traj.source(), req.source);
    assert_eq!(traj.destination(), req.destination);
    assert!(traj.arrival_time() <= req.deadline);
    for c in traj.cells() {
        assert!(
            usable(env_before, c.x as i64, c.y as i64, c.t),
            "trajectory passes through occupied cell {c}"
        );
    }
}
