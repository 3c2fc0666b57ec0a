//! Potential-field flight for craft without a planned trajectory.
//!
//! Each step a craft is pulled towards its destination and pushed away from
//! neighbours and no-fly cells inside the sensing radius (push ∝ 1/d²). The
//! resulting direction is flown at full speed. Every push is turned a little
//! clockwise so that two craft meeting head-on sidestep instead of stalling.

use nalgebra::{Rotation2, Vector2};
use serde::{Deserialize, Serialize};

use crate::tsmaze::{GridGeometry, StaticMap};

pub type Point = Vector2<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialFieldConfig {
    pub attract_gain: f64,
    /// Push magnitude at 1 m; falls off with the squared distance.
    pub repulse_gain: f64,
    pub sensing_radius_m: f64,
    pub max_speed_mps: f64,
    /// Clockwise rotation applied to every push, in radians.
    pub bias_rad: f64,
}

impl Default for PotentialFieldConfig {
    fn default() -> Self {
        Self {
            attract_gain: 1.0,
            // Twice the pull at one separation distance (18 m).
            repulse_gain: 648.0,
            sensing_radius_m: 54.0,
            max_speed_mps: 18.0,
            bias_rad: 0.25,
        }
    }
}

impl PotentialFieldConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.attract_gain >= 0.0 && self.repulse_gain >= 0.0) {
            return Err("gains must be >= 0".into());
        }
        if !(self.sensing_radius_m > 0.0) {
            return Err("sensing_radius_m must be > 0".into());
        }
        if !(self.max_speed_mps > 0.0) {
            return Err("max_speed_mps must be > 0".into());
        }
        Ok(())
    }
}

/// No-fly cells as seen by the field.
#[derive(Debug, Clone, Copy)]
pub struct Obstacles<'a> {
    pub geometry: &'a GridGeometry,
    pub map: &'a StaticMap,
}

impl Obstacles<'_> {
    /// Nearest point of every blocked cell within `radius` of `p`.
    fn nearby(&self, p: Point, radius: f64) -> Vec<Point> {
        let w = self.geometry.cell_size_m();
        let reach = (radius / w).ceil() as i64 + 1;
        let (cx, cy) = ((p.x / w).floor() as i64, (p.y / w).floor() as i64);
        let mut out = Vec::new();
        for y in cy - reach..=cy + reach {
            for x in cx - reach..=cx + reach {
                if !self.geometry.contains(x, y) || !self.map.is_blocked(x as u32, y as u32) {
                    continue;
                }
                let (x0, y0) = (x as f64 * w, y as f64 * w);
                let q = Point::new(p.x.clamp(x0, x0 + w), p.y.clamp(y0, y0 + w));
                if (q - p).norm() <= radius {
                    out.push(q);
                }
            }
        }
        out
    }
}

/// Field direction at `pos` (not normalised).
pub fn field(
    pos: Point,
    dest: Point,
    neighbors: &[Point],
    obstacles: Option<Obstacles<'_>>,
    cfg: &PotentialFieldConfig,
) -> Vector2<f64> {
    let to_dest = dest - pos;
    let mut total = if to_dest.norm() > 0.0 {
        to_dest.normalize() * cfg.attract_gain
    } else {
        Vector2::zeros()
    };
    // y grows southward, so a clockwise turn on the map is a positive angle.
    let bias = Rotation2::new(cfg.bias_rad);
    let mut push = |from: Point| {
        let away = pos - from;
        let d = away.norm();
        if d > 0.0 && d <= cfg.sensing_radius_m {
            total += bias * (away / d) * (cfg.repulse_gain / (d * d));
        }
    };
    for &n in neighbors {
        push(n);
    }
    if let Some(obs) = obstacles {
        for q in obs.nearby(pos, cfg.sensing_radius_m) {
            push(q);
        }
    }
    total
}

/// Next position after one step of `step_seconds`. Lands exactly on `dest`
/// once it is within one step.
pub fn reactive_step(
    pos: Point,
    dest: Point,
    neighbors: &[Point],
    obstacles: Option<Obstacles<'_>>,
    cfg: &PotentialFieldConfig,
    step_seconds: f64,
) -> Point {
    let max_step = cfg.max_speed_mps * step_seconds;
    let to_dest = dest - pos;
    let f = field(pos, dest, neighbors, obstacles, cfg);
    if f.norm() == 0.0 {
        return pos;
    }
    if to_dest.norm() <= max_step && f.dot(&to_dest) > 0.0 {
        return dest;
    }
    pos + f.normalize() * max_step
}
