use serde::{Deserialize, Serialize};

use crate::comms::{BaseStation, CommsModel, PathLossParams};
use crate::reactive::PotentialFieldConfig;
use crate::router::RoutingConfig;
use crate::tsmaze::{GridGeometry, StaticMap};

/// Half-open rectangle of grid cells, `[x, x + w) x [y, y + h)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl Rect {
    pub const fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Self { x, y, w, h }
    }

    fn x1(&self) -> u64 {
        self.x as u64 + self.w as u64
    }

    fn y1(&self) -> u64 {
        self.y as u64 + self.h as u64
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x && (x as u64) < self.x1() && y >= self.y && (y as u64) < self.y1()
    }

    pub fn overlaps(&self, other: &Rect) -> bool {
        (self.x as u64) < other.x1()
            && (other.x as u64) < self.x1()
            && (self.y as u64) < other.y1()
            && (other.y as u64) < self.y1()
    }

    pub fn cells(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (self.y..self.y + self.h).flat_map(move |y| (self.x..self.x + self.w).map(move |x| (x, y)))
    }

    fn fits(&self, width: u32, height: u32) -> bool {
        self.w > 0 && self.h > 0 && self.x1() <= width as u64 && self.y1() <= height as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaunchArea {
    pub area: Rect,
    /// Chance of a launch request at each generation boundary.
    pub probability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationConfig {
    pub id: u32,
    pub x_m: f64,
    pub y_m: f64,
    #[serde(default = "default_channels")]
    pub channels: u32,
}

fn default_channels() -> u32 {
    8
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub width_cells: u32,
    pub height_cells: u32,
    pub cell_size_m: f64,
    pub cruise_speed_mps: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            width_cells: 64,
            height_cells: 64,
            cell_size_m: 18.0,
            cruise_speed_mps: 18.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrafficConfig {
    pub generation_interval_s: f64,
    pub sim_length_steps: u32,
    /// Missions requested before this step are left out of the metrics.
    pub burn_in_steps: u32,
    /// Keep rejected missions pending until the next generation boundary
    /// instead of dropping them.
    pub retry_rejected: bool,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        Self {
            generation_interval_s: 10.0,
            sim_length_steps: 2000,
            burn_in_steps: 0,
            retry_rejected: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RouterKind {
    /// Unmanaged: straight Manhattan flight, no reservation.
    None,
    Bfs,
    Srts,
    /// Potential-field flight, no reservation.
    Reactive,
}

impl RouterKind {
    pub const ALL: [RouterKind; 4] = [
        RouterKind::None,
        RouterKind::Bfs,
        RouterKind::Srts,
        RouterKind::Reactive,
    ];

    pub fn label(self) -> &'static str {
        match self {
            RouterKind::None => "none",
            RouterKind::Bfs => "bfs",
            RouterKind::Srts => "srts",
            RouterKind::Reactive => "reactive",
        }
    }

    pub fn is_managed(self) -> bool {
        matches!(self, RouterKind::Bfs | RouterKind::Srts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergyConfig {
    pub alpha: f64,
    pub include_transients: bool,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            include_transients: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: Option<String>,
    /// Channel snapshot times as fractions of the simulation length.
    pub snapshot_fractions: Vec<f64>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            snapshot_fractions: vec![0.025, 0.25, 0.5, 0.99],
        }
    }
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub replications: u32,
    pub router: RouterKind,
    pub separation_m: f64,
    pub grid: GridConfig,
    pub traffic: TrafficConfig,
    pub routing: RoutingConfig,
    pub path_loss: PathLossParams,
    pub reactive: PotentialFieldConfig,
    pub energy: EnergyConfig,
    pub output: OutputConfig,
    pub launch_areas: Vec<LaunchArea>,
    pub landing_areas: Vec<Rect>,
    pub no_fly_zones: Vec<Rect>,
    pub stations: Vec<StationConfig>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "scenario".into(),
            seed: 1,
            replications: 1,
            router: RouterKind::Srts,
            separation_m: 18.0,
            grid: GridConfig::default(),
            traffic: TrafficConfig::default(),
            routing: RoutingConfig::default(),
            path_loss: PathLossParams::default(),
            reactive: PotentialFieldConfig::default(),
            energy: EnergyConfig::default(),
            output: OutputConfig::default(),
            launch_areas: Vec::new(),
            landing_areas: Vec::new(),
            no_fly_zones: Vec::new(),
            stations: Vec::new(),
        }
    }
}

/// A validation failure, naming the offending field.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

fn check(
    ok: bool,
    field: impl Into<String>,
    message: impl Into<String>,
) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::new(field, message))
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check(self.replications >= 1, "replications", "must be at least 1")?;
        check(
            self.separation_m.is_finite() && self.separation_m > 0.0,
            "separation_m",
            format!("must be > 0, got {}", self.separation_m),
        )?;
        let g = &self.grid;
        check(g.width_cells > 0, "grid.width_cells", "must be > 0")?;
        check(g.height_cells > 0, "grid.height_cells", "must be > 0")?;
        check(
            g.cell_size_m > 0.0 && g.cell_size_m.is_finite(),
            "grid.cell_size_m",
            "must be > 0",
        )?;
        check(
            g.cruise_speed_mps > 0.0 && g.cruise_speed_mps.is_finite(),
            "grid.cruise_speed_mps",
            "must be > 0",
        )?;
        let t = &self.traffic;
        check(
            t.generation_interval_s.is_finite() && t.generation_interval_s > 0.0,
            "traffic.generation_interval_s",
            "must be > 0",
        )?;
        check(
            self.generation_every_steps() >= 1,
            "traffic.generation_interval_s",
            "must span at least one time step",
        )?;
        check(
            !self.launch_areas.is_empty(),
            "launch_areas",
            "at least one launch area is required",
        )?;
        check(
            !self.landing_areas.is_empty(),
            "landing_areas",
            "at least one landing area is required",
        )?;
        let (w, h) = (g.width_cells, g.height_cells);
        for (i, a) in self.launch_areas.iter().enumerate() {
            check(
                a.area.fits(w, h),
                format!("launch_areas[{i}].area"),
                "must be non-empty and inside the grid",
            )?;
            check(
                (0.0..=1.0).contains(&a.probability),
                format!("launch_areas[{i}].probability"),
                "must be within [0, 1]",
            )?;
            for (j, z) in self.no_fly_zones.iter().enumerate() {
                check(
                    !a.area.overlaps(z),
                    format!("launch_areas[{i}].area"),
                    format!("overlaps no_fly_zones[{j}]"),
                )?;
            }
            for (j, l) in self.landing_areas.iter().enumerate() {
                check(
                    !a.area.overlaps(l),
                    format!("launch_areas[{i}].area"),
                    format!("overlaps landing_areas[{j}]"),
                )?;
            }
        }
        for (i, a) in self.landing_areas.iter().enumerate() {
            check(
                a.fits(w, h),
                format!("landing_areas[{i}]"),
                "must be non-empty and inside the grid",
            )?;
            for (j, z) in self.no_fly_zones.iter().enumerate() {
                check(
                    !a.overlaps(z),
                    format!("landing_areas[{i}]"),
                    format!("overlaps no_fly_zones[{j}]"),
                )?;
            }
        }
        for (i, z) in self.no_fly_zones.iter().enumerate() {
            check(
                z.fits(w, h),
                format!("no_fly_zones[{i}]"),
                "must be non-empty and inside the grid",
            )?;
        }
        for (i, s) in self.stations.iter().enumerate() {
            check(
                s.channels >= 1,
                format!("stations[{i}].channels"),
                "must be at least 1",
            )?;
            check(
                s.x_m.is_finite() && s.y_m.is_finite(),
                format!("stations[{i}]"),
                "coordinates must be finite",
            )?;
            check(
                !self.stations[..i].iter().any(|o| o.id == s.id),
                format!("stations[{i}].id"),
                format!("duplicate id {}", s.id),
            )?;
        }
        self.path_loss
            .validate()
            .map_err(|m| ConfigError::new("path_loss", m))?;
        self.routing
            .validate()
            .map_err(|m| ConfigError::new("routing.turn_penalty_weight", m))?;
        check(
            !(self.routing.connectivity_check && self.stations.is_empty()),
            "routing.connectivity_check",
            "requires at least one station",
        )?;
        self.reactive
            .validate()
            .map_err(|m| ConfigError::new("reactive", m))?;
        check(
            self.energy.alpha > 0.0 && self.energy.alpha.is_finite(),
            "energy.alpha",
            "must be > 0",
        )?;
        for (i, f) in self.output.snapshot_fractions.iter().enumerate() {
            check(
                (0.0..1.0).contains(f),
                format!("output.snapshot_fractions[{i}]"),
                "must be within [0, 1)",
            )?;
        }
        Ok(())
    }

    pub fn geometry(&self) -> GridGeometry {
        GridGeometry::new(
            self.grid.width_cells,
            self.grid.height_cells,
            self.grid.cell_size_m,
            self.grid.cruise_speed_mps,
        )
        .expect("validated grid")
    }

    pub fn step_seconds(&self) -> f64 {
        self.grid.cell_size_m / self.grid.cruise_speed_mps
    }

    /// Generation interval in whole time steps.
    pub fn generation_every_steps(&self) -> u32 {
        (self.traffic.generation_interval_s / self.step_seconds()).round() as u32
    }

    pub fn static_map(&self) -> StaticMap {
        let mut map = StaticMap::empty(self.grid.width_cells, self.grid.height_cells);
        for z in &self.no_fly_zones {
            map.block_rect(z.x, z.y, z.w, z.h);
        }
        map
    }

    pub fn base_stations(&self) -> Vec<BaseStation> {
        self.stations
            .iter()
            .map(|s| BaseStation {
                id: s.id,
                position_m: (s.x_m, s.y_m),
                channel_count: s.channels,
            })
            .collect()
    }

    pub fn comms(&self) -> CommsModel {
        CommsModel::new(self.geometry(), self.base_stations(), self.path_loss)
    }

    /// Steps at which channel snapshots are taken.
    pub fn snapshot_steps(&self) -> Vec<u32> {
        let mut steps: Vec<u32> = self
            .output
            .snapshot_fractions
            .iter()
            .map(|f| (f * self.traffic.sim_length_steps as f64).round() as u32)
            .collect();
        steps.sort_unstable();
        steps.dedup();
        steps
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> Scenario {
        Scenario {
            launch_areas: vec![LaunchArea {
                area: Rect::new(0, 0, 2, 2),
                probability: 1.0,
            }],
            landing_areas: vec![Rect::new(10, 10, 2, 2)],
            ..Scenario::default()
        }
    }

    #[test]
    fn minimal_is_valid() {
        minimal().validate().unwrap();
        assert_eq!(minimal().generation_every_steps(), 10);
    }

    #[test]
    fn errors_name_the_field() {
        let mut s = minimal();
        s.separation_m = -1.0;
        assert_eq!(s.validate().unwrap_err().field, "separation_m");
        let mut s = minimal();
        s.launch_areas[0].probability = 1.5;
        assert_eq!(
            s.validate().unwrap_err().field,
            "launch_areas[0].probability"
        );
        let mut s = minimal();
        s.no_fly_zones.push(Rect::new(11, 11, 4, 4));
        assert_eq!(s.validate().unwrap_err().field, "landing_areas[0]");
        let mut s = minimal();
        s.routing.connectivity_check = true;
        assert_eq!(
            s.validate().unwrap_err().field,
            "routing.connectivity_check"
        );
        let mut s = minimal();
        s.landing_areas[0] = Rect::new(63, 63, 2, 1);
        assert_eq!(s.validate().unwrap_err().field, "landing_areas[0]");
    }

    #[test]
    fn rect_geometry() {
        let r = Rect::new(2, 3, 2, 2);
        assert!(r.contains(3, 4) && !r.contains(4, 4));
        assert_eq!(r.cells().count(), 4);
        assert!(r.overlaps(&Rect::new(3, 4, 5, 5)));
        assert!(!r.overlaps(&Rect::new(4, 3, 1, 1)));
    }

    #[test]
    fn snapshot_steps_scale_with_length() {
        let mut s = minimal();
        s.traffic.sim_length_steps = 20000;
        assert_eq!(s.snapshot_steps(), vec![500, 5000, 10000, 19800]);
    }
}
