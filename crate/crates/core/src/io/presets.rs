use crate::sim::{LaunchArea, Rect, Scenario, StationConfig};

pub const PRESETS: [&str; 3] = ["desk", "desk-coverage-limited", "heavy-traffic"];

pub fn preset(name: &str) -> Option<Scenario> {
    match name {
        "desk" => Some(desk()),
        "desk-coverage-limited" => Some(desk_coverage_limited()),
        "heavy-traffic" => Some(heavy_traffic()),
        _ => None,
    }
}

fn station(id: u32, cx: u32, cy: u32, cell_m: f64, channels: u32) -> StationConfig {
    StationConfig {
        id,
        x_m: (cx as f64 + 0.5) * cell_m,
        y_m: (cy as f64 + 0.5) * cell_m,
        channels,
    }
}

/// 64 x 64 cells of 18 m and four stations on a 20-cell square around the
/// centre. Each station has a launch pad on its outer side and a landing pad
/// on its inner side. Two no-fly walls split the top and bottom halves.
pub fn desk() -> Scenario {
    let cell = 18.0;
    let stations = [(22, 22), (42, 22), (22, 42), (42, 42)];
    let outward = |c: u32| if c < 32 { c - 6 } else { c + 2 };
    let inward = |c: u32| if c < 32 { c + 2 } else { c - 6 };
    let mut s = Scenario {
        name: "desk".into(),
        seed: 1,
        replications: 10,
        launch_areas: stations
            .iter()
            .zip([0.9, 0.8, 0.7, 0.6])
            .map(|(&(x, y), probability)| LaunchArea {
                area: Rect::new(outward(x), outward(y), 4, 4),
                probability,
            })
            .collect(),
        landing_areas: stations
            .iter()
            .map(|&(x, y)| Rect::new(inward(x), inward(y), 4, 4))
            .collect(),
        no_fly_zones: vec![Rect::new(28, 10, 4, 10), Rect::new(28, 44, 4, 10)],
        stations: stations
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| station(i as u32, x, y, cell, 8))
            .collect(),
        ..Scenario::default()
    };
    s.grid.width_cells = 64;
    s.grid.height_cells = 64;
    s.traffic.sim_length_steps = 2000;
    s.traffic.generation_interval_s = 10.0;
    s
}

/// `desk` with a weaker reference loss so each station covers a ~215 m
/// line-of-sight disc; together they cover under half the map.
pub fn desk_coverage_limited() -> Scenario {
    let mut s = desk();
    s.name = "desk-coverage-limited".into();
    s.path_loss.ref_loss_db = 70.0;
    s
}

/// Full-size heavy-traffic setting: 528 x 528 cells, 10 s interval,
/// 10 stations of 8 channels, 20000 steps.
pub fn heavy_traffic() -> Scenario {
    let cell = 18.0;
    let n = 528;
    let q = n / 4;
    let pads = |dx: u32, dy: u32| {
        [(q, q), (3 * q, q), (q, 3 * q), (3 * q, 3 * q)]
            .map(|(x, y)| Rect::new(x - 10 + dx, y - 10 + dy, 8, 8))
    };
    let mut s = Scenario {
        name: "heavy-traffic".into(),
        seed: 1,
        replications: 10,
        launch_areas: pads(0, 0)
            .iter()
            .zip([0.9, 0.8, 0.7, 0.6])
            .map(|(&area, probability)| LaunchArea { area, probability })
            .collect(),
        landing_areas: pads(12, 12).to_vec(),
        no_fly_zones: vec![Rect::new(200, 220, 30, 90), Rect::new(300, 220, 30, 90)],
        stations: (0..10)
            .map(|i| {
                let (col, row) = (i % 5, i / 5);
                station(i, 53 + col * 105, 132 + row * 264, cell, 8)
            })
            .collect(),
        ..Scenario::default()
    };
    s.grid.width_cells = n;
    s.grid.height_cells = n;
    s.traffic.sim_length_steps = 20_000;
    s.traffic.generation_interval_s = 10.0;
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for name in PRESETS {
            preset(name).unwrap().validate().unwrap();
        }
        assert!(preset("nope").is_none());
    }

    #[test]
    fn coverage_limited_covers_under_sixty_percent() {
        let f = desk_coverage_limited().comms().coverage_fraction();
        assert!(f < 0.6 && f > 0.3, "{f}");
        assert_eq!(desk().comms().coverage_fraction(), 1.0);
    }

    #[test]
    fn heavy_preset_shape() {
        let s = heavy_traffic();
        assert_eq!(s.stations.len(), 10);
        assert!(s.stations.iter().all(|st| st.channels == 8));
        assert_eq!(s.traffic.sim_length_steps, 20_000);
        assert_eq!(s.separation_m, 18.0);
    }
}
