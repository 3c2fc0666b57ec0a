use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::serialize_scenario;
use crate::sim::{Metrics, MetricsReport, Scenario};

/// Paths of everything written for one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub metrics: PathBuf,
    pub density: PathBuf,
    pub channels: Vec<PathBuf>,
    pub routes: PathBuf,
    pub manifest: PathBuf,
}

/// `v` with six significant digits, trailing zeros trimmed.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = 5 - magnitude;
    let s = if (0..=12).contains(&decimals) {
        format!("{v:.*}", decimals as usize)
    } else if decimals < 0 && magnitude < 15 {
        format!("{:.0}", round_to(v, -decimals))
    } else {
        return format!("{v:.5e}");
    };
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn round_to(v: f64, places: i32) -> f64 {
    let p = 10f64.powi(places);
    (v / p).round() * p
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn metrics_csv(report: &MetricsReport) -> String {
    let mut out = String::from("replication");
    for c in Metrics::COLUMNS {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    let rows = report
        .replications
        .iter()
        .enumerate()
        .map(|(i, m)| (i.to_string(), m));
    let aggregate =
        (!report.replications.is_empty()).then(|| ("mean".to_string(), &report.aggregate));
    for (label, m) in rows.chain(aggregate) {
        out.push_str(&label);
        for v in m.values() {
            out.push(',');
            out.push_str(&format_sig(v));
        }
        out.push('\n');
    }
    out
}

fn grid_csv(values: &[u32], width: usize) -> String {
    let mut out = String::new();
    for row in values.chunks(width.max(1)) {
        let line: Vec<String> = row.iter().map(u32::to_string).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

fn routes_csv(report: &MetricsReport) -> String {
    let mut out = String::from(
        "replication,mission,request_time,launch_time,status,flight_time_s,distance_cells,turns,expanded,dense_cells,no_link_steps,conflict_steps\n",
    );
    let mut rows: Vec<_> = report.routes.iter().collect();
    rows.sort_by_key(|r| (r.replication, r.mission));
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.replication,
            r.mission,
            r.request_time,
            opt(r.launch_time),
            r.status.label(),
            r.flight_time_s.map_or_else(String::new, format_sig),
            opt(r.distance_cells),
            r.turns,
            r.expanded,
            r.dense_cells,
            r.no_link_steps,
            r.conflict_steps
        )
        .unwrap();
    }
    out
}

/// Manifest: a few comment lines followed by the complete scenario, so the
/// file itself parses as a scenario and re-runs the experiment. Derived
/// defaults (the turn penalty) are written out as resolved values.
pub fn manifest_text(scenario: &Scenario) -> String {
    let mut resolved = scenario.clone();
    resolved.routing.turn_penalty_weight = Some(scenario.routing.lambda(&scenario.geometry()));
    let config = serialize_scenario(&resolved);
    let hash = Sha256::digest(config.as_bytes());
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    format!(
        "# srts run manifest\n# version: {}\n# seed: {}\n# replications: {}\n# config_sha256: {hex}\n\n{config}",
        env!("CARGO_PKG_VERSION"),
        scenario.seed,
        scenario.replications,
    )
}

fn write(path: &Path, text: &str) -> std::io::Result<()> {
    std::fs::write(path, text)
}

/// Writes the CSV artifacts and the manifest into `out_dir` (created if
/// needed).
pub fn emit_artifacts(
    report: &MetricsReport,
    scenario: &Scenario,
    out_dir: &Path,
) -> std::io::Result<RunArtifacts> {
    std::fs::create_dir_all(out_dir)?;
    let width = scenario.grid.width_cells as usize;
    let artifacts = RunArtifacts {
        dir: out_dir.to_path_buf(),
        metrics: out_dir.join("metrics.csv"),
        density: out_dir.join("density.csv"),
        channels: report
            .channel_snapshots
            .iter()
            .map(|(t, _)| out_dir.join(format!("channels_t{t}.csv")))
            .collect(),
        routes: out_dir.join("routes.csv"),
        manifest: out_dir.join("manifest.txt"),
    };
    write(&artifacts.metrics, &metrics_csv(report))?;
    write(&artifacts.density, &grid_csv(&report.density, width))?;
    for (path, (_, grid)) in artifacts.channels.iter().zip(&report.channel_snapshots) {
        write(path, &grid_csv(grid, width))?;
    }
    write(&artifacts.routes, &routes_csv(report))?;
    write(&artifacts.manifest, &manifest_text(scenario))?;
    Ok(artifacts)
}
