//! `srts` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use srts_core::io::{emit_artifacts, format_sig, parse_scenario, preset, ScenarioError, PRESETS};
use srts_core::router::{route_bfs, route_srts};
use srts_core::sim::{run, Metrics, RouterKind, Scenario};
use srts_core::{AirspaceEnv, DeadlinePolicy, RouteRequest, StaticMap, TSCell};

/// Environment variable naming the default directory for run outputs.
pub const OUTPUT_ROOT_VAR: &str = "SRTS_OUTPUT_ROOT";

#[derive(Debug, Parser)]
#[command(
    name = "srts",
    version,
    about = "Spatio-temporal UAS routing and traffic simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every replication of a scenario and write the artifacts.
    Run {
        /// Scenario file, or a preset name.
        scenario: String,
        /// Output directory (overrides the scenario and the environment).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plan one route and print it as a cell list.
    Route {
        /// Scenario file, or a preset name.
        scenario: String,
        /// Source cell as `x,y`.
        #[arg(long, value_parser = parse_xy)]
        from: (u32, u32),
        /// Departure time step.
        #[arg(long, default_value_t = 0)]
        at: u32,
        /// Destination cell as `x,y`.
        #[arg(long, value_parser = parse_xy)]
        to: (u32, u32),
        #[arg(long, value_enum, default_value_t = PlanRouter::Srts)]
        router: PlanRouter,
        /// Text map (`#` blocked, `.` free) replacing the scenario's no-fly zones.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Run the router matrix over the three traffic levels and print a summary.
    Compare {
        /// Scenario file, or a preset name.
        scenario: String,
        /// Also write the summary as `compare.csv` into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a scenario without running it.
    Validate {
        /// Scenario file, or a preset name.
        scenario: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlanRouter {
    Bfs,
    Srts,
}

fn parse_xy(s: &str) -> Result<(u32, u32), String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected x,y, got `{s}`"))?;
    let num = |v: &str| v.trim().parse::<u32>().map_err(|e| format!("`{v}`: {e}"));
    Ok((num(x)?, num(y)?))
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Io { .. } => Failure::Runtime(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn load(scenario_arg: &str) -> Result<Scenario, Failure> {
    if !Path::new(scenario_arg).exists() {
        if let Some(s) = preset(scenario_arg) {
            return Ok(s);
        }
        return Err(Failure::Config(format!(
            "{scenario_arg}: no such file or preset (presets: {})",
            PRESETS.join(", ")
        )));
    }
    Ok(parse_scenario(scenario_arg)?)
}

/// `--out`, then the scenario's own directory, then `$SRTS_OUTPUT_ROOT/<name>`,
/// then `runs/<name>`.
fn output_dir(scenario: &Scenario, out: Option<PathBuf>) -> PathBuf {
    if let Some(dir) = out {
        return dir;
    }
    if let Some(dir) = &scenario.output.dir {
        return PathBuf::from(dir);
    }
    let root =
        std::env::var_os(OUTPUT_ROOT_VAR).map_or_else(|| PathBuf::from("runs"), PathBuf::from);
    root.join(&scenario.name)
}

fn runtime<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Runtime(e.to_string())
}

fn cmd_run(
    scenario_arg: &str,
    out: Option<PathBuf>,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    let scenario = load(scenario_arg)?;
    let report = run(&scenario).map_err(runtime)?;
    let dir = output_dir(&scenario, out);
    let arts = emit_artifacts(&report, &scenario, &dir)
        .map_err(|e| runtime(format!("{}: {e}", dir.display())))?;
    let m = &report.aggregate;
    writeln!(
        stdout,
        "{}: {} replication(s), router {}; throughput {}, conflict ratio {}, no-link rate {}, avg turns {}",
        scenario.name,
        scenario.replications,
        scenario.router.label(),
        format_sig(m.throughput),
        format_sig(m.conflict_ratio),
        format_sig(m.no_link_rate),
        format_sig(m.avg_turns)
    )
    .map_err(runtime)?;
    writeln!(stdout, "artifacts in {}", arts.dir.display()).map_err(runtime)?;
    Ok(())
}

fn cmd_route(
    scenario_arg: &str,
    from: (u32, u32),
    at: u32,
    to: (u32, u32),
    router: PlanRouter,
    map: Option<PathBuf>,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    let scenario = load(scenario_arg)?;
    let static_map = match map {
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| runtime(format!("{}: {e}", path.display())))?;
            StaticMap::parse(&text)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
        }
        None => scenario.static_map(),
    };
    // A map file sets the grid size.
    let mut scenario = scenario;
    scenario.grid.width_cells = static_map.width();
    scenario.grid.height_cells = static_map.height();
    let geometry = scenario.geometry();
    let mut env = AirspaceEnv::with_static_map(geometry, static_map)
        .map_err(|e| Failure::Config(e.to_string()))?;
    let policy: DeadlinePolicy = scenario.routing.deadline_policy;
    let request = RouteRequest::new(1, TSCell::new(from.0, from.1, at), to, &policy);
    let outcome = match router {
        PlanRouter::Bfs => route_bfs(&mut env, &request),
        PlanRouter::Srts => {
            let comms = scenario.comms();
            let comms = scenario.routing.connectivity_check.then_some(&comms);
            route_srts(&mut env, comms, &request, &scenario.routing)
        }
    }
    .map_err(|e| Failure::Config(e.to_string()))?;
    let Some(traj) = outcome.trajectory else {
        return Err(Failure::Runtime(format!(
            "no route from {:?} at t={at} to {:?} by t={}",
            from, to, request.deadline
        )));
    };
    for c in traj.cells() {
        writeln!(stdout, "{},{},{}", c.x, c.y, c.t).map_err(runtime)?;
    }
    writeln!(
        stdout,
        "# arrival {} turns {} waits {} expanded {}",
        traj.arrival_time(),
        traj.turn_count(),
        traj.wait_count(),
        outcome.stats.expanded
    )
    .map_err(runtime)?;
    Ok(())
}

const COMPARE_HEADER: [&str; 13] = [
    "router",
    "interval_s",
    "throughput",
    "rejected",
    "avg_flight_time_s",
    "conflict_pct",
    "no_link_pct",
    "avg_in_flight",
    "avg_turns",
    "energy_small",
    "energy_medium",
    "energy_large",
    "mean_expanded",
];

fn compare_row(label: &str, interval: f64, m: &Metrics) -> Vec<String> {
    let mut row = vec![label.to_string(), format_sig(interval)];
    row.extend(
        [
            m.throughput,
            m.rejected,
            m.avg_flight_time_s,
            100.0 * m.conflict_ratio,
            100.0 * m.no_link_rate,
            m.avg_in_flight,
            m.avg_turns,
            m.energy_small,
            m.energy_medium,
            m.energy_large,
            m.mean_route_expanded,
        ]
        .map(format_sig),
    );
    row
}

fn cmd_compare(
    scenario_arg: &str,
    out: Option<PathBuf>,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    let base = load(scenario_arg)?;
    let mut rows = Vec::new();
    for interval in [10.0, 20.0, 30.0] {
        let mut variants: Vec<(String, Scenario)> = RouterKind::ALL
            .iter()
            .map(|&router| {
                let mut s = base.clone();
                s.router = router;
                (router.label().to_string(), s)
            })
            .collect();
        let mut plain = base.clone();
        plain.router = RouterKind::Srts;
        plain.routing.turn_penalty_weight = Some(0.0);
        variants.push(("srts-no-turn-penalty".into(), plain));
        for (label, mut s) in variants {
            s.traffic.generation_interval_s = interval;
            let report = run(&s).map_err(runtime)?;
            rows.push(compare_row(&label, interval, &report.aggregate));
        }
    }
    let widths: Vec<usize> = (0..COMPARE_HEADER.len())
        .map(|i| {
            rows.iter()
                .map(|r| r[i].len())
                .chain([COMPARE_HEADER[i].len()])
                .max()
                .unwrap()
        })
        .collect();
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    writeln!(stdout, "{}", line(COMPARE_HEADER.to_vec())).map_err(runtime)?;
    for r in &rows {
        writeln!(stdout, "{}", line(r.iter().map(String::as_str).collect())).map_err(runtime)?;
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(&dir).map_err(runtime)?;
        let mut csv = COMPARE_HEADER.join(",") + "\n";
        for r in &rows {
            csv.push_str(&r.join(","));
            csv.push('\n');
        }
        std::fs::write(dir.join("compare.csv"), csv).map_err(runtime)?;
    }
    Ok(())
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Run { scenario, out } => cmd_run(&scenario, out, stdout),
        Command::Route {
            scenario,
            from,
            at,
            to,
            router,
            map,
        } => cmd_route(&scenario, from, at, to, router, map, stdout),
        Command::Compare { scenario, out } => cmd_compare(&scenario, out, stdout),
        Command::Validate { scenario } => {
            load(&scenario).and_then(|s| writeln!(stdout, "{}: ok", s.name).map_err(runtime))
        }
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Config(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
    }
}
