use std::path::Path;
use std::process::Command;

use srts_cli::run_cli;

fn cli(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut argv = vec!["srts"];
    argv.extend_from_slice(args);
    let code = run_cli(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn write_scenario(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = r#"
name = "small"
replications = 2

[grid]
width_cells = 16
height_cells = 16

[traffic]
sim_length_steps = 120

[[launch_areas]]
area = { x = 0, y = 0, w = 2, h = 2 }
probability = 0.9

[[launch_areas]]
area = { x = 14, y = 0, w = 2, h = 2 }
probability = 0.8

[[landing_areas]]
x = 0
y = 14
w = 2
h = 2

[[landing_areas]]
x = 14
y = 14
w = 2
h = 2

[[stations]]
id = 0
x_m = 144.0
y_m = 144.0
"#;

#[test]
fn validate_accepts_good_files_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), "s.toml", SMALL);
    let (code, out, _) = cli(&["validate", &path]);
    assert_eq!(code, 0);
    assert!(out.contains("small: ok"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn config_errors_exit_one_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(
        dir.path(),
        "bad.toml",
        &format!("separation_m = -1.0\n{SMALL}"),
    );
    let (code, _, err) = cli(&["validate", &path]);
    assert_eq!(code, 1);
    assert!(err.contains("separation_m"), "{err}");

    let path = write_scenario(dir.path(), "typo.toml", &format!("sead = 3\n{SMALL}"));
    let (code, _, err) = cli(&["validate", &path]);
    assert_eq!(code, 1);
    assert!(err.contains("line 1"), "{err}");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(cli(&["frobnicate"]).0, 1);
    assert_eq!(cli(&["validate", "desk", "--bogus"]).0, 1);
    assert_eq!(cli(&["route", "desk", "--from", "1;2", "--to", "3,3"]).0, 1);
    assert_eq!(cli(&[]).0, 1);
    assert_eq!(cli(&["--help"]).0, 0);
}

#[test]
fn route_on_empty_map_is_a_manhattan_walk() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("map.txt");
    std::fs::write(&map, "........\n".repeat(6)).unwrap();
    let (code, out, _) = cli(&[
        "route",
        "desk",
        "--from",
        "1,1",
        "--at",
        "4",
        "--to",
        "6,4",
        "--map",
        map.to_str().unwrap(),
        "--router",
        "bfs",
    ]);
    assert_eq!(code, 0);
    let cells: Vec<(u32, u32, u32)> = out
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let v: Vec<u32> = l.split(',').map(|s| s.parse().unwrap()).collect();
            (v[0], v[1], v[2])
        })
        .collect();
    assert_eq!(cells.first(), Some(&(1, 1, 4)));
    assert_eq!(cells.last(), Some(&(6, 4, 12)));
    for w in cells.windows(2) {
        assert_eq!(w[1].2, w[0].2 + 1);
        assert_eq!(w[0].0.abs_diff(w[1].0) + w[0].1.abs_diff(w[1].1), 1);
    }
}

#[test]
fn unroutable_request_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("map.txt");
    std::fs::write(&map, "..#..\n..#..\n..#..\n").unwrap();
    let (code, _, err) = cli(&[
        "route",
        "desk",
        "--from",
        "0,0",
        "--to",
        "4,0",
        "--map",
        map.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("no route"));
}

#[test]
fn run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), "s.toml", SMALL);
    let out_dir = dir.path().join("out");
    let (code, out, err) = cli(&["run", &path, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("artifacts in"));
    for f in [
        "metrics.csv",
        "density.csv",
        "routes.csv",
        "manifest.txt",
        "channels_t3.csv",
        "channels_t119.csv",
    ] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let metrics = std::fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 4);
    assert!(metrics.lines().last().unwrap().starts_with("mean,"));

    // The manifest alone reproduces the run.
    let again = dir.path().join("again");
    let manifest = out_dir.join("manifest.txt");
    let (code, _, _) = cli(&[
        "run",
        manifest.to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    for f in ["metrics.csv", "density.csv", "routes.csv", "manifest.txt"] {
        assert_eq!(
            std::fs::read(out_dir.join(f)).unwrap(),
            std::fs::read(again.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn output_root_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), "s.toml", SMALL);
    let status = Command::new(env!("CARGO_BIN_EXE_srts"))
        .args(["run", &path])
        .env("SRTS_OUTPUT_ROOT", dir.path().join("root"))
        .output()
        .unwrap();
    assert!(status.status.success());
    assert!(dir.path().join("root/small/metrics.csv").exists());

    let status = Command::new(env!("CARGO_BIN_EXE_srts"))
        .args(["validate", "/nonexistent.toml"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(1));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), "s.toml", SMALL);
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let (code, _, _) = cli(&["run", &path, "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn compare_on_desk_shows_zero_managed_conflicts() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = cli(&["compare", "desk", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let csv = std::fs::read_to_string(dir.path().join("compare.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 15);
    for r in &rows {
        let conflict: f64 = r[5].parse().unwrap();
        match r[0] {
            "bfs" | "srts" | "srts-no-turn-penalty" => assert_eq!(conflict, 0.0, "{r:?}"),
            "none" => assert!(conflict > 0.0),
            _ => {}
        }
    }
    assert!(out.lines().next().unwrap().contains("conflict_pct"));
}

#[test]
fn shipped_scenarios_match_the_presets() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    for name in srts_core::io::PRESETS {
        let file = srts_core::io::parse_scenario(root.join(format!("{name}.toml"))).unwrap();
        let preset = srts_core::io::preset(name).unwrap();
        assert_eq!(
            srts_core::io::serialize_scenario(&file),
            srts_core::io::serialize_scenario(&preset),
            "{name}"
        );
    }
}
