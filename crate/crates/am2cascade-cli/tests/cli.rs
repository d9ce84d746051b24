use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use am2cascade::io::{
    parse_gamma_csv, parse_grid_csv, parse_legend_csv, parse_trajectory_csv, read_basin_report,
    read_steady_states,
};

fn am2(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_am2cascade"))
        .args(args)
        .env_remove("AM2_PRESET_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const POINT: [&str; 8] = ["--D", "0.1", "--r", "0.3", "--s1in", "50", "--s2in", "150"];

fn with_point<'a>(cmd: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![cmd];
    v.extend_from_slice(&POINT);
    v.extend_from_slice(extra);
    v
}

#[test]
fn lambda_prints_break_evens_and_sentinels() {
    let o = am2(&[
        "lambda",
        "--D",
        "0.1",
        "--r",
        "0.3333333333333333",
        "--s1in",
        "1",
        "--s2in",
        "150",
    ]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let value = |key: &str| -> String {
        out.lines()
            .find_map(|l| l.strip_prefix(key).map(|v| v.trim().to_string()))
            .unwrap_or_else(|| panic!("{key} missing in {out}"))
    };
    assert!((value("lambda1_1 ").parse::<f64>().unwrap() - 7.1).abs() < 5e-3);
    assert!((value("lambda1_2 ").parse::<f64>().unwrap() - 2.366).abs() < 5e-3);
    let o = am2(&[
        "lambda",
        "--D",
        "0.25",
        "--r",
        "0.3333333333333333",
        "--s1in",
        "1",
        "--s2in",
        "150",
    ]);
    assert!(stdout(&o)
        .lines()
        .any(|l| l.starts_with("lambda1_1") && l.ends_with("inf")));
}

#[test]
fn steady_states_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = am2(&with_point("steady-states", &["--out", out]));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("stable: E11^11"));
    let report =
        read_steady_states(fs::File::open(dir.path().join("steady_states.json")).unwrap()).unwrap();
    assert_eq!(report.point.s1in, 50.0);
    assert!(report
        .states
        .iter()
        .any(|s| s.exists && s.label.to_string() == "E11^11"));
}

#[test]
fn diagram_writes_parseable_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = am2(&[
        "diagram", "--plane", "fig3", "--grid", "60", "60", "--out", out,
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("distinct regions: "));
    let open = |n: &str| fs::File::open(dir.path().join(n)).unwrap();
    let grid = parse_grid_csv(open("grid.csv")).unwrap();
    assert_eq!(grid.len(), 3600);
    let legend = parse_legend_csv(open("legend.csv")).unwrap();
    assert!(!legend.is_empty());
    let ids: std::collections::BTreeSet<_> = grid.iter().filter_map(|g| g.region_id).collect();
    assert_eq!(ids.len(), legend.len());
    let gamma = parse_gamma_csv(open("gamma.csv")).unwrap();
    assert!(gamma.iter().any(|g| g.gamma == 0) && gamma.iter().any(|g| g.gamma == 15));
    let check: serde_json::Value = serde_json::from_reader(open("table_check.json")).unwrap();
    assert!(check["checks"].as_array().is_some_and(|a| !a.is_empty()));
}

#[test]
fn simulate_converges_and_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = am2(&with_point("simulate", &["--seed", "3", "--out", out]));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("to E11^11#1"));
    let rows =
        parse_trajectory_csv(fs::File::open(dir.path().join("trajectory.csv")).unwrap()).unwrap();
    assert!(rows.len() > 10);
    assert_eq!(rows[0].t, 0.0);
}

#[test]
fn simulate_reports_max_time_with_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = am2(&with_point("simulate", &["--tmax", "1", "--out", out]));
    assert_eq!(code(&o), 4);
    assert!(dir.path().join("trajectory.csv").is_file());
}

#[test]
fn simulate_accepts_explicit_initial_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    // Washout state of the operating point.
    let o = am2(&with_point(
        "simulate",
        &["--ic", "50,0,150,0,50,0,150,0", "--out", out],
    ));
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("converged at t=0 to E00^00#1"));
    let bad = am2(&with_point("simulate", &["--ic", "1,2,3", "--out", out]));
    assert_eq!(code(&bad), 2);
}

#[test]
fn basins_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = am2(&with_point(
        "basins",
        &["--n", "20", "--seed", "5", "--out", out],
    ));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_basin_report(fs::File::open(dir.path().join("basins.json")).unwrap()).unwrap();
    assert_eq!((r.n, r.seed), (20, 5));
    assert_eq!(
        r.counts.values().sum::<usize>() + r.unmatched + r.not_converged,
        20
    );
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

#[test]
fn identical_inputs_give_identical_bytes() {
    let runs: Vec<Vec<&str>> = vec![
        vec!["diagram", "--plane", "fig6", "--grid", "40", "40"],
        with_point("basins", &["--n", "30", "--seed", "11"]),
        with_point("simulate", &["--seed", "11"]),
        with_point("steady-states", &[]),
    ];
    for args in runs {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        for (d, jobs) in [(&a, "1"), (&b, "3")] {
            let mut full = args.clone();
            full.extend(["--out", d.path().to_str().unwrap(), "--jobs", jobs]);
            assert_eq!(code(&am2(&full)), 0, "{args:?}");
        }
        assert_eq!(read_all(a.path()), read_all(b.path()), "{args:?}");
    }
}

#[test]
fn config_file_and_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "[params]\npreset = \"bernard2001\"\n\n[point]\nD = 0.1\nr = 0.3\nS1in = 50\nS2in = 150\n",
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let base = stdout(&am2(&["lambda", "--config", c]));
    let over = stdout(&am2(&["lambda", "--config", c, "--D", "0.05"]));
    assert!(base.contains("lambda1_1   8.875"), "{base}");
    assert_ne!(base, over);
    let o = am2(&["lambda", "--config", c, "--plane", "fig3"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn preset_directory_and_params_file() {
    let dir = tempfile::tempdir().unwrap();
    let params = "m1 = 0.3\nkS1 = 7.1\nm2 = 0.74\nkS2 = 9.28\nkI = 256.0\nk1 = 42.14\nk2 = 116.5\nk3 = 268.0\n";
    fs::write(dir.path().join("mine.toml"), params).unwrap();
    let args = [
        "lambda", "--preset", "mine", "--D", "0.25", "--r", "0.5", "--s1in", "1", "--s2in", "1",
    ];
    let o = Command::new(env!("CARGO_BIN_EXE_am2cascade"))
        .args(args)
        .env("AM2_PRESET_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    // D1 = 0.5 > m1 = 0.3, so both Monod break-evens are infinite.
    assert!(stdout(&o)
        .lines()
        .any(|l| l.starts_with("lambda1_1") && l.ends_with("inf")));
    assert_eq!(code(&am2(&args)), 2, "unknown preset without the directory");

    let file = dir.path().join("mine.toml");
    let o = am2(&[
        "lambda",
        "--params",
        file.to_str().unwrap(),
        "--D",
        "0.25",
        "--r",
        "0.5",
        "--s1in",
        "1",
        "--s2in",
        "1",
    ]);
    assert_eq!(
        stdout(&o),
        stdout(&am2(&[
            "lambda",
            "--preset",
            "bernard2001-lowm1",
            "--D",
            "0.25",
            "--r",
            "0.5",
            "--s1in",
            "1",
            "--s2in",
            "1"
        ]))
    );
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["lambda", "--D", "0.1"],
        vec![
            "lambda", "--D", "0.1", "--r", "1.5", "--s1in", "1", "--s2in", "1",
        ],
        vec!["diagram", "--plane", "fig99"],
        vec!["diagram"],
        vec!["steady-states", "--config", "/nonexistent/run.toml"],
        vec!["frobnicate"],
    ] {
        assert_eq!(code(&am2(&args)), 2, "{args:?}");
    }
}
