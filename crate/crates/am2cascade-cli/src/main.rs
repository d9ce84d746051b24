//! `am2cascade`: break-evens, steady states, operating diagrams and
//! simulations of the two-chemostat AM2 cascade.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use am2cascade::diagram::{
    figure_preset, gamma_sample, region_table_check, scan_plane, PlaneSpec, GAMMA_IDS,
};
use am2cascade::io::{
    fmt_g9, params_from_file, rounded_json, write_basin_report, write_gamma_csv, write_grid_csv,
    write_legend_csv, write_steady_states, write_trajectory_csv, IoError, LegendRow, PlaneSection,
    RunConfig, SteadyStateReport,
};
use am2cascade::simulator::{
    basin_sample, integrate, seeded_initial_state, IntegrateOptions, TerminalEvent,
};
use am2cascade::stability::classify_all;
use am2cascade::{enumerate_steady_states, KineticParams, Model, ModelError, OperatingPoint};
use clap::{Args, Parser, Subcommand};

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_NOT_CONVERGED: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "am2cascade",
    version,
    about = "AM2 digestion model in two chemostats in series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Break-even concentrations and critical rates at (D, r).
    Lambda(Common),
    /// Enumerate steady states with existence reasons and stability verdicts.
    SteadyStates(Common),
    /// Scan a plane: grid, legend and boundary curves.
    Diagram(Common),
    /// Integrate one trajectory of the full system.
    Simulate(Common),
    /// Sample basins of attraction from random initial conditions.
    Basins(Common),
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in or preset-directory parameter set.
    #[arg(long)]
    preset: Option<String>,
    /// TOML file with kinetic parameters.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Total dilution rate (1/day).
    #[arg(long = "D")]
    d: Option<f64>,
    /// Volume fraction of the first stage, in (0, 1).
    #[arg(long)]
    r: Option<f64>,
    /// Inlet organic substrate (g/L).
    #[arg(long)]
    s1in: Option<f64>,
    /// Inlet volatile fatty acids (mmol/L).
    #[arg(long)]
    s2in: Option<f64>,
    /// Reference figure (fig3 .. fig7).
    #[arg(long)]
    plane: Option<String>,
    /// Grid cells along each axis.
    #[arg(long, num_args = 2, value_names = ["NX", "NY"])]
    grid: Option<Vec<usize>>,
    /// Integrator relative tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Seed for random initial conditions.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Number of trajectories for `basins`.
    #[arg(long)]
    n: Option<usize>,
    /// Initial state, eight comma-separated values.
    #[arg(long, value_delimiter = ',')]
    ic: Option<Vec<f64>>,
    /// Integration time limit (days).
    #[arg(long)]
    tmax: Option<f64>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numeric(String),
    NotConverged(String),
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Model(m) => m.into(),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::InvalidParameter { .. }
            | ModelError::NegativeConcentration { .. }
            | ModelError::Unknown { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Lambda(c) => run(c, cmd_lambda),
        Command::SteadyStates(c) => run(c, cmd_steady_states),
        Command::Diagram(c) => run(c, cmd_diagram),
        Command::Simulate(c) => run(c, cmd_simulate),
        Command::Basins(c) => run(c, cmd_basins),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("numeric failure: {m}");
            ExitCode::from(EXIT_NUMERIC)
        }
        Err(Failure::NotConverged(m)) => {
            eprintln!("not converged: {m}");
            ExitCode::from(EXIT_NOT_CONVERGED)
        }
    }
}

/// Resolved inputs of one invocation.
struct Run {
    cfg: RunConfig,
    params: KineticParams,
    model: Model,
}

fn run(c: Common, cmd: fn(&Run) -> Outcome) -> Outcome {
    let cfg = merge(&c)?;
    if let Some(jobs) = cfg.options.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let params = match &c.params {
        Some(path) => params_from_file(path, &cfg.params)?,
        None => cfg.params()?,
    };
    let model = Model::new(&params)?;
    cmd(&Run { cfg, params, model })
}

/// Load `--config` (if any) and overlay the flags.
fn merge(c: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if c.preset.is_some() {
        cfg.params.preset = c.preset.clone();
    }
    let point_flags = [c.d, c.r, c.s1in, c.s2in];
    if point_flags.iter().any(Option::is_some) {
        let base = cfg.point;
        let pick = |flag: Option<f64>, name: &str, old: Option<f64>| {
            flag.or(old)
                .ok_or_else(|| Failure::Usage(format!("missing --{name}")))
        };
        let op = OperatingPoint::new(
            pick(c.d, "D", base.map(|p| p.d))?,
            pick(c.r, "r", base.map(|p| p.r))?,
            pick(c.s1in, "s1in", base.map(|p| p.s1in))?,
            pick(c.s2in, "s2in", base.map(|p| p.s2in))?,
        )?;
        cfg.point = Some(op);
    }
    if let Some(name) = &c.plane {
        cfg.plane = Some(PlaneSection::Figure {
            figure: name.clone(),
        });
    }
    let o = &mut cfg.options;
    if let Some(g) = &c.grid {
        o.grid = Some([g[0], g[1]]);
    }
    o.tol = c.tol.or(o.tol);
    o.seed = c.seed.or(o.seed);
    o.out = c.out.clone().or(o.out.take());
    o.jobs = c.jobs.or(o.jobs);
    o.n = c.n.or(o.n);
    o.tmax = c.tmax.or(o.tmax);
    if c.ic.is_some() {
        o.ic = c.ic.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn point(run: &Run) -> Result<OperatingPoint, Failure> {
    if run.cfg.plane.is_some() {
        return Err(Failure::Usage(
            "this command takes a point, not a plane".into(),
        ));
    }
    run.cfg.point.ok_or_else(|| {
        Failure::Usage("an operating point is required (--D --r --s1in --s2in or [point])".into())
    })
}

fn out_dir(run: &Run) -> Result<PathBuf, Failure> {
    let dir = run
        .cfg
        .options
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn integrate_opts(run: &Run) -> IntegrateOptions {
    let d = IntegrateOptions::default();
    IntegrateOptions {
        tol: run.cfg.options.tol.unwrap_or(d.tol),
        tmax: run.cfg.options.tmax.unwrap_or(d.tmax),
        ..d
    }
}

fn cmd_lambda(run: &Run) -> Outcome {
    let op = point(run)?;
    let m = &run.model;
    let be = m.break_evens(op.d, op.r);
    let cr = m.critical_rates(&op);
    let rows: [(&str, String); 12] = [
        ("lambda1_1", be.l1[0].to_string()),
        ("lambda1_2", be.l1[1].to_string()),
        ("lambda2_11", be.l2[0][0].to_string()),
        ("lambda2_12", be.l2[0][1].to_string()),
        ("lambda2_21", be.l2[1][0].to_string()),
        ("lambda2_22", be.l2[1][1].to_string()),
        ("D1m", fmt_g9(cr.d1m)),
        ("D2m", fmt_g9(cr.d2m)),
        ("D1star", fmt_g9(cr.d1star)),
        ("D2star", fmt_g9(cr.d2star)),
        ("S2m", fmt_g9(cr.s2m)),
        ("mu2_S2m", fmt_g9(cr.mu2max)),
    ];
    let mut out = std::io::stdout().lock();
    for (k, v) in rows {
        writeln!(out, "{k:<11} {v}").map_err(|e| Failure::Usage(e.to_string()))?;
    }
    writeln!(out, "{:<11} {}", "case", m.operating_case(op.s2in))
        .map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(())
}

fn cmd_steady_states(run: &Run) -> Outcome {
    let op = point(run)?;
    let m = &run.model;
    let mut states = enumerate_steady_states(&op, m);
    classify_all(&mut states, &op, m);
    for s in states.iter().filter(|s| s.exists) {
        let v = s.stability.as_ref().expect("classified");
        println!(
            "{}#{} {:?} (numeric {:?}, agree {})",
            s.label, s.branch, v.analytic, v.numeric, v.agree
        );
    }
    let stable: Vec<String> = states
        .iter()
        .filter(|s| s.exists && s.stability.as_ref().is_some_and(|v| v.is_stable()))
        .map(|s| s.label.to_string())
        .collect();
    println!("stable: {}", stable.join(" "));
    let report = SteadyStateReport::new(&run.params, m, &op, states);
    let dir = out_dir(run)?;
    write_steady_states(create(&dir, "steady_states.json")?, &report)?;
    Ok(())
}

fn cmd_diagram(run: &Run) -> Outcome {
    if run.cfg.point.is_some() {
        return Err(Failure::Usage("diagram takes a plane, not a point".into()));
    }
    let (plane, figure): (PlaneSpec, _) = run
        .cfg
        .plane()?
        .ok_or_else(|| Failure::Usage("a plane is required (--plane figN or [plane])".into()))?;
    let regions: &[u8] = match figure {
        Some(name) => figure_preset(name)?.regions,
        None => &[],
    };
    let m = &run.model;
    let scan = scan_plane(&plane, m)?;
    let legend = LegendRow::from_scan(&scan, m, regions);
    let curves = GAMMA_IDS
        .map(|id| gamma_sample(id, &plane, m))
        .collect::<Result<Vec<_>, _>>()?;
    let dir = out_dir(run)?;
    write_grid_csv(create(&dir, "grid.csv")?, &scan, &legend)?;
    write_legend_csv(create(&dir, "legend.csv")?, &legend)?;
    write_gamma_csv(create(&dir, "gamma.csv")?, &curves)?;
    println!("distinct regions: {}", scan.distinct_signatures());
    if let Some(name) = figure {
        let preset = figure_preset(name)?;
        let check = region_table_check(&scan, &preset, m);
        let mut w = create(&dir, "table_check.json")?;
        w.write_all(rounded_json(&check).as_bytes())
            .map_err(|e| Failure::Usage(e.to_string()))?;
        for c in check.mismatches() {
            println!(
                "mismatch: region {} at ({}, {}) located {:?} computed {} expected {}",
                c.region,
                fmt_g9(c.point.0),
                fmt_g9(c.point.1),
                c.located,
                c.computed,
                c.expected.as_deref().unwrap_or("-")
            );
        }
    }
    Ok(())
}

fn cmd_simulate(run: &Run) -> Outcome {
    let op = point(run)?;
    let m = &run.model;
    let ic: [f64; 8] = match &run.cfg.options.ic {
        Some(v) => v.as_slice().try_into().expect("validated length"),
        None => seeded_initial_state(run.cfg.options.seed.unwrap_or(0), &op, m),
    };
    let traj = integrate(&ic, &op, m, &integrate_opts(run))?;
    let dir = out_dir(run)?;
    write_trajectory_csv(create(&dir, "trajectory.csv")?, &traj, &op, m)?;
    println!(
        "steps: {}  projections: {}",
        traj.steps.len(),
        traj.projections
    );
    match &traj.event {
        TerminalEvent::ConvergedTo { t, label, branch } => {
            match label {
                Some(l) => println!("converged at t={} to {l}#{branch}", fmt_g9(*t)),
                None => println!("converged at t={} to an unlisted state", fmt_g9(*t)),
            }
            Ok(())
        }
        TerminalEvent::MaxTime { t } => Err(Failure::NotConverged(format!(
            "reached tmax = {}",
            fmt_g9(*t)
        ))),
        TerminalEvent::BlowUp { t } => Err(Failure::NotConverged(format!(
            "blow-up guard at t = {}",
            fmt_g9(*t)
        ))),
    }
}

fn cmd_basins(run: &Run) -> Outcome {
    let op = point(run)?;
    let n = run.cfg.options.n.unwrap_or(200);
    let seed = run.cfg.options.seed.unwrap_or(0);
    let report = basin_sample(&op, &run.model, n, seed, &integrate_opts(run))?;
    let dir = out_dir(run)?;
    write_basin_report(create(&dir, "basins.json")?, &report)?;
    for (k, v) in &report.counts {
        println!("{k} {v}");
    }
    println!(
        "unmatched {}  not_converged {}",
        report.unmatched, report.not_converged
    );
    if report.not_converged > 0 {
        return Err(Failure::NotConverged(format!(
            "{} of {n} trajectories did not converge",
            report.not_converged
        )));
    }
    Ok(())
}
