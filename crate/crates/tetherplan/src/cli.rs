//! Command-line interface.
//!
//! Exit codes: 0 on success, 1 when the planner finds no plan, 2 for bad input
//! (arguments, scene files, plan files) or I/O failures.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use tetherplan_core::planner::PlanStatus;
use tetherplan_core::robot::Arm;
use tetherplan_core::torque::{compare_max_torque, trace_plan};

use crate::io;
use crate::scene::Scene;
use crate::sweep::{self, Mode, SweepConfig};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO_PLAN: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "tetherplan", version, about = "Dual-arm regrasp planning for a tool hanging from a balancer")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plan one pick-regrasp-place task and write the plan CSV.
    Plan(PlanArgs),
    /// Run the roll x pitch benchmark in both planner modes.
    Sweep(SweepArgs),
    /// Cable-induced joint torques along one plan, or a comparison of two.
    Torque(TorqueArgs),
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Scene file, or "default" for the bundled scene.
    #[arg(long, default_value = "default")]
    pub scene: String,
    /// Roll,pitch,yaw offset in degrees applied to the start pose (tool frame).
    #[arg(long, value_name = "R,P,Y", default_value = "0,0,0", value_parser = parse_rpy, allow_hyphen_values = true)]
    pub start_rpy: [f64; 3],
    /// Roll,pitch,yaw offset in degrees applied to the goal pose (tool frame).
    #[arg(long, value_name = "R,P,Y", default_value = "0,0,0", value_parser = parse_rpy, allow_hyphen_values = true)]
    pub goal_rpy: [f64; 3],
    /// Enforce the cable constraints (the default).
    #[arg(long, overrides_with = "unconstrained")]
    pub constrained: bool,
    /// Ignore the cable: no bend limit, no cable collision checks.
    #[arg(long, overrides_with = "constrained")]
    pub unconstrained: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output plan CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Scene file, or "default" for the bundled scene.
    #[arg(long, default_value = "default")]
    pub scene: String,
    /// Directory for sweep.csv, grid.txt, summary.txt and scene.toml.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct TorqueArgs {
    /// Plan CSV. Give two (constrained first, then unconstrained) for a
    /// reduction table.
    #[arg(long, num_args = 1..=2, required = true)]
    pub plan_file: Vec<PathBuf>,
    /// Scene the plans were made in.
    #[arg(long, default_value = "default")]
    pub scene: String,
    /// Output torque CSV.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_rpy(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [r, p, y] = parts.as_slice() else {
        return Err(format!("expected three comma-separated angles, got {s:?}"));
    };
    let num = |v: &str| {
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("{v:?} is not a finite number"))
    };
    Ok([num(r)?, num(p)?, num(y)?])
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INPUT,
            };
        }
    };
    let result = match &cli.command {
        Command::Plan(a) => cmd_plan(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Torque(a) => cmd_torque(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

fn cmd_plan(a: &PlanArgs) -> Result<i32, Error> {
    let scene = Scene::load(&a.scene)?;
    let task = scene.task_with_offsets(a.start_rpy, a.goal_rpy);
    let mode = if a.unconstrained { Mode::Unconstrained } else { Mode::Constrained };
    let (result, outcome) = sweep::evaluate(&scene, &task, mode, a.seed)?;
    match &result.status {
        PlanStatus::Success(plan) => {
            io::write_plan_file(&a.out, plan)?;
            println!(
                "{}: {} waypoints, {} handover(s), max bend {:.1} deg, label {} ({})",
                mode.name(),
                plan.len(),
                plan.handover_count(),
                plan.max_theta().to_degrees(),
                outcome.label,
                outcome.label.symbol()
            );
            Ok(EXIT_OK)
        }
        PlanStatus::NoPlan(reason) => {
            // Header-only file so downstream tooling sees a well-formed CSV.
            io::write_plan_file(&a.out, &Default::default())?;
            println!("{}: no plan ({reason:?}), {} edges validated", mode.name(), result.stats.validated_edges);
            Ok(EXIT_NO_PLAN)
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn cmd_sweep(a: &SweepArgs) -> Result<i32, Error> {
    let scene = Scene::load(&a.scene)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|source| Error::Io {
        path: a.out_dir.display().to_string(),
        source,
    })?;
    let report = sweep::run_sweep(&scene, &SweepConfig { seed: a.seed, threads: None })?;
    report.write_csv(io::create(&a.out_dir.join("sweep.csv"))?)?;
    let grid = report.grid_text();
    let summary = report.summary_text();
    write_text(&a.out_dir.join("grid.txt"), &grid)?;
    write_text(&a.out_dir.join("summary.txt"), &summary)?;
    write_text(&a.out_dir.join("scene.toml"), &scene.echo())?;
    print!("{grid}\n{summary}");
    Ok(EXIT_OK)
}

fn cmd_torque(a: &TorqueArgs) -> Result<i32, Error> {
    let scene = Scene::load(&a.scene)?;
    let mut traces = Vec::new();
    for path in &a.plan_file {
        let plan = io::read_plan_file(path)?;
        traces.push(trace_plan(&scene.cell, &plan)?);
    }
    io::write_torque(io::create(&a.out)?, &traces)?;
    let mut table = String::new();
    let fmt = |v: Option<f64>, unit: &str| v.map_or("n/a".to_string(), |v| format!("{v:.3}{unit}"));
    if let [constrained, unconstrained] = traces.as_slice() {
        let reduction = compare_max_torque(constrained, unconstrained)?;
        let _ = writeln!(table, "{:<6} {:>14} {:>14} {:>10}", "arm", "constrained", "unconstrained", "reduction");
        for arm in Arm::BOTH {
            let _ = writeln!(
                table,
                "{:<6} {:>14} {:>14} {:>10}",
                arm.name(),
                fmt(constrained.max_abs(arm), " Nm"),
                fmt(unconstrained.max_abs(arm), " Nm"),
                fmt(reduction[arm.index()], "%"),
            );
        }
    } else {
        let _ = writeln!(table, "{:<6} {:>14}", "arm", "peak torque");
        for arm in Arm::BOTH {
            let _ = writeln!(table, "{:<6} {:>14}", arm.name(), fmt(traces[0].max_abs(arm), " Nm"));
        }
    }
    print!("{table}");
    Ok(EXIT_OK)
}
