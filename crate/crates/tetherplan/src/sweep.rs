//! The roll × pitch benchmark.
//!
//! Each cell plans the scene's baseline task with the start rolled and the goal
//! pitched (both about the tool's own axes), once per planner mode. Unconstrained
//! plans are re-checked and re-labelled; constrained plans must pass the same
//! re-check unchanged.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use tetherplan_core::audit::{audit_plan, AuditOptions};
use tetherplan_core::planner::{plan_with_deadline, PlanResult, PlanStatus, PlannerOptions, Task};
use tetherplan_core::robot::Arm;
use tetherplan_core::torque::trace_plan;

use crate::outcome::{classify, Label, Outcome};
use crate::scene::Scene;
use crate::Error;

/// Environment variable that overrides the worker thread count.
pub const THREADS_ENV: &str = "TETHERPLAN_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Constrained,
    Unconstrained,
}

impl Mode {
    pub const BOTH: [Mode; 2] = [Mode::Constrained, Mode::Unconstrained];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Constrained => "constrained",
            Mode::Unconstrained => "unconstrained",
        }
    }

    fn parse(s: &str) -> Option<Mode> {
        Mode::BOTH.into_iter().find(|m| m.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SweepConfig {
    /// Master seed; each cell derives its own from it.
    pub seed: u64,
    /// Worker threads. `None` reads [`THREADS_ENV`], then falls back to the
    /// number of CPUs.
    pub threads: Option<usize>,
}

/// One planned cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub row: usize,
    pub col: usize,
    pub pitch_deg: f64,
    pub roll_deg: f64,
    pub mode: Mode,
    pub label: Label,
    /// The planner reported success before re-classification.
    pub planned: bool,
    /// Planner's reason for a `NoPlan`, in `Debug` form.
    pub reason: Option<String>,
    pub first_violation: Option<usize>,
    pub max_theta_deg: Option<f64>,
    pub waypoints: usize,
    pub handovers: usize,
    pub validated_edges: usize,
    pub other_violations: usize,
    /// Per-arm peak cable torque over the plan, N·m.
    pub max_torque: [Option<f64>; 2],
    /// Wall-clock time; logged, never written to the reports.
    pub runtime: Duration,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepReport {
    pub pitch_deg: Vec<f64>,
    pub roll_deg: Vec<f64>,
    /// Ordered by (row, column, mode).
    pub cells: Vec<CellResult>,
}

/// Mean per-arm reduction of the peak torque, constrained vs unconstrained,
/// over cells where both planners returned a plan.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TorqueSummary {
    pub mean_reduction: [Option<f64>; 2],
    pub cells: [usize; 2],
}

/// Seed for one cell, independent of evaluation order.
pub fn cell_seed(master: u64, row: usize, col: usize) -> u64 {
    // splitmix64 finalizer over the master seed and the cell index.
    let mut z = master ^ ((row as u64) << 32 | col as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Task for grid cell (pitch row, roll column).
pub fn cell_task(scene: &Scene, pitch_deg: f64, roll_deg: f64) -> Task {
    scene.task_with_offsets([roll_deg, 0.0, 0.0], [0.0, pitch_deg, 0.0])
}

/// Plans one task in one mode under the scene's budget.
pub fn plan_task(scene: &Scene, task: &Task, mode: Mode, seed: u64) -> Result<PlanResult, Error> {
    let opts = PlannerOptions {
        constrained: mode == Mode::Constrained,
        seed,
        ..scene.planner
    };
    let started = Instant::now();
    let limit = scene.time_limit;
    let mut expired = || limit.is_some_and(|l| started.elapsed() > l);
    Ok(plan_with_deadline(&scene.cell, task, &opts, &mut expired)?)
}

/// Re-check options matching the scene.
pub fn audit_options(scene: &Scene) -> AuditOptions {
    AuditOptions {
        theta_max: scene.planner.bend.theta_max,
        max_step: scene.planner.step,
        dynamic_cable: scene.planner.check_dynamic_cable,
        ..AuditOptions::default()
    }
}

/// Plans, re-checks and labels one task.
pub fn evaluate(scene: &Scene, task: &Task, mode: Mode, seed: u64) -> Result<(PlanResult, Outcome), Error> {
    let result = plan_task(scene, task, mode, seed)?;
    let audit = result
        .plan()
        .map(|p| audit_plan(&scene.cell, task, &result.grasps, p, &audit_options(scene)));
    let outcome = classify(&result, audit.as_ref());
    Ok((result, outcome))
}

fn run_cell(scene: &Scene, master: u64, row: usize, col: usize, mode: Mode) -> Result<CellResult, Error> {
    let (pitch_deg, roll_deg) = (scene.grid.pitch_deg[row], scene.grid.roll_deg[col]);
    let task = cell_task(scene, pitch_deg, roll_deg);
    let started = Instant::now();
    let (result, outcome) = evaluate(scene, &task, mode, cell_seed(master, row, col))?;
    let mut max_torque = [None, None];
    if let Some(plan) = result.plan() {
        let trace = trace_plan(&scene.cell, plan)?;
        for arm in Arm::BOTH {
            max_torque[arm.index()] = trace.max_abs(arm);
        }
    }
    let runtime = started.elapsed();
    log::debug!(
        "cell pitch {pitch_deg} roll {roll_deg} {}: {} in {:.2?}",
        mode.name(),
        outcome.label,
        runtime
    );
    Ok(CellResult {
        row,
        col,
        pitch_deg,
        roll_deg,
        mode,
        label: outcome.label,
        planned: outcome.planned,
        reason: match &result.status {
            PlanStatus::NoPlan(r) => Some(format!("{r:?}")),
            PlanStatus::Success(_) => None,
        },
        first_violation: outcome.first_violation,
        max_theta_deg: outcome.max_theta.map(f64::to_degrees),
        waypoints: result.plan().map_or(0, |p| p.len()),
        handovers: result.plan().map_or(0, |p| p.handover_count()),
        validated_edges: result.stats.validated_edges,
        other_violations: outcome.other_violations,
        max_torque,
        runtime,
    })
}

/// Worker count: explicit value, else the environment override, else all CPUs.
pub fn resolve_threads(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()))
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs every grid cell in both modes.
pub fn run_sweep(scene: &Scene, cfg: &SweepConfig) -> Result<SweepReport, Error> {
    let threads = resolve_threads(cfg.threads);
    let jobs: Vec<(usize, usize, Mode)> = (0..scene.grid.pitch_deg.len())
        .flat_map(|r| (0..scene.grid.roll_deg.len()).flat_map(move |c| Mode::BOTH.map(|m| (r, c, m))))
        .collect();
    log::info!("sweep: {} plans on {threads} thread(s), seed {}", jobs.len(), cfg.seed);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start worker threads: {e}")))?;
    let started = Instant::now();
    let cells = pool.install(|| {
        jobs.par_iter()
            .map(|&(r, c, m)| run_cell(scene, cfg.seed, r, c, m))
            .collect::<Result<Vec<_>, _>>()
    })?;
    log::info!("sweep finished in {:.1?}", started.elapsed());
    Ok(SweepReport {
        pitch_deg: scene.grid.pitch_deg.clone(),
        roll_deg: scene.grid.roll_deg.clone(),
        cells,
    })
}

const CSV_HEADER: [&str; 16] = [
    "row",
    "col",
    "pitch_deg",
    "roll_deg",
    "mode",
    "symbol",
    "label",
    "planned",
    "reason",
    "first_violation",
    "max_theta_deg",
    "waypoints",
    "handovers",
    "validated_edges",
    "torque_left_max",
    "torque_right_max",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl SweepReport {
    pub fn cells_for(&self, mode: Mode) -> impl Iterator<Item = &CellResult> {
        self.cells.iter().filter(move |c| c.mode == mode)
    }

    pub fn cell(&self, row: usize, col: usize, mode: Mode) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.row == row && c.col == col && c.mode == mode)
    }

    pub fn count(&self, mode: Mode, label: Label) -> usize {
        self.cells_for(mode).filter(|c| c.label == label).count()
    }

    /// Fraction of `o` cells; `None` for an empty grid.
    pub fn success_rate(&self, mode: Mode) -> Option<f64> {
        let n = self.cells_for(mode).count();
        (n > 0).then(|| self.count(mode, Label::Success) as f64 / n as f64)
    }

    pub fn torque_summary(&self) -> TorqueSummary {
        let mut sums = [0.0; 2];
        let mut cells = [0; 2];
        for c in self.cells_for(Mode::Constrained) {
            let Some(u) = self.cell(c.row, c.col, Mode::Unconstrained) else { continue };
            if !(c.planned && u.planned) {
                continue;
            }
            for arm in Arm::BOTH {
                if let (Some(tc), Some(tu)) = (c.max_torque[arm.index()], u.max_torque[arm.index()]) {
                    if tu > 0.0 {
                        sums[arm.index()] += 100.0 * (tu - tc) / tu;
                        cells[arm.index()] += 1;
                    }
                }
            }
        }
        TorqueSummary {
            mean_reduction: [0, 1].map(|i| (cells[i] > 0).then(|| sums[i] / cells[i] as f64)),
            cells,
        }
    }

    /// Fixed-width grids, constrained on the left, unconstrained on the right.
    pub fn grid_text(&self) -> String {
        let mut s = String::new();
        let half = |s: &mut String, title: &str| {
            let _ = write!(s, "{title:<w$}", w = 8 + 6 * self.roll_deg.len());
        };
        half(&mut s, "constrained");
        s.push_str("   ");
        half(&mut s, "unconstrained");
        let mut out = s.trim_end().to_string();
        out.push('\n');
        let mut header = String::new();
        for _ in Mode::BOTH {
            let _ = write!(header, "{:>8}", "p \\ r");
            for r in &self.roll_deg {
                let _ = write!(header, "{r:>6}");
            }
            header.push_str("   ");
        }
        out.push_str(header.trim_end());
        out.push('\n');
        for (row, p) in self.pitch_deg.iter().enumerate() {
            let mut line = String::new();
            for mode in Mode::BOTH {
                let _ = write!(line, "{p:>8}");
                for col in 0..self.roll_deg.len() {
                    let sym = self.cell(row, col, mode).map_or('?', |c| c.label.symbol());
                    let _ = write!(line, "{sym:>6}");
                }
                line.push_str("   ");
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out.push_str("o success   x cable bent   * cable collision   F no plan\n");
        out
    }

    /// Rates, label counts and torque reductions.
    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        let pct = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{:.1}%", 100.0 * v));
        for mode in Mode::BOTH {
            let _ = writeln!(
                s,
                "{:<14} success {:>6}  (o {}  x {}  * {}  F {})",
                mode.name(),
                pct(self.success_rate(mode)),
                self.count(mode, Label::Success),
                self.count(mode, Label::BendViolation),
                self.count(mode, Label::CableCollision),
                self.count(mode, Label::NoPlan),
            );
        }
        let t = self.torque_summary();
        for arm in Arm::BOTH {
            let i = arm.index();
            let _ = writeln!(
                s,
                "peak torque reduction, {:<5} arm: {} over {} cell(s)",
                arm.name(),
                t.mean_reduction[i].map_or("n/a".to_string(), |v| format!("{v:.1}%")),
                t.cells[i]
            );
        }
        s.push_str("published reference: success 77.5% constrained, 57.5% unconstrained; torque reduction 26.1% and 20.5%\n");
        s
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for c in &self.cells {
            w.write_record([
                c.row.to_string(),
                c.col.to_string(),
                c.pitch_deg.to_string(),
                c.roll_deg.to_string(),
                c.mode.name().to_string(),
                c.label.symbol().to_string(),
                c.label.name().to_string(),
                c.planned.to_string(),
                c.reason.clone().unwrap_or_default(),
                opt(c.first_violation),
                opt(c.max_theta_deg.map(|v| format!("{v:.6}"))),
                c.waypoints.to_string(),
                c.handovers.to_string(),
                c.validated_edges.to_string(),
                opt(c.max_torque[0].map(|v| format!("{v:.9}"))),
                opt(c.max_torque[1].map(|v| format!("{v:.9}"))),
            ])?;
        }
        w.flush().map_err(|source| Error::Io {
            path: "<sweep csv>".into(),
            source,
        })?;
        Ok(())
    }

    /// Parses a report written by [`Self::write_csv`]. Runtimes are not stored and
    /// read back as zero; the grid axes are rebuilt from the cells.
    pub fn read_csv<R: Read>(input: R, origin: &str) -> Result<SweepReport, Error> {
        let mut r = csv::Reader::from_reader(input);
        if r.headers()?.iter().ne(CSV_HEADER) {
            return Err(Error::Format {
                path: origin.into(),
                message: "unexpected sweep CSV header".into(),
            });
        }
        let mut report = SweepReport::default();
        for (n, rec) in r.records().enumerate() {
            let rec = rec?;
            let bad = |col: &str| Error::Format {
                path: origin.into(),
                message: format!("row {}: bad {col}", n + 1),
            };
            let field = |i: usize| rec.get(i).unwrap_or("");
            let parse_opt_f = |i: usize| -> Result<Option<f64>, Error> {
                let s = field(i);
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse().map(Some).map_err(|_| bad(CSV_HEADER[i]))
                }
            };
            let usize_at = |i: usize| field(i).parse::<usize>().map_err(|_| bad(CSV_HEADER[i]));
            let f_at = |i: usize| field(i).parse::<f64>().map_err(|_| bad(CSV_HEADER[i]));
            let label: Label = field(6).parse().map_err(|_| bad("label"))?;
            if field(5).chars().collect::<Vec<_>>() != [label.symbol()] {
                return Err(bad("symbol"));
            }
            let cell = CellResult {
                row: usize_at(0)?,
                col: usize_at(1)?,
                pitch_deg: f_at(2)?,
                roll_deg: f_at(3)?,
                mode: Mode::parse(field(4)).ok_or_else(|| bad("mode"))?,
                label,
                planned: field(7).parse().map_err(|_| bad("planned"))?,
                reason: Some(field(8).to_string()).filter(|s| !s.is_empty()),
                first_violation: if field(9).is_empty() { None } else { Some(usize_at(9)?) },
                max_theta_deg: parse_opt_f(10)?,
                waypoints: usize_at(11)?,
                handovers: usize_at(12)?,
                validated_edges: usize_at(13)?,
                other_violations: 0,
                max_torque: [parse_opt_f(14)?, parse_opt_f(15)?],
                runtime: Duration::ZERO,
            };
            if report.pitch_deg.len() <= cell.row {
                report.pitch_deg.resize(cell.row + 1, f64::NAN);
            }
            if report.roll_deg.len() <= cell.col {
                report.roll_deg.resize(cell.col + 1, f64::NAN);
            }
            report.pitch_deg[cell.row] = cell.pitch_deg;
            report.roll_deg[cell.col] = cell.roll_deg;
            report.cells.push(cell);
        }
        Ok(report)
    }
}
