//! Plan and torque CSV files.
//!
//! Plan CSV, one row per waypoint:
//!
//! | column | meaning |
//! |---|---|
//! | `waypoint` | index from 0 |
//! | `q_left_1` … `q_left_6`, `q_right_1` … `q_right_6` | joint angles, rad |
//! | `qw`, `qx`, `qy`, `qz` | tool orientation quaternion (w ≥ 0) |
//! | `x`, `y`, `z` | tool frame origin, m |
//! | `holding` | `-`, `L`, `R` or `LR` |
//! | `grasp_left`, `grasp_right` | grasp index, empty when not holding |
//! | `contact` | arms whose gripper may touch the tool, same encoding as `holding` |
//! | `theta` | cable bend angle, rad |
//! | `min_clearance` | smallest checked clearance, m |
//!
//! Torque CSV, one row per (plan, waypoint, holding arm):
//! `plan,waypoint,arm,tau_1,…,tau_6,tau_max` with torques in N·m and `arm` one of
//! `left`/`right`.
//!
//! Numbers are written in Rust's shortest round-trip form.

use std::io::{Read, Write};
use std::path::Path;

use tetherplan_core::geometry::{Pose, Rot3, Vec3};
use tetherplan_core::planner::{MotionPlan, Waypoint};
use tetherplan_core::robot::{Arm, ArmSet, JointConfig};
use tetherplan_core::torque::TorqueTrace;

use crate::Error;

pub fn plan_header() -> Vec<String> {
    let mut h = vec!["waypoint".to_string()];
    for arm in Arm::BOTH {
        for j in 1..=6 {
            h.push(format!("q_{}_{j}", arm.name()));
        }
    }
    for k in ["qw", "qx", "qy", "qz", "x", "y", "z", "holding", "grasp_left", "grasp_right", "contact", "theta", "min_clearance"] {
        h.push(k.to_string());
    }
    h
}

fn arm_set_code(s: ArmSet) -> &'static str {
    match (s.contains(Arm::Left), s.contains(Arm::Right)) {
        (false, false) => "-",
        (true, false) => "L",
        (false, true) => "R",
        (true, true) => "LR",
    }
}

fn parse_arm_set(s: &str) -> Option<ArmSet> {
    match s {
        "-" => Some(ArmSet::EMPTY),
        "L" => Some(ArmSet::single(Arm::Left)),
        "R" => Some(ArmSet::single(Arm::Right)),
        "LR" => Some(ArmSet::BOTH),
        _ => None,
    }
}

pub fn write_plan<W: Write>(out: W, plan: &MotionPlan) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(plan_header())?;
    for (k, p) in plan.waypoints.iter().enumerate() {
        let mut rec = vec![k.to_string()];
        for q in &p.q {
            rec.extend(q.0.iter().map(f64::to_string));
        }
        rec.extend(p.object.rotation.to_quat_wxyz().iter().map(f64::to_string));
        rec.extend(p.object.translation.to_array().iter().map(f64::to_string));
        rec.push(arm_set_code(p.holding()).into());
        for g in p.grasps {
            rec.push(g.map(|g| g.to_string()).unwrap_or_default());
        }
        rec.push(arm_set_code(p.contact).into());
        rec.push(p.theta.to_string());
        rec.push(p.min_clearance.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<plan output>".into(),
        source,
    })?;
    Ok(())
}

pub fn write_plan_file(path: &Path, plan: &MotionPlan) -> Result<(), Error> {
    let f = create(path)?;
    write_plan(f, plan)
}

pub fn read_plan<R: Read>(input: R, origin: &str) -> Result<MotionPlan, Error> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != plan_header() {
        return Err(Error::Format {
            path: origin.into(),
            message: "unexpected plan CSV header".into(),
        });
    }
    let mut waypoints = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |what: &str| Error::Format {
            path: origin.into(),
            message: format!("row {}: bad {what}", row + 1),
        };
        let num = |i: usize| -> Result<f64, Error> {
            rec.get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(&plan_header()[i]))
        };
        let mut q = [JointConfig::ZERO; 2];
        for (a, cfg) in q.iter_mut().enumerate() {
            for j in 0..6 {
                cfg.0[j] = num(1 + 6 * a + j)?;
            }
        }
        let quat = [num(13)?, num(14)?, num(15)?, num(16)?];
        let rotation = Rot3::from_quat_wxyz(quat).map_err(|_| bad("quaternion"))?;
        let translation = Vec3::new(num(17)?, num(18)?, num(19)?);
        let holding = rec.get(20).and_then(parse_arm_set).ok_or_else(|| bad("holding"))?;
        let mut grasps = [None, None];
        for (a, g) in grasps.iter_mut().enumerate() {
            let s = rec.get(21 + a).ok_or_else(|| bad("grasp"))?;
            if !s.is_empty() {
                *g = Some(s.parse::<usize>().map_err(|_| bad("grasp"))?);
            }
        }
        let contact = rec.get(23).and_then(parse_arm_set).ok_or_else(|| bad("contact"))?;
        let w = Waypoint {
            q,
            object: Pose::new(rotation, translation),
            grasps,
            contact,
            theta: num(24)?,
            min_clearance: rec.get(25).and_then(|s| s.parse().ok()).ok_or_else(|| bad("min_clearance"))?,
        };
        if w.holding() != holding {
            return Err(bad("holding (disagrees with grasp columns)"));
        }
        waypoints.push(w);
    }
    Ok(MotionPlan { waypoints })
}

pub fn read_plan_file(path: &Path) -> Result<MotionPlan, Error> {
    let f = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_plan(f, &path.display().to_string())
}

pub fn torque_header() -> Vec<String> {
    let mut h: Vec<String> = ["plan", "waypoint", "arm"].map(String::from).to_vec();
    h.extend((1..=6).map(|j| format!("tau_{j}")));
    h.push("tau_max".into());
    h
}

/// Writes one or more traces; the `plan` column is the trace's position in `traces`.
pub fn write_torque<W: Write>(out: W, traces: &[TorqueTrace]) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(torque_header())?;
    for (p, trace) in traces.iter().enumerate() {
        for (k, s) in trace.samples.iter().enumerate() {
            for arm in Arm::BOTH {
                if let Some(tau) = s[arm.index()] {
                    let mut rec = vec![p.to_string(), k.to_string(), arm.name().to_string()];
                    rec.extend(tau.iter().map(f64::to_string));
                    rec.push(tau.iter().fold(0.0_f64, |m, t| m.max(t.abs())).to_string());
                    w.write_record(&rec)?;
                }
            }
        }
    }
    w.flush().map_err(|source| Error::Io {
        path: "<torque output>".into(),
        source,
    })?;
    Ok(())
}

pub(crate) fn create(path: &Path) -> Result<std::fs::File, Error> {
    std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}
