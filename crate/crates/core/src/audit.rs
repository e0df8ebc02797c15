//! Post-hoc re-check of a motion plan.
//!
//! The audit recomputes everything from joint angles and grasp indices alone and
//! does not reuse the planner's validation path: the tool pose comes from forward
//! kinematics, the bend angle from `atan2(|a × b|, a · b)`, and every shape pair is
//! measured with the exact clearance function (no bounding-sphere shortcut).

use alloc::string::String;
use alloc::vec::Vec;

use crate::collision::{shape_clearance, Capsule, Shape, CABLE};
use crate::geometry::Pose;
use crate::math;
use crate::planner::{GraspSet, MotionPlan, Task, Waypoint, Workcell};
use crate::robot::{Arm, DOF};

/// Tolerances for the audit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditOptions {
    pub theta_max: f64,
    /// Largest allowed joint change between consecutive waypoints, rad.
    pub max_step: f64,
    /// Tool pose agreement between holding arms and with the task poses.
    pub pos_tol: f64,
    pub ori_tol: f64,
    /// Also treat the cable as an obstacle after the first grasp (holding grippers exempt).
    pub dynamic_cable: bool,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            theta_max: crate::cable::DEFAULT_THETA_MAX,
            max_step: 0.05,
            pos_tol: 5e-4,
            ori_tol: 5e-3,
            dynamic_cable: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AuditViolation {
    Bend { waypoint: usize, theta: f64 },
    Collision { waypoint: usize, a: String, b: String, clearance: f64 },
    CableCollision { waypoint: usize, link: String, clearance: f64 },
    JointLimit { waypoint: usize },
    Step { waypoint: usize, delta: f64 },
    /// The tool pose implied by a holding arm disagrees with the recorded one.
    Holding { waypoint: usize },
    /// The plan does not start at the task start / end at the task goal.
    Endpoint,
    /// A grasp index does not exist in the grasp set.
    UnknownGrasp { waypoint: usize },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AuditReport {
    pub violations: Vec<AuditViolation>,
    pub max_theta: f64,
    pub min_clearance: f64,
    pub waypoints: usize,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn bend_violations(&self) -> usize {
        self.violations
            .iter()
            .filter(|v| matches!(v, AuditViolation::Bend { .. }))
            .count()
    }

    pub fn collisions(&self) -> usize {
        self.violations
            .iter()
            .filter(|v| matches!(v, AuditViolation::Collision { .. } | AuditViolation::CableCollision { .. }))
            .count()
    }
}

/// Bend angle recomputed with the `atan2` form.
pub fn recheck_theta(object: &Pose, cell: &Workcell) -> f64 {
    let a = cell.balancer.reference_dir;
    let b = object.rotation.rotate(cell.tool.connector_dir);
    math::atan2(a.cross(b).norm(), a.dot(b))
}

/// Re-checks every waypoint of `plan`. The hanging cable is an obstacle for every
/// waypoint before the first grasp, whichever mode produced the plan.
pub fn audit_plan(cell: &Workcell, task: &Task, grasps: &GraspSet, plan: &MotionPlan, opts: &AuditOptions) -> AuditReport {
    let mut report = AuditReport {
        violations: Vec::new(),
        max_theta: 0.0,
        min_clearance: f64::INFINITY,
        waypoints: plan.len(),
    };
    let Some(first) = plan.waypoints.first() else {
        report.violations.push(AuditViolation::Endpoint);
        return report;
    };
    let last = plan.waypoints.last().expect("non-empty");
    if first.q != cell.home || !first.pre_grasp() || !first.object.approx_eq(&task.start, opts.pos_tol, opts.ori_tol) {
        report.violations.push(AuditViolation::Endpoint);
    }
    if last.holding().is_empty() || !last.object.approx_eq(&task.goal, opts.pos_tol, opts.ori_tol) {
        report.violations.push(AuditViolation::Endpoint);
    }

    let mut touched = false;
    for (k, w) in plan.waypoints.iter().enumerate() {
        if k > 0 {
            let prev = &plan.waypoints[k - 1];
            let delta = prev.q[0].max_abs_diff(&w.q[0]).max(prev.q[1].max_abs_diff(&w.q[1]));
            if delta > opts.max_step + 1e-9 {
                report.violations.push(AuditViolation::Step { waypoint: k, delta });
            }
        }
        touched |= !w.pre_grasp();
        audit_waypoint(cell, task, grasps, k, w, touched, opts, &mut report);
    }
    report
}

#[allow(clippy::too_many_arguments)]
fn audit_waypoint(
    cell: &Workcell,
    task: &Task,
    grasps: &GraspSet,
    k: usize,
    w: &Waypoint,
    touched: bool,
    opts: &AuditOptions,
    report: &mut AuditReport,
) {
    for arm in Arm::BOTH {
        if !cell.robot.arm(arm).within_limits(&w.q[arm.index()]) {
            report.violations.push(AuditViolation::JointLimit { waypoint: k });
        }
    }

    // Tool pose: from a holding arm when there is one, else it must still hang at the start.
    let mut object = None;
    for arm in Arm::BOTH {
        let Some(g) = w.grasps[arm.index()] else { continue };
        let Some(cand) = grasps.get(arm, g) else {
            report.violations.push(AuditViolation::UnknownGrasp { waypoint: k });
            return;
        };
        let implied = cell.robot.arm(arm).fk(&w.q[arm.index()]).compose(&cand.pose.inverse());
        match object {
            None => object = Some(implied),
            Some(o) => {
                if !implied.approx_eq(&o, opts.pos_tol, opts.ori_tol) {
                    report.violations.push(AuditViolation::Holding { waypoint: k });
                }
            }
        }
    }
    let object = object.unwrap_or(w.object);
    if !object.approx_eq(&w.object, opts.pos_tol, opts.ori_tol) || (!touched && !object.approx_eq(&task.start, opts.pos_tol, opts.ori_tol)) {
        report.violations.push(AuditViolation::Holding { waypoint: k });
    }

    let theta = recheck_theta(&object, cell);
    report.max_theta = report.max_theta.max(theta);
    if theta >= opts.theta_max {
        report.violations.push(AuditViolation::Bend { waypoint: k, theta });
    }

    let frames = [cell.robot.left.frames(&w.q[0]), cell.robot.right.frames(&w.q[1])];
    let links: Vec<(Arm, usize, &str, Capsule)> = Arm::BOTH
        .into_iter()
        .flat_map(|arm| {
            let f = &frames[arm.index()];
            cell.collision
                .links(arm)
                .iter()
                .map(move |l| (arm, l.frame, l.name.as_str(), l.capsule.transformed(&f[l.frame])))
        })
        .collect();
    let tool: Vec<(&str, Shape)> = cell
        .tool
        .shapes
        .iter()
        .map(|s| (s.name.as_str(), s.shape.transformed(&object)))
        .collect();
    let holding = w.holding();
    let cable = if !touched || (opts.dynamic_cable && !holding.is_empty()) {
        let c = object.transform_point(cell.tool.connector_point);
        Some(Capsule::new(cell.balancer.anchor, c, cell.balancer.cable_radius))
    } else {
        None
    };

    let check = |report: &mut AuditReport, c: f64, a: &str, b: &str| {
        report.min_clearance = report.min_clearance.min(c);
        if c < 0.0 {
            report.violations.push(if b == CABLE {
                AuditViolation::CableCollision {
                    waypoint: k,
                    link: a.into(),
                    clearance: c,
                }
            } else {
                AuditViolation::Collision {
                    waypoint: k,
                    a: a.into(),
                    b: b.into(),
                    clearance: c,
                }
            });
        }
    };

    for &((aa, ia), (ab, ib)) in cell.collision.link_pairs() {
        let x = cell.collision.links(aa)[ia].name.as_str();
        let y = cell.collision.links(ab)[ib].name.as_str();
        let cx = links.iter().find(|l| l.0 == aa && l.2 == x).expect("link exists").3;
        let cy = links.iter().find(|l| l.0 == ab && l.2 == y).expect("link exists").3;
        check(report, shape_clearance(&Shape::Capsule(cx), &Shape::Capsule(cy)), x, y);
    }
    for &(arm, frame, name, cap) in &links {
        let shape = Shape::Capsule(cap);
        if frame > 0 {
            for s in cell.collision.statics() {
                check(report, shape_clearance(&shape, &s.shape), name, &s.name);
            }
        }
        let gripper = frame == DOF;
        if !(gripper && w.contact.contains(arm)) {
            for (tn, ts) in &tool {
                check(report, shape_clearance(&shape, ts), name, tn);
            }
        }
        if let Some(c) = &cable {
            if !(touched && gripper && holding.contains(arm)) {
                check(report, shape_clearance(&shape, &Shape::Capsule(*c)), name, CABLE);
            }
        }
    }
    for (tn, ts) in &tool {
        for s in cell.collision.statics() {
            check(report, shape_clearance(ts, &s.shape), tn, &s.name);
        }
    }
}
