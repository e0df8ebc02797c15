use alloc::vec::Vec;

use super::{PlannerOptions, Waypoint, Workcell};
use crate::cable::{bend_angle, cable_capsule};
use crate::collision::{robot_in_collision, CableObstacle, CollisionQuery};
use crate::geometry::Pose;
use crate::math;
use crate::robot::{Arm, ArmSet, JointConfig};

/// Where the tool is during a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObjectFrame {
    /// Stationary at this pose.
    Fixed(Pose),
    /// Rigidly carried by `arm`; `grasp` is the TCP in the tool frame.
    Carried { arm: Arm, grasp: Pose },
}

/// Joint-space straight line for both arms with fixed holding/contact state.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub from: [JointConfig; 2],
    pub to: [JointConfig; 2],
    pub object: ObjectFrame,
    /// Held grasps per arm (indices into the grasp set) and their TCP-in-tool poses.
    pub grasps: [Option<(usize, Pose)>; 2],
    pub contact: ArmSet,
    /// The tool has not been touched yet; the hanging cable is an obstacle (constrained mode).
    pub untouched: bool,
    /// Object pose the segment must end at, when it carries the tool to a node.
    pub expect_end: Option<Pose>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Edge {
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InvalidReason {
    /// A pre-grasp configuration had no IK solution, or the held tool drifted from
    /// the pose implied by a holding arm.
    IkInconsistent,
    JointLimit,
    Collision(alloc::string::String, alloc::string::String),
    CableCollision(alloc::string::String),
    /// Bend angle at the failing waypoint, rad.
    BendViolation(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum EdgeVerdict {
    Valid(Vec<Waypoint>),
    /// First failure and the index of the waypoint (counted across segments) where it occurred.
    Invalid(InvalidReason, usize),
}

impl EdgeVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, EdgeVerdict::Valid(_))
    }
}

// Two IK solutions each within 1e-4 m / 1e-3 rad of a pose agree to twice that.
const CONSISTENCY_POS: f64 = 2.5e-4;
const CONSISTENCY_ORI: f64 = 2.5e-3;

/// Interpolates every segment at no more than `opts.step` per joint and checks each
/// waypoint: joint limits, holding consistency, collisions (with the hanging cable
/// while the tool is untouched in constrained mode) and, in constrained mode, the
/// bend angle. Reports the first failure.
pub fn validate_edge(edge: &Edge, cell: &Workcell, opts: &PlannerOptions) -> EdgeVerdict {
    let mut out = Vec::new();
    let mut index = 0;
    for seg in &edge.segments {
        let span = seg.from[0]
            .max_abs_diff(&seg.to[0])
            .max(seg.from[1].max_abs_diff(&seg.to[1]));
        let steps = (math::ceil(span / opts.step) as usize).max(1);
        for k in 0..=steps {
            if k == 0 && !out.is_empty() && same_state(out.last(), seg) {
                continue;
            }
            let t = k as f64 / steps as f64;
            let q = [seg.from[0].lerp(&seg.to[0], t), seg.from[1].lerp(&seg.to[1], t)];
            match check_waypoint(seg, q, cell, opts) {
                Ok(w) => out.push(w),
                Err(reason) => return EdgeVerdict::Invalid(reason, index),
            }
            index += 1;
        }
        if let Some(expected) = seg.expect_end {
            let last = out.last().expect("segment emitted a waypoint");
            if !last.object.approx_eq(&expected, CONSISTENCY_POS, CONSISTENCY_ORI) {
                return EdgeVerdict::Invalid(InvalidReason::IkInconsistent, index - 1);
            }
        }
    }
    EdgeVerdict::Valid(out)
}

fn same_state(prev: Option<&Waypoint>, seg: &Segment) -> bool {
    match prev {
        Some(w) => {
            w.q == seg.from
                && w.contact == seg.contact
                && w.grasps[0] == seg.grasps[0].map(|g| g.0)
                && w.grasps[1] == seg.grasps[1].map(|g| g.0)
        }
        None => false,
    }
}

fn check_waypoint(seg: &Segment, q: [JointConfig; 2], cell: &Workcell, opts: &PlannerOptions) -> Result<Waypoint, InvalidReason> {
    for arm in Arm::BOTH {
        if !cell.robot.arm(arm).within_limits(&q[arm.index()]) {
            return Err(InvalidReason::JointLimit);
        }
    }
    let object = match seg.object {
        ObjectFrame::Fixed(p) => p,
        ObjectFrame::Carried { arm, grasp } => cell.robot.arm(arm).fk(&q[arm.index()]).compose(&grasp.inverse()),
    };
    for arm in Arm::BOTH {
        let Some((_, grasp)) = seg.grasps[arm.index()] else { continue };
        if matches!(seg.object, ObjectFrame::Carried { arm: carrier, .. } if carrier == arm) {
            continue;
        }
        let implied = cell.robot.arm(arm).fk(&q[arm.index()]).compose(&grasp.inverse());
        if !implied.approx_eq(&object, CONSISTENCY_POS, CONSISTENCY_ORI) {
            return Err(InvalidReason::IkInconsistent);
        }
    }

    let holding = Arm::BOTH
        .into_iter()
        .filter(|a| seg.grasps[a.index()].is_some())
        .fold(ArmSet::EMPTY, ArmSet::with);
    let cable = if seg.untouched && opts.constrained {
        cable_capsule(&object, &cell.tool, &cell.balancer).ok().map(|capsule| CableObstacle {
            capsule,
            exempt_grippers: ArmSet::EMPTY,
        })
    } else if opts.check_dynamic_cable && !holding.is_empty() {
        cable_capsule(&object, &cell.tool, &cell.balancer).ok().map(|capsule| CableObstacle {
            capsule,
            exempt_grippers: holding,
        })
    } else {
        None
    };
    let query = CollisionQuery {
        tool: Some((&cell.tool.shapes, object)),
        contact: seg.contact,
        cable,
    };
    let report = robot_in_collision(&cell.collision, &cell.robot, &q[0], &q[1], &query);
    if let Some((a, b)) = report
        .pairs
        .iter()
        .find(|(a, b)| a == crate::collision::CABLE || b == crate::collision::CABLE)
    {
        let link = if a == crate::collision::CABLE { b } else { a };
        return Err(InvalidReason::CableCollision(link.clone()));
    }
    if let Some((a, b)) = report.pairs.first() {
        return Err(InvalidReason::Collision(a.clone(), b.clone()));
    }

    let theta = bend_angle(&object, &cell.tool, &cell.balancer).unwrap_or(0.0);
    if opts.constrained && theta >= opts.bend.theta_max {
        return Err(InvalidReason::BendViolation(theta));
    }
    Ok(Waypoint {
        q,
        object,
        grasps: [seg.grasps[0].map(|g| g.0), seg.grasps[1].map(|g| g.0)],
        contact: seg.contact,
        theta,
        min_clearance: report.min_clearance,
    })
}
