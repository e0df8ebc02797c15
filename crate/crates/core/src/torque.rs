//! Joint torques induced by the balancer cable.
//!
//! The cable pulls the connector toward the anchor with the balancer's rated force.
//! An arm holding the tool feels that force at the connector point, so its joint
//! torques are `J_v(p)ᵀ F` with `J_v` the linear rows of the point Jacobian.
//! During a handover both arms are charged the full force, which bounds either
//! arm's share from above.

use alloc::vec::Vec;

use crate::cable::{BalancerSpec, ToolSpec, GRAVITY};
use crate::geometry::{Pose, Vec3};
use crate::planner::{MotionPlan, Workcell};
use crate::robot::{Arm, ArmModel, JointConfig, DOF};
use crate::{Error, Result};

/// Cable tension magnitude, N.
pub fn cable_tension(balancer: &BalancerSpec) -> f64 {
    balancer.max_load * GRAVITY
}

/// Force applied by the cable and where it acts, world frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CableWrench {
    pub point: Vec3,
    pub force: Vec3,
}

/// Cable force on the tool at `tool_pose`.
pub fn cable_wrench(tool_pose: &Pose, tool: &ToolSpec, balancer: &BalancerSpec) -> Result<CableWrench> {
    let point = tool.connector_world(tool_pose);
    let dir = (balancer.anchor - point).normalized().map_err(|_| Error::DegenerateCable)?;
    Ok(CableWrench {
        point,
        force: dir * cable_tension(balancer),
    })
}

/// Part of the cable force perpendicular to the tool's connector axis, N.
pub fn lateral_force(tool_pose: &Pose, tool: &ToolSpec, balancer: &BalancerSpec) -> Result<f64> {
    let w = cable_wrench(tool_pose, tool, balancer)?;
    let b = tool_pose.rotation.rotate(tool.connector_dir);
    Ok((w.force - b * w.force.dot(b)).norm())
}

/// `J_v(p)ᵀ F` for an arm whose last link carries the point `p`.
pub fn joint_torques(arm: &ArmModel, q: &JointConfig, wrench: &CableWrench) -> [f64; DOF] {
    let j = arm.point_jacobian(q, wrench.point);
    let f = wrench.force;
    let mut tau = [0.0; DOF];
    for (i, t) in tau.iter_mut().enumerate() {
        *t = j[0][i] * f.x + j[1][i] * f.y + j[2][i] * f.z;
    }
    tau
}

/// Per-waypoint joint torques for each arm; `None` where the arm is not holding.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TorqueTrace {
    pub samples: Vec<[Option<[f64; DOF]>; 2]>,
}

impl TorqueTrace {
    /// `(waypoint, max |τ_i|)` for every waypoint where `arm` holds the tool.
    pub fn series(&self, arm: Arm) -> Vec<(usize, f64)> {
        self.samples
            .iter()
            .enumerate()
            .filter_map(|(k, s)| s[arm.index()].map(|t| (k, max_abs(&t))))
            .collect()
    }

    /// Largest absolute joint torque over the plan, `None` if `arm` never holds the tool.
    pub fn max_abs(&self, arm: Arm) -> Option<f64> {
        self.series(arm).into_iter().map(|(_, v)| v).reduce(f64::max)
    }

    pub fn has_data(&self) -> bool {
        self.samples.iter().any(|s| s.iter().any(Option::is_some))
    }
}

fn max_abs(t: &[f64; DOF]) -> f64 {
    t.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Torques for every waypoint of a plan.
pub fn trace_plan(cell: &Workcell, plan: &MotionPlan) -> Result<TorqueTrace> {
    let mut samples = Vec::with_capacity(plan.len());
    for w in &plan.waypoints {
        let holding = w.holding();
        let mut s = [None, None];
        if !holding.is_empty() {
            let wrench = cable_wrench(&w.object, &cell.tool, &cell.balancer)?;
            for arm in holding.iter() {
                s[arm.index()] = Some(joint_torques(cell.robot.arm(arm), &w.q[arm.index()], &wrench));
            }
        }
        samples.push(s);
    }
    Ok(TorqueTrace { samples })
}

/// Percentage reduction of each arm's peak torque from `baseline` to `candidate`:
/// `100 (max_b - max_c) / max_b`. `None` for an arm lacking data in either trace.
///
/// Fails with [`Error::EmptyTrace`] if either trace has no torque data at all.
pub fn compare_max_torque(candidate: &TorqueTrace, baseline: &TorqueTrace) -> Result<[Option<f64>; 2]> {
    if !candidate.has_data() || !baseline.has_data() {
        return Err(Error::EmptyTrace);
    }
    let mut out = [None, None];
    for arm in Arm::BOTH {
        if let (Some(c), Some(b)) = (candidate.max_abs(arm), baseline.max_abs(arm)) {
            if b > 0.0 {
                out[arm.index()] = Some(100.0 * (b - c) / b);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn tension_uses_rated_load() {
        let b = presets::balancer(presets::ANCHOR);
        assert!((cable_tension(&b) - 19.62).abs() < 1e-12);
    }

    #[test]
    fn connector_at_anchor_is_degenerate() {
        let tool = presets::screwdriver();
        let pose = Pose::from_translation(presets::ANCHOR - tool.connector_point);
        let b = presets::balancer(presets::ANCHOR);
        assert_eq!(cable_wrench(&pose, &tool, &b), Err(Error::DegenerateCable));
    }

    #[test]
    fn empty_trace_is_an_error() {
        let empty = TorqueTrace {
            samples: alloc::vec![[None, None]],
        };
        let full = TorqueTrace {
            samples: alloc::vec![[Some([1.0; DOF]), None]],
        };
        assert_eq!(compare_max_torque(&empty, &full), Err(Error::EmptyTrace));
        assert_eq!(compare_max_torque(&full, &empty), Err(Error::EmptyTrace));
        assert_eq!(compare_max_torque(&full, &full), Ok([Some(0.0), None]));
    }
}
