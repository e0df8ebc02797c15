//! Regrasp planning for a suspended tool.
//!
//! The regrasp graph has four kinds of node: the initial state (tool hanging, both
//! arms at home), single-arm grasps of the tool at its start pose, dual-arm
//! handover states at a fixed set of handover poses, and single-arm grasps at the
//! goal pose. Edges are sequences of joint-space segments (approach, transfer,
//! release). The search is uniform-cost on (edge count, summed joint distance) and
//! validates an edge only when its head is popped from the queue.
//!
//! In constrained mode every waypoint must keep the cable bend angle below the
//! threshold, and until the first grasp the straight cable hanging above the tool
//! is a collision obstacle. The unconstrained baseline runs the same search with
//! those two checks disabled.

mod grasp;
mod graph;
mod search;
mod validate;

use alloc::vec::Vec;

use crate::cable::{BalancerSpec, BendConstraint, ToolSpec};
use crate::collision::{robot_in_collision, CollisionQuery, CollisionWorld};
use crate::geometry::Pose;
use crate::robot::{Arm, ArmSet, DualArm, IkOptions, JointConfig};
use crate::{Error, Result};

pub use grasp::{sample_grasps, GraspCandidate, GraspSampling, GraspSet};
pub use graph::{build_graph, NodeId, NodeKind, PoseSlot, RegraspGraph, RegraspNode};
pub use search::{plan, plan_with_deadline};
pub use validate::{validate_edge, Edge, EdgeVerdict, InvalidReason, ObjectFrame, Segment};

/// Everything about the cell that does not change between tasks.
#[derive(Debug, Clone)]
pub struct Workcell {
    pub robot: DualArm,
    pub collision: CollisionWorld,
    pub balancer: BalancerSpec,
    pub tool: ToolSpec,
    /// Rest configuration of each arm, indexed by [`Arm::index`].
    pub home: [JointConfig; 2],
    pub handover_poses: Vec<Pose>,
}

impl Workcell {
    pub fn new(
        robot: DualArm,
        collision: CollisionWorld,
        balancer: BalancerSpec,
        tool: ToolSpec,
        home: [JointConfig; 2],
        handover_poses: Vec<Pose>,
    ) -> Result<Self> {
        for arm in Arm::BOTH {
            let q = &home[arm.index()];
            if !q.is_finite() || !robot.arm(arm).within_limits(q) {
                return Err(Error::InvalidScene(alloc::format!("{arm} home configuration is outside the joint limits")));
            }
        }
        for p in &handover_poses {
            if !p.rotation.is_rotation(1e-9) || !p.translation.is_finite() {
                return Err(Error::InvalidScene("handover pose is not a valid rigid transform".into()));
            }
        }
        let cell = Self {
            robot,
            collision,
            balancer,
            tool,
            home,
            handover_poses,
        };
        let report = robot_in_collision(&cell.collision, &cell.robot, &home[0], &home[1], &CollisionQuery::default());
        if let Some((a, b)) = report.pairs.first() {
            return Err(Error::InvalidScene(alloc::format!("home configuration collides: {a} / {b}")));
        }
        Ok(cell)
    }
}

/// Start and goal pose of the tool frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Task {
    pub start: Pose,
    pub goal: Pose,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerOptions {
    /// Enforce the bend constraint and the pre-grasp cable obstacle.
    pub constrained: bool,
    pub bend: BendConstraint,
    pub grasps: GraspSampling,
    /// Stand-off along the approach direction before closing the gripper, m.
    pub pregrasp_distance: f64,
    /// Largest joint change between consecutive waypoints, rad.
    pub step: f64,
    pub seed: u64,
    /// Stop after this many edge validations.
    pub max_validated_edges: usize,
    /// Also treat the moving cable as an obstacle after the first grasp.
    pub check_dynamic_cable: bool,
    pub ik: IkOptions,
}

impl Default for PlannerOptions {
    fn default() -> Self {
        Self {
            constrained: true,
            bend: BendConstraint::default(),
            grasps: GraspSampling::default(),
            pregrasp_distance: 0.06,
            step: 0.05,
            seed: 0,
            max_validated_edges: 20_000,
            check_dynamic_cable: false,
            ik: IkOptions::default(),
        }
    }
}

impl PlannerOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidScene("interpolation step must be positive".into()));
        }
        if self.max_validated_edges == 0 {
            return Err(Error::InvalidScene("edge budget must be positive".into()));
        }
        if !(self.pregrasp_distance >= 0.0 && self.pregrasp_distance.is_finite()) {
            return Err(Error::InvalidScene("pre-grasp distance must be non-negative".into()));
        }
        BendConstraint::new(self.bend.theta_max)?;
        Ok(())
    }
}

/// One state along a plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    /// Joint angles indexed by [`Arm::index`].
    pub q: [JointConfig; 2],
    pub object: Pose,
    /// Grasp index (into that arm's candidates) for each arm holding the tool.
    pub grasps: [Option<usize>; 2],
    /// Arms whose gripper may touch the tool (holding or closing on it).
    pub contact: ArmSet,
    /// Cable bend angle, rad.
    pub theta: f64,
    /// Smallest clearance among checked shape pairs, m.
    pub min_clearance: f64,
}

impl Waypoint {
    pub fn holding(&self) -> ArmSet {
        Arm::BOTH
            .into_iter()
            .filter(|a| self.grasps[a.index()].is_some())
            .fold(ArmSet::EMPTY, ArmSet::with)
    }

    /// True before the first grasp, while the tool still hangs untouched.
    pub fn pre_grasp(&self) -> bool {
        self.grasps.iter().all(Option::is_none)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MotionPlan {
    pub waypoints: Vec<Waypoint>,
}

impl MotionPlan {
    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    /// Number of holding-set changes that pass the tool between arms.
    pub fn handover_count(&self) -> usize {
        count_handovers(&self.waypoints)
    }

    pub fn max_theta(&self) -> f64 {
        self.waypoints.iter().map(|w| w.theta).fold(0.0, f64::max)
    }
}

fn count_handovers(waypoints: &[Waypoint]) -> usize {
    let mut n = 0;
    let mut prev_two = false;
    for w in waypoints {
        let two = w.holding().len() == 2;
        if two && !prev_two {
            n += 1;
        }
        prev_two = two;
    }
    n
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoPlanReason {
    NoFeasibleStartGrasp,
    NoFeasibleGoalGrasp,
    /// Every reachable edge was invalid.
    SearchExhausted,
    EdgeBudget,
    TimeLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlanStatus {
    Success(MotionPlan),
    NoPlan(NoPlanReason),
}

/// Counters collected during one search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchStats {
    pub validated_edges: usize,
    pub expanded_nodes: usize,
    pub rejected_ik: usize,
    pub rejected_collision: usize,
    pub rejected_cable: usize,
    pub rejected_bend: usize,
    /// Edges on the returned path.
    pub path_edges: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub status: PlanStatus,
    pub stats: SearchStats,
    /// Grasp candidates the waypoint grasp indices refer to.
    pub grasps: GraspSet,
}

impl PlanResult {
    pub fn plan(&self) -> Option<&MotionPlan> {
        match &self.status {
            PlanStatus::Success(p) => Some(p),
            PlanStatus::NoPlan(_) => None,
        }
    }

    pub fn is_success(&self) -> bool {
        matches!(self.status, PlanStatus::Success(_))
    }
}
