use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::validate::{validate_edge, Edge, ObjectFrame, Segment};
use super::{GraspSet, PlannerOptions, Task, Workcell};
use crate::cable::check_bend;
use crate::geometry::{Pose, Vec3};
use crate::robot::{Arm, ArmSet, IkOptions, JointConfig};
use crate::{Error, Result};

/// Identifies one of the tool poses the graph is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PoseSlot {
    Start,
    Handover(usize),
    Goal,
}

impl PoseSlot {
    fn code(self) -> u64 {
        match self {
            PoseSlot::Start => 1,
            PoseSlot::Goal => 2,
            PoseSlot::Handover(i) => 3 + i as u64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    /// Tool hanging at the start pose, both arms at home.
    Init,
    /// `arm` holds the tool at the start pose; the other arm is at home.
    Start { arm: Arm, grasp: usize },
    /// Both arms hold the tool at a handover pose; `giver` lets go next.
    Handover {
        pose: usize,
        giver: Arm,
        giver_grasp: usize,
        receiver_grasp: usize,
    },
    /// `arm` holds the tool at the goal pose; the other arm is at home.
    Goal { arm: Arm, grasp: usize },
}

pub type NodeId = usize;

/// A state of the regrasp graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegraspNode {
    pub kind: NodeKind,
    pub object_pose: Pose,
    /// Joint angles indexed by [`Arm::index`].
    pub q: [JointConfig; 2],
    /// Held grasp per arm.
    pub grasps: [Option<usize>; 2],
}

impl RegraspNode {
    pub fn holding(&self) -> ArmSet {
        Arm::BOTH
            .into_iter()
            .filter(|a| self.grasps[a.index()].is_some())
            .fold(ArmSet::EMPTY, ArmSet::with)
    }
}

type IkKey = (PoseSlot, Arm, usize);

/// Regrasp graph over one task. Handover states and edges are generated on demand.
#[derive(Debug)]
pub struct RegraspGraph<'a> {
    cell: &'a Workcell,
    task: Task,
    opts: PlannerOptions,
    grasps: GraspSet,
    goal_is_start: bool,
    ik: BTreeMap<IkKey, Option<JointConfig>>,
    pregrasp: BTreeMap<IkKey, Option<JointConfig>>,
    nodes: Vec<RegraspNode>,
    index: BTreeMap<NodeKind, NodeId>,
    valid: Vec<Option<bool>>,
    start_nodes: Vec<NodeId>,
    goal_nodes: BTreeMap<(Arm, usize), NodeId>,
}

/// Builds the graph and its start and goal grasp nodes.
///
/// Fails with [`Error::NoFeasibleStartGrasp`] / [`Error::NoFeasibleGoalGrasp`] when
/// no grasp at the start / goal pose passes IK, collision and (constrained mode)
/// bend and hanging-cable checks.
pub fn build_graph<'a>(cell: &'a Workcell, task: Task, grasps: GraspSet, opts: &PlannerOptions) -> Result<RegraspGraph<'a>> {
    let goal_is_start = task.start.approx_eq(&task.goal, 1e-9, 1e-9);
    let mut g = RegraspGraph {
        cell,
        task,
        opts: *opts,
        grasps,
        goal_is_start,
        ik: BTreeMap::new(),
        pregrasp: BTreeMap::new(),
        nodes: Vec::new(),
        index: BTreeMap::new(),
        valid: Vec::new(),
        start_nodes: Vec::new(),
        goal_nodes: BTreeMap::new(),
    };
    let init = g.insert(RegraspNode {
        kind: NodeKind::Init,
        object_pose: task.start,
        q: cell.home,
        grasps: [None, None],
    });
    g.valid[init] = Some(true);

    for arm in Arm::BOTH {
        for grasp in 0..g.grasps.for_arm(arm).len() {
            if let Some(id) = g.single_grasp_node(PoseSlot::Start, arm, grasp) {
                if g.node_valid(id) {
                    g.start_nodes.push(id);
                }
            }
        }
    }
    if g.start_nodes.is_empty() {
        return Err(Error::NoFeasibleStartGrasp);
    }
    if !goal_is_start {
        for arm in Arm::BOTH {
            for grasp in 0..g.grasps.for_arm(arm).len() {
                if let Some(id) = g.single_grasp_node(PoseSlot::Goal, arm, grasp) {
                    if g.node_valid(id) {
                        g.goal_nodes.insert((arm, grasp), id);
                    }
                }
            }
        }
        if g.goal_nodes.is_empty() {
            return Err(Error::NoFeasibleGoalGrasp);
        }
    }
    Ok(g)
}

impl<'a> RegraspGraph<'a> {
    pub const INIT: NodeId = 0;

    pub fn node(&self, id: NodeId) -> &RegraspNode {
        &self.nodes[id]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn grasps(&self) -> &GraspSet {
        &self.grasps
    }

    pub fn into_grasps(self) -> GraspSet {
        self.grasps
    }

    pub fn start_nodes(&self) -> &[NodeId] {
        &self.start_nodes
    }

    pub fn goal_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.goal_nodes.values().copied()
    }

    pub fn is_goal(&self, id: NodeId) -> bool {
        match self.nodes[id].kind {
            NodeKind::Goal { .. } => true,
            NodeKind::Start { .. } => self.goal_is_start,
            _ => false,
        }
    }

    fn insert(&mut self, node: RegraspNode) -> NodeId {
        if let Some(&id) = self.index.get(&node.kind) {
            return id;
        }
        let id = self.nodes.len();
        self.index.insert(node.kind, id);
        self.nodes.push(node);
        self.valid.push(None);
        id
    }

    pub fn slot_pose(&self, slot: PoseSlot) -> Pose {
        match slot {
            PoseSlot::Start => self.task.start,
            PoseSlot::Goal => self.task.goal,
            PoseSlot::Handover(i) => self.cell.handover_poses[i],
        }
    }

    fn grasp_pose(&self, arm: Arm, grasp: usize) -> Pose {
        self.grasps.for_arm(arm)[grasp].pose
    }

    fn ik_options(&self, key: IkKey) -> IkOptions {
        let (slot, arm, grasp) = key;
        let mixed = self.opts.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
            ^ (slot.code() << 40)
            ^ ((arm.index() as u64) << 32)
            ^ grasp as u64;
        IkOptions { seed: mixed, ..self.opts.ik }
    }

    /// IK solution for `arm` holding `grasp` with the tool at `slot`, seeded from home.
    pub fn grasp_config(&mut self, slot: PoseSlot, arm: Arm, grasp: usize) -> Option<JointConfig> {
        let key = (slot, arm, grasp);
        if let Some(q) = self.ik.get(&key) {
            return *q;
        }
        let target = self.slot_pose(slot).compose(&self.grasp_pose(arm, grasp));
        let q = self
            .cell
            .robot
            .arm(arm)
            .ik(&target, &self.cell.home[arm.index()], &self.ik_options(key))
            .ok();
        self.ik.insert(key, q);
        q
    }

    /// Stand-off configuration before closing on `grasp`, seeded from the grasp
    /// configuration with no restarts so it stays on the same IK branch.
    pub fn pregrasp_config(&mut self, slot: PoseSlot, arm: Arm, grasp: usize) -> Option<JointConfig> {
        let key = (slot, arm, grasp);
        if let Some(q) = self.pregrasp.get(&key) {
            return *q;
        }
        let q = self.grasp_config(slot, arm, grasp).and_then(|seed| {
            let back = Pose::from_translation(Vec3::new(0.0, 0.0, -self.opts.pregrasp_distance));
            let target = self.slot_pose(slot).compose(&self.grasp_pose(arm, grasp)).compose(&back);
            let opts = IkOptions {
                restarts: 1,
                ..self.ik_options(key)
            };
            self.cell.robot.arm(arm).ik(&target, &seed, &opts).ok()
        });
        self.pregrasp.insert(key, q);
        q
    }

    fn bend_ok(&self, pose: &Pose) -> bool {
        !self.opts.constrained
            || check_bend(pose, &self.cell.tool, &self.cell.balancer, &self.opts.bend)
                .map(|c| c.passed())
                .unwrap_or(false)
    }

    fn single_grasp_node(&mut self, slot: PoseSlot, arm: Arm, grasp: usize) -> Option<NodeId> {
        let kind = match slot {
            PoseSlot::Start => NodeKind::Start { arm, grasp },
            PoseSlot::Goal => NodeKind::Goal { arm, grasp },
            PoseSlot::Handover(_) => return None,
        };
        if let Some(&id) = self.index.get(&kind) {
            return Some(id);
        }
        let q_arm = self.grasp_config(slot, arm, grasp)?;
        let mut q = self.cell.home;
        q[arm.index()] = q_arm;
        let mut grasps = [None, None];
        grasps[arm.index()] = Some(grasp);
        Some(self.insert(RegraspNode {
            kind,
            object_pose: self.slot_pose(slot),
            q,
            grasps,
        }))
    }

    fn handover_node(&mut self, pose: usize, giver: Arm, giver_grasp: usize, receiver_grasp: usize) -> Option<NodeId> {
        let kind = NodeKind::Handover {
            pose,
            giver,
            giver_grasp,
            receiver_grasp,
        };
        if let Some(&id) = self.index.get(&kind) {
            return Some(id);
        }
        let slot = PoseSlot::Handover(pose);
        let qg = self.grasp_config(slot, giver, giver_grasp)?;
        let qr = self.grasp_config(slot, giver.other(), receiver_grasp)?;
        let mut q = [qg, qg];
        q[giver.other().index()] = qr;
        let mut grasps = [None, None];
        grasps[giver.index()] = Some(giver_grasp);
        grasps[giver.other().index()] = Some(receiver_grasp);
        Some(self.insert(RegraspNode {
            kind,
            object_pose: self.slot_pose(slot),
            q,
            grasps,
        }))
    }

    /// Checks the node state itself: collisions with the held tool, the bend angle
    /// (constrained), and for start grasps the hanging cable (constrained).
    pub fn node_valid(&mut self, id: NodeId) -> bool {
        if let Some(v) = self.valid[id] {
            return v;
        }
        let node = self.nodes[id];
        // A start grasp is checked at the instant the gripper closes, before the
        // tool has been lifted, so the hanging cable still counts.
        let closing = matches!(node.kind, NodeKind::Start { .. });
        let v = self.bend_ok(&node.object_pose) && {
            let seg = Segment {
                from: node.q,
                to: node.q,
                object: ObjectFrame::Fixed(node.object_pose),
                grasps: if closing { [None, None] } else { self.grasp_pairs(&node.grasps) },
                contact: node.holding(),
                untouched: closing,
                expect_end: None,
            };
            validate_edge(&Edge { segments: vec![seg] }, self.cell, &self.opts).is_valid()
        };
        self.valid[id] = Some(v);
        v
    }

    fn grasp_pairs(&self, grasps: &[Option<usize>; 2]) -> [Option<(usize, Pose)>; 2] {
        let mut out = [None, None];
        for arm in Arm::BOTH {
            out[arm.index()] = grasps[arm.index()].map(|g| (g, self.grasp_pose(arm, g)));
        }
        out
    }

    /// Neighbouring states with their joint-distance cost. Pre-grasp stand-offs are
    /// not included in the cost.
    pub fn successors(&mut self, id: NodeId) -> Vec<(NodeId, f64)> {
        let node = self.nodes[id];
        let home = self.cell.home;
        let mut out = Vec::new();
        match node.kind {
            NodeKind::Init => {
                for &s in &self.start_nodes {
                    let n = &self.nodes[s];
                    let cost = n.q[0].distance(&home[0]) + n.q[1].distance(&home[1]);
                    out.push((s, cost));
                }
            }
            NodeKind::Start { arm, grasp } => {
                if self.goal_is_start {
                    return out;
                }
                let qa = node.q[arm.index()];
                if let Some(&g) = self.goal_nodes.get(&(arm, grasp)) {
                    out.push((g, qa.distance(&self.nodes[g].q[arm.index()])));
                }
                let other = arm.other();
                for h in 0..self.cell.handover_poses.len() {
                    if !self.bend_ok(&self.cell.handover_poses[h]) {
                        continue;
                    }
                    let Some(qh) = self.grasp_config(PoseSlot::Handover(h), arm, grasp) else { continue };
                    for rg in 0..self.grasps.for_arm(other).len() {
                        if let Some(n) = self.handover_node(h, arm, grasp, rg) {
                            let qr = self.nodes[n].q[other.index()];
                            out.push((n, qa.distance(&qh) + home[other.index()].distance(&qr)));
                        }
                    }
                }
            }
            NodeKind::Handover {
                pose,
                giver,
                receiver_grasp,
                ..
            } => {
                let receiver = giver.other();
                let q_give = node.q[giver.index()];
                let q_recv = node.q[receiver.index()];
                let retreat = q_give.distance(&home[giver.index()]);
                if let Some(&g) = self.goal_nodes.get(&(receiver, receiver_grasp)) {
                    out.push((g, retreat + q_recv.distance(&self.nodes[g].q[receiver.index()])));
                }
                for h in 0..self.cell.handover_poses.len() {
                    if h == pose || !self.bend_ok(&self.cell.handover_poses[h]) {
                        continue;
                    }
                    let Some(qh) = self.grasp_config(PoseSlot::Handover(h), receiver, receiver_grasp) else { continue };
                    for ng in 0..self.grasps.for_arm(giver).len() {
                        if let Some(n) = self.handover_node(h, receiver, receiver_grasp, ng) {
                            let q_new = self.nodes[n].q[giver.index()];
                            out.push((n, retreat + q_recv.distance(&qh) + home[giver.index()].distance(&q_new)));
                        }
                    }
                }
            }
            NodeKind::Goal { .. } => {}
        }
        out
    }

    /// Motion segments realizing the transition `from → to`, or `None` when a
    /// pre-grasp configuration has no IK solution or the nodes are not adjacent.
    pub fn edge(&mut self, from: NodeId, to: NodeId) -> Option<Edge> {
        let a = self.nodes[from];
        let b = self.nodes[to];
        let home = self.cell.home;
        let mut segments = Vec::new();
        match (a.kind, b.kind) {
            (NodeKind::Init, NodeKind::Start { arm, grasp }) => {
                self.approach(&mut segments, a.q, arm, grasp, PoseSlot::Start, [None, None], true)?;
            }
            (NodeKind::Start { arm, grasp }, NodeKind::Goal { arm: ga, grasp: gg }) if arm == ga && grasp == gg => {
                segments.push(self.carry(a.q, b.q, arm, grasp, b.object_pose));
            }
            (
                NodeKind::Start { arm, grasp },
                NodeKind::Handover {
                    pose,
                    giver,
                    giver_grasp,
                    receiver_grasp,
                },
            ) if arm == giver && grasp == giver_grasp => {
                let mut mid = a.q;
                mid[arm.index()] = b.q[arm.index()];
                segments.push(self.carry(a.q, mid, arm, grasp, b.object_pose));
                let held = self.grasp_pairs(&a.grasps);
                self.approach(&mut segments, mid, arm.other(), receiver_grasp, PoseSlot::Handover(pose), held, false)?;
            }
            (
                NodeKind::Handover {
                    pose,
                    giver,
                    giver_grasp,
                    receiver_grasp,
                },
                next,
            ) => {
                let receiver = giver.other();
                let slot = PoseSlot::Handover(pose);
                let mut held = [None, None];
                held[receiver.index()] = Some((receiver_grasp, self.grasp_pose(receiver, receiver_grasp)));
                // Giver opens, backs off along its approach, and returns home.
                let pre = self.pregrasp_config(slot, giver, giver_grasp)?;
                let mut q = a.q;
                let mut q_pre = q;
                q_pre[giver.index()] = pre;
                segments.push(Segment {
                    from: q,
                    to: q_pre,
                    object: ObjectFrame::Fixed(a.object_pose),
                    grasps: held,
                    contact: ArmSet::BOTH,
                    untouched: false,
                    expect_end: None,
                });
                q = q_pre;
                let mut q_home = q;
                q_home[giver.index()] = home[giver.index()];
                segments.push(Segment {
                    from: q,
                    to: q_home,
                    object: ObjectFrame::Fixed(a.object_pose),
                    grasps: held,
                    contact: ArmSet::single(receiver),
                    untouched: false,
                    expect_end: None,
                });
                q = q_home;
                match next {
                    NodeKind::Goal { arm, grasp } if arm == receiver && grasp == receiver_grasp => {
                        segments.push(self.carry(q, b.q, receiver, receiver_grasp, b.object_pose));
                    }
                    NodeKind::Handover {
                        pose: p2,
                        giver: g2,
                        giver_grasp: gg2,
                        receiver_grasp: rg2,
                    } if g2 == receiver && gg2 == receiver_grasp && p2 != pose => {
                        let mut mid = q;
                        mid[receiver.index()] = b.q[receiver.index()];
                        segments.push(self.carry(q, mid, receiver, receiver_grasp, b.object_pose));
                        self.approach(&mut segments, mid, giver, rg2, PoseSlot::Handover(p2), held, false)?;
                    }
                    _ => return None,
                }
            }
            _ => return None,
        }
        Some(Edge { segments })
    }

    fn carry(&self, from: [JointConfig; 2], to: [JointConfig; 2], arm: Arm, grasp: usize, end: Pose) -> Segment {
        let mut grasps = [None, None];
        let gp = self.grasp_pose(arm, grasp);
        grasps[arm.index()] = Some((grasp, gp));
        Segment {
            from,
            to,
            object: ObjectFrame::Carried { arm, grasp: gp },
            grasps,
            contact: ArmSet::single(arm),
            untouched: false,
            expect_end: Some(end),
        }
    }

    /// Moves `arm` from its current configuration to the stand-off, then onto the grasp.
    #[allow(clippy::too_many_arguments)]
    fn approach(
        &mut self,
        segments: &mut Vec<Segment>,
        start: [JointConfig; 2],
        arm: Arm,
        grasp: usize,
        slot: PoseSlot,
        held: [Option<(usize, Pose)>; 2],
        untouched: bool,
    ) -> Option<()> {
        let pre = self.pregrasp_config(slot, arm, grasp)?;
        let target = self.grasp_config(slot, arm, grasp)?;
        let object = ObjectFrame::Fixed(self.slot_pose(slot));
        let holders = Arm::BOTH
            .into_iter()
            .filter(|a| held[a.index()].is_some())
            .fold(ArmSet::EMPTY, ArmSet::with);
        let mut q_pre = start;
        q_pre[arm.index()] = pre;
        let mut q_grasp = q_pre;
        q_grasp[arm.index()] = target;
        segments.push(Segment {
            from: start,
            to: q_pre,
            object,
            grasps: held,
            contact: holders,
            untouched,
            expect_end: None,
        });
        segments.push(Segment {
            from: q_pre,
            to: q_grasp,
            object,
            grasps: held,
            contact: holders.with(arm),
            untouched,
            expect_end: None,
        });
        // Gripper closed: from here on `arm` holds the tool too.
        let mut closed = held;
        closed[arm.index()] = Some((grasp, self.grasp_pose(arm, grasp)));
        segments.push(Segment {
            from: q_grasp,
            to: q_grasp,
            object,
            grasps: closed,
            contact: holders.with(arm),
            untouched: false,
            expect_end: None,
        });
        Some(())
    }
}
