use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::graph::{build_graph, NodeId, RegraspGraph};
use super::validate::{validate_edge, EdgeVerdict, InvalidReason};
use super::{sample_grasps, MotionPlan, NoPlanReason, PlanResult, PlanStatus, PlannerOptions, SearchStats, Task, Waypoint, Workcell};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct Entry {
    edges: u32,
    cost: f64,
    to: NodeId,
    from: Option<NodeId>,
}

impl Entry {
    fn key(&self) -> (u32, f64, NodeId, Option<NodeId>) {
        (self.edges, self.cost, self.to, self.from)
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Reversed so that `BinaryHeap` pops the smallest key.
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.key(), other.key());
        b.0.cmp(&a.0)
            .then_with(|| b.1.total_cmp(&a.1))
            .then_with(|| b.2.cmp(&a.2))
            .then_with(|| b.3.cmp(&a.3))
    }
}

/// Plans a pick–regrasp–place motion with no time limit.
pub fn plan(cell: &Workcell, task: &Task, opts: &PlannerOptions) -> Result<PlanResult> {
    plan_with_deadline(cell, task, opts, &mut || false)
}

/// Like [`plan`], but polls `expired` before each node expansion and gives up with
/// [`NoPlanReason::TimeLimit`] once it returns true.
///
/// Errors are reserved for invalid input; an infeasible task is a
/// [`PlanStatus::NoPlan`].
pub fn plan_with_deadline(
    cell: &Workcell,
    task: &Task,
    opts: &PlannerOptions,
    expired: &mut dyn FnMut() -> bool,
) -> Result<PlanResult> {
    opts.validate()?;
    for p in [&task.start, &task.goal] {
        if !p.rotation.is_rotation(1e-9) || !p.translation.is_finite() {
            return Err(Error::InvalidScene("task pose is not a valid rigid transform".into()));
        }
    }
    let grasps = sample_grasps(&cell.tool, &opts.grasps)?;
    let mut stats = SearchStats::default();
    let mut graph = match build_graph(cell, *task, grasps.clone(), opts) {
        Ok(g) => g,
        Err(Error::NoFeasibleStartGrasp) => return Ok(no_plan(NoPlanReason::NoFeasibleStartGrasp, stats, grasps)),
        Err(Error::NoFeasibleGoalGrasp) => return Ok(no_plan(NoPlanReason::NoFeasibleGoalGrasp, stats, grasps)),
        Err(e) => return Err(e),
    };

    let mut closed: Vec<bool> = Vec::new();
    let mut arrival: Vec<Option<(Option<NodeId>, Vec<Waypoint>)>> = Vec::new();
    let mut heap = BinaryHeap::new();
    heap.push(Entry {
        edges: 0,
        cost: 0.0,
        to: RegraspGraph::INIT,
        from: None,
    });

    while let Some(e) = heap.pop() {
        grow(&mut closed, &mut arrival, graph.node_count());
        if closed[e.to] {
            continue;
        }
        if expired() {
            return Ok(no_plan(NoPlanReason::TimeLimit, stats, graph.into_grasps()));
        }
        let waypoints = match e.from {
            None => Vec::new(),
            Some(from) => {
                if !graph.node_valid(e.to) {
                    continue;
                }
                if stats.validated_edges >= opts.max_validated_edges {
                    return Ok(no_plan(NoPlanReason::EdgeBudget, stats, graph.into_grasps()));
                }
                let Some(edge) = graph.edge(from, e.to) else {
                    stats.rejected_ik += 1;
                    continue;
                };
                stats.validated_edges += 1;
                match validate_edge(&edge, cell, opts) {
                    EdgeVerdict::Valid(w) => w,
                    EdgeVerdict::Invalid(reason, _) => {
                        match reason {
                            InvalidReason::IkInconsistent | InvalidReason::JointLimit => stats.rejected_ik += 1,
                            InvalidReason::Collision(..) => stats.rejected_collision += 1,
                            InvalidReason::CableCollision(_) => stats.rejected_cable += 1,
                            InvalidReason::BendViolation(_) => stats.rejected_bend += 1,
                        }
                        continue;
                    }
                }
            }
        };
        closed[e.to] = true;
        arrival[e.to] = Some((e.from, waypoints));
        stats.expanded_nodes += 1;

        if graph.is_goal(e.to) {
            let plan = reconstruct(&mut arrival, e.to, &mut stats);
            return Ok(PlanResult {
                status: PlanStatus::Success(plan),
                stats,
                grasps: graph.into_grasps(),
            });
        }
        for (succ, cost) in graph.successors(e.to) {
            if succ < closed.len() && closed[succ] {
                continue;
            }
            heap.push(Entry {
                edges: e.edges + 1,
                cost: e.cost + cost,
                to: succ,
                from: Some(e.to),
            });
        }
    }
    Ok(no_plan(NoPlanReason::SearchExhausted, stats, graph.into_grasps()))
}

fn no_plan(reason: NoPlanReason, stats: SearchStats, grasps: super::GraspSet) -> PlanResult {
    PlanResult {
        status: PlanStatus::NoPlan(reason),
        stats,
        grasps,
    }
}

fn grow(closed: &mut Vec<bool>, arrival: &mut Vec<Option<(Option<NodeId>, Vec<Waypoint>)>>, n: usize) {
    if closed.len() < n {
        closed.resize(n, false);
        arrival.resize_with(n, || None);
    }
}

fn reconstruct(arrival: &mut [Option<(Option<NodeId>, Vec<Waypoint>)>], goal: NodeId, stats: &mut SearchStats) -> MotionPlan {
    let mut chunks = vec![];
    let mut cur = Some(goal);
    while let Some(id) = cur {
        let (from, w) = arrival[id].take().expect("closed node has an arrival record");
        if from.is_some() {
            stats.path_edges += 1;
        }
        chunks.push(w);
        cur = from;
    }
    let mut waypoints: Vec<Waypoint> = Vec::new();
    for chunk in chunks.into_iter().rev() {
        for w in chunk {
            if waypoints.last().is_some_and(|p| same(p, &w)) {
                continue;
            }
            waypoints.push(w);
        }
    }
    MotionPlan { waypoints }
}

fn same(a: &Waypoint, b: &Waypoint) -> bool {
    a.q == b.q && a.grasps == b.grasps && a.contact == b.contact
}
