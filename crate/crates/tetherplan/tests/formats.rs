//! CSV formats, outcome labels and report aggregation.

use std::time::Duration;

use proptest::prelude::*;
use tetherplan::io::{plan_header, read_plan, torque_header, write_plan, write_torque};
use tetherplan::outcome::{classify, Label};
use tetherplan::scene::Scene;
use tetherplan::sweep::{self, CellResult, Mode, SweepReport};
use tetherplan_core::audit::{AuditReport, AuditViolation};
use tetherplan_core::planner::{GraspSet, MotionPlan, NoPlanReason, PlanResult, PlanStatus, SearchStats};
use tetherplan_core::torque::trace_plan;

fn result(status: PlanStatus) -> PlanResult {
    PlanResult {
        status,
        stats: SearchStats::default(),
        grasps: GraspSet::default(),
    }
}

fn audit(violations: Vec<AuditViolation>) -> AuditReport {
    AuditReport {
        violations,
        max_theta: 1.0,
        min_clearance: 0.01,
        waypoints: 3,
    }
}

#[test]
fn bend_takes_precedence_over_cable_contact() {
    let r = result(PlanStatus::Success(MotionPlan::default()));
    let cable = AuditViolation::CableCollision {
        waypoint: 1,
        link: "left/link_6".into(),
        clearance: -0.01,
    };
    let bend = AuditViolation::Bend { waypoint: 5, theta: 2.0 };
    let o = classify(&r, Some(&audit(vec![cable.clone(), bend])));
    assert_eq!((o.label, o.first_violation), (Label::BendViolation, Some(5)));
    let o = classify(&r, Some(&audit(vec![cable])));
    assert_eq!((o.label, o.first_violation), (Label::CableCollision, Some(1)));
    let o = classify(&r, Some(&audit(vec![])));
    assert_eq!(o.label, Label::Success);
    assert!(o.planned);
    let o = classify(&result(PlanStatus::NoPlan(NoPlanReason::EdgeBudget)), None);
    assert_eq!(o.label, Label::NoPlan);
    assert!(!o.planned);
}

#[test]
fn plan_and_torque_csv_round_trip() {
    let scene = Scene::default_scene().unwrap();
    let task = sweep::cell_task(&scene, 15.0, 10.0);
    let (res, outcome) = sweep::evaluate(&scene, &task, Mode::Constrained, 3).unwrap();
    assert_eq!(outcome.label, Label::Success);
    let plan = res.plan().unwrap();

    let mut buf = Vec::new();
    write_plan(&mut buf, plan).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(text.lines().next().unwrap(), plan_header().join(","));
    assert_eq!(text.lines().count(), plan.len() + 1);
    let back = read_plan(buf.as_slice(), "mem").unwrap();
    assert_eq!(back.len(), plan.len());
    for (a, b) in back.waypoints.iter().zip(&plan.waypoints) {
        assert_eq!(a.q, b.q);
        assert_eq!(a.grasps, b.grasps);
        assert_eq!(a.contact, b.contact);
        assert_eq!(a.object.translation, b.object.translation);
        assert!(a.object.approx_eq(&b.object, 1e-12, 1e-12));
        assert_eq!(a.theta, b.theta);
    }
    // Torques recomputed from the file match the in-memory plan.
    let (t1, t2) = (trace_plan(&scene.cell, &back).unwrap(), trace_plan(&scene.cell, plan).unwrap());
    for (a, b) in t1.samples.iter().zip(&t2.samples) {
        for (x, y) in a.iter().zip(b) {
            match (x, y) {
                (Some(x), Some(y)) => assert!(x.iter().zip(y).all(|(u, v)| (u - v).abs() < 1e-9)),
                (None, None) => {}
                _ => panic!("holding arms differ"),
            }
        }
    }

    let trace = trace_plan(&scene.cell, plan).unwrap();
    let mut out = Vec::new();
    write_torque(&mut out, &[trace.clone()]).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().next().unwrap(), torque_header().join(","));
    let rows = trace.samples.iter().map(|s| s.iter().flatten().count()).sum::<usize>();
    assert_eq!(text.lines().count(), rows + 1);
}

#[test]
fn corrupt_plan_csv_is_reported() {
    let header = plan_header().join(",");
    assert!(read_plan("a,b\n".as_bytes(), "x").is_err());
    let bad_row = format!("{header}\n0{}\n", ",nope".repeat(plan_header().len() - 1));
    assert!(read_plan(bad_row.as_bytes(), "x").is_err());
    assert_eq!(read_plan(format!("{header}\n").as_bytes(), "x").unwrap(), MotionPlan::default());
}

fn cell(row: usize, col: usize, mode: Mode, label: Label, torque: [Option<f64>; 2]) -> CellResult {
    CellResult {
        row,
        col,
        pitch_deg: [0.0, 10.0][row],
        roll_deg: [-20.0, 20.0][col],
        mode,
        label,
        planned: label != Label::NoPlan,
        reason: (label == Label::NoPlan).then(|| "SearchExhausted".to_string()),
        first_violation: matches!(label, Label::BendViolation | Label::CableCollision).then_some(4),
        max_theta_deg: (label != Label::NoPlan).then_some(37.5),
        waypoints: 10,
        handovers: 1,
        validated_edges: 123,
        other_violations: 0,
        max_torque: torque,
        runtime: Duration::ZERO,
    }
}

fn small_report() -> SweepReport {
    let mut cells = Vec::new();
    let labels = [
        (Label::Success, Label::BendViolation),
        (Label::Success, Label::CableCollision),
        (Label::NoPlan, Label::Success),
        (Label::Success, Label::Success),
    ];
    for (k, (c, u)) in labels.into_iter().enumerate() {
        let (r, col) = (k / 2, k % 2);
        cells.push(cell(r, col, Mode::Constrained, c, [Some(8.0), Some(6.0)]));
        cells.push(cell(r, col, Mode::Unconstrained, u, [Some(10.0), Some(4.0)]));
    }
    SweepReport {
        pitch_deg: vec![0.0, 10.0],
        roll_deg: vec![-20.0, 20.0],
        cells,
    }
}

#[test]
fn sweep_csv_round_trips() {
    let report = small_report();
    let mut buf = Vec::new();
    report.write_csv(&mut buf).unwrap();
    let back = SweepReport::read_csv(buf.as_slice(), "mem").unwrap();
    assert_eq!(back, report);
    let mut again = Vec::new();
    back.write_csv(&mut again).unwrap();
    assert_eq!(again, buf);
}

#[test]
fn rates_and_torque_summary() {
    let report = small_report();
    assert_eq!(report.success_rate(Mode::Constrained), Some(0.75));
    assert_eq!(report.success_rate(Mode::Unconstrained), Some(0.5));
    let t = report.torque_summary();
    // Three cells where both modes returned a plan: left 20 %, right −50 %.
    assert_eq!(t.cells, [3, 3]);
    assert!((t.mean_reduction[0].unwrap() - 20.0).abs() < 1e-12);
    assert!((t.mean_reduction[1].unwrap() + 50.0).abs() < 1e-12);
    let grid = report.grid_text();
    assert!(grid.contains('*') && grid.contains('x') && grid.contains('F'));
}

#[test]
fn empty_grid_reports_na() {
    let report = SweepReport::default();
    assert_eq!(report.success_rate(Mode::Constrained), None);
    assert!(report.summary_text().contains("n/a"));
    assert_eq!(report.torque_summary().mean_reduction, [None, None]);
}

proptest! {
    #[test]
    fn label_symbols_survive_csv(labels in proptest::collection::vec(0usize..4, 1..8)) {
        let cells: Vec<CellResult> = labels
            .iter()
            .enumerate()
            .map(|(k, &l)| {
                let mut c = cell(0, 0, Mode::Unconstrained, Label::ALL[l], [None, Some(k as f64 * 0.5)]);
                c.col = k;
                c.roll_deg = k as f64;
                c
            })
            .collect();
        let report = SweepReport { pitch_deg: vec![0.0], roll_deg: (0..labels.len()).map(|k| k as f64).collect(), cells };
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let back = SweepReport::read_csv(buf.as_slice(), "p").unwrap();
        prop_assert_eq!(back, report);
    }

    #[test]
    fn cell_seeds_do_not_collide(master in any::<u64>()) {
        let mut seen = std::collections::BTreeSet::new();
        for r in 0..8 {
            for c in 0..5 {
                prop_assert!(seen.insert(sweep::cell_seed(master, r, c)));
            }
        }
    }
}
