//! Cable torque model: virtual-work oracle and structural properties.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tetherplan_core::cable::{bend_angle, BalancerSpec};
use tetherplan_core::geometry::{Pose, Rot3, Vec3};
use tetherplan_core::planner::{MotionPlan, Waypoint};
use tetherplan_core::presets;
use tetherplan_core::robot::{Arm, ArmSet, JointConfig};
use tetherplan_core::torque::{
    cable_tension, cable_wrench, compare_max_torque, joint_torques, lateral_force, trace_plan, CableWrench,
    TorqueTrace,
};
use tetherplan_core::Error;

fn random_config(rng: &mut ChaCha8Rng) -> JointConfig {
    JointConfig(core::array::from_fn(|_| rng.gen_range(-3.0..3.0)))
}

#[test]
fn transpose_jacobian_matches_virtual_work() {
    let arm = presets::ur3_arm(Pose::from_translation(presets::LEFT_BASE));
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let h = 1e-6;
    for _ in 0..100 {
        let q = random_config(&mut rng);
        let flange = arm.frames(&q)[6];
        // A point rigidly attached to the last link, somewhere around the tool.
        let offset = Vec3::new(rng.gen_range(-0.1..0.1), rng.gen_range(0.1..0.35), rng.gen_range(-0.1..0.1));
        let point = flange.transform_point(offset);
        let force = Vec3::new(rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0));
        let tau = joint_torques(&arm, &q, &CableWrench { point, force });
        for i in 0..6 {
            let (mut qp, mut qm) = (q, q);
            qp.0[i] += h;
            qm.0[i] -= h;
            let dp = (arm.frames(&qp)[6].transform_point(offset) - arm.frames(&qm)[6].transform_point(offset)) * (1.0 / (2.0 * h));
            let oracle = force.dot(dp);
            let scale = force.norm() * dp.norm().max(1e-3);
            assert!((tau[i] - oracle).abs() / scale < 1e-3, "joint {i}: {} vs {oracle}", tau[i]);
        }
    }
}

#[test]
fn zero_force_gives_zero_torque() {
    let arm = presets::ur3_arm(Pose::IDENTITY);
    let tau = joint_torques(&arm, &presets::HOME_LEFT, &CableWrench { point: Vec3::new(0.3, 0.1, 0.4), force: Vec3::ZERO });
    assert_eq!(tau, [0.0; 6]);
}

#[test]
fn vertical_force_on_vertical_arm_loads_no_joint() {
    // At the zero configuration the arm is a vertical column; joint axes are z or
    // y. A vertical force along the column has no moment about any of them when
    // it acts on the first joint's axis.
    let arm = presets::ur3_arm(Pose::IDENTITY);
    let q = JointConfig::ZERO;
    let tcp = arm.fk(&q);
    let point = Vec3::new(0.0, tcp.translation.y, tcp.translation.z);
    let tau = joint_torques(&arm, &q, &CableWrench { point, force: Vec3::new(0.0, 0.0, 19.62) });
    assert!(tau[0].abs() < 1e-12, "base joint {}", tau[0]);
    for (i, t) in tau.iter().enumerate().skip(1) {
        // y-axis joints sit on the same vertical line through x = 0
        assert!(t.abs() < 1e-9, "joint {i}: {t}");
    }
}

fn one_waypoint_plan(q: JointConfig, object: Pose) -> MotionPlan {
    MotionPlan {
        waypoints: vec![Waypoint {
            q: [q, presets::HOME_RIGHT],
            object,
            grasps: [Some(0), None],
            contact: ArmSet::single(Arm::Left),
            theta: 0.0,
            min_clearance: 1.0,
        }],
    }
}

#[test]
fn doubling_the_load_doubles_every_torque() {
    let mut cell = presets::default_workcell();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..20 {
        let q = random_config(&mut rng);
        let object = cell.robot.arm(Arm::Left).fk(&q);
        let plan = one_waypoint_plan(q, object);
        let base = trace_plan(&cell, &plan).unwrap();
        let b = cell.balancer;
        cell.balancer = BalancerSpec::new(b.anchor, b.reference_dir, 2.0 * b.max_load, b.cable_radius).unwrap();
        let doubled = trace_plan(&cell, &plan).unwrap();
        cell.balancer = b;
        let (t1, t2) = (base.samples[0][0].unwrap(), doubled.samples[0][0].unwrap());
        for i in 0..6 {
            assert_eq!(t2[i], 2.0 * t1[i]);
        }
    }
}

#[test]
fn rotating_the_whole_scene_leaves_torques_unchanged() {
    let tool = presets::screwdriver();
    let bal = presets::balancer(presets::ANCHOR);
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for _ in 0..50 {
        let base = Pose::from_xyz_rpy(Vec3::new(0.0, 0.25, 0.0), 0.0, 0.0, rng.gen_range(-1.0..1.0));
        let world = Pose::from_xyz_rpy(
            Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-1.5..1.5),
            rng.gen_range(-3.0..3.0),
        );
        let q = random_config(&mut rng);
        let arm = presets::ur3_arm(base);
        let moved_arm = presets::ur3_arm(world.compose(&base));
        let object = arm.fk(&q);
        let w = cable_wrench(&object, &tool, &bal).unwrap();
        let moved_bal = BalancerSpec::new(
            world.transform_point(bal.anchor),
            world.transform_vector(bal.reference_dir),
            bal.max_load,
            bal.cable_radius,
        )
        .unwrap();
        let moved_w = cable_wrench(&world.compose(&object), &tool, &moved_bal).unwrap();
        let t1 = joint_torques(&arm, &q, &w);
        let t2 = joint_torques(&moved_arm, &q, &moved_w);
        for i in 0..6 {
            assert!((t1[i] - t2[i]).abs() < 1e-9, "joint {i}: {} vs {}", t1[i], t2[i]);
        }
        let th1 = bend_angle(&object, &tool, &bal).unwrap();
        let th2 = bend_angle(&world.compose(&object), &tool, &moved_bal).unwrap();
        assert!((th1 - th2).abs() < 1e-9);
    }
}

#[test]
fn lateral_force_grows_with_bend() {
    let tool = presets::screwdriver();
    let bal = presets::balancer(presets::ANCHOR);
    // Connector held at a fixed point straight below the anchor.
    let connector = presets::ANCHOR - Vec3::new(0.0, 0.0, 0.6);
    let mut prev = -1.0;
    for k in 0..=90 {
        let r = Rot3::from_axis_angle(Vec3::new(1.0, 0.3, 0.0).normalized().unwrap(), (k as f64).to_radians());
        let pose = Pose::new(r, connector - r.rotate(tool.connector_point));
        let theta = bend_angle(&pose, &tool, &bal).unwrap();
        assert!((theta - (k as f64).to_radians()).abs() < 1e-9);
        let f = lateral_force(&pose, &tool, &bal).unwrap();
        assert!(f > prev, "lateral force dropped at {k} deg");
        assert!((f - cable_tension(&bal) * theta.sin()).abs() < 1e-9);
        prev = f;
    }
}

#[test]
fn comparison_percentages() {
    let t = |v: f64| TorqueTrace { samples: vec![[Some([v, -v, 0.0, 0.0, 0.0, 0.0]), Some([0.5 * v; 6])]] };
    assert_eq!(compare_max_torque(&t(2.0), &t(2.0)).unwrap(), [Some(0.0), Some(0.0)]);
    assert_eq!(compare_max_torque(&t(1.0), &t(2.0)).unwrap(), [Some(50.0), Some(50.0)]);
    let empty = TorqueTrace { samples: vec![[None, None]] };
    assert_eq!(compare_max_torque(&empty, &t(1.0)), Err(Error::EmptyTrace));
    let left_only = TorqueTrace { samples: vec![[Some([1.0; 6]), None]] };
    assert_eq!(compare_max_torque(&left_only, &t(2.0)).unwrap(), [Some(50.0), None]);
}

#[test]
fn hanging_tool_feels_only_vertical_pull() {
    let cell = presets::default_workcell();
    let w = cable_wrench(&presets::baseline_start(), &cell.tool, &cell.balancer).unwrap();
    assert!(w.force.x.abs() < 1e-12 && w.force.y.abs() < 1e-12);
    assert!((w.force.z - cable_tension(&cell.balancer)).abs() < 1e-12);
    assert!(lateral_force(&presets::baseline_start(), &cell.tool, &cell.balancer).unwrap() < 1e-12);
}

#[test]
fn trace_has_one_sample_per_waypoint() {
    let cell = presets::default_workcell();
    let q = presets::HOME_LEFT;
    let plan = one_waypoint_plan(q, cell.robot.arm(Arm::Left).fk(&q));
    let trace = trace_plan(&cell, &plan).unwrap();
    assert_eq!(trace.samples.len(), 1);
    assert!(trace.samples[0][0].is_some() && trace.samples[0][1].is_none());
}
