//! Built-in robot, tool and workcell definitions.
//!
//! The arm uses UR3 link dimensions. At the all-zero configuration the arm points
//! straight up, every joint frame is aligned with the base, and the flange faces
//! the base +y direction.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::cable::{BalancerSpec, Handle, ToolSpec};
use crate::collision::{Capsule, CollisionWorld, Cuboid, LinkCapsule, NamedShape, Shape};
use crate::geometry::{Pose, Rot3, Vec3};
use crate::planner::Workcell;
use crate::robot::{Arm, ArmModel, DualArm, JointConfig, RevoluteJoint};

const fn joint(origin: [f64; 3], axis: [f64; 3]) -> RevoluteJoint {
    RevoluteJoint {
        origin: Vec3::from_array(origin),
        axis: Vec3::from_array(axis),
        lower: -PI,
        upper: PI,
    }
}

/// UR3 joint chain.
pub const UR3_JOINTS: [RevoluteJoint; 6] = [
    joint([0.0, 0.0, 0.1519], [0.0, 0.0, 1.0]),
    joint([0.0, 0.1198, 0.0], [0.0, 1.0, 0.0]),
    joint([0.0, -0.0925, 0.24365], [0.0, 1.0, 0.0]),
    joint([0.0, 0.0, 0.21325], [0.0, 1.0, 0.0]),
    joint([0.0, 0.08505, 0.0], [0.0, 0.0, 1.0]),
    joint([0.0, 0.0, 0.08535], [0.0, 1.0, 0.0]),
];

/// Flange offset from the last joint plus a parallel-jaw gripper.
pub const UR3_FLANGE: f64 = 0.0819;
pub const GRIPPER_LENGTH: f64 = 0.12;

/// TCP frame: z along the flange normal (approach), x along base x, fingers close along y.
pub fn ur3_tcp() -> Pose {
    Pose::new(
        Rot3::from_columns(Vec3::X, Vec3::new(0.0, 0.0, -1.0), Vec3::Y),
        Vec3::new(0.0, UR3_FLANGE + GRIPPER_LENGTH, 0.0),
    )
}

pub fn ur3_arm(base: Pose) -> ArmModel {
    ArmModel::new(base, UR3_JOINTS, ur3_tcp()).expect("preset arm is valid")
}

/// Link capsules for one UR3 arm, names prefixed with the arm name.
pub fn ur3_links(arm: Arm) -> Vec<LinkCapsule> {
    let spec: [(usize, [f64; 3], [f64; 3], f64); 7] = [
        (0, [0.0, 0.0, 0.0], [0.0, 0.0, 0.1519], 0.064),
        (1, [0.0, -0.02, 0.0], [0.0, 0.1198, 0.0], 0.045),
        (2, [0.0, -0.02, 0.0], [0.0, -0.02, 0.24365], 0.038),
        (3, [0.0, 0.0, 0.0], [0.0, 0.0, 0.21325], 0.032),
        (4, [0.0, -0.01, 0.0], [0.0, 0.08505, 0.0], 0.032),
        (5, [0.0, 0.0, 0.0], [0.0, 0.0, 0.08535], 0.032),
        (6, [0.0, 0.03, 0.0], [0.0, UR3_FLANGE + 0.07, 0.0], 0.035),
    ];
    spec.iter()
        .enumerate()
        .map(|(k, (frame, a, b, r))| LinkCapsule {
            name: format!("{}/link_{}", arm.name(), k),
            frame: *frame,
            capsule: Capsule::new(Vec3::from_array(*a), Vec3::from_array(*b), *r),
        })
        .collect()
}

/// Hand-held electric screwdriver hanging by a cable attached at its top.
///
/// Tool frame: origin on the body axis, +z toward the cable connector.
pub fn screwdriver() -> ToolSpec {
    ToolSpec::new(
        Vec3::Z,
        Vec3::new(0.0, 0.0, 0.11),
        vec![
            NamedShape::new(
                "tool/body",
                Shape::Capsule(Capsule::new(Vec3::new(0.0, 0.0, -0.11), Vec3::new(0.0, 0.0, 0.04), 0.016)),
            ),
            NamedShape::new(
                "tool/head",
                Shape::Cuboid(Cuboid {
                    pose: Pose::from_translation(Vec3::new(0.0, 0.0, 0.075)),
                    half_extents: Vec3::new(0.022, 0.022, 0.035),
                }),
            ),
        ],
        Handle {
            from: Vec3::new(0.0, 0.0, -0.10),
            to: Vec3::new(0.0, 0.0, 0.04),
            radius: 0.016,
        },
    )
    .expect("preset tool is valid")
}

/// 2 kg balancer with a vertical reference direction.
pub fn balancer(anchor: Vec3) -> BalancerSpec {
    BalancerSpec::new(anchor, Vec3::Z, 2.0, 0.01).expect("preset balancer is valid")
}

pub const LEFT_BASE: Vec3 = Vec3::new(0.0, 0.3, 0.0);
pub const RIGHT_BASE: Vec3 = Vec3::new(0.0, -0.3, 0.0);

pub fn dual_ur3() -> DualArm {
    DualArm::new(
        ur3_arm(Pose::from_translation(LEFT_BASE)),
        ur3_arm(Pose::from_translation(RIGHT_BASE)),
    )
    .expect("preset bases differ")
}

/// Table top at z = 0.
pub fn table() -> NamedShape {
    NamedShape::new(
        "table",
        Shape::Cuboid(Cuboid {
            pose: Pose::from_translation(Vec3::new(0.3, 0.0, -0.025)),
            half_extents: Vec3::new(0.6, 0.8, 0.025),
        }),
    )
}

const fn deg(v: f64) -> f64 {
    v * (PI / 180.0)
}

const fn deg6(v: [f64; 6]) -> JointConfig {
    JointConfig([deg(v[0]), deg(v[1]), deg(v[2]), deg(v[3]), deg(v[4]), deg(v[5])])
}

/// Rest poses: grippers above the table at (0.35, ±0.45, 0.45), pointing
/// forward and 30° down, outboard of the hanging tool.
pub const HOME_LEFT: JointConfig = deg6([11.419, -8.884, 75.464, -36.082, -99.872, -174.233]);
pub const HOME_RIGHT: JointConfig = deg6([168.583, -60.684, 75.463, -45.277, 99.871, 174.234]);

/// Hanging start position of the tool frame origin.
pub const START_POSITION: Vec3 = Vec3::new(0.32, 0.35, 0.30);
pub const ANCHOR: Vec3 = Vec3::new(0.32, 0.35, 0.8);

/// Baseline start pose: hanging straight below the anchor.
pub fn baseline_start() -> Pose {
    Pose::from_translation(START_POSITION)
}

/// Baseline goal pose.
pub fn baseline_goal() -> Pose {
    Pose::from_xyz_rpy(Vec3::new(0.30, -0.35, 0.25), 0.0, 25f64.to_radians(), 0.0)
}

/// Six handover poses around a point between the arms.
pub fn handover_poses() -> Vec<Pose> {
    let c = Vec3::new(0.35, 0.0, 0.40);
    let r = 0.06;
    let d = |deg: f64| deg.to_radians();
    vec![
        Pose::from_xyz_rpy(c + Vec3::X * r, 0.0, 0.0, 0.0),
        Pose::from_xyz_rpy(c - Vec3::X * r, d(60.0), 0.0, 0.0),
        Pose::from_xyz_rpy(c + Vec3::Y * r, d(-60.0), 0.0, 0.0),
        Pose::from_xyz_rpy(c - Vec3::Y * r, 0.0, d(60.0), 0.0),
        Pose::from_xyz_rpy(c + Vec3::Z * r, 0.0, d(-60.0), 0.0),
        Pose::from_xyz_rpy(c - Vec3::Z * r, d(120.0), 0.0, 0.0),
    ]
}

/// The default workcell; the bundled scene file describes the same cell.
pub fn default_workcell() -> Workcell {
    let robot = dual_ur3();
    let collision = CollisionWorld::new(&robot, [ur3_links(Arm::Left), ur3_links(Arm::Right)], vec![table()])
        .expect("preset collision world is valid");
    Workcell::new(
        robot,
        collision,
        balancer(ANCHOR),
        screwdriver(),
        [HOME_LEFT, HOME_RIGHT],
        handover_poses(),
    )
    .expect("preset workcell is valid")
}
