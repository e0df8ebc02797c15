//! Serial 6-DOF arm kinematics and the dual-arm model.
//!
//! Each joint frame is obtained from its parent by a pure translation (`origin`)
//! followed by a rotation of `q_i` about the joint `axis`, both expressed in the
//! parent frame. The tool centre point (TCP) hangs off the last joint frame through
//! `flange_to_tcp`.

use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Pose, Rot3, Vec3};
use crate::linalg::{self, Mat6};
use crate::{Error, Result};

pub use crate::linalg::Mat6 as Jacobian;

pub const DOF: usize = 6;

/// Which arm of the dual-arm robot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arm {
    Left,
    Right,
}

impl Arm {
    pub const BOTH: [Arm; 2] = [Arm::Left, Arm::Right];

    pub const fn index(self) -> usize {
        match self {
            Arm::Left => 0,
            Arm::Right => 1,
        }
    }

    pub const fn other(self) -> Arm {
        match self {
            Arm::Left => Arm::Right,
            Arm::Right => Arm::Left,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            Arm::Left => "left",
            Arm::Right => "right",
        }
    }

    /// Single-letter tag used in file formats.
    pub const fn tag(self) -> char {
        match self {
            Arm::Left => 'L',
            Arm::Right => 'R',
        }
    }

    pub fn from_tag(c: char) -> Option<Arm> {
        match c {
            'L' => Some(Arm::Left),
            'R' => Some(Arm::Right),
            _ => None,
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A subset of {left, right}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ArmSet(u8);

impl ArmSet {
    pub const EMPTY: ArmSet = ArmSet(0);
    pub const BOTH: ArmSet = ArmSet(3);

    pub const fn single(arm: Arm) -> ArmSet {
        ArmSet(1 << arm.index())
    }

    pub const fn contains(self, arm: Arm) -> bool {
        self.0 & (1 << arm.index()) != 0
    }

    pub const fn with(self, arm: Arm) -> ArmSet {
        ArmSet(self.0 | (1 << arm.index()))
    }

    pub const fn without(self, arm: Arm) -> ArmSet {
        ArmSet(self.0 & !(1 << arm.index()))
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = Arm> {
        Arm::BOTH.into_iter().filter(move |a| self.contains(*a))
    }
}

/// Joint angles of one arm, radians.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JointConfig(pub [f64; DOF]);

impl JointConfig {
    pub const ZERO: JointConfig = JointConfig([0.0; DOF]);

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Euclidean joint-space distance.
    pub fn distance(&self, other: &JointConfig) -> f64 {
        let s: f64 = self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum();
        crate::math::sqrt(s)
    }

    /// Largest single-joint difference.
    pub fn max_abs_diff(&self, other: &JointConfig) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn lerp(&self, other: &JointConfig, t: f64) -> JointConfig {
        let mut out = [0.0; DOF];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.0[i] + (other.0[i] - self.0[i]) * t;
        }
        JointConfig(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevoluteJoint {
    /// Joint origin in the parent frame, metres.
    pub origin: Vec3,
    /// Unit rotation axis in the parent frame.
    pub axis: Vec3,
    pub lower: f64,
    pub upper: f64,
}

/// Kinematic description of one 6-DOF arm.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmModel {
    pub base: Pose,
    pub joints: [RevoluteJoint; DOF],
    pub flange_to_tcp: Pose,
    reach: f64,
}

/// Options for [`ArmModel::ik`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkOptions {
    pub max_iters: usize,
    /// Attempts per phase; the first starts from the caller's seed
    /// configuration, the rest from random in-limit configurations. A second,
    /// global phase of the same size runs only when the first finds nothing.
    pub restarts: usize,
    pub damping: f64,
    /// Largest joint change per iteration, radians.
    pub max_step: f64,
    pub pos_tol: f64,
    pub ori_tol: f64,
    /// Seed for the restart generator.
    pub seed: u64,
}

impl Default for IkOptions {
    fn default() -> Self {
        Self {
            max_iters: 200,
            restarts: 8,
            damping: 0.05,
            max_step: 0.2,
            pos_tol: 1e-4,
            ori_tol: 1e-3,
            seed: 0,
        }
    }
}

impl ArmModel {
    pub fn new(base: Pose, joints: [RevoluteJoint; DOF], flange_to_tcp: Pose) -> Result<Self> {
        if !base.rotation.is_rotation(1e-9) || !flange_to_tcp.rotation.is_rotation(1e-9) {
            return Err(Error::InvalidScene("arm base or TCP rotation is not orthonormal".into()));
        }
        for (i, j) in joints.iter().enumerate() {
            if (j.axis.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidScene(alloc::format!("joint {} axis is not unit length", i + 1)));
            }
            if !(j.lower < j.upper) {
                return Err(Error::InvalidScene(alloc::format!("joint {} lower limit must be below upper", i + 1)));
            }
        }
        let reach = joints[1..].iter().map(|j| j.origin.norm()).sum::<f64>()
            + flange_to_tcp.translation.norm();
        Ok(Self {
            base,
            joints,
            flange_to_tcp,
            reach,
        })
    }

    /// Upper bound on the distance between the shoulder pivot and the TCP.
    pub fn reach(&self) -> f64 {
        self.reach
    }

    /// World position of the first joint's origin.
    pub fn shoulder(&self) -> Vec3 {
        self.base.transform_point(self.joints[0].origin)
    }

    pub fn within_limits(&self, q: &JointConfig) -> bool {
        self.joints
            .iter()
            .zip(&q.0)
            .all(|(j, v)| *v >= j.lower && *v <= j.upper)
    }

    pub fn clamp(&self, q: &JointConfig) -> JointConfig {
        let mut out = q.0;
        for (v, j) in out.iter_mut().zip(&self.joints) {
            *v = v.clamp(j.lower, j.upper);
        }
        JointConfig(out)
    }

    /// Brings each joint into its limits, preferring a full turn over clamping
    /// so a revolute joint can pass through ±π without stalling.
    fn wrap_into_limits(&self, q: &JointConfig) -> JointConfig {
        let tau = 2.0 * core::f64::consts::PI;
        let mut out = q.0;
        for (v, j) in out.iter_mut().zip(&self.joints) {
            if *v > j.upper && *v - tau >= j.lower {
                *v -= tau;
            } else if *v < j.lower && *v + tau <= j.upper {
                *v += tau;
            }
        }
        self.clamp(&JointConfig(out))
    }

    /// World pose of the base (index 0) and of each joint frame after its rotation (1..=6).
    pub fn frames(&self, q: &JointConfig) -> [Pose; DOF + 1] {
        let mut frames = [self.base; DOF + 1];
        let mut current = self.base;
        for (i, j) in self.joints.iter().enumerate() {
            let local = Pose::new(Rot3::from_axis_angle(j.axis, q.0[i]), j.origin);
            current = current.compose(&local);
            frames[i + 1] = current;
        }
        frames
    }

    /// TCP pose in the world frame.
    pub fn fk(&self, q: &JointConfig) -> Pose {
        self.frames(q)[DOF].compose(&self.flange_to_tcp)
    }

    /// Geometric Jacobian of the TCP. Rows 0..3 are linear velocity (m/rad),
    /// rows 3..6 angular velocity (rad/rad), both in the world frame.
    pub fn jacobian(&self, q: &JointConfig) -> Mat6 {
        let frames = self.frames(q);
        let tcp = frames[DOF].transform_point(self.flange_to_tcp.translation);
        Self::jacobian_from_frames(&self.joints, &frames, tcp)
    }

    /// Geometric Jacobian of an arbitrary point rigidly attached to the last link.
    pub fn point_jacobian(&self, q: &JointConfig, point: Vec3) -> Mat6 {
        Self::jacobian_from_frames(&self.joints, &self.frames(q), point)
    }

    fn jacobian_from_frames(joints: &[RevoluteJoint; DOF], frames: &[Pose; DOF + 1], point: Vec3) -> Mat6 {
        let mut jac = [[0.0; DOF]; 6];
        for i in 0..DOF {
            // Axis and origin are unchanged by the joint's own rotation.
            let f = &frames[i + 1];
            let w = f.rotation.rotate(joints[i].axis);
            let v = w.cross(point - f.translation);
            jac[0][i] = v.x;
            jac[1][i] = v.y;
            jac[2][i] = v.z;
            jac[3][i] = w.x;
            jac[4][i] = w.y;
            jac[5][i] = w.z;
        }
        jac
    }

    /// Damped-least-squares inverse kinematics.
    ///
    /// The first attempt starts from `seed`; further attempts start from random
    /// in-limit configurations drawn from `opts.seed`. Returned angles always lie
    /// within the joint limits.
    pub fn ik(&self, target: &Pose, seed: &JointConfig, opts: &IkOptions) -> Result<JointConfig> {
        if !target.translation.is_finite() || !target.rotation.is_rotation(1e-6) {
            return Err(Error::NoSolution);
        }
        if self.shoulder().distance(target.translation) > self.reach + opts.pos_tol {
            return Err(Error::NoSolution);
        }
        // Local attempts first: the seed, then random starts, each following its
        // own branch. Only if all of them fail, the same number of global
        // restarts, keeping the solution nearest the seed.
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let random_start = |rng: &mut ChaCha8Rng| {
            let mut q = [0.0; DOF];
            for (v, j) in q.iter_mut().zip(&self.joints) {
                *v = rng.gen_range(j.lower..=j.upper);
            }
            JointConfig(q)
        };
        for attempt in 0..opts.restarts {
            let start = if attempt == 0 { self.clamp(seed) } else { random_start(&mut rng) };
            if let Some(q) = self.ik_attempt(target, start, opts, false) {
                return Ok(q);
            }
        }
        let mut best: Option<(f64, JointConfig)> = None;
        for attempt in 0..opts.restarts {
            let start = if attempt == 0 { self.clamp(seed) } else { random_start(&mut rng) };
            if let Some(q) = self.ik_attempt(target, start, opts, true) {
                let d = q.distance(seed);
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, q));
                }
            }
        }
        best.map(|(_, q)| q).ok_or(Error::NoSolution)
    }

    /// Pose error of the TCP against `target` and the TCP position.
    fn ik_error(&self, frames: &[Pose; DOF + 1], target: &Pose) -> ([f64; 6], Vec3) {
        let tcp = frames[DOF].compose(&self.flange_to_tcp);
        let dp = target.translation - tcp.translation;
        let dr = (target.rotation * tcp.rotation.transpose()).log();
        ([dp.x, dp.y, dp.z, dr.x, dr.y, dr.z], tcp.translation)
    }

    /// Damped least squares on the pose error.
    ///
    /// Local mode keeps the damping at `opts.damping`, takes every step and
    /// clamps to the limits, so it follows the branch of the start
    /// configuration. Global mode is Levenberg-Marquardt: the damping shrinks
    /// after an improving step and grows after a rejected one, and joints may
    /// wrap through ±π. It converges from far more starts but can land on any
    /// branch.
    fn ik_attempt(&self, target: &Pose, mut q: JointConfig, opts: &IkOptions, global: bool) -> Option<JointConfig> {
        let sq = |e: &[f64; 6]| e.iter().map(|v| v * v).sum::<f64>();
        let mut frames = self.frames(&q);
        let (mut err, mut tcp) = self.ik_error(&frames, target);
        let mut lambda = opts.damping;
        for _ in 0..=opts.max_iters {
            let pos = crate::math::sqrt(err[0] * err[0] + err[1] * err[1] + err[2] * err[2]);
            let ori = crate::math::sqrt(err[3] * err[3] + err[4] * err[4] + err[5] * err[5]);
            if pos <= opts.pos_tol && ori <= opts.ori_tol {
                return Some(q);
            }
            let jac = Self::jacobian_from_frames(&self.joints, &frames, tcp);
            let gram = linalg::damped_gram(&jac, lambda);
            let y = linalg::solve_spd(&gram, &err)?;
            let mut dq = linalg::transpose_mul(&jac, &y);
            let largest = dq.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if largest > opts.max_step {
                let s = opts.max_step / largest;
                dq.iter_mut().for_each(|v| *v *= s);
            }
            let mut next = q.0;
            for (v, d) in next.iter_mut().zip(dq) {
                *v += d;
            }
            let next = if global { self.wrap_into_limits(&JointConfig(next)) } else { self.clamp(&JointConfig(next)) };
            let next_frames = self.frames(&next);
            let (next_err, next_tcp) = self.ik_error(&next_frames, target);
            if !global {
                (q, frames, err, tcp) = (next, next_frames, next_err, next_tcp);
            } else if sq(&next_err) < sq(&err) {
                (q, frames, err, tcp) = (next, next_frames, next_err, next_tcp);
                lambda = (lambda * 0.5).max(1e-6);
            } else {
                lambda *= 4.0;
                if lambda > 1e3 {
                    return None;
                }
            }
        }
        None
    }
}

/// Two arms sharing one world frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DualArm {
    pub left: ArmModel,
    pub right: ArmModel,
}

impl DualArm {
    pub fn new(left: ArmModel, right: ArmModel) -> Result<Self> {
        if left.base.translation.distance(right.base.translation) < 1e-9 {
            return Err(Error::InvalidScene("left and right arm bases coincide".into()));
        }
        Ok(Self { left, right })
    }

    pub fn arm(&self, arm: Arm) -> &ArmModel {
        match arm {
            Arm::Left => &self.left,
            Arm::Right => &self.right,
        }
    }
}
