use alloc::vec::Vec;

use crate::cable::ToolSpec;
use crate::geometry::{Pose, Rot3, Vec3};
use crate::robot::Arm;
use crate::{Error, Result};

/// Grasp sampling parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraspSampling {
    /// Positions along the handle axis.
    pub axial: usize,
    /// Rotations about the handle axis, evenly spaced over a full turn.
    pub rotations: usize,
    /// Finger width, m; grasp centres stay half a width inside the handle ends.
    pub finger_width: f64,
}

impl Default for GraspSampling {
    fn default() -> Self {
        Self {
            axial: 5,
            rotations: 12,
            finger_width: 0.02,
        }
    }
}

/// A gripper pose relative to the tool.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraspCandidate {
    pub arm: Arm,
    /// TCP frame expressed in the tool frame.
    pub pose: Pose,
    /// Unit approach direction (TCP z) in the tool frame.
    pub approach: Vec3,
}

/// Candidates for both arms; indices are per arm.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GraspSet {
    per_arm: [Vec<GraspCandidate>; 2],
}

impl GraspSet {
    pub fn for_arm(&self, arm: Arm) -> &[GraspCandidate] {
        &self.per_arm[arm.index()]
    }

    pub fn get(&self, arm: Arm, index: usize) -> Option<&GraspCandidate> {
        self.per_arm[arm.index()].get(index)
    }

    pub fn iter(&self) -> impl Iterator<Item = &GraspCandidate> {
        self.per_arm[0].iter().chain(self.per_arm[1].iter())
    }

    pub fn len(&self) -> usize {
        self.per_arm[0].len() + self.per_arm[1].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Samples grasps on the tool handle for both arms.
///
/// The TCP sits on the handle axis with its x axis along the handle, so the fingers
/// close across it; the approach (TCP z) is perpendicular to the handle and steps
/// around it in equal increments.
pub fn sample_grasps(tool: &ToolSpec, opts: &GraspSampling) -> Result<GraspSet> {
    let h = &tool.handle;
    let len = h.length();
    if len <= 0.0 || len < opts.finger_width || opts.axial == 0 || opts.rotations == 0 {
        return Err(Error::EmptyGraspSet);
    }
    let axis = (h.to - h.from).normalized()?;
    let e1 = axis.any_orthogonal();
    let e2 = axis.cross(e1);
    let usable = len - opts.finger_width;
    let mut one_arm = Vec::with_capacity(opts.axial * opts.rotations);
    for i in 0..opts.axial {
        let s = if opts.axial == 1 {
            0.5 * len
        } else {
            0.5 * opts.finger_width + usable * i as f64 / (opts.axial - 1) as f64
        };
        let centre = h.from + axis * s;
        for k in 0..opts.rotations {
            let phi = core::f64::consts::TAU * k as f64 / opts.rotations as f64;
            let approach = e1 * crate::math::cos(phi) + e2 * crate::math::sin(phi);
            let closing = approach.cross(axis);
            let pose = Pose::new(Rot3::from_columns(axis, closing, approach), centre);
            one_arm.push((pose, approach));
        }
    }
    let make = |arm: Arm| {
        one_arm
            .iter()
            .map(|&(pose, approach)| GraspCandidate { arm, pose, approach })
            .collect::<Vec<_>>()
    };
    Ok(GraspSet {
        per_arm: [make(Arm::Left), make(Arm::Right)],
    })
}
