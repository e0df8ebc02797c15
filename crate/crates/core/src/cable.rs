//! The balancer cable: bend-angle constraint and straight-line obstacle.
//!
//! The bend angle is the angle between the balancer's reference direction `a`
//! (world frame, vertical when the balancer hangs directly above the tool) and the
//! tool's connector direction `b_t` carried into the world by the tool orientation.

use alloc::vec::Vec;

use crate::collision::{Capsule, NamedShape};
use crate::geometry::{angle_between, Pose, Vec3};
use crate::{Error, Result};

/// Default bend threshold: 95°.
pub const DEFAULT_THETA_MAX: f64 = 95.0 * core::f64::consts::PI / 180.0;

/// Standard gravity used to turn the balancer rating into a pulling force.
pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalancerSpec {
    /// Cable outlet, world frame.
    pub anchor: Vec3,
    /// Unit reference direction `a`, world frame.
    pub reference_dir: Vec3,
    /// Rated load, kg.
    pub max_load: f64,
    pub cable_radius: f64,
}

impl BalancerSpec {
    pub fn new(anchor: Vec3, reference_dir: Vec3, max_load: f64, cable_radius: f64) -> Result<Self> {
        if !anchor.is_finite() {
            return Err(Error::InvalidScene("balancer anchor must be finite".into()));
        }
        if (reference_dir.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidScene("balancer reference direction must be unit length".into()));
        }
        if !(max_load > 0.0 && max_load.is_finite()) {
            return Err(Error::InvalidScene("balancer max load must be positive".into()));
        }
        if !(cable_radius > 0.0 && cable_radius.is_finite()) {
            return Err(Error::InvalidScene("cable radius must be positive".into()));
        }
        Ok(Self {
            anchor,
            reference_dir,
            max_load,
            cable_radius,
        })
    }
}

/// Straight section of the tool that grippers may close on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Handle {
    /// Axis end points in the tool frame.
    pub from: Vec3,
    pub to: Vec3,
    pub radius: f64,
}

impl Handle {
    pub fn length(&self) -> f64 {
        self.from.distance(self.to)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToolSpec {
    /// Unit direction `b_t` toward the cable connection, tool frame.
    pub connector_dir: Vec3,
    /// Cable attachment point, tool frame.
    pub connector_point: Vec3,
    pub shapes: Vec<NamedShape>,
    pub handle: Handle,
}

impl ToolSpec {
    pub fn new(connector_dir: Vec3, connector_point: Vec3, shapes: Vec<NamedShape>, handle: Handle) -> Result<Self> {
        if (connector_dir.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidScene("tool connector direction must be unit length".into()));
        }
        if !connector_point.is_finite() || !handle.from.is_finite() || !handle.to.is_finite() {
            return Err(Error::InvalidScene("tool geometry must be finite".into()));
        }
        for s in &shapes {
            s.shape.validate()?;
        }
        Ok(Self {
            connector_dir,
            connector_point,
            shapes,
            handle,
        })
    }

    /// World position of the cable attachment.
    pub fn connector_world(&self, tool_pose: &Pose) -> Vec3 {
        tool_pose.transform_point(self.connector_point)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BendConstraint {
    pub theta_max: f64,
}

impl Default for BendConstraint {
    fn default() -> Self {
        Self {
            theta_max: DEFAULT_THETA_MAX,
        }
    }
}

impl BendConstraint {
    pub fn new(theta_max: f64) -> Result<Self> {
        if !(theta_max > 0.0 && theta_max <= core::f64::consts::PI) {
            return Err(Error::InvalidScene("theta_max must lie in (0, 180] degrees".into()));
        }
        Ok(Self { theta_max })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BendCheck {
    Pass,
    /// Observed bend angle, radians.
    Violation(f64),
}

impl BendCheck {
    pub fn passed(self) -> bool {
        matches!(self, BendCheck::Pass)
    }
}

/// Cable bend angle θ for a tool pose, radians in `[0, π]`.
pub fn bend_angle(tool_pose: &Pose, tool: &ToolSpec, balancer: &BalancerSpec) -> Result<f64> {
    let b_world = tool_pose.rotation.rotate(tool.connector_dir);
    angle_between(balancer.reference_dir, b_world)
}

/// `Pass` iff θ is strictly below the threshold.
pub fn check_bend(tool_pose: &Pose, tool: &ToolSpec, balancer: &BalancerSpec, c: &BendConstraint) -> Result<BendCheck> {
    let theta = bend_angle(tool_pose, tool, balancer)?;
    Ok(if theta < c.theta_max {
        BendCheck::Pass
    } else {
        BendCheck::Violation(theta)
    })
}

/// Straight-line cable from the balancer anchor to the tool's connector.
pub fn cable_capsule(tool_pose: &Pose, tool: &ToolSpec, balancer: &BalancerSpec) -> Result<Capsule> {
    let connector = tool.connector_world(tool_pose);
    if connector.distance(balancer.anchor) <= 1e-9 {
        return Err(Error::DegenerateCable);
    }
    Ok(Capsule::new(balancer.anchor, connector, balancer.cable_radius))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rot3;
    use crate::presets;

    fn deg(v: f64) -> f64 {
        v.to_radians()
    }

    #[test]
    fn hanging_tool_has_zero_bend() {
        let tool = presets::screwdriver();
        let bal = presets::balancer(Vec3::new(0.0, 0.0, 1.0));
        let pose = Pose::from_translation(Vec3::new(0.0, 0.0, 0.3));
        assert_eq!(bend_angle(&pose, &tool, &bal).unwrap(), 0.0);
        assert_eq!(check_bend(&pose, &tool, &bal, &BendConstraint::default()).unwrap(), BendCheck::Pass);
    }

    #[test]
    fn threshold_is_strict() {
        let tool = presets::screwdriver();
        let bal = presets::balancer(Vec3::new(0.0, 0.0, 1.0));
        let c = BendConstraint::default();
        let pose = Pose::from_rotation(Rot3::rot_x(deg(100.0)));
        match check_bend(&pose, &tool, &bal, &c).unwrap() {
            BendCheck::Violation(t) => assert!((t - deg(100.0)).abs() < 1e-12),
            BendCheck::Pass => panic!("100° must violate 95°"),
        }
        // A rotation whose connector z component is exactly cos(threshold): θ equals the
        // threshold up to rounding, and equality must fail.
        let exact = BendConstraint::new(bend_angle(&Pose::from_rotation(Rot3::rot_x(deg(95.0))), &tool, &bal).unwrap()).unwrap();
        assert!(!check_bend(&Pose::from_rotation(Rot3::rot_x(deg(95.0))), &tool, &bal, &exact).unwrap().passed());
    }

    #[test]
    fn invalid_thresholds() {
        assert!(BendConstraint::new(0.0).is_err());
        assert!(BendConstraint::new(4.0).is_err());
        assert!(BendConstraint::new(core::f64::consts::PI).is_ok());
    }

    #[test]
    fn cable_geometry() {
        let tool = presets::screwdriver();
        let bal = presets::balancer(Vec3::new(0.0, 0.0, 1.0));
        let below = Pose::from_translation(Vec3::new(0.0, 0.0, 0.5) - tool.connector_point);
        let c = cable_capsule(&below, &tool, &bal).unwrap();
        assert!((c.a.distance(c.b) - 0.5).abs() < 1e-12);
        assert!((c.b.x).abs() < 1e-15 && (c.b.y).abs() < 1e-15);

        let h = 0.6;
        let side = Pose::from_translation(Vec3::new(0.3, 0.0, 1.0 - h) - tool.connector_point);
        let c = cable_capsule(&side, &tool, &bal).unwrap();
        let dir = (c.b - c.a).normalized().unwrap();
        let want = Vec3::new(0.3, 0.0, -h).normalized().unwrap();
        assert!((dir - want).max_abs() < 1e-12);

        let at_anchor = Pose::from_translation(bal.anchor - tool.connector_point);
        assert_eq!(cable_capsule(&at_anchor, &tool, &bal), Err(Error::DegenerateCable));
    }

    #[test]
    fn balancer_invariants() {
        assert!(BalancerSpec::new(Vec3::ZERO, Vec3::Z, 0.0, 0.01).is_err());
        assert!(BalancerSpec::new(Vec3::ZERO, Vec3::Z * 2.0, 1.0, 0.01).is_err());
        assert!(BalancerSpec::new(Vec3::ZERO, Vec3::Z, 2.0, 0.01).is_ok());
    }
}
