//! Scene files.
//!
//! A scene is one TOML document. Lengths are in metres, angles in degrees,
//! masses in kilograms. Every table rejects unknown keys. See `scenes/default.toml`
//! for the bundled cell and the README for the full schema.

use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use tetherplan_core::cable::{bend_angle, BalancerSpec, BendConstraint, Handle, ToolSpec};
use tetherplan_core::collision::{Capsule, CollisionWorld, Cuboid, NamedShape, Shape, Sphere};
use tetherplan_core::geometry::{Pose, Vec3};
use tetherplan_core::planner::{GraspSampling, PlannerOptions, Task, Workcell};
use tetherplan_core::presets;
use tetherplan_core::robot::{Arm, DualArm, IkOptions, JointConfig};

use crate::Error;

/// The bundled default scene.
pub const DEFAULT_SCENE: &str = include_str!("../scenes/default.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub robot: RobotDef,
    pub balancer: BalancerDef,
    pub tool: ToolDef,
    #[serde(default)]
    pub obstacles: Vec<ShapeDef>,
    pub task: TaskDef,
    #[serde(default)]
    pub handover: Vec<PoseDef>,
    #[serde(default)]
    pub planner: PlannerDef,
    #[serde(default)]
    pub sweep: GridDef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotDef {
    /// Only "ur3" is built in.
    #[serde(default = "default_model")]
    pub model: String,
    pub left_base: PoseDef,
    pub right_base: PoseDef,
    pub left_home_deg: [f64; 6],
    pub right_home_deg: [f64; 6],
}

fn default_model() -> String {
    "ur3".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseDef {
    pub position: [f64; 3],
    /// Extrinsic roll, pitch, yaw.
    #[serde(default)]
    pub rpy_deg: [f64; 3],
}

impl PoseDef {
    pub fn to_pose(&self) -> Pose {
        let [r, p, y] = self.rpy_deg.map(f64::to_radians);
        Pose::from_xyz_rpy(Vec3::from_array(self.position), r, p, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BalancerDef {
    pub anchor: [f64; 3],
    #[serde(default = "up")]
    pub reference_dir: [f64; 3],
    pub max_load_kg: f64,
    pub cable_radius: f64,
}

fn up() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolDef {
    pub connector_dir: [f64; 3],
    pub connector_point: [f64; 3],
    pub handle: HandleDef,
    #[serde(default)]
    pub shapes: Vec<ShapeDef>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandleDef {
    pub from: [f64; 3],
    pub to: [f64; 3],
    pub radius: f64,
}

/// `kind` selects which of the other keys are required:
/// capsule: `a`, `b`, `radius`; sphere: `center`, `radius`;
/// box: `center`, `half_extents`, optional `rpy_deg`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeDef {
    pub name: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_extents: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rpy_deg: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskDef {
    pub start: PoseDef,
    pub goal: PoseDef,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerDef {
    pub theta_max_deg: f64,
    pub pregrasp_distance: f64,
    pub max_joint_step_deg: f64,
    pub max_validated_edges: usize,
    /// Wall-clock budget per plan; 0 disables it.
    pub time_limit_s: f64,
    pub check_dynamic_cable: bool,
    pub grasp_axial: usize,
    pub grasp_rotations: usize,
    pub finger_width: f64,
    pub ik_restarts: usize,
}

impl Default for PlannerDef {
    fn default() -> Self {
        let p = PlannerOptions::default();
        Self {
            theta_max_deg: p.bend.theta_max.to_degrees(),
            pregrasp_distance: p.pregrasp_distance,
            max_joint_step_deg: p.step.to_degrees(),
            max_validated_edges: p.max_validated_edges,
            time_limit_s: 60.0,
            check_dynamic_cable: p.check_dynamic_cable,
            grasp_axial: p.grasps.axial,
            grasp_rotations: p.grasps.rotations,
            finger_width: p.grasps.finger_width,
            ik_restarts: p.ik.restarts,
        }
    }
}

/// Benchmark grid: rows pitch the goal, columns roll the start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridDef {
    pub pitch_deg: Vec<f64>,
    pub roll_deg: Vec<f64>,
}

impl Default for GridDef {
    fn default() -> Self {
        Self {
            pitch_deg: vec![0.0, 10.0, 15.0, 30.0, 45.0, 60.0, 75.0, 90.0],
            roll_deg: vec![-20.0, -10.0, 0.0, 10.0, 20.0],
        }
    }
}

/// A validated scene.
#[derive(Debug, Clone)]
pub struct Scene {
    pub cell: Workcell,
    /// Baseline task; sweep cells and `plan` offsets are applied to it.
    pub task: Task,
    pub planner: PlannerOptions,
    pub time_limit: Option<Duration>,
    pub grid: GridDef,
    /// The parsed file with every default filled in.
    pub file: SceneFile,
}

impl Scene {
    /// The bundled default scene.
    pub fn default_scene() -> Result<Scene, Error> {
        Self::from_toml_str(DEFAULT_SCENE, "<default scene>")
    }

    /// `"default"` selects the bundled scene; anything else is a path.
    pub fn load(spec: &str) -> Result<Scene, Error> {
        if spec == "default" {
            Self::default_scene()
        } else {
            load_scene(Path::new(spec))
        }
    }

    pub fn from_toml_str(text: &str, origin: &str) -> Result<Scene, Error> {
        let file: SceneFile = toml::from_str(text).map_err(|e| Error::Parse {
            origin: origin.to_string(),
            message: e.to_string(),
        })?;
        Self::from_file(file, origin)
    }

    pub fn from_file(file: SceneFile, origin: &str) -> Result<Scene, Error> {
        let invalid = |field: &str, message: String| Error::Validation {
            origin: origin.to_string(),
            field: field.to_string(),
            message,
        };

        if file.robot.model != "ur3" {
            return Err(invalid("robot.model", format!("unknown model {:?} (supported: \"ur3\")", file.robot.model)));
        }
        for (field, p) in [("robot.left_base", &file.robot.left_base), ("robot.right_base", &file.robot.right_base)] {
            finite(&p.position, field).map_err(|m| invalid(field, m))?;
            finite(&p.rpy_deg, field).map_err(|m| invalid(field, m))?;
        }
        let robot = DualArm::new(
            presets::ur3_arm(file.robot.left_base.to_pose()),
            presets::ur3_arm(file.robot.right_base.to_pose()),
        )
        .map_err(|e| invalid("robot", e.to_string()))?;
        let home = [
            JointConfig(file.robot.left_home_deg.map(f64::to_radians)),
            JointConfig(file.robot.right_home_deg.map(f64::to_radians)),
        ];

        let b = &file.balancer;
        let reference = Vec3::from_array(b.reference_dir)
            .normalized()
            .map_err(|_| invalid("balancer.reference_dir", "must be non-zero".into()))?;
        let balancer = BalancerSpec::new(Vec3::from_array(b.anchor), reference, b.max_load_kg, b.cable_radius)
            .map_err(|e| invalid("balancer", e.to_string()))?;

        let t = &file.tool;
        let connector_dir = Vec3::from_array(t.connector_dir)
            .normalized()
            .map_err(|_| invalid("tool.connector_dir", "must be non-zero".into()))?;
        if !(t.handle.radius > 0.0) {
            return Err(invalid("tool.handle.radius", "must be positive".into()));
        }
        let shapes = t
            .shapes
            .iter()
            .enumerate()
            .map(|(i, s)| s.to_named(&format!("tool.shapes[{i}]")))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|(f, m)| invalid(&f, m))?;
        let tool = ToolSpec::new(
            connector_dir,
            Vec3::from_array(t.connector_point),
            shapes,
            Handle {
                from: Vec3::from_array(t.handle.from),
                to: Vec3::from_array(t.handle.to),
                radius: t.handle.radius,
            },
        )
        .map_err(|e| invalid("tool", e.to_string()))?;

        let statics = file
            .obstacles
            .iter()
            .enumerate()
            .map(|(i, s)| s.to_named(&format!("obstacles[{i}]")))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|(f, m)| invalid(&f, m))?;
        let collision = CollisionWorld::new(
            &robot,
            [presets::ur3_links(Arm::Left), presets::ur3_links(Arm::Right)],
            statics,
        )
        .map_err(|e| invalid("obstacles", e.to_string()))?;

        for (i, h) in file.handover.iter().enumerate() {
            let field = format!("handover[{i}]");
            finite(&h.position, &field).map_err(|m| invalid(&field, m))?;
            finite(&h.rpy_deg, &field).map_err(|m| invalid(&field, m))?;
        }
        let handover_poses = file.handover.iter().map(PoseDef::to_pose).collect();
        let cell = Workcell::new(robot, collision, balancer, tool, home, handover_poses)
            .map_err(|e| invalid("robot", e.to_string()))?;

        for (field, p) in [("task.start", &file.task.start), ("task.goal", &file.task.goal)] {
            finite(&p.position, field).map_err(|m| invalid(field, m))?;
            finite(&p.rpy_deg, field).map_err(|m| invalid(field, m))?;
        }
        let task = Task {
            start: file.task.start.to_pose(),
            goal: file.task.goal.to_pose(),
        };
        let theta0 = bend_angle(&task.start, &cell.tool, &cell.balancer).map_err(|e| invalid("task.start", e.to_string()))?;
        if theta0 > 1e-6 {
            return Err(invalid(
                "task.start.rpy_deg",
                format!("the tool must hang straight at the start (bend angle {:.3}°)", theta0.to_degrees()),
            ));
        }

        let p = &file.planner;
        if !(p.theta_max_deg > 0.0 && p.theta_max_deg <= 180.0) {
            return Err(invalid("planner.theta_max_deg", "must lie in (0, 180]".into()));
        }
        if !(p.max_joint_step_deg > 0.0 && p.max_joint_step_deg.is_finite()) {
            return Err(invalid("planner.max_joint_step_deg", "must be positive".into()));
        }
        if !(p.pregrasp_distance >= 0.0 && p.pregrasp_distance.is_finite()) {
            return Err(invalid("planner.pregrasp_distance", "must be non-negative".into()));
        }
        if p.max_validated_edges == 0 {
            return Err(invalid("planner.max_validated_edges", "must be positive".into()));
        }
        if !(p.time_limit_s >= 0.0 && p.time_limit_s.is_finite()) {
            return Err(invalid("planner.time_limit_s", "must be non-negative".into()));
        }
        if p.grasp_axial == 0 || p.grasp_rotations == 0 {
            return Err(invalid("planner.grasp_axial", "grasp counts must be positive".into()));
        }
        if p.ik_restarts == 0 {
            return Err(invalid("planner.ik_restarts", "must be at least 1".into()));
        }
        let planner = PlannerOptions {
            constrained: true,
            bend: BendConstraint::new(p.theta_max_deg.to_radians()).map_err(|e| invalid("planner.theta_max_deg", e.to_string()))?,
            grasps: GraspSampling {
                axial: p.grasp_axial,
                rotations: p.grasp_rotations,
                finger_width: p.finger_width,
            },
            pregrasp_distance: p.pregrasp_distance,
            step: p.max_joint_step_deg.to_radians(),
            seed: 0,
            max_validated_edges: p.max_validated_edges,
            check_dynamic_cable: p.check_dynamic_cable,
            ik: IkOptions {
                restarts: p.ik_restarts,
                ..IkOptions::default()
            },
        };
        planner.validate().map_err(|e| invalid("planner", e.to_string()))?;
        tetherplan_core::planner::sample_grasps(&cell.tool, &planner.grasps)
            .map_err(|e| invalid("tool.handle", e.to_string()))?;

        for (field, v) in [("sweep.pitch_deg", &file.sweep.pitch_deg), ("sweep.roll_deg", &file.sweep.roll_deg)] {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(invalid(field, "angles must be finite".into()));
            }
        }

        let time_limit = (p.time_limit_s > 0.0).then(|| Duration::from_secs_f64(p.time_limit_s));
        let settings = toml::to_string(&file.planner).unwrap_or_default();
        log::info!("{origin}: planner settings with defaults: {}", settings.trim_end().replace('\n', ", "));
        Ok(Scene {
            cell,
            task,
            planner,
            time_limit,
            grid: file.sweep.clone(),
            file,
        })
    }

    /// The scene with every default filled in, as TOML.
    pub fn echo(&self) -> String {
        toml::to_string_pretty(&self.file).unwrap_or_else(|e| format!("<unprintable scene: {e}>"))
    }

    /// Baseline task with roll/pitch/yaw offsets (degrees, tool frame) applied to
    /// the start and the goal.
    pub fn task_with_offsets(&self, start_rpy_deg: [f64; 3], goal_rpy_deg: [f64; 3]) -> Task {
        let offset = |rpy: [f64; 3]| {
            let [r, p, y] = rpy.map(f64::to_radians);
            Pose::from_xyz_rpy(Vec3::ZERO, r, p, y)
        };
        Task {
            start: self.task.start.compose(&offset(start_rpy_deg)),
            goal: self.task.goal.compose(&offset(goal_rpy_deg)),
        }
    }
}

/// Reads and validates a scene file.
pub fn load_scene(path: &Path) -> Result<Scene, Error> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let scene = Scene::from_toml_str(&text, &path.display().to_string())?;
    log::info!("loaded scene {}", path.display());
    Ok(scene)
}

fn finite(v: &[f64], what: &str) -> Result<(), String> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(format!("{what} must be finite"))
    }
}

impl ShapeDef {
    fn to_named(&self, field: &str) -> Result<NamedShape, (String, String)> {
        let need3 = |v: Option<[f64; 3]>, key: &str| {
            v.map(Vec3::from_array)
                .ok_or_else(|| (format!("{field}.{key}"), format!("required for kind = {:?}", self.kind)))
        };
        let need_r = || {
            self.radius
                .ok_or_else(|| (format!("{field}.radius"), format!("required for kind = {:?}", self.kind)))
        };
        let unexpected = |keys: &[(&str, bool)]| {
            for (k, present) in keys {
                if *present {
                    return Err((format!("{field}.{k}"), format!("not used by kind = {:?}", self.kind)));
                }
            }
            Ok(())
        };
        let shape = match self.kind.as_str() {
            "capsule" => {
                unexpected(&[
                    ("center", self.center.is_some()),
                    ("half_extents", self.half_extents.is_some()),
                    ("rpy_deg", self.rpy_deg.is_some()),
                ])?;
                Shape::Capsule(Capsule::new(need3(self.a, "a")?, need3(self.b, "b")?, need_r()?))
            }
            "sphere" => {
                unexpected(&[
                    ("a", self.a.is_some()),
                    ("b", self.b.is_some()),
                    ("half_extents", self.half_extents.is_some()),
                    ("rpy_deg", self.rpy_deg.is_some()),
                ])?;
                Shape::Sphere(Sphere {
                    center: need3(self.center, "center")?,
                    radius: need_r()?,
                })
            }
            "box" => {
                unexpected(&[("a", self.a.is_some()), ("b", self.b.is_some()), ("radius", self.radius.is_some())])?;
                let [r, p, y] = self.rpy_deg.unwrap_or_default().map(f64::to_radians);
                Shape::Cuboid(Cuboid {
                    pose: Pose::from_xyz_rpy(need3(self.center, "center")?, r, p, y),
                    half_extents: need3(self.half_extents, "half_extents")?,
                })
            }
            other => {
                return Err((
                    format!("{field}.kind"),
                    format!("unknown shape kind {other:?} (expected capsule, sphere or box)"),
                ))
            }
        };
        shape.validate().map_err(|e| (field.to_string(), e.to_string()))?;
        Ok(NamedShape::new(self.name.clone(), shape))
    }
}
