//! Primitive distance queries and the dual-arm collision checker.
//!
//! Every distance function returns a signed *clearance*: the gap between the two
//! surfaces, negative when the shapes overlap. Two shapes collide iff the clearance
//! is strictly negative; touching shapes (clearance exactly zero) are free.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::geometry::{Pose, Vec3};
use crate::robot::{Arm, ArmSet, DualArm, JointConfig, DOF};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capsule {
    pub a: Vec3,
    pub b: Vec3,
    pub radius: f64,
}

impl Capsule {
    pub const fn new(a: Vec3, b: Vec3, radius: f64) -> Self {
        Self { a, b, radius }
    }

    pub fn transformed(&self, pose: &Pose) -> Capsule {
        Capsule::new(pose.transform_point(self.a), pose.transform_point(self.b), self.radius)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    pub center: Vec3,
    pub radius: f64,
}

/// Oriented box given by its centre pose and half extents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cuboid {
    pub pose: Pose,
    pub half_extents: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Capsule(Capsule),
    Sphere(Sphere),
    Cuboid(Cuboid),
}

impl Shape {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Shape::Capsule(c) => c.radius > 0.0 && c.a.is_finite() && c.b.is_finite(),
            Shape::Sphere(s) => s.radius > 0.0 && s.center.is_finite(),
            Shape::Cuboid(b) => {
                let h = b.half_extents;
                h.x > 0.0 && h.y > 0.0 && h.z > 0.0 && b.pose.translation.is_finite() && b.pose.rotation.is_rotation(1e-9)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidScene("shape dimensions must be positive and finite".into()))
        }
    }

    pub fn transformed(&self, pose: &Pose) -> Shape {
        match self {
            Shape::Capsule(c) => Shape::Capsule(c.transformed(pose)),
            Shape::Sphere(s) => Shape::Sphere(Sphere {
                center: pose.transform_point(s.center),
                radius: s.radius,
            }),
            Shape::Cuboid(b) => Shape::Cuboid(Cuboid {
                pose: pose.compose(&b.pose),
                half_extents: b.half_extents,
            }),
        }
    }

    /// Centre and radius of a sphere enclosing the shape.
    fn bounds(&self) -> (Vec3, f64) {
        match self {
            Shape::Capsule(c) => ((c.a + c.b) * 0.5, c.a.distance(c.b) * 0.5 + c.radius),
            Shape::Sphere(s) => (s.center, s.radius),
            Shape::Cuboid(b) => (b.pose.translation, b.half_extents.norm()),
        }
    }
}

/// Closest points `(on [p1, p2], on [q1, q2])` between two closed segments.
pub fn closest_points_segment_segment(p1: Vec3, p2: Vec3, q1: Vec3, q2: Vec3) -> (Vec3, Vec3) {
    const EPS: f64 = 1e-18;
    let d1 = p2 - p1;
    let d2 = q2 - q1;
    let r = p1 - q1;
    let a = d1.dot(d1);
    let e = d2.dot(d2);
    let f = d2.dot(r);
    let (s, t);
    if a <= EPS && e <= EPS {
        return (p1, q1);
    }
    if a <= EPS {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(r);
        if e <= EPS {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(d2);
            let denom = a * e - b * b;
            let s0 = if denom > EPS * a * e {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            } else {
                t = t0;
                s = s0;
            }
        }
    }
    (p1 + d1 * s, q1 + d2 * t)
}

/// Minimum distance between closed segments `[p1, p2]` and `[q1, q2]`.
pub fn segment_segment_distance(p1: Vec3, p2: Vec3, q1: Vec3, q2: Vec3) -> f64 {
    let (a, b) = closest_points_segment_segment(p1, p2, q1, q2);
    a.distance(b)
}

pub fn point_segment_distance(p: Vec3, a: Vec3, b: Vec3) -> f64 {
    let d = b - a;
    let len2 = d.norm_squared();
    let t = if len2 <= 1e-18 {
        0.0
    } else {
        ((p - a).dot(d) / len2).clamp(0.0, 1.0)
    };
    p.distance(a + d * t)
}

fn point_box_local(p: Vec3, h: Vec3) -> f64 {
    let dx = (p.x.abs() - h.x).max(0.0);
    let dy = (p.y.abs() - h.y).max(0.0);
    let dz = (p.z.abs() - h.z).max(0.0);
    crate::math::sqrt(dx * dx + dy * dy + dz * dz)
}

/// Distance from a point to a solid box (zero inside).
pub fn point_box_distance(p: Vec3, cuboid: &Cuboid) -> f64 {
    point_box_local(cuboid.pose.inverse().transform_point(p), cuboid.half_extents)
}

/// Distance from a segment to a solid box (zero when they intersect).
///
/// The squared distance along the segment is piecewise quadratic with breakpoints
/// where a coordinate crosses a box face; each piece is minimized in closed form.
pub fn segment_box_distance(a: Vec3, b: Vec3, cuboid: &Cuboid) -> f64 {
    let inv = cuboid.pose.inverse();
    let a = inv.transform_point(a);
    let d = inv.transform_point(b) - a;
    let h = cuboid.half_extents;
    let mut breaks: [f64; 8] = [0.0; 8];
    let mut n = 0;
    breaks[n] = 0.0;
    n += 1;
    breaks[n] = 1.0;
    n += 1;
    for k in 0..3 {
        if d[k].abs() > 1e-300 {
            for face in [-h[k], h[k]] {
                let t = (face - a[k]) / d[k];
                if t > 0.0 && t < 1.0 {
                    breaks[n] = t;
                    n += 1;
                }
            }
        }
    }
    let breaks = &mut breaks[..n];
    breaks.sort_by(f64::total_cmp);
    let at = |t: f64| point_box_local(a + d * t, h);
    let mut best = at(0.0).min(at(1.0));
    for w in breaks.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        if t1 - t0 <= 0.0 {
            continue;
        }
        let mid = a + d * (0.5 * (t0 + t1));
        let mut num = 0.0;
        let mut den = 0.0;
        for k in 0..3 {
            let target = if mid[k] > h[k] {
                h[k]
            } else if mid[k] < -h[k] {
                -h[k]
            } else {
                continue;
            };
            num += d[k] * (a[k] - target);
            den += d[k] * d[k];
        }
        let t = if den > 0.0 { (-num / den).clamp(t0, t1) } else { t0 };
        best = best.min(at(t));
    }
    best
}

/// Separating-axis clearance between two boxes. Exact in sign; when separated the
/// value is a lower bound on the true distance.
fn box_box_clearance(p: &Cuboid, q: &Cuboid) -> f64 {
    let pa = [p.pose.rotation.column(0), p.pose.rotation.column(1), p.pose.rotation.column(2)];
    let qa = [q.pose.rotation.column(0), q.pose.rotation.column(1), q.pose.rotation.column(2)];
    let t = q.pose.translation - p.pose.translation;
    let mut axes: Vec<Vec3> = Vec::with_capacity(15);
    axes.extend_from_slice(&pa);
    axes.extend_from_slice(&qa);
    for u in pa {
        for v in qa {
            let c = u.cross(v);
            let n = c.norm();
            if n > 1e-9 {
                axes.push(c / n);
            }
        }
    }
    let (hp, hq) = (p.half_extents, q.half_extents);
    axes.iter()
        .map(|l| {
            let rp: f64 = (0..3).map(|i| hp[i] * pa[i].dot(*l).abs()).sum();
            let rq: f64 = (0..3).map(|i| hq[i] * qa[i].dot(*l).abs()).sum();
            t.dot(*l).abs() - rp - rq
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Signed clearance between two shapes.
pub fn shape_clearance(x: &Shape, y: &Shape) -> f64 {
    use Shape::*;
    match (x, y) {
        (Capsule(a), Capsule(b)) => segment_segment_distance(a.a, a.b, b.a, b.b) - a.radius - b.radius,
        (Capsule(c), Sphere(s)) | (Sphere(s), Capsule(c)) => {
            point_segment_distance(s.center, c.a, c.b) - c.radius - s.radius
        }
        (Sphere(a), Sphere(b)) => a.center.distance(b.center) - a.radius - b.radius,
        (Capsule(c), Cuboid(b)) | (Cuboid(b), Capsule(c)) => segment_box_distance(c.a, c.b, b) - c.radius,
        (Sphere(s), Cuboid(b)) | (Cuboid(b), Sphere(s)) => point_box_distance(s.center, b) - s.radius,
        (Cuboid(a), Cuboid(b)) => box_box_clearance(a, b),
    }
}

/// Cheap lower bound on the clearance from enclosing spheres.
fn clearance_lower_bound(x: &Shape, y: &Shape) -> f64 {
    let (cx, rx) = x.bounds();
    let (cy, ry) = y.bounds();
    cx.distance(cy) - rx - ry
}

/// True iff the axis segments are closer than the radii sum.
pub fn capsule_capsule_hit(a: &Capsule, b: &Capsule) -> bool {
    segment_segment_distance(a.a, a.b, b.a, b.b) < a.radius + b.radius
}

pub fn shapes_hit(x: &Shape, y: &Shape) -> bool {
    shape_clearance(x, y) < 0.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedShape {
    pub name: String,
    pub shape: Shape,
}

impl NamedShape {
    pub fn new(name: impl Into<String>, shape: Shape) -> Self {
        Self {
            name: name.into(),
            shape,
        }
    }
}

/// Capsule rigidly attached to joint frame `frame` (0 = base, 6 = last joint).
#[derive(Debug, Clone, PartialEq)]
pub struct LinkCapsule {
    pub name: String,
    pub frame: usize,
    pub capsule: Capsule,
}

/// Name given to the cable obstacle in collision reports.
pub const CABLE: &str = "cable";

/// Cable obstacle for one query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CableObstacle {
    pub capsule: Capsule,
    /// Arms whose last-frame links are exempt (grippers holding the tool near
    /// the connector when the cable moves with it).
    pub exempt_grippers: ArmSet,
}

/// Per-query context: the tool (if present), which grippers may touch it, and
/// the cable obstacle (if active).
#[derive(Debug, Clone, Copy, Default)]
pub struct CollisionQuery<'a> {
    pub tool: Option<(&'a [NamedShape], Pose)>,
    pub contact: ArmSet,
    pub cable: Option<CableObstacle>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CollisionReport {
    /// Every colliding pair, by name.
    pub pairs: Vec<(String, String)>,
    /// Smallest clearance over all checked pairs (may be negative). Pairs farther
    /// apart than 5 cm contribute a bounding-sphere lower bound, not the exact value.
    pub min_clearance: f64,
}

impl CollisionReport {
    pub fn is_free(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn hits_cable(&self) -> bool {
        self.pairs.iter().any(|(a, b)| a == CABLE || b == CABLE)
    }
}

type LinkRef = (Arm, usize);

/// Static obstacles, link geometry and the precomputed pair matrix.
#[derive(Debug, Clone)]
pub struct CollisionWorld {
    statics: Vec<NamedShape>,
    links: [Vec<LinkCapsule>; 2],
    link_pairs: Vec<(LinkRef, LinkRef)>,
}

impl CollisionWorld {
    /// Builds the world and its link-pair matrix.
    ///
    /// Link pairs are skipped when both links are on the same or adjacent frames of
    /// one arm, when they already overlap at the all-zero configuration of that
    /// arm, or when both are base-fixed. Base-fixed links are never tested against
    /// static shapes.
    pub fn new(robot: &DualArm, links: [Vec<LinkCapsule>; 2], statics: Vec<NamedShape>) -> Result<Self> {
        let mut names: Vec<&str> = statics.iter().map(|s| s.name.as_str()).collect();
        for s in &statics {
            s.shape.validate()?;
        }
        for arm_links in &links {
            for l in arm_links {
                if l.frame > DOF {
                    return Err(Error::InvalidScene(format!("link {} refers to frame {}", l.name, l.frame)));
                }
                Shape::Capsule(l.capsule).validate()?;
                names.push(l.name.as_str());
            }
        }
        names.push(CABLE);
        let mut sorted = names.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidScene(format!("duplicate shape name {:?}", w[0])));
        }

        let mut link_pairs = Vec::new();
        for arm in Arm::BOTH {
            let zero_frames = robot.arm(arm).frames(&JointConfig::ZERO);
            let ls = &links[arm.index()];
            for i in 0..ls.len() {
                for j in i + 1..ls.len() {
                    if ls[i].frame.abs_diff(ls[j].frame) <= 1 {
                        continue;
                    }
                    let a = ls[i].capsule.transformed(&zero_frames[ls[i].frame]);
                    let b = ls[j].capsule.transformed(&zero_frames[ls[j].frame]);
                    if capsule_capsule_hit(&a, &b) {
                        continue;
                    }
                    link_pairs.push(((arm, i), (arm, j)));
                }
            }
        }
        for (i, li) in links[0].iter().enumerate() {
            for (j, lj) in links[1].iter().enumerate() {
                if li.frame == 0 && lj.frame == 0 {
                    continue;
                }
                link_pairs.push(((Arm::Left, i), (Arm::Right, j)));
            }
        }
        Ok(Self {
            statics,
            links,
            link_pairs,
        })
    }

    pub fn statics(&self) -> &[NamedShape] {
        &self.statics
    }

    pub fn links(&self, arm: Arm) -> &[LinkCapsule] {
        &self.links[arm.index()]
    }

    /// Number of link pairs checked for self-collision.
    pub fn link_pair_count(&self) -> usize {
        self.link_pairs.len()
    }

    /// Link pairs tested for self-collision, as (arm, index into [`Self::links`]).
    pub fn link_pairs(&self) -> &[((Arm, usize), (Arm, usize))] {
        &self.link_pairs
    }

    /// World-frame link capsules of one arm.
    pub fn posed_links(&self, robot: &DualArm, arm: Arm, q: &JointConfig) -> Vec<Capsule> {
        let frames = robot.arm(arm).frames(q);
        self.links[arm.index()]
            .iter()
            .map(|l| l.capsule.transformed(&frames[l.frame]))
            .collect()
    }
}

/// Checks both arms against each other, the static shapes, the tool and the cable.
pub fn robot_in_collision(
    world: &CollisionWorld,
    robot: &DualArm,
    q_left: &JointConfig,
    q_right: &JointConfig,
    query: &CollisionQuery<'_>,
) -> CollisionReport {
    let posed = [
        world.posed_links(robot, Arm::Left, q_left),
        world.posed_links(robot, Arm::Right, q_right),
    ];
    let link = |(arm, i): LinkRef| -> &LinkCapsule { &world.links[arm.index()][i] };
    let mut report = CollisionReport {
        pairs: Vec::new(),
        min_clearance: f64::INFINITY,
    };
    let record = |report: &mut CollisionReport, c: f64, a: &str, b: &str| {
        if c < report.min_clearance {
            report.min_clearance = c;
        }
        if c < 0.0 {
            report.pairs.push((String::from(a), String::from(b)));
        }
    };

    for &(x, y) in &world.link_pairs {
        let cx = &posed[x.0.index()][x.1];
        let cy = &posed[y.0.index()][y.1];
        let c = segment_segment_distance(cx.a, cx.b, cy.a, cy.b) - cx.radius - cy.radius;
        record(&mut report, c, &link(x).name, &link(y).name);
    }

    let tool: Vec<(&str, Shape)> = match query.tool {
        Some((shapes, pose)) => shapes.iter().map(|s| (s.name.as_str(), s.shape.transformed(&pose))).collect(),
        None => Vec::new(),
    };

    for arm in Arm::BOTH {
        for (i, cap) in posed[arm.index()].iter().enumerate() {
            let l = &world.links[arm.index()][i];
            let shape = Shape::Capsule(*cap);
            if l.frame > 0 {
                for s in &world.statics {
                    let c = clearance_with_bound(&shape, &s.shape);
                    record(&mut report, c, &l.name, &s.name);
                }
            }
            let is_gripper = l.frame == DOF;
            if !(is_gripper && query.contact.contains(arm)) {
                for (name, s) in &tool {
                    let c = clearance_with_bound(&shape, s);
                    record(&mut report, c, &l.name, name);
                }
            }
            if let Some(cable) = &query.cable {
                if !(is_gripper && cable.exempt_grippers.contains(arm)) {
                    let c = segment_segment_distance(cap.a, cap.b, cable.capsule.a, cable.capsule.b)
                        - cap.radius
                        - cable.capsule.radius;
                    record(&mut report, c, &l.name, CABLE);
                }
            }
        }
    }
    for (name, s) in &tool {
        for st in &world.statics {
            let c = clearance_with_bound(s, &st.shape);
            record(&mut report, c, name, &st.name);
        }
    }
    report
}

/// Exact clearance when the shapes might be close, the bounding-sphere bound otherwise.
fn clearance_with_bound(x: &Shape, y: &Shape) -> f64 {
    let lb = clearance_lower_bound(x, y);
    if lb > 0.05 {
        lb
    } else {
        shape_clearance(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_overlap_and_parallel_offset() {
        let d = segment_segment_distance(Vec3::ZERO, Vec3::X * 2.0, Vec3::X, Vec3::X * 3.0);
        assert_eq!(d, 0.0);
        let d = segment_segment_distance(Vec3::ZERO, Vec3::X, Vec3::Y, Vec3::Y + Vec3::X);
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_segments_are_points() {
        let p = Vec3::new(0.5, 1.0, 0.0);
        assert!((segment_segment_distance(p, p, Vec3::ZERO, Vec3::X) - 1.0).abs() < 1e-15);
        assert!((segment_segment_distance(Vec3::ZERO, Vec3::X, p, p) - 1.0).abs() < 1e-15);
        assert!((segment_segment_distance(p, p, Vec3::ZERO, Vec3::ZERO) - p.norm()).abs() < 1e-15);
    }

    #[test]
    fn capsule_boundary_is_free() {
        let a = Capsule::new(Vec3::ZERO, Vec3::X, 0.25);
        let b = Capsule::new(Vec3::Y * 0.5, Vec3::Y * 0.5 + Vec3::X, 0.25);
        assert!(!capsule_capsule_hit(&a, &b));
        assert!(capsule_capsule_hit(&a, &a));
        let far = Capsule::new(Vec3::Y * 5.0, Vec3::Y * 5.0 + Vec3::X, 0.25);
        assert!(!capsule_capsule_hit(&a, &far));
    }

    #[test]
    fn segment_box_cases() {
        let b = Cuboid {
            pose: Pose::IDENTITY,
            half_extents: Vec3::new(1.0, 1.0, 1.0),
        };
        // Passes straight through.
        assert_eq!(segment_box_distance(Vec3::new(-3.0, 0.0, 0.0), Vec3::new(3.0, 0.0, 0.0), &b), 0.0);
        // Parallel above the top face.
        let d = segment_box_distance(Vec3::new(-3.0, 0.0, 1.5), Vec3::new(3.0, 0.0, 1.5), &b);
        assert!((d - 0.5).abs() < 1e-12);
        // Diagonal past an edge: closest to the edge x = 1, z = 1.
        let d = segment_box_distance(Vec3::new(3.0, 0.0, 1.0), Vec3::new(1.0, 0.0, 3.0), &b);
        assert!((d - 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn box_box_sat() {
        let a = Cuboid {
            pose: Pose::IDENTITY,
            half_extents: Vec3::new(1.0, 1.0, 1.0),
        };
        let mut b = a;
        b.pose.translation = Vec3::new(2.5, 0.0, 0.0);
        assert!((box_box_clearance(&a, &b) - 0.5).abs() < 1e-12);
        b.pose.translation = Vec3::new(1.5, 0.0, 0.0);
        assert!(box_box_clearance(&a, &b) < 0.0);
    }
}
