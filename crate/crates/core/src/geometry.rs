//! Rigid-body math.
//!
//! Rotation matrices are stored row-major: `m[r][c]` is row `r`, column `c`, and
//! [`Rot3::rotate`] computes `m · v`. The columns of a rotation are the images of the
//! frame's unit axes, so the third column of a tool orientation is the tool's z axis
//! expressed in the world frame.
//!
//! Euler angles use the extrinsic X-Y-Z convention: roll about world x, then pitch
//! about world y, then yaw about world z, i.e. `R = Rz(yaw) · Ry(pitch) · Rx(roll)`.
//! All angles are radians.

use core::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub, SubAssign};

use crate::math;
use crate::{Error, Result};

/// Minimum norm accepted for a direction.
pub const MIN_NORM: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub const fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        math::sqrt(self.norm_squared())
    }

    /// Unit vector in the same direction.
    pub fn normalized(self) -> Result<Vec3> {
        let n = self.norm();
        if n < MIN_NORM {
            return Err(Error::ZeroVector);
        }
        Ok(self / n)
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    /// Some unit vector orthogonal to `self` (which must be nonzero).
    pub fn any_orthogonal(self) -> Vec3 {
        let a = if self.x.abs() < 0.9 { Vec3::X } else { Vec3::Y };
        let o = self.cross(a);
        o / o.norm()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

/// 3×3 rotation matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rot3 {
    pub m: [[f64; 3]; 3],
}

impl Default for Rot3 {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Rot3 {
    pub const IDENTITY: Rot3 = Rot3 {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub const fn from_rows(m: [[f64; 3]; 3]) -> Self {
        Self { m }
    }

    /// Builds a rotation whose columns are the given frame axes.
    pub fn from_columns(x: Vec3, y: Vec3, z: Vec3) -> Self {
        Self {
            m: [[x.x, y.x, z.x], [x.y, y.y, z.y], [x.z, y.z, z.z]],
        }
    }

    pub fn column(&self, c: usize) -> Vec3 {
        Vec3::new(self.m[0][c], self.m[1][c], self.m[2][c])
    }

    pub fn rot_x(a: f64) -> Self {
        let (s, c) = (math::sin(a), math::cos(a));
        Self::from_rows([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    }

    pub fn rot_y(a: f64) -> Self {
        let (s, c) = (math::sin(a), math::cos(a));
        Self::from_rows([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    }

    pub fn rot_z(a: f64) -> Self {
        let (s, c) = (math::sin(a), math::cos(a));
        Self::from_rows([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    }

    /// Rotation of `angle` about the unit vector `axis` (Rodrigues).
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Self {
        let (s, c) = (math::sin(angle), math::cos(angle));
        let t = 1.0 - c;
        let Vec3 { x, y, z } = axis;
        Self::from_rows([
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ])
    }

    /// Rotation from a rotation vector (axis scaled by angle).
    pub fn from_rotation_vector(v: Vec3) -> Self {
        let angle = v.norm();
        if angle < 1e-15 {
            return Self::IDENTITY;
        }
        Self::from_axis_angle(v / angle, angle)
    }

    pub fn transpose(&self) -> Self {
        let m = &self.m;
        Self::from_rows([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    #[inline]
    pub fn rotate(&self, v: Vec3) -> Vec3 {
        let m = &self.m;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Largest entry-wise deviation of `RᵀR` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let p = self.transpose() * *self;
        let mut worst = 0.0f64;
        for r in 0..3 {
            for c in 0..3 {
                let want = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((p.m[r][c] - want).abs());
            }
        }
        worst
    }

    /// True when orthonormal with determinant +1, both within `tol`.
    pub fn is_rotation(&self, tol: f64) -> bool {
        self.m.iter().flatten().all(|v| v.is_finite())
            && self.orthonormality_error() <= tol
            && (self.determinant() - 1.0).abs() <= tol
    }

    /// Rotation vector (log map). Its norm is the rotation angle in `[0, π]`.
    pub fn log(&self) -> Vec3 {
        let m = &self.m;
        let cos_angle = ((self.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
        let angle = math::acos(cos_angle);
        let skew = Vec3::new(m[2][1] - m[1][2], m[0][2] - m[2][0], m[1][0] - m[0][1]);
        if angle < 1e-6 {
            // sin(angle) ≈ angle: the skew part alone is accurate to O(angle³).
            return skew * 0.5;
        }
        if core::f64::consts::PI - angle > 1e-4 {
            return skew * (angle / (2.0 * math::sin(angle)));
        }
        // Near a half-turn: R ≈ 2uuᵀ − I, read the axis off the largest diagonal term.
        let diag = [m[0][0], m[1][1], m[2][2]];
        let k = if diag[0] >= diag[1] && diag[0] >= diag[2] {
            0
        } else if diag[1] >= diag[2] {
            1
        } else {
            2
        };
        let mut u = [0.0; 3];
        let uk = math::sqrt(((diag[k] - cos_angle) / (1.0 - cos_angle)).max(0.0));
        for (j, uj) in u.iter_mut().enumerate() {
            *uj = if j == k {
                uk
            } else {
                (m[k][j] + m[j][k]) / (2.0 * (1.0 - cos_angle) * uk)
            };
        }
        let mut axis = Vec3::from_array(u);
        axis = axis / axis.norm();
        // Pick the sign consistent with the antisymmetric part.
        if axis.dot(skew) < 0.0 {
            axis = -axis;
        }
        axis * angle
    }

    /// Geodesic angle between two rotations.
    pub fn angle_to(&self, other: &Rot3) -> f64 {
        (self.transpose() * *other).log().norm()
    }

    /// Unit quaternion `[w, x, y, z]` with `w ≥ 0`, used by file formats.
    pub fn to_quat_wxyz(&self) -> [f64; 4] {
        let m = &self.m;
        let tr = self.trace();
        let (w, x, y, z);
        if tr > 0.0 {
            let s = math::sqrt(tr + 1.0) * 2.0;
            w = 0.25 * s;
            x = (m[2][1] - m[1][2]) / s;
            y = (m[0][2] - m[2][0]) / s;
            z = (m[1][0] - m[0][1]) / s;
        } else if m[0][0] > m[1][1] && m[0][0] > m[2][2] {
            let s = math::sqrt(1.0 + m[0][0] - m[1][1] - m[2][2]) * 2.0;
            w = (m[2][1] - m[1][2]) / s;
            x = 0.25 * s;
            y = (m[0][1] + m[1][0]) / s;
            z = (m[0][2] + m[2][0]) / s;
        } else if m[1][1] > m[2][2] {
            let s = math::sqrt(1.0 + m[1][1] - m[0][0] - m[2][2]) * 2.0;
            w = (m[0][2] - m[2][0]) / s;
            x = (m[0][1] + m[1][0]) / s;
            y = 0.25 * s;
            z = (m[1][2] + m[2][1]) / s;
        } else {
            let s = math::sqrt(1.0 + m[2][2] - m[0][0] - m[1][1]) * 2.0;
            w = (m[1][0] - m[0][1]) / s;
            x = (m[0][2] + m[2][0]) / s;
            y = (m[1][2] + m[2][1]) / s;
            z = 0.25 * s;
        }
        let n = math::sqrt(w * w + x * x + y * y + z * z);
        let sign = if w < 0.0 { -1.0 } else { 1.0 };
        [sign * w / n, sign * x / n, sign * y / n, sign * z / n]
    }

    /// Inverse of [`Rot3::to_quat_wxyz`]; the quaternion is normalized first.
    pub fn from_quat_wxyz(q: [f64; 4]) -> Result<Self> {
        let n = math::sqrt(q.iter().map(|v| v * v).sum());
        if n < MIN_NORM {
            return Err(Error::ZeroVector);
        }
        let [w, x, y, z] = q.map(|v| v / n);
        Ok(Self::from_rows([
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ]))
    }
}

impl Mul for Rot3 {
    type Output = Rot3;
    fn mul(self, o: Rot3) -> Rot3 {
        let mut m = [[0.0; 3]; 3];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = self.m[r][0] * o.m[0][c] + self.m[r][1] * o.m[1][c] + self.m[r][2] * o.m[2][c];
            }
        }
        Rot3 { m }
    }
}

/// Rigid transform: `p ↦ rotation · p + translation`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose {
    pub rotation: Rot3,
    pub translation: Vec3,
}

impl Pose {
    pub const IDENTITY: Pose = Pose {
        rotation: Rot3::IDENTITY,
        translation: Vec3::ZERO,
    };

    pub const fn new(rotation: Rot3, translation: Vec3) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub const fn from_translation(t: Vec3) -> Self {
        Self::new(Rot3::IDENTITY, t)
    }

    pub const fn from_rotation(r: Rot3) -> Self {
        Self::new(r, Vec3::ZERO)
    }

    /// Pose from a position and extrinsic roll/pitch/yaw.
    pub fn from_xyz_rpy(xyz: Vec3, roll: f64, pitch: f64, yaw: f64) -> Self {
        Self::new(rpy_to_rot(roll, pitch, yaw), xyz)
    }

    #[inline]
    pub fn transform_point(&self, p: Vec3) -> Vec3 {
        self.rotation.rotate(p) + self.translation
    }

    #[inline]
    pub fn transform_vector(&self, v: Vec3) -> Vec3 {
        self.rotation.rotate(v)
    }

    #[inline]
    pub fn compose(&self, other: &Pose) -> Pose {
        compose(self, other)
    }

    #[inline]
    pub fn inverse(&self) -> Pose {
        inverse(self)
    }

    /// Position distance and geodesic rotation angle to `other`.
    pub fn error_to(&self, other: &Pose) -> (f64, f64) {
        (
            self.translation.distance(other.translation),
            self.rotation.angle_to(&other.rotation),
        )
    }

    pub fn approx_eq(&self, other: &Pose, pos_tol: f64, ang_tol: f64) -> bool {
        let (dp, da) = self.error_to(other);
        dp <= pos_tol && da <= ang_tol
    }
}

impl Mul for Pose {
    type Output = Pose;
    fn mul(self, o: Pose) -> Pose {
        compose(&self, &o)
    }
}

/// `r · v`.
#[inline]
pub fn rotate(r: &Rot3, v: Vec3) -> Vec3 {
    r.rotate(v)
}

/// Angle in `[0, π]` between two nonzero vectors.
pub fn angle_between(a: Vec3, b: Vec3) -> Result<f64> {
    let na = a.norm();
    let nb = b.norm();
    if na < MIN_NORM || nb < MIN_NORM {
        return Err(Error::ZeroVector);
    }
    let c = (a.dot(b) / (na * nb)).clamp(-1.0, 1.0);
    Ok(math::acos(c))
}

/// Extrinsic X-Y-Z Euler angles to a rotation: `Rz(yaw) · Ry(pitch) · Rx(roll)`.
pub fn rpy_to_rot(roll: f64, pitch: f64, yaw: f64) -> Rot3 {
    let (sr, cr) = (math::sin(roll), math::cos(roll));
    let (sp, cp) = (math::sin(pitch), math::cos(pitch));
    let (sy, cy) = (math::sin(yaw), math::cos(yaw));
    Rot3::from_rows([
        [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
        [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
        [-sp, cp * sr, cp * cr],
    ])
}

/// Inverse of [`rpy_to_rot`]; pitch is returned in `[-π/2, π/2]`.
pub fn rot_to_rpy(r: &Rot3) -> (f64, f64, f64) {
    let m = &r.m;
    let pitch = math::asin((-m[2][0]).clamp(-1.0, 1.0));
    let roll = math::atan2(m[2][1], m[2][2]);
    let yaw = math::atan2(m[1][0], m[0][0]);
    (roll, pitch, yaw)
}

pub fn compose(p: &Pose, q: &Pose) -> Pose {
    Pose {
        rotation: p.rotation * q.rotation,
        translation: p.rotation.rotate(q.translation) + p.translation,
    }
}

pub fn inverse(p: &Pose) -> Pose {
    let rt = p.rotation.transpose();
    Pose {
        rotation: rt,
        translation: -rt.rotate(p.translation),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, PI};

    fn close(a: Vec3, b: Vec3, tol: f64) -> bool {
        (a - b).max_abs() <= tol
    }

    #[test]
    fn rotate_identity_and_half_turn() {
        assert_eq!(rotate(&Rot3::IDENTITY, Vec3::Z), Vec3::Z);
        let v = rotate(&Rot3::rot_x(PI), Vec3::Z);
        assert!(close(v, -Vec3::Z, 1e-15));
    }

    #[test]
    fn angle_between_basic_cases() {
        assert_eq!(angle_between(Vec3::Z, Vec3::Z).unwrap(), 0.0);
        assert!((angle_between(Vec3::Z, Vec3::X).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(angle_between(Vec3::ZERO, Vec3::X), Err(Error::ZeroVector));
        assert_eq!(
            angle_between(Vec3::X, Vec3::new(1e-13, 0.0, 0.0)),
            Err(Error::ZeroVector)
        );
        // Antiparallel inputs with rounding noise still land on π.
        assert_eq!(angle_between(Vec3::Z, -Vec3::Z * 3.0).unwrap(), PI);
    }

    #[test]
    fn rpy_half_turn_about_x_flips_y_and_z() {
        let r = rpy_to_rot(PI, 0.0, 0.0);
        assert!(close(r.column(0), Vec3::X, 1e-15));
        assert!(close(r.column(1), -Vec3::Y, 1e-15));
        assert!(close(r.column(2), -Vec3::Z, 1e-15));
        assert_eq!(rpy_to_rot(0.0, 0.0, 0.0), Rot3::IDENTITY);
    }

    #[test]
    fn rpy_matches_elementary_product() {
        let (r, p, y) = (0.3, -0.4, 1.1);
        let a = rpy_to_rot(r, p, y);
        let b = Rot3::rot_z(y) * Rot3::rot_y(p) * Rot3::rot_x(r);
        for i in 0..3 {
            assert!(close(a.column(i), b.column(i), 1e-15));
        }
    }

    #[test]
    fn log_handles_small_generic_and_half_turn_angles() {
        for angle in [0.0, 1e-9, 1e-3, 0.7, 2.5, PI - 1e-6, PI] {
            let axis = Vec3::new(0.2, -0.5, 0.8).normalized().unwrap();
            let r = Rot3::from_axis_angle(axis, angle);
            let back = Rot3::from_rotation_vector(r.log());
            assert!(r.angle_to(&back) < 1e-8, "angle {angle}");
            assert!((r.log().norm() - angle).abs() < 1e-7, "angle {angle}");
        }
    }

    #[test]
    fn quaternion_round_trip() {
        let r = rpy_to_rot(2.9, -1.2, 0.4);
        let q = r.to_quat_wxyz();
        assert!(q[0] >= 0.0);
        let back = Rot3::from_quat_wxyz(q).unwrap();
        assert!(r.angle_to(&back) < 1e-12);
    }

    #[test]
    fn compose_and_inverse() {
        let p = Pose::from_xyz_rpy(Vec3::new(0.1, -0.2, 0.3), 0.4, 0.5, -0.6);
        assert_eq!(compose(&Pose::IDENTITY, &p), p);
        assert_eq!(inverse(&Pose::IDENTITY), Pose::IDENTITY);
        let e = compose(&p, &inverse(&p));
        assert!(e.approx_eq(&Pose::IDENTITY, 1e-12, 1e-12));
    }
}
