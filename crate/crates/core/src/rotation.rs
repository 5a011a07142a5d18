//! Quaternions, tilt angles, fused angles and the tilt phase space.
//!
//! Conventions: quaternions are `(w, x, y, z)` with `w >= 0` after every
//! constructor and operation. A rotation is decomposed as `q = q_z(psi) * q_tilt`
//! where `psi` is the fused yaw and `q_tilt` is a pure tilt, i.e. a rotation by
//! the tilt angle `alpha` about the horizontal axis `(cos gamma, sin gamma, 0)`.
//! `gamma = 0` is a pure rotation about the x-axis, so `px` is the lateral and
//! `py` the sagittal tilt phase.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use thiserror::Error;

/// Below this value of `w^2 + z^2` the rotation is treated as a tilt by a half turn,
/// where fused yaw is undefined.
const HALF_TURN_EPS: f64 = 1e-24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RotationError {
    #[error("quaternion components have zero or non-finite norm")]
    DegenerateQuaternion,
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(angle: f64) -> f64 {
    if angle > -PI && angle <= PI {
        return angle;
    }
    let wrapped = angle - 2.0 * PI * ((angle - PI) / (2.0 * PI)).ceil();
    // ceil can land one period off when the quotient is within rounding of an integer
    if wrapped <= -PI {
        wrapped + 2.0 * PI
    } else if wrapped > PI {
        wrapped - 2.0 * PI
    } else {
        wrapped
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// A unit quaternion in canonical `w >= 0` form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl Default for Quaternion {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    /// Normalises and canonicalises the given components.
    pub fn from_components(w: f64, x: f64, y: f64, z: f64) -> Result<Self, RotationError> {
        let norm = (w * w + x * x + y * y + z * z).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(RotationError::DegenerateQuaternion);
        }
        Ok(Self::canonical(w / norm, x / norm, y / norm, z / norm))
    }

    /// Renormalises components that are known to be close to unit norm.
    fn renormalized(w: f64, x: f64, y: f64, z: f64) -> Self {
        let norm = (w * w + x * x + y * y + z * z).sqrt();
        Self::canonical(w / norm, x / norm, y / norm, z / norm)
    }

    fn canonical(w: f64, x: f64, y: f64, z: f64) -> Self {
        let flip = if w != 0.0 {
            w < 0.0
        } else if x != 0.0 {
            x < 0.0
        } else if y != 0.0 {
            y < 0.0
        } else {
            z < 0.0
        };
        if flip {
            Quaternion {
                w: -w,
                x: -x,
                y: -y,
                z: -z,
            }
        } else {
            Quaternion { w, x, y, z }
        }
    }

    pub fn w(&self) -> f64 {
        self.w
    }
    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn y(&self) -> f64 {
        self.y
    }
    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Rotation by `angle` about a principal axis.
    pub fn axis_rotation(axis: Axis, angle: f64) -> Self {
        let (s, c) = (0.5 * angle).sin_cos();
        match axis {
            Axis::X => Self::canonical(c, s, 0.0, 0.0),
            Axis::Y => Self::canonical(c, 0.0, s, 0.0),
            Axis::Z => Self::canonical(c, 0.0, 0.0, s),
        }
    }

    /// Rotation vector exponential: a rotation by `|v|` about `v / |v|`.
    pub fn from_rotation_vector(v: [f64; 3]) -> Self {
        let angle = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let half = 0.5 * angle;
        let scale = half_angle_sinc(angle);
        Self::renormalized(half.cos(), scale * v[0], scale * v[1], scale * v[2])
    }

    pub fn conjugate(&self) -> Self {
        Self::canonical(self.w, -self.x, -self.y, -self.z)
    }

    /// Hamilton product without renormalisation or sign canonicalisation.
    pub fn raw_product(a: &Quaternion, b: &Quaternion) -> [f64; 4] {
        [
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        ]
    }

    /// Rotates a vector from the local frame into the reference frame.
    pub fn rotate(&self, v: [f64; 3]) -> [f64; 3] {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        // t = 2 * (q_vec x v)
        let tx = 2.0 * (y * v[2] - z * v[1]);
        let ty = 2.0 * (z * v[0] - x * v[2]);
        let tz = 2.0 * (x * v[1] - y * v[0]);
        [
            v[0] + w * tx + (y * tz - z * ty),
            v[1] + w * ty + (z * tx - x * tz),
            v[2] + w * tz + (x * ty - y * tx),
        ]
    }

    /// Rotates a vector from the reference frame into the local frame.
    pub fn inverse_rotate(&self, v: [f64; 3]) -> [f64; 3] {
        self.conjugate().rotate(v)
    }

    /// Fused yaw in `(-pi, pi]`. Defined as zero for tilts by a half turn.
    pub fn fused_yaw(&self) -> f64 {
        if self.w * self.w + self.z * self.z < HALF_TURN_EPS {
            return 0.0;
        }
        wrap_angle(2.0 * self.z.atan2(self.w))
    }

    /// Removes the fused yaw, leaving the pure tilt component `q_z(-psi) * q`.
    pub fn remove_fused_yaw(&self) -> Self {
        if self.w * self.w + self.z * self.z < HALF_TURN_EPS {
            return Self::renormalized(0.0, self.x, self.y, 0.0);
        }
        let psi = self.fused_yaw();
        if psi == 0.0 {
            return *self;
        }
        let mut tilt = Quaternion::axis_rotation(Axis::Z, -psi) * *self;
        // the z component is zero analytically; drop the rounding residue
        tilt.z = 0.0;
        Self::renormalized(tilt.w, tilt.x, tilt.y, 0.0)
    }

    pub fn tilt_angles(&self) -> TiltAngles {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        let wz = (w * w + z * z).sqrt();
        let xy = (x * x + y * y).sqrt();
        let alpha = 2.0 * xy.atan2(wz);
        if w * w + z * z < HALF_TURN_EPS {
            // Half-turn tilt: yaw is taken as zero and the tilt axis read off the vector part.
            return TiltAngles {
                psi: 0.0,
                gamma: wrap_angle(y.atan2(x)),
                alpha,
            };
        }
        let psi = wrap_angle(2.0 * z.atan2(w));
        let gamma = wrap_angle((w * y - x * z).atan2(w * x + y * z));
        TiltAngles { psi, gamma, alpha }
    }

    /// Fused angles, computed directly from the quaternion components.
    pub fn fused_angles(&self) -> FusedAngles {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        let sin_theta = (2.0 * (w * y - x * z)).clamp(-1.0, 1.0);
        let sin_phi = (2.0 * (w * x + y * z)).clamp(-1.0, 1.0);
        FusedAngles {
            psi: self.fused_yaw(),
            theta: sin_theta.asin(),
            phi: sin_phi.asin(),
            hemisphere: w * w + z * z - x * x - y * y >= 0.0,
        }
    }

    pub fn from_tilt_angles(angles: TiltAngles) -> Self {
        let (s, c) = (0.5 * angles.alpha).sin_cos();
        let (sg, cg) = angles.gamma.sin_cos();
        let tilt = Self::renormalized(c, s * cg, s * sg, 0.0);
        Quaternion::axis_rotation(Axis::Z, angles.psi) * tilt
    }

    pub fn from_tilt_phase(p: TiltPhase3D) -> Self {
        let tilt = Self::from_tilt_phase_2d(p.tilt());
        if p.pz == 0.0 {
            return tilt;
        }
        Quaternion::axis_rotation(Axis::Z, p.pz) * tilt
    }

    /// Pure tilt rotation corresponding to a 2D tilt phase.
    pub fn from_tilt_phase_2d(p: TiltPhase2D) -> Self {
        let alpha = p.norm();
        let scale = half_angle_sinc(alpha);
        Self::renormalized((0.5 * alpha).cos(), scale * p.px, scale * p.py, 0.0)
    }

    pub fn tilt_phase(&self) -> TiltPhase3D {
        let angles = self.tilt_angles();
        let (sg, cg) = angles.gamma.sin_cos();
        TiltPhase3D {
            px: angles.alpha * cg,
            py: angles.alpha * sg,
            pz: angles.psi,
        }
    }

    pub fn tilt_phase_2d(&self) -> TiltPhase2D {
        self.tilt_phase().tilt()
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;

    fn mul(self, rhs: Quaternion) -> Quaternion {
        let [w, x, y, z] = Quaternion::raw_product(&self, &rhs);
        Quaternion::renormalized(w, x, y, z)
    }
}

/// `sin(angle / 2) / angle`, continuous at zero.
fn half_angle_sinc(angle: f64) -> f64 {
    if angle.abs() < 1e-4 {
        let a2 = angle * angle;
        0.5 - a2 / 48.0 + a2 * a2 / 3840.0
    } else {
        (0.5 * angle).sin() / angle
    }
}

pub fn tilt_phase_from_quat(q: &Quaternion) -> TiltPhase3D {
    q.tilt_phase()
}

pub fn quat_from_tilt_phase(p: TiltPhase3D) -> Quaternion {
    Quaternion::from_tilt_phase(p)
}

pub fn fused_yaw(q: &Quaternion) -> f64 {
    q.fused_yaw()
}

pub fn remove_fused_yaw(q: &Quaternion) -> Quaternion {
    q.remove_fused_yaw()
}

pub fn axis_rotation(axis: Axis, angle: f64) -> Quaternion {
    Quaternion::axis_rotation(axis, angle)
}

/// Fused yaw, tilt axis angle and tilt angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltAngles {
    pub psi: f64,
    pub gamma: f64,
    pub alpha: f64,
}

/// Fused yaw, pitch and roll plus the hemisphere flag (`true` when the
/// tilt angle is at most a quarter turn).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusedAngles {
    pub psi: f64,
    pub theta: f64,
    pub phi: f64,
    pub hemisphere: bool,
}

/// 2D tilt phase: `(alpha cos gamma, alpha sin gamma)`.
///
/// Tilt phases form a vector space; addition and scaling are componentwise.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TiltPhase2D {
    pub px: f64,
    pub py: f64,
}

impl TiltPhase2D {
    pub const ZERO: TiltPhase2D = TiltPhase2D { px: 0.0, py: 0.0 };

    pub const fn new(px: f64, py: f64) -> Self {
        Self { px, py }
    }

    pub fn from_array(v: [f64; 2]) -> Self {
        Self { px: v[0], py: v[1] }
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.px, self.py]
    }

    /// Tilt angle of the represented rotation.
    pub fn norm(&self) -> f64 {
        self.px.hypot(self.py)
    }

    /// Tilt axis angle.
    pub fn angle(&self) -> f64 {
        self.py.atan2(self.px)
    }

    pub fn is_finite(&self) -> bool {
        self.px.is_finite() && self.py.is_finite()
    }

    pub fn with_yaw(self, psi: f64) -> TiltPhase3D {
        TiltPhase3D {
            px: self.px,
            py: self.py,
            pz: psi,
        }
    }
}

impl Add for TiltPhase2D {
    type Output = TiltPhase2D;
    fn add(self, rhs: TiltPhase2D) -> TiltPhase2D {
        TiltPhase2D::new(self.px + rhs.px, self.py + rhs.py)
    }
}

impl AddAssign for TiltPhase2D {
    fn add_assign(&mut self, rhs: TiltPhase2D) {
        self.px += rhs.px;
        self.py += rhs.py;
    }
}

impl Sub for TiltPhase2D {
    type Output = TiltPhase2D;
    fn sub(self, rhs: TiltPhase2D) -> TiltPhase2D {
        TiltPhase2D::new(self.px - rhs.px, self.py - rhs.py)
    }
}

impl Neg for TiltPhase2D {
    type Output = TiltPhase2D;
    fn neg(self) -> TiltPhase2D {
        TiltPhase2D::new(-self.px, -self.py)
    }
}

impl Mul<f64> for TiltPhase2D {
    type Output = TiltPhase2D;
    fn mul(self, rhs: f64) -> TiltPhase2D {
        TiltPhase2D::new(self.px * rhs, self.py * rhs)
    }
}

impl Mul<TiltPhase2D> for f64 {
    type Output = TiltPhase2D;
    fn mul(self, rhs: TiltPhase2D) -> TiltPhase2D {
        rhs * self
    }
}

impl std::iter::Sum for TiltPhase2D {
    fn sum<I: Iterator<Item = TiltPhase2D>>(iter: I) -> Self {
        iter.fold(TiltPhase2D::ZERO, Add::add)
    }
}

/// Tilt vector addition of any number of tilt phases.
pub fn tilt_vector_add<I: IntoIterator<Item = TiltPhase2D>>(tilts: I) -> TiltPhase2D {
    tilts.into_iter().sum()
}

/// 3D tilt phase: 2D tilt phase plus fused yaw.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TiltPhase3D {
    pub px: f64,
    pub py: f64,
    pub pz: f64,
}

impl TiltPhase3D {
    pub const fn new(px: f64, py: f64, pz: f64) -> Self {
        Self { px, py, pz }
    }

    pub fn tilt(&self) -> TiltPhase2D {
        TiltPhase2D::new(self.px, self.py)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn close(a: [f64; 4], b: [f64; 4], tol: f64) -> bool {
        a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn wrap_is_half_open() {
        assert_eq!(wrap_angle(PI), PI);
        assert_abs_diff_eq!(wrap_angle(-PI), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_angle(3.0 * PI), PI, epsilon = 1e-14);
        assert_abs_diff_eq!(wrap_angle(PI + 0.01), -PI + 0.01, epsilon = 1e-14);
        assert_abs_diff_eq!(wrap_angle(7.0), 7.0 - 2.0 * PI, epsilon = 1e-14);
        for k in -20..20 {
            let a = wrap_angle(k as f64 * 0.77);
            assert!(a > -PI && a <= PI);
        }
    }

    #[test]
    fn identity_tilt_phase() {
        let q = quat_from_tilt_phase(TiltPhase3D::new(0.0, 0.0, 0.0));
        assert_eq!(q, Quaternion::IDENTITY);
        assert_eq!(tilt_phase_from_quat(&Quaternion::IDENTITY), TiltPhase3D::default());
    }

    #[test]
    fn x_tilt_is_x_rotation() {
        let q = quat_from_tilt_phase(TiltPhase3D::new(0.3, 0.0, 0.0));
        let expected = [0.15f64.cos(), 0.15f64.sin(), 0.0, 0.0];
        assert!(close(q.to_array(), expected, 1e-15));
    }

    #[test]
    fn yaw_only_has_no_tilt() {
        let p = tilt_phase_from_quat(&axis_rotation(Axis::Z, 0.7));
        assert_abs_diff_eq!(p.px, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.py, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.pz, 0.7, epsilon = 1e-15);
    }

    #[test]
    fn yaw_of_yawed_tilt() {
        let q = axis_rotation(Axis::Z, 0.7) * axis_rotation(Axis::Y, 0.4);
        let p = tilt_phase_from_quat(&q);
        assert_abs_diff_eq!(p.pz, 0.7, epsilon = 1e-14);
        assert_abs_diff_eq!(p.px, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.py, 0.4, epsilon = 1e-14);
    }

    #[test]
    fn axis_rotations() {
        assert_eq!(axis_rotation(Axis::Y, 0.0), Quaternion::IDENTITY);
        assert!(close(axis_rotation(Axis::Z, PI).to_array(), [0.0, 0.0, 0.0, 1.0], 1e-15));
        assert!(close(
            axis_rotation(Axis::Y, 0.4).to_array(),
            [0.2f64.cos(), 0.0, 0.2f64.sin(), 0.0],
            1e-15
        ));
    }

    #[test]
    fn fused_yaw_of_z_rotation() {
        for k in -9..=10 {
            let psi = k as f64 * PI / 10.0;
            let expected = wrap_angle(psi);
            assert_abs_diff_eq!(fused_yaw(&axis_rotation(Axis::Z, psi)), expected, epsilon = 1e-14);
        }
        // pi itself stays pi rather than flipping to -pi
        assert_abs_diff_eq!(fused_yaw(&axis_rotation(Axis::Z, PI)), PI, epsilon = 1e-15);
    }

    #[test]
    fn half_turn_tilt_has_zero_yaw() {
        let q = quat_from_tilt_phase(TiltPhase3D::new(0.0, PI, 0.0));
        assert_abs_diff_eq!(q.w(), 0.0, epsilon = 1e-15);
        let angles = Quaternion::from_components(0.0, 0.6, 0.8, 0.0).unwrap().tilt_angles();
        assert_eq!(angles.psi, 0.0);
        assert_abs_diff_eq!(angles.alpha, PI, epsilon = 1e-15);
        assert_abs_diff_eq!(angles.gamma, 0.8f64.atan2(0.6), epsilon = 1e-15);
        assert_eq!(Quaternion::from_components(0.0, 0.6, 0.8, 0.0).unwrap().fused_yaw(), 0.0);
    }

    #[test]
    fn remove_yaw_cases() {
        let t = quat_from_tilt_phase(TiltPhase3D::new(0.2, -0.5, 0.0));
        assert!(close(remove_fused_yaw(&t).to_array(), t.to_array(), 1e-15));
        assert!(close(
            remove_fused_yaw(&axis_rotation(Axis::Z, 0.5)).to_array(),
            Quaternion::IDENTITY.to_array(),
            1e-15
        ));
    }

    #[test]
    fn coaxial_tilts_add() {
        let a = TiltPhase2D::new(0.2, 0.0);
        let b = TiltPhase2D::new(0.3, 0.0);
        let sum = tilt_vector_add([a, b]);
        assert_eq!(sum, TiltPhase2D::new(0.5, 0.0));
        let composed = Quaternion::from_tilt_phase_2d(a) * Quaternion::from_tilt_phase_2d(b);
        assert!(close(
            Quaternion::from_tilt_phase_2d(sum).to_array(),
            composed.to_array(),
            1e-12
        ));
        assert_eq!(a + TiltPhase2D::ZERO, a);
    }

    #[test]
    fn degenerate_components_rejected() {
        assert!(Quaternion::from_components(0.0, 0.0, 0.0, 0.0).is_err());
        assert!(Quaternion::from_components(f64::NAN, 0.0, 0.0, 1.0).is_err());
        let q = Quaternion::from_components(-2.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(q, Quaternion::IDENTITY);
    }

    #[test]
    fn matches_nalgebra_composition() {
        use nalgebra::{Quaternion as NQ, UnitQuaternion, Vector3};
        let a = quat_from_tilt_phase(TiltPhase3D::new(0.3, -0.2, 1.1));
        let b = quat_from_tilt_phase(TiltPhase3D::new(-0.7, 0.4, -2.0));
        let na = UnitQuaternion::from_quaternion(NQ::new(a.w(), a.x(), a.y(), a.z()));
        let nb = UnitQuaternion::from_quaternion(NQ::new(b.w(), b.x(), b.y(), b.z()));
        let ours = a * b;
        let theirs = na * nb;
        let sign = if theirs.w < 0.0 { -1.0 } else { 1.0 };
        assert!(close(
            ours.to_array(),
            [sign * theirs.w, sign * theirs.i, sign * theirs.j, sign * theirs.k],
            1e-14
        ));
        let v = [0.3, -1.2, 0.5];
        let rv = ours.rotate(v);
        let nv = theirs * Vector3::new(v[0], v[1], v[2]);
        for i in 0..3 {
            assert_abs_diff_eq!(rv[i], nv[i], epsilon = 1e-14);
        }
    }
}
