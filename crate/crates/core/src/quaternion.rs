//! Quaternion algebra in `(w, x, y, z)` order.
//!
//! Multiplication is exposed both as an operator and through the two 4×4
//! operators `Q(r)` and `W(r)`, defined so that `r * q = Q(r) q = W(q) r`.
//! 3-vectors embed as purely imaginary quaternions (`w = 0`).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{HandEyeError, Result};

/// Tolerance on `|q·q - 1|` accepted by [`UnitQuaternion::new`].
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// Tolerance on `‖RᵀR - I‖_F` accepted by [`UnitQuaternion::from_rotation_matrix`].
pub const ROTATION_INPUT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    /// The unity quaternion `e = (1, 0, 0, 0)`.
    pub const fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 0.0)
    }

    /// Embed a 3-vector as a purely imaginary quaternion.
    pub fn pure(v: &Vector3<f64>) -> Self {
        Self::new(0.0, v.x, v.y, v.z)
    }

    pub fn from_vector4(v: &Vector4<f64>) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_vector4(self) -> Vector4<f64> {
        Vector4::new(self.w, self.x, self.y, self.z)
    }

    pub fn vector_part(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn conjugate(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn dot(self, other: Self) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// `q·q`, the squared norm.
    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;

    fn mul(self, q: Quaternion) -> Quaternion {
        let r = self;
        Quaternion::new(
            r.w * q.w - r.x * q.x - r.y * q.y - r.z * q.z,
            r.w * q.x + r.x * q.w + r.y * q.z - r.z * q.y,
            r.w * q.y - r.x * q.z + r.y * q.w + r.z * q.x,
            r.w * q.z + r.x * q.y - r.y * q.x + r.z * q.w,
        )
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        self.scale(-1.0)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.w, self.x, self.y, self.z)
    }
}

/// Quaternion product `r * q`.
pub fn qmul(r: Quaternion, q: Quaternion) -> Quaternion {
    r * q
}

/// Left-multiplication operator: `Q(r) q = r * q`.
#[rustfmt::skip]
pub fn q_matrix(r: Quaternion) -> Matrix4<f64> {
    Matrix4::new(
        r.w, -r.x, -r.y, -r.z,
        r.x,  r.w, -r.z,  r.y,
        r.y,  r.z,  r.w, -r.x,
        r.z, -r.y,  r.x,  r.w,
    )
}

/// Right-multiplication operator: `W(r) q = q * r`.
#[rustfmt::skip]
pub fn w_matrix(r: Quaternion) -> Matrix4<f64> {
    Matrix4::new(
        r.w, -r.x, -r.y, -r.z,
        r.x,  r.w,  r.z, -r.y,
        r.y, -r.z,  r.w,  r.x,
        r.z,  r.y, -r.x,  r.w,
    )
}

/// The homogeneous quadratic map `v -> q * v * q̄` as a 3×3 matrix.
///
/// Equals `‖q‖²` times the rotation encoded by `q / ‖q‖`, so it is the
/// rotation matrix itself only for unit `q`.
pub fn rotation_part(q: Quaternion) -> Matrix3<f64> {
    let Quaternion { w, x, y, z } = q;
    Matrix3::new(
        w * w + x * x - y * y - z * z,
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        w * w - x * x + y * y - z * z,
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        w * w - x * x - y * y + z * z,
    )
}

/// A unit-norm quaternion in canonical sign (`w > 0`, or `w = 0` with the
/// first nonzero imaginary component positive).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Quaternion", into = "Quaternion")]
pub struct UnitQuaternion(Quaternion);

impl TryFrom<Quaternion> for UnitQuaternion {
    type Error = HandEyeError;
    fn try_from(q: Quaternion) -> Result<Self> {
        UnitQuaternion::normalize(q)
    }
}

impl From<UnitQuaternion> for Quaternion {
    fn from(q: UnitQuaternion) -> Quaternion {
        q.0
    }
}

fn canonical_sign(q: Quaternion) -> Quaternion {
    let leading = [q.w, q.x, q.y, q.z].into_iter().find(|c| *c != 0.0).unwrap_or(0.0);
    if leading < 0.0 {
        -q
    } else {
        q
    }
}

impl UnitQuaternion {
    /// Wrap `q`, which must already satisfy `|q·q - 1| ≤ 1e-12`.
    pub fn new(q: Quaternion) -> Result<Self> {
        let err = (q.norm2() - 1.0).abs();
        if !(err <= UNIT_NORM_TOL) {
            return Err(HandEyeError::NotARotation { residual: err, det: f64::NAN });
        }
        Ok(Self(canonical_sign(q)))
    }

    /// Scale `q` to unit norm. Fails only for a zero (or non-finite) input.
    pub fn normalize(q: Quaternion) -> Result<Self> {
        let n = q.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(HandEyeError::NotARotation { residual: f64::INFINITY, det: f64::NAN });
        }
        Ok(Self(canonical_sign(q.scale(1.0 / n))))
    }

    pub fn identity() -> Self {
        Self(Quaternion::identity())
    }

    /// Rotation of `angle` radians about `axis` (need not be unit, must be nonzero).
    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        let u = axis.normalize();
        let (s, c) = (0.5 * angle).sin_cos();
        Self(canonical_sign(Quaternion::new(c, s * u.x, s * u.y, s * u.z)))
    }

    pub fn quaternion(self) -> Quaternion {
        self.0
    }

    pub fn w(self) -> f64 {
        self.0.w
    }

    pub fn inverse(self) -> Self {
        Self(canonical_sign(self.0.conjugate()))
    }

    /// Composition: the rotation `self` applied after `other`.
    pub fn compose(self, other: Self) -> Self {
        // Renormalize to keep round-off out of the invariant.
        Self::normalize(self.0 * other.0).expect("product of unit quaternions is nonzero")
    }

    /// `q * v * q̄` for `v` embedded as a pure quaternion.
    pub fn rotate_vector(self, v: &Vector3<f64>) -> Vector3<f64> {
        let out = self.0 * Quaternion::pure(v) * self.0.conjugate();
        debug_assert!(out.w.abs() <= 1e-12 * (1.0 + v.norm()));
        out.vector_part()
    }

    pub fn to_rotation_matrix(self) -> Matrix3<f64> {
        rotation_part(self.0)
    }

    /// Rotation angle in `[0, π]`.
    pub fn angle(self) -> f64 {
        2.0 * self.0.vector_part().norm().atan2(self.0.w)
    }

    /// Inverse of [`to_rotation_matrix`](Self::to_rotation_matrix), using the
    /// largest-diagonal branch for stability at every trace value.
    pub fn from_rotation_matrix(r: &Matrix3<f64>) -> Result<Self> {
        let residual = (r.transpose() * r - Matrix3::identity()).norm();
        let det = r.determinant();
        if !(residual <= ROTATION_INPUT_TOL) || !(det > 0.0) {
            return Err(HandEyeError::NotARotation { residual, det });
        }
        let trace = r.trace();
        let (m00, m11, m22) = (r[(0, 0)], r[(1, 1)], r[(2, 2)]);
        let q = if trace >= m00 && trace >= m11 && trace >= m22 {
            let s = 2.0 * (1.0 + trace).sqrt();
            Quaternion::new(
                0.25 * s,
                (r[(2, 1)] - r[(1, 2)]) / s,
                (r[(0, 2)] - r[(2, 0)]) / s,
                (r[(1, 0)] - r[(0, 1)]) / s,
            )
        } else if m00 >= m11 && m00 >= m22 {
            let s = 2.0 * (1.0 + m00 - m11 - m22).sqrt();
            Quaternion::new(
                (r[(2, 1)] - r[(1, 2)]) / s,
                0.25 * s,
                (r[(0, 1)] + r[(1, 0)]) / s,
                (r[(0, 2)] + r[(2, 0)]) / s,
            )
        } else if m11 >= m22 {
            let s = 2.0 * (1.0 + m11 - m00 - m22).sqrt();
            Quaternion::new(
                (r[(0, 2)] - r[(2, 0)]) / s,
                (r[(0, 1)] + r[(1, 0)]) / s,
                0.25 * s,
                (r[(1, 2)] + r[(2, 1)]) / s,
            )
        } else {
            let s = 2.0 * (1.0 + m22 - m00 - m11).sqrt();
            Quaternion::new(
                (r[(1, 0)] - r[(0, 1)]) / s,
                (r[(0, 2)] + r[(2, 0)]) / s,
                (r[(1, 2)] + r[(2, 1)]) / s,
                0.25 * s,
            )
        };
        Self::normalize(q)
    }
}

impl fmt::Display for UnitQuaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}
