//! Rigid motions, perspective matrices and the reduction of both problem
//! formulations to a common list of [`MotionConstraint`]s.
//!
//! Conventions: a transform `T` maps coordinates from frame `b` to frame `a`.
//! Camera poses `A_i` map the calibration frame to the camera frame, hand
//! poses `B_i` map the hand frame to the robot base, and the unknown `X` maps
//! the hand frame to the camera frame (`Y` maps it to the calibration frame
//! at position 1, so that `X = A_1 Y`).

use nalgebra::{Matrix3, Matrix3x4, Matrix4, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{HandEyeError, Result};
use crate::quaternion::UnitQuaternion;

/// Orthonormality tolerance for [`RigidMotion::new`].
pub const RIGID_TOL: f64 = 1e-9;
/// Rotations with a smaller angle (radians) have no usable axis.
pub const MIN_AXIS_ANGLE: f64 = 1e-6;
/// Largest `‖RᵀR - I‖_F` accepted by [`orthonormalize`].
pub const ORTHONORMALIZE_LIMIT: f64 = 0.5;
/// Largest `‖KᵀK - I‖_F` accepted for `N₁⁻¹N₂` before projection.
pub const REDUCED_ROTATION_LIMIT: f64 = 0.1;
/// Smallest `|det N|` for an invertible perspective matrix.
pub const MIN_PERSPECTIVE_DET: f64 = 1e-12;

/// Which pose pairing the constraints come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formulation {
    /// `AX = XB` over consecutive camera extrinsics.
    Classical,
    /// `MY = M'YB` over perspective matrices, every position against the first.
    NewFormulation,
}

impl Formulation {
    pub fn as_str(self) -> &'static str {
        match self {
            Formulation::Classical => "classical",
            Formulation::NewFormulation => "new-formulation",
        }
    }
}

impl std::fmt::Display for Formulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Formulation {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "classical" => Ok(Formulation::Classical),
            "new-formulation" => Ok(Formulation::NewFormulation),
            other => Err(format!("unknown formulation {other:?}")),
        }
    }
}

fn orthonormality_residual(r: &Matrix3<f64>) -> f64 {
    (r.transpose() * r - Matrix3::identity()).norm()
}

/// Rotation plus translation (mm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidMotion {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl RigidMotion {
    /// Validated constructor: `rotation` must be orthonormal with det +1 to 1e-9.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        let residual = orthonormality_residual(&rotation);
        let det = rotation.determinant();
        if !(residual <= RIGID_TOL) || !((det - 1.0).abs() <= RIGID_TOL) {
            return Err(HandEyeError::NotARotation { residual, det });
        }
        Ok(Self { rotation, translation })
    }

    pub fn identity() -> Self {
        Self { rotation: Matrix3::identity(), translation: Vector3::zeros() }
    }

    pub fn from_quaternion(q: UnitQuaternion, translation: Vector3<f64>) -> Self {
        Self { rotation: q.to_rotation_matrix(), translation }
    }

    /// Accepts a 4×4 homogeneous matrix whose bottom row is `(0, 0, 0, 1)` to 1e-9.
    pub fn from_homogeneous(m: &Matrix4<f64>) -> Result<Self> {
        let row = [m[(3, 0)], m[(3, 1)], m[(3, 2)], m[(3, 3)]];
        let expected = [0.0, 0.0, 0.0, 1.0];
        if row.iter().zip(expected).any(|(a, b)| !((a - b).abs() <= RIGID_TOL)) {
            return Err(HandEyeError::BadHomogeneousRow(row));
        }
        Self::new(m.fixed_view::<3, 3>(0, 0).into(), m.fixed_view::<3, 1>(0, 3).into())
    }

    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    pub fn quaternion(&self) -> UnitQuaternion {
        UnitQuaternion::from_rotation_matrix(&self.rotation).expect("RigidMotion always holds a valid rotation")
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    /// `self ∘ other`: apply `other`, then `self`.
    pub fn compose(&self, other: &RigidMotion) -> RigidMotion {
        RigidMotion {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidMotion {
        let rt = self.rotation.transpose();
        RigidMotion { rotation: rt, translation: -(rt * self.translation) }
    }
}

pub fn compose(a: &RigidMotion, b: &RigidMotion) -> RigidMotion {
    a.compose(b)
}

pub fn invert(a: &RigidMotion) -> RigidMotion {
    a.inverse()
}

/// Camera motion between two positions: `A = A₂ A₁⁻¹`.
pub fn camera_motion(a1: &RigidMotion, a2: &RigidMotion) -> RigidMotion {
    a2.compose(&a1.inverse())
}

/// Hand motion between two positions: `B = B₂⁻¹ B₁`.
pub fn hand_motion(b1: &RigidMotion, b2: &RigidMotion) -> RigidMotion {
    b2.inverse().compose(b1)
}

/// Pin-hole intrinsics. Used to synthesize `M = C·A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub alpha_u: f64,
    pub alpha_v: f64,
    pub u0: f64,
    pub v0: f64,
}

impl Intrinsics {
    pub fn new(alpha_u: f64, alpha_v: f64, u0: f64, v0: f64) -> Result<Self> {
        if alpha_u == 0.0 || alpha_v == 0.0 || !alpha_u.is_finite() || !alpha_v.is_finite() {
            return Err(HandEyeError::BadIntrinsics);
        }
        Ok(Self { alpha_u, alpha_v, u0, v0 })
    }

    /// Left 3×3 block of `C`; its last column is zero.
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(self.alpha_u, 0.0, self.u0, 0.0, self.alpha_v, self.v0, 0.0, 0.0, 1.0)
    }

    /// `M = C·A` for the pose `a` (calibration frame to camera frame).
    pub fn perspective(&self, a: &RigidMotion) -> PerspectiveMatrix {
        let c = self.matrix();
        PerspectiveMatrix { linear: c * a.rotation, offset: c * a.translation }
    }
}

/// A 3×4 camera matrix split as `M = [N | n]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerspectiveMatrix {
    pub linear: Matrix3<f64>,
    pub offset: Vector3<f64>,
}

impl PerspectiveMatrix {
    pub fn new(linear: Matrix3<f64>, offset: Vector3<f64>) -> Result<Self> {
        let det = linear.determinant();
        if !(det.abs() > MIN_PERSPECTIVE_DET) {
            return Err(HandEyeError::SingularN { det });
        }
        Ok(Self { linear, offset })
    }

    pub fn from_matrix(m: &Matrix3x4<f64>) -> Result<Self> {
        Self::new(m.fixed_view::<3, 3>(0, 0).into(), m.fixed_view::<3, 1>(0, 3).into())
    }

    pub fn to_matrix(&self) -> Matrix3x4<f64> {
        let mut m = Matrix3x4::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.linear);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.offset);
        m
    }

    /// Projects a calibration-frame point to pixel coordinates `(u, v)`.
    pub fn project_point(&self, p: &Vector3<f64>) -> Result<(f64, f64)> {
        let h = self.linear * p + self.offset;
        if !(h.z.abs() > 1e-12) {
            return Err(HandEyeError::PointAtInfinity { denominator: h.z });
        }
        Ok((h.x / h.z, h.y / h.z))
    }

    /// The line of sight of pixel `(u, v)` in the calibration frame, as the
    /// intersection of the two planes `(m₁ - u m₃)·P = u m₃₄ - m₁₄` and
    /// `(m₂ - v m₃)·P = v m₃₄ - m₂₄`.
    pub fn line_of_sight(&self, u: f64, v: f64) -> Result<Line3> {
        let row = |i: usize| Vector3::new(self.linear[(i, 0)], self.linear[(i, 1)], self.linear[(i, 2)]);
        let (m1, m2, m3) = (row(0), row(1), row(2));
        let n1 = m1 - m3 * u;
        let n2 = m2 - m3 * v;
        let d1 = u * self.offset.z - self.offset.x;
        let d2 = v * self.offset.z - self.offset.y;

        let dir = n1.cross(&n2);
        let dn = dir.norm();
        if !(dn > 1e-12 * n1.norm() * n2.norm()) {
            return Err(HandEyeError::DegenerateView);
        }
        // Closest point to the origin on both planes.
        let (a11, a12, a22) = (n1.dot(&n1), n1.dot(&n2), n2.dot(&n2));
        let det = a11 * a22 - a12 * a12;
        let point = n1 * ((d1 * a22 - d2 * a12) / det) + n2 * ((d2 * a11 - d1 * a12) / det);
        let mut direction = dir / dn;
        // Points along +direction lie in front of the camera.
        if m3.dot(&direction) < 0.0 {
            direction = -direction;
        }
        Ok(Line3 { point, direction })
    }
}

/// `(K, t_N)` with `K = N₁⁻¹N₂` projected onto the rotations and
/// `t_N = N₁⁻¹(n₂ - n₁)`.
pub fn reduced_motion(m1: &PerspectiveMatrix, m2: &PerspectiveMatrix) -> Result<RigidMotion> {
    let det = m1.linear.determinant();
    if !(det.abs() > MIN_PERSPECTIVE_DET) {
        return Err(HandEyeError::SingularN { det });
    }
    let inv = m1.linear.try_inverse().ok_or(HandEyeError::SingularN { det })?;
    let k = inv * m2.linear;
    let residual = orthonormality_residual(&k);
    if !(residual <= REDUCED_ROTATION_LIMIT) {
        return Err(HandEyeError::NotARotation { residual, det: k.determinant() });
    }
    let rotation = orthonormalize(&k)?;
    Ok(RigidMotion { rotation, translation: inv * (m2.offset - m1.offset) })
}

/// Nearest rotation in Frobenius norm (polar factor with `det = +1`).
pub fn orthonormalize(r: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let residual = orthonormality_residual(r);
    if !(residual <= ORTHONORMALIZE_LIMIT) {
        return Err(HandEyeError::NotARotation { residual, det: r.determinant() });
    }
    let svd = r.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut d = Matrix3::identity();
    if (u * vt).determinant() < 0.0 {
        d[(2, 2)] = -1.0;
    }
    Ok(u * d * vt)
}

/// Rotation angle in `[0, π]`.
pub fn rotation_angle(r: &Matrix3<f64>) -> f64 {
    let c = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let s = 0.5 * Vector3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]).norm();
    s.atan2(c)
}

/// Unit eigenvector for the unit eigenvalue, oriented as the vector part of
/// the canonical-sign quaternion (so the angle lies in `[0, π]`).
pub fn rotation_axis(r: &Matrix3<f64>) -> Result<Vector3<f64>> {
    let q = UnitQuaternion::from_rotation_matrix(r)?;
    let angle = q.angle();
    if !(angle >= MIN_AXIS_ANGLE) {
        return Err(HandEyeError::DegenerateRotation { angle, index: None });
    }
    Ok(q.quaternion().vector_part().normalize())
}

/// A 3-D line with unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line3 {
    pub point: Vector3<f64>,
    pub direction: Vector3<f64>,
}

impl Line3 {
    pub fn at(&self, s: f64) -> Vector3<f64> {
        self.point + self.direction * s
    }

    pub fn distance_to(&self, p: &Vector3<f64>) -> f64 {
        let d = p - self.point;
        (d - self.direction * d.dot(&self.direction)).norm()
    }
}

/// One motion of the hand-eye device in the unified form
/// `v' = R v`, `(K - I) t = R p - p'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionConstraint {
    /// `R_A` (classical) or `N` (perspective form).
    pub k: Matrix3<f64>,
    /// Hand rotation `R_B`.
    pub r_b: Matrix3<f64>,
    /// Unit axis of `K`.
    pub v_prime: Vector3<f64>,
    /// Unit axis of `R_B`.
    pub v: Vector3<f64>,
    /// `t_A` or `t_N`.
    pub p_prime: Vector3<f64>,
    /// `t_B`.
    pub p: Vector3<f64>,
}

impl MotionConstraint {
    /// Builds the constraint for one camera-side motion `(K, p')` and the
    /// matching hand motion `(R_B, p)`.
    pub fn from_motions(camera: &RigidMotion, hand: &RigidMotion) -> Result<Self> {
        Ok(Self {
            k: camera.rotation,
            r_b: hand.rotation,
            v_prime: rotation_axis(&camera.rotation)?,
            v: rotation_axis(&hand.rotation)?,
            p_prime: camera.translation,
            p: hand.translation,
        })
    }
}

fn check_lengths(camera: usize, hand: usize) -> Result<()> {
    if camera != hand {
        return Err(HandEyeError::LengthMismatch { camera, hand });
    }
    if camera < 2 {
        return Err(HandEyeError::TooFewPoses(camera));
    }
    Ok(())
}

/// Classical `AX = XB` constraints from consecutive position pairs `(i-1, i)`.
pub fn classical_constraints(
    camera_poses: &[RigidMotion],
    hand_poses: &[RigidMotion],
) -> Result<Vec<MotionConstraint>> {
    check_lengths(camera_poses.len(), hand_poses.len())?;
    (1..camera_poses.len())
        .map(|i| {
            let a = camera_motion(&camera_poses[i - 1], &camera_poses[i]);
            let b = hand_motion(&hand_poses[i - 1], &hand_poses[i]);
            MotionConstraint::from_motions(&a, &b).map_err(|e| e.at_index(i - 1))
        })
        .collect()
}

/// `MY = M'YB` constraints, every position paired against position 1.
pub fn new_formulation_constraints(
    perspective_matrices: &[PerspectiveMatrix],
    hand_poses: &[RigidMotion],
) -> Result<Vec<MotionConstraint>> {
    check_lengths(perspective_matrices.len(), hand_poses.len())?;
    let m1 = &perspective_matrices[0];
    (1..perspective_matrices.len())
        .map(|i| {
            let reduced = reduced_motion(m1, &perspective_matrices[i])?;
            let b = hand_motion(&hand_poses[0], &hand_poses[i]);
            MotionConstraint::from_motions(&reduced, &b).map_err(|e| e.at_index(i - 1))
        })
        .collect()
}


#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rot_z(deg: f64) -> Matrix3<f64> {
        UnitQuaternion::from_axis_angle(&Vector3::z(), deg.to_radians()).to_rotation_matrix()
    }

    fn close(a: &RigidMotion, b: &RigidMotion, tol: f64) -> bool {
        (a.rotation - b.rotation).norm() <= tol && (a.translation - b.translation).norm() <= tol
    }

    #[test]
    fn compose_and_invert() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let id = RigidMotion::identity();
        for _ in 0..100 {
            let a = random_motion(&mut rng, 500.0);
            assert!(close(&compose(&id, &a), &a, 0.0));
            assert!(close(&compose(&invert(&a), &a), &id, 1e-12 * 500.0));
            assert!(close(&compose(&a, &invert(&a)), &id, 1e-12 * 500.0));
        }
        assert_eq!(invert(&id), id);
    }

    #[test]
    fn camera_and_hand_motion() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let id = RigidMotion::identity();
        for _ in 0..100 {
            let (t1, t2) = (random_motion(&mut rng, 500.0), random_motion(&mut rng, 500.0));
            assert!(close(&camera_motion(&id, &t1), &t1, 1e-12));
            assert!(close(&camera_motion(&t1, &t1), &id, 1e-9));
            assert!(close(&camera_motion(&t1, &t2).compose(&t1), &t2, 1e-9));
            assert!(close(&hand_motion(&t1, &t1), &id, 1e-9));
            assert!(close(&hand_motion(&id, &t1), &invert(&t1), 1e-12));
            assert!(close(&t2.compose(&hand_motion(&t1, &t2)), &t1, 1e-9));
        }
    }

    #[test]
    fn homogeneous_bottom_row_is_validated() {
        let mut m = RigidMotion::identity().to_homogeneous();
        assert!(RigidMotion::from_homogeneous(&m).is_ok());
        m[(3, 0)] = 1e-6;
        assert!(matches!(RigidMotion::from_homogeneous(&m), Err(HandEyeError::BadHomogeneousRow(_))));
        let mut m = Matrix4::identity();
        m[(0, 0)] = 2.0;
        assert!(matches!(RigidMotion::from_homogeneous(&m), Err(HandEyeError::NotARotation { .. })));
    }

    #[test]
    fn reduced_motion_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let unit_camera = Intrinsics::new(1.0, 1.0, 0.0, 0.0).unwrap();
        let m = unit_camera.perspective(&random_motion(&mut rng, 300.0));
        let r = reduced_motion(&m, &m).unwrap();
        assert!(close(&r, &RigidMotion::identity(), 1e-9));

        let base = PerspectiveMatrix::new(Matrix3::identity(), Vector3::zeros()).unwrap();
        let pose = random_motion(&mut rng, 300.0);
        let m2 = PerspectiveMatrix { linear: pose.rotation, offset: pose.translation };
        assert!(close(&reduced_motion(&base, &m2).unwrap(), &pose, 1e-12));

        for _ in 0..50 {
            let c = Intrinsics::new(
                rng.random_range(500.0..1500.0),
                rng.random_range(500.0..1500.0),
                rng.random_range(200.0..400.0),
                rng.random_range(200.0..300.0),
            )
            .unwrap();
            let (a1, a2) = (random_motion(&mut rng, 800.0), random_motion(&mut rng, 800.0));
            let r = reduced_motion(&c.perspective(&a1), &c.perspective(&a2)).unwrap();
            let expected = a1.inverse().compose(&a2);
            assert!((r.rotation - expected.rotation).norm() <= 1e-9);
            assert!((r.translation - expected.translation).norm() <= 1e-9 * 800.0);
        }

        let singular = PerspectiveMatrix { linear: Matrix3::zeros(), offset: Vector3::zeros() };
        assert!(matches!(reduced_motion(&singular, &base), Err(HandEyeError::SingularN { .. })));
        let skewed = PerspectiveMatrix { linear: Matrix3::identity() * 2.0, offset: Vector3::zeros() };
        assert!(matches!(reduced_motion(&base, &skewed), Err(HandEyeError::NotARotation { .. })));
    }

    #[test]
    fn rotation_axis_examples() {
        let a = rotation_axis(&rot_z(30.0)).unwrap();
        assert!((a - Vector3::z()).norm() < 1e-12);
        let flip = Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0));
        assert!((rotation_axis(&flip).unwrap() - Vector3::x()).norm() < 1e-12);
        assert!(matches!(rotation_axis(&Matrix3::identity()), Err(HandEyeError::DegenerateRotation { .. })));
        assert!(rotation_axis(&rot_z(1e-5_f64.to_degrees() * 0.05)).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let r = random_rotation(&mut rng);
            let u = rotation_axis(&r).unwrap();
            assert!((r * u - u).norm() <= 1e-9);
            assert!((u.norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn rotation_angle_matches_quaternion() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let q = random_unit_quaternion(&mut rng);
            assert!((rotation_angle(&q.to_rotation_matrix()) - q.angle()).abs() < 1e-9);
        }
    }

    #[test]
    fn projection_examples() {
        let m = PerspectiveMatrix::new(Matrix3::identity(), Vector3::zeros()).unwrap();
        let (u, v) = m.project_point(&Vector3::new(1.0, 2.0, 2.0)).unwrap();
        assert_eq!((u, v), (0.5, 1.0));
        assert!(matches!(m.project_point(&Vector3::new(1.0, 1.0, 0.0)), Err(HandEyeError::PointAtInfinity { .. })));

        let c = Intrinsics::new(800.0, 820.0, 320.0, 240.0).unwrap();
        let pm = c.perspective(&RigidMotion::identity());
        let (u, v) = pm.project_point(&Vector3::new(0.0, 0.0, 700.0)).unwrap();
        assert!((u - 320.0).abs() < 1e-12 && (v - 240.0).abs() < 1e-12);
    }

    #[test]
    fn line_of_sight_examples() {
        let m = PerspectiveMatrix::new(Matrix3::identity(), Vector3::zeros()).unwrap();
        let l = m.line_of_sight(0.0, 0.0).unwrap();
        assert!(l.point.norm() < 1e-12);
        assert!((l.direction - Vector3::z()).norm() < 1e-12);
        let l = m.line_of_sight(1.0, 1.0).unwrap();
        assert!(l.distance_to(&Vector3::zeros()) < 1e-12);
        assert!((l.direction - Vector3::new(1.0, 1.0, 1.0).normalize()).norm() < 1e-12);
    }

    #[test]
    fn line_of_sight_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let c = Intrinsics::new(
                rng.random_range(500.0..1500.0),
                rng.random_range(500.0..1500.0),
                rng.random_range(200.0..400.0),
                rng.random_range(200.0..300.0),
            )
            .unwrap();
            let mut pose = random_motion(&mut rng, 100.0);
            pose.translation.z += 800.0;
            let m = c.perspective(&pose);
            let p = random_vector(&mut rng, 200.0);
            let (u, v) = m.project_point(&p).unwrap();
            let line = m.line_of_sight(u, v).unwrap();
            assert!(line.distance_to(&p) <= 1e-9 * 1000.0);
            for k in 0..100 {
                let s = -500.0 + 10.0 * k as f64;
                let q = line.at(s);
                let Ok((uu, vv)) = m.project_point(&q) else { continue };
                assert!((uu - u).abs() <= 1e-9 && (vv - v).abs() <= 1e-9, "residual {} {}", uu - u, vv - v);
            }
        }
    }

    #[test]
    fn orthonormalize_examples() {
        assert!((orthonormalize(&Matrix3::identity()).unwrap() - Matrix3::identity()).norm() < 1e-12);
        assert!((orthonormalize(&(Matrix3::identity() * 1.1)).unwrap() - Matrix3::identity()).norm() < 1e-12);
        assert!(orthonormalize(&(Matrix3::identity() * 2.0)).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let r = random_rotation(&mut rng);
            let e = random_vector(&mut rng, 1.0);
            let e = Matrix3::from_fn(|i, j| e[i] * (j as f64 - 1.0) + 0.3 * e[(i + j) % 3]);
            let e = e / e.norm();
            let p = orthonormalize(&(r + e * 0.01)).unwrap();
            assert!((p - r).norm() <= 0.03);
            assert!((p.determinant() - 1.0).abs() < 1e-12);
        }
    }

    fn synth_classical(seed: u64, n: usize) -> (RigidMotion, Vec<RigidMotion>, Vec<RigidMotion>, RigidMotion) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_motion(&mut rng, 150.0);
        let base_to_calib = random_motion(&mut rng, 1000.0);
        let cams: Vec<RigidMotion> = (0..n).map(|_| random_motion(&mut rng, 600.0)).collect();
        // A_i = X B_i⁻¹ T  =>  B_i = T A_i⁻¹ X
        let hands = cams.iter().map(|a| base_to_calib.compose(&a.inverse()).compose(&x)).collect();
        (x, cams, hands, base_to_calib)
    }

    #[test]
    fn classical_constraints_satisfy_ground_truth() {
        for seed in 0..20 {
            let (x, cams, hands, _) = synth_classical(seed, 4);
            let cs = classical_constraints(&cams, &hands).unwrap();
            assert_eq!(cs.len(), 3);
            for c in &cs {
                assert!((c.v_prime - x.rotation * c.v).norm() <= 1e-9);
                let lhs = (c.k - Matrix3::identity()) * x.translation;
                let rhs = x.rotation * c.p - c.p_prime;
                assert!((lhs - rhs).norm() <= 1e-9 * 1000.0);
                assert!((rotation_angle(&c.k) - rotation_angle(&c.r_b)).abs() <= 1e-9);
                assert!((x.rotation * c.r_b * x.rotation.transpose() - c.k).norm() <= 1e-9);
                assert!((c.v.norm() - 1.0).abs() <= 1e-9 && (c.v_prime.norm() - 1.0).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn classical_constraint_errors() {
        let (_, cams, hands, _) = synth_classical(99, 3);
        assert!(matches!(classical_constraints(&cams[..1], &hands[..1]), Err(HandEyeError::TooFewPoses(1))));
        assert!(matches!(classical_constraints(&cams, &hands[..2]), Err(HandEyeError::LengthMismatch { .. })));
        let same = vec![cams[0], cams[0], cams[1]];
        let hands = vec![hands[0], hands[0], hands[1]];
        assert!(matches!(
            classical_constraints(&same, &hands),
            Err(HandEyeError::DegenerateRotation { index: Some(0), .. })
        ));
    }

    #[test]
    fn new_formulation_equivalence() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for seed in 0..20 {
            let (x, cams, hands, _) = synth_classical(seed, 5);
            let c = Intrinsics::new(
                rng.random_range(500.0..1500.0),
                rng.random_range(500.0..1500.0),
                rng.random_range(200.0..400.0),
                rng.random_range(200.0..300.0),
            )
            .unwrap();
            let ms: Vec<_> = cams.iter().map(|a| c.perspective(a)).collect();
            let cs = new_formulation_constraints(&ms, &hands).unwrap();
            assert_eq!(cs.len(), 4);
            let y = cams[0].inverse().compose(&x);
            for c in &cs {
                assert!((c.v_prime - y.rotation * c.v).norm() <= 1e-9);
                let lhs = (c.k - Matrix3::identity()) * y.translation;
                let rhs = y.rotation * c.p - c.p_prime;
                assert!((lhs - rhs).norm() <= 1e-9 * 1000.0, "{}", (lhs - rhs).norm());
                assert!((rotation_angle(&c.k) - rotation_angle(&c.r_b)).abs() <= 1e-9);
                assert!((y.rotation * c.r_b * y.rotation.transpose() - c.k).norm() <= 1e-9);
            }
        }
    }

    #[test]
    fn new_formulation_errors() {
        let (_, cams, hands, _) = synth_classical(5, 3);
        let c = Intrinsics::new(800.0, 800.0, 320.0, 240.0).unwrap();
        let m = c.perspective(&cams[0]);
        assert!(matches!(
            new_formulation_constraints(&[m, m], &hands[..2]),
            Err(HandEyeError::DegenerateRotation { index: Some(0), .. })
        ));
        assert!(matches!(new_formulation_constraints(&[m], &hands[..1]), Err(HandEyeError::TooFewPoses(1))));
        let singular = PerspectiveMatrix { linear: Matrix3::zeros(), offset: Vector3::zeros() };
        assert!(matches!(
            new_formulation_constraints(&[singular, m], &hands[..2]),
            Err(HandEyeError::SingularN { .. })
        ));
    }
}
