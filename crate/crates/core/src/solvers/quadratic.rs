//! The simultaneous rotation/translation objective in two algebraic forms:
//! a direct sum of squared residuals and the constant-size quadratic
//! expansion whose number of terms does not grow with the motion count.

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};

use crate::geometry::MotionConstraint;
use crate::quaternion::{q_matrix, rotation_part, w_matrix, Quaternion};

/// `λ₁`, `λ₂` and the unit-norm penalty `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveWeights {
    pub rotation: f64,
    pub translation: f64,
    pub penalty: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self { rotation: 1.0, translation: 1.0, penalty: 2e6 }
    }
}

/// `λ₁ Σ‖v'_i - q v_i q̄‖² + λ₂ Σ‖q p_i q̄ - (K_i - I)t - p'_i‖² + λ(1 - qᵀq)²`
pub fn direct_objective(
    constraints: &[MotionConstraint],
    q: Quaternion,
    t: &Vector3<f64>,
    weights: &ObjectiveWeights,
) -> f64 {
    let s = rotation_part(q);
    let (f1, f2) = constraints.iter().fold((0.0, 0.0), |(f1, f2), c| {
        let rot = (c.v_prime - s * c.v).norm_squared();
        let tr = (s * c.p - (c.k - Matrix3::identity()) * t - c.p_prime).norm_squared();
        (f1 + rot, f2 + tr)
    });
    let pen = 1.0 - q.norm2();
    weights.rotation * f1 + weights.translation * f2 + weights.penalty * pen * pen
}

/// Coefficients of
/// `qᵀ(λ₁𝒜 + λ₂ℬ)q + λ₂(tᵀ𝒞t + δt + ε Q(q)ᵀW(q) t) + λ(1 - qᵀq)²`.
///
/// The `ε` term uses `R_B` in place of `K` (via `Rᵀ K = R_B Rᵀ`), so this
/// form equals [`direct_objective`] for unit `q` whenever the rotation
/// encoded by `q` satisfies `K_i R = R R_Bi` for every motion. On data that
/// violates the rotation equation the two forms differ in that term only.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObjective {
    /// `λ₁𝒜 + λ₂ℬ`
    pub ab: Matrix4<f64>,
    /// `𝒞 = Σ (K_i - I)ᵀ(K_i - I)`
    pub c: Matrix3<f64>,
    /// `δ = Σ 2 p'_iᵀ(K_i - I)`, stored as a column.
    pub delta: Vector3<f64>,
    /// `ε = Σ -2 p_iᵀ(R_Bi - I)`, embedded as a 4-vector with zero real part.
    pub epsilon: Vector4<f64>,
    pub weights: ObjectiveWeights,
}

pub fn build_quadratic(constraints: &[MotionConstraint], weights: ObjectiveWeights) -> QuadraticObjective {
    let id3 = Matrix3::identity();
    let mut a = Matrix4::zeros();
    let mut b = Matrix4::zeros();
    let mut c = Matrix3::zeros();
    let mut delta = Vector3::zeros();
    let mut eps = Vector3::zeros();
    for m in constraints {
        let d = q_matrix(Quaternion::pure(&m.v_prime)) - w_matrix(Quaternion::pure(&m.v));
        a += d.transpose() * d;

        let wp = w_matrix(Quaternion::pure(&m.p));
        let qp = q_matrix(Quaternion::pure(&m.p_prime));
        b += Matrix4::identity() * (m.p.norm_squared() + m.p_prime.norm_squared())
            - wp.transpose() * qp
            - qp.transpose() * wp;

        let km = m.k - id3;
        c += m.k.transpose() * m.k - m.k - m.k.transpose() + id3;
        delta += (m.p_prime.transpose() * km).transpose() * 2.0;
        eps += (m.p.transpose() * (m.r_b - id3)).transpose() * -2.0;
        debug_assert!((km.transpose() * km - (m.k.transpose() * m.k - m.k - m.k.transpose() + id3)).norm() < 1e-9);
    }
    let ab = a * weights.rotation + b * weights.translation;
    // Symmetrize round-off.
    let ab = (ab + ab.transpose()) * 0.5;
    QuadraticObjective { ab, c, delta, epsilon: Vector4::new(0.0, eps.x, eps.y, eps.z), weights }
}

impl QuadraticObjective {
    pub fn evaluate(&self, q: Quaternion, t: &Vector3<f64>) -> f64 {
        let qv = q.to_vector4();
        let t4 = Quaternion::pure(t).to_vector4();
        let cross = self.epsilon.dot(&(q_matrix(q).transpose() * w_matrix(q) * t4));
        let f2_linear = t.dot(&(self.c * t)) + self.delta.dot(t) + cross;
        let pen = 1.0 - q.norm2();
        qv.dot(&(self.ab * qv)) + self.weights.translation * f2_linear + self.weights.penalty * pen * pen
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::synthetic;
    use super::*;
    use crate::geometry::test_support::{random_rotation, random_unit_quaternion, random_vector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trivial_constraints_give_zero_coefficients() {
        let m = MotionConstraint {
            k: Matrix3::identity(),
            r_b: Matrix3::identity(),
            v_prime: Vector3::x(),
            v: Vector3::x(),
            p_prime: Vector3::zeros(),
            p: Vector3::zeros(),
        };
        let obj = build_quadratic(&[m, m], ObjectiveWeights { rotation: 0.0, ..Default::default() });
        assert_eq!(obj.ab, Matrix4::zeros());
        assert_eq!(obj.c, Matrix3::zeros());
        assert_eq!(obj.delta, Vector3::zeros());
        assert_eq!(obj.epsilon, Vector4::zeros());
    }

    #[test]
    fn vanishes_at_ground_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for n in 2..=6 {
            let (truth, cs) = synthetic(&mut rng, n);
            let obj = build_quadratic(&cs, ObjectiveWeights::default());
            let q = truth.quaternion().quaternion();
            let v = obj.evaluate(q, &truth.translation);
            assert!(v.abs() <= 1e-9 * (1.0 + obj.ab.norm()), "{v}");
            assert!(direct_objective(&cs, q, &truth.translation, &obj.weights) <= 1e-9);
        }
    }

    #[test]
    fn matches_direct_sum_on_rotation_consistent_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        for _ in 0..100 {
            let q = random_unit_quaternion(&mut rng);
            let r = q.to_rotation_matrix();
            let n = rng.random_range(1..8);
            let cs: Vec<MotionConstraint> = (0..n)
                .map(|_| {
                    let rb = random_rotation(&mut rng);
                    MotionConstraint {
                        k: r * rb * r.transpose(),
                        r_b: rb,
                        v_prime: random_vector(&mut rng, 1.0).normalize(),
                        v: random_vector(&mut rng, 1.0).normalize(),
                        p_prime: random_vector(&mut rng, 500.0),
                        p: random_vector(&mut rng, 500.0),
                    }
                })
                .collect();
            let t = random_vector(&mut rng, 300.0);
            let w = ObjectiveWeights {
                rotation: rng.random_range(0.1..3.0),
                translation: rng.random_range(0.1..3.0),
                penalty: 2e6,
            };
            let obj = build_quadratic(&cs, w);
            let quad = obj.evaluate(q.quaternion(), &t);
            let direct = direct_objective(&cs, q.quaternion(), &t, &w);
            assert!((quad - direct).abs() <= 1e-9 * direct, "{quad} vs {direct}");
            assert!(quad >= -1e-9);
        }
    }

    #[test]
    fn ab_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        let (_, cs) = synthetic(&mut rng, 5);
        let obj = build_quadratic(&cs, ObjectiveWeights::default());
        assert!((obj.ab - obj.ab.transpose()).norm() <= 1e-12);
    }
}
