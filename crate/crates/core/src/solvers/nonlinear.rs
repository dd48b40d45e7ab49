//! Simultaneous rotation/translation refinement by Levenberg-Marquardt.
//!
//! Seven parameters `(w, x, y, z, t_x, t_y, t_z)`; the quaternion is left
//! free and kept near unit norm by the penalty residual `√λ (1 - qᵀq)`.

use nalgebra::{DMatrix, DVector, Matrix3, Matrix3x4, SMatrix, SVector, Vector3};

use super::{
    check_axis_spread, direct_objective, require_motions, solve_closed_form, HandEyeSolution, Method, ObjectiveWeights,
};
use crate::error::{HandEyeError, Result};
use crate::geometry::MotionConstraint;
use crate::quaternion::{rotation_part, Quaternion, UnitQuaternion};

type Params = SVector<f64, 7>;
type Normal = SMatrix<f64, 7, 7>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearOptions {
    pub weights: ObjectiveWeights,
    pub max_iterations: usize,
    /// Stop when the step norm falls below this.
    pub step_tolerance: f64,
    /// Stop when an accepted step decreases the objective by less than this fraction.
    pub relative_decrease_tolerance: f64,
    /// Gradient norm above which hitting `max_iterations` is an error.
    pub gradient_tolerance: f64,
}

impl Default for NonlinearOptions {
    fn default() -> Self {
        Self {
            weights: ObjectiveWeights::default(),
            max_iterations: 200,
            step_tolerance: 1e-12,
            relative_decrease_tolerance: 1e-14,
            gradient_tolerance: 1e-6,
        }
    }
}

/// Jacobian of `q v q̄` (unnormalized `q`) with respect to `(w, x, y, z)`.
fn rotated_jacobian(q: Quaternion, v: &Vector3<f64>) -> Matrix3x4<f64> {
    let u = q.vector_part();
    let dw = v * (2.0 * q.w) + u.cross(v) * 2.0;
    let du = -(v * u.transpose()) * 2.0 + u * v.transpose() * 2.0 + Matrix3::identity() * (2.0 * u.dot(v))
        - v.cross_matrix() * (2.0 * q.w);
    let mut j = Matrix3x4::zeros();
    j.set_column(0, &dw);
    j.fixed_view_mut::<3, 3>(0, 1).copy_from(&du);
    j
}

struct Problem<'a> {
    constraints: &'a [MotionConstraint],
    weights: ObjectiveWeights,
}

impl Problem<'_> {
    fn split(x: &Params) -> (Quaternion, Vector3<f64>) {
        (Quaternion::new(x[0], x[1], x[2], x[3]), Vector3::new(x[4], x[5], x[6]))
    }

    fn len(&self) -> usize {
        6 * self.constraints.len() + 1
    }

    fn residuals(&self, x: &Params) -> DVector<f64> {
        let (q, t) = Self::split(x);
        let s = rotation_part(q);
        let (s1, s2) = (self.weights.rotation.sqrt(), self.weights.translation.sqrt());
        let mut r = DVector::zeros(self.len());
        for (i, c) in self.constraints.iter().enumerate() {
            let rot = (c.v_prime - s * c.v) * s1;
            let tr = (s * c.p - (c.k - Matrix3::identity()) * t - c.p_prime) * s2;
            r.fixed_view_mut::<3, 1>(6 * i, 0).copy_from(&rot);
            r.fixed_view_mut::<3, 1>(6 * i + 3, 0).copy_from(&tr);
        }
        r[self.len() - 1] = self.weights.penalty.sqrt() * (1.0 - q.norm2());
        r
    }

    fn jacobian(&self, x: &Params) -> DMatrix<f64> {
        let (q, _) = Self::split(x);
        let (s1, s2) = (self.weights.rotation.sqrt(), self.weights.translation.sqrt());
        let mut j = DMatrix::zeros(self.len(), 7);
        for (i, c) in self.constraints.iter().enumerate() {
            j.fixed_view_mut::<3, 4>(6 * i, 0).copy_from(&(rotated_jacobian(q, &c.v) * -s1));
            j.fixed_view_mut::<3, 4>(6 * i + 3, 0).copy_from(&(rotated_jacobian(q, &c.p) * s2));
            j.fixed_view_mut::<3, 3>(6 * i + 3, 4).copy_from(&((c.k - Matrix3::identity()) * -s2));
        }
        let sp = self.weights.penalty.sqrt();
        let row = self.len() - 1;
        for k in 0..4 {
            j[(row, k)] = -2.0 * sp * x[k];
        }
        j
    }

    fn normal_equations(&self, x: &Params) -> (Normal, Params, f64) {
        let r = self.residuals(x);
        let j = self.jacobian(x);
        let jtj: Normal = (j.transpose() * &j).fixed_view::<7, 7>(0, 0).into();
        let jtr: Params = (j.transpose() * &r).fixed_view::<7, 1>(0, 0).into();
        (jtj, jtr, r.norm_squared())
    }
}

/// Minimizes the penalized simultaneous objective by Levenberg-Marquardt.
///
/// Starts from `init`, or from [`solve_closed_form`] when `None` (falling
/// back to the identity if the closed form is ill-conditioned). The returned
/// objective never exceeds its value at the starting point.
pub fn solve_nonlinear(
    constraints: &[MotionConstraint],
    init: Option<&HandEyeSolution>,
    options: &NonlinearOptions,
) -> Result<HandEyeSolution> {
    require_motions(constraints, 2)?;
    check_axis_spread(constraints)?;

    let (q0, t0) = match init {
        Some(s) => (s.rotation, s.translation),
        None => match solve_closed_form(constraints) {
            Ok(s) => (s.rotation, s.translation),
            Err(HandEyeError::IllConditioned { .. }) => (UnitQuaternion::identity(), Vector3::zeros()),
            Err(e) => return Err(e),
        },
    };
    let problem = Problem { constraints, weights: options.weights };
    let q0v = q0.quaternion();
    let mut x = Params::from_column_slice(&[q0v.w, q0v.x, q0v.y, q0v.z, t0.x, t0.y, t0.z]);

    let (mut jtj, mut jtr, mut cost) = problem.normal_equations(&x);
    let start_cost = cost;
    let mut mu = 1e-3 * jtj.diagonal().max();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < options.max_iterations {
        if jtr.norm() == 0.0 || cost == 0.0 {
            converged = true;
            break;
        }
        iterations += 1;
        let damped = jtj + Normal::identity() * mu;
        let Some(chol) = damped.cholesky() else {
            mu *= 10.0;
            continue;
        };
        let step = chol.solve(&(-jtr));
        if step.norm() < options.step_tolerance {
            converged = true;
            break;
        }
        let candidate = x + step;
        let new_cost = problem.residuals(&candidate).norm_squared();
        if new_cost < cost {
            let decrease = (cost - new_cost) / cost;
            x = candidate;
            (jtj, jtr, cost) = problem.normal_equations(&x);
            mu /= 10.0;
            if decrease < options.relative_decrease_tolerance {
                converged = true;
                break;
            }
        } else {
            mu *= 10.0;
        }
    }

    let (q, t) = Problem::split(&x);
    let mut rotation = UnitQuaternion::normalize(q)?;
    let mut translation = t;
    let start = direct_objective(constraints, q0v, &t0, &options.weights);
    let end = direct_objective(constraints, rotation.quaternion(), &translation, &options.weights);
    debug_assert!(cost <= start_cost);
    if !(end <= start) {
        rotation = q0;
        translation = t0;
    }
    let solution = HandEyeSolution::with_residuals(constraints, rotation, translation, Method::NonLinear, iterations);

    let gradient_norm = 2.0 * jtr.norm();
    if !converged && gradient_norm > options.gradient_tolerance {
        return Err(HandEyeError::NoConvergence { iterations, gradient_norm, best: Box::new(solution) });
    }
    Ok(solution)
}
