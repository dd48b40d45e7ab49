use nalgebra::Matrix4;

use super::{eigen_sym4, require_motions, solve_translation_ls, HandEyeSolution, Method};
use crate::error::{HandEyeError, Result};
use crate::geometry::MotionConstraint;
use crate::quaternion::{q_matrix, w_matrix, Quaternion, UnitQuaternion};

/// Smallest accepted gap between the two lowest eigenvalues of `𝒜`.
pub const MIN_EIGEN_GAP: f64 = 1e-9;

/// `𝒜 = Σ (Q(v'_i) - W(v_i))ᵀ (Q(v'_i) - W(v_i))`, so that
/// `qᵀ𝒜q = Σ‖v'_i - q v_i q̄‖²` for unit `q`.
pub fn closed_form_matrix(constraints: &[MotionConstraint]) -> Matrix4<f64> {
    constraints.iter().fold(Matrix4::zeros(), |acc, c| {
        let d = q_matrix(Quaternion::pure(&c.v_prime)) - w_matrix(Quaternion::pure(&c.v));
        acc + d.transpose() * d
    })
}

/// Rotation from the eigenvector of `𝒜` with the smallest eigenvalue, then
/// the least-squares translation.
pub fn solve_closed_form(constraints: &[MotionConstraint]) -> Result<HandEyeSolution> {
    require_motions(constraints, 1)?;
    let a = closed_form_matrix(constraints);
    let eig = eigen_sym4(&a)?;
    let gap = eig.eigenvalues[1] - eig.eigenvalues[0];
    if !(gap >= MIN_EIGEN_GAP) {
        return Err(HandEyeError::ill_conditioned(
            "closed-form rotation",
            format!("two smallest eigenvalues differ by {gap:.3e}"),
        ));
    }
    let rotation = UnitQuaternion::normalize(Quaternion::from_vector4(&eig.eigenvectors.column(0).into_owned()))?;
    let translation = solve_translation_ls(constraints, rotation)?;
    Ok(HandEyeSolution::with_residuals(constraints, rotation, translation, Method::ClosedForm, 0))
}
