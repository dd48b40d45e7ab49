use nalgebra::Matrix3;

use super::HandEyeSolution;
use crate::error::{HandEyeError, Result};
use crate::geometry::MotionConstraint;

/// `(Σ‖K R - R R_B‖²_F, Σ‖(K - I)t - R p + p'‖², Σ‖R p - p'‖²)`
pub(crate) fn metric_parts(constraints: &[MotionConstraint], solution: &HandEyeSolution) -> (f64, f64, f64) {
    let r = solution.rotation_matrix();
    let t = solution.translation;
    constraints.iter().fold((0.0, 0.0, 0.0), |(rot, num, den), c| {
        let rot_err = (c.k * r - r * c.r_b).norm_squared();
        let rp = r * c.p;
        let tr_err = ((c.k - Matrix3::identity()) * t - rp + c.p_prime).norm_squared();
        (rot + rot_err, num + tr_err, den + (rp - c.p_prime).norm_squared())
    })
}

/// The two residual-table metrics: the absolute rotation error
/// `Σ‖K R - R R_B‖²` and the relative translation error
/// `Σ‖(K - I)t - R p + p'‖² / Σ‖R p - p'‖²`.
///
/// `(K, p', p)` are read as `(R_A, t_A, t_B)` or `(N, t_N, t_B)` depending on
/// the formulation the constraints came from.
pub fn report_residuals(constraints: &[MotionConstraint], solution: &HandEyeSolution) -> Result<(f64, f64)> {
    let (rot, num, den) = metric_parts(constraints, solution);
    if den == 0.0 {
        return Err(HandEyeError::DivisionByZero);
    }
    Ok((rot, num / den))
}
