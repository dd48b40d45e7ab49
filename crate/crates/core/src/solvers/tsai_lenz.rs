use nalgebra::{DMatrix, DVector, Vector3};

use super::{conditioned_least_squares, require_motions, solve_translation_ls, HandEyeSolution, Method};
use crate::error::Result;
use crate::geometry::MotionConstraint;
use crate::quaternion::UnitQuaternion;

/// Tsai-Lenz linear solution.
///
/// Each motion gives the rank-2 system `n × (v' + v) = v' - v` in the scaled
/// axis `n = tan(θ/2) u`; all blocks are stacked and solved by least squares,
/// then `t` follows from [`solve_translation_ls`].
pub fn solve_tsai_lenz(constraints: &[MotionConstraint]) -> Result<HandEyeSolution> {
    require_motions(constraints, 2)?;
    let mut a = DMatrix::zeros(3 * constraints.len(), 3);
    let mut b = DVector::zeros(3 * constraints.len());
    for (i, c) in constraints.iter().enumerate() {
        let sum = c.v_prime + c.v;
        let diff = c.v_prime - c.v;
        // n × s = -[s]× n
        a.fixed_view_mut::<3, 3>(3 * i, 0).copy_from(&(-sum.cross_matrix()));
        b.fixed_view_mut::<3, 1>(3 * i, 0).copy_from(&diff);
    }
    let sol = conditioned_least_squares(a, &b, "Tsai-Lenz axis system")?;
    let n = Vector3::new(sol[0], sol[1], sol[2]);
    let norm = n.norm();
    let rotation = if norm <= 1e-12 {
        UnitQuaternion::identity()
    } else {
        UnitQuaternion::from_axis_angle(&(n / norm), 2.0 * norm.atan())
    };
    let translation = solve_translation_ls(constraints, rotation)?;
    Ok(HandEyeSolution::with_residuals(constraints, rotation, translation, Method::TsaiLenz, 0))
}
