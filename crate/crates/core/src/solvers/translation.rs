use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use super::{conditioned_least_squares, require_motions};
use crate::error::Result;
use crate::geometry::MotionConstraint;
use crate::quaternion::UnitQuaternion;

/// Least-squares translation at fixed rotation: stacks `(K_i - I) t = R p_i - p'_i`.
pub fn solve_translation_ls(constraints: &[MotionConstraint], rotation: UnitQuaternion) -> Result<Vector3<f64>> {
    require_motions(constraints, 1)?;
    let r = rotation.to_rotation_matrix();
    let mut a = DMatrix::zeros(3 * constraints.len(), 3);
    let mut b = DVector::zeros(3 * constraints.len());
    for (i, c) in constraints.iter().enumerate() {
        a.fixed_view_mut::<3, 3>(3 * i, 0).copy_from(&(c.k - Matrix3::identity()));
        b.fixed_view_mut::<3, 1>(3 * i, 0).copy_from(&(r * c.p - c.p_prime));
    }
    let t = conditioned_least_squares(a, &b, "translation system")?;
    Ok(Vector3::new(t[0], t[1], t[2]))
}

#[cfg(test)]
mod tests {
    use super::super::test_support::synthetic;
    use super::*;
    use crate::error::HandEyeError;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn recovers_truth_at_true_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for n in 2..=9 {
            let (truth, cs) = synthetic(&mut rng, n);
            let t = solve_translation_ls(&cs, truth.quaternion()).unwrap();
            assert!((t - truth.translation).norm() <= 1e-9 * truth.translation.norm());
        }
    }

    #[test]
    fn degenerate_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let (truth, mut cs) = synthetic(&mut rng, 3);
        let q = truth.quaternion();
        assert!(matches!(solve_translation_ls(&cs[..1], q), Err(HandEyeError::IllConditioned { .. })));
        for c in &mut cs {
            c.k = Matrix3::identity();
        }
        assert!(matches!(solve_translation_ls(&cs, q), Err(HandEyeError::IllConditioned { .. })));
    }
}
