use nalgebra::{Matrix4, Vector4};

use crate::error::{HandEyeError, Result};

/// Eigen-decomposition of a symmetric 4×4 matrix, eigenvalues ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen4 {
    pub eigenvalues: Vector4<f64>,
    /// Column `i` is the unit eigenvector for `eigenvalues[i]`.
    pub eigenvectors: Matrix4<f64>,
}

const MAX_SWEEPS: usize = 64;

/// Cyclic Jacobi eigen-decomposition.
pub fn eigen_sym4(m: &Matrix4<f64>) -> Result<SymmetricEigen4> {
    let asym = (m - m.transpose()).norm();
    if !(asym <= 1e-9) {
        return Err(HandEyeError::NotSymmetric(asym));
    }
    let mut a = (m + m.transpose()) * 0.5;
    let mut v = Matrix4::<f64>::identity();
    let scale = a.norm();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..4).flat_map(|p| ((p + 1)..4).map(move |q| (p, q))).map(|(p, q)| a[(p, q)] * a[(p, q)]).sum();
        if off.sqrt() <= f64::EPSILON * 1e-2 * scale || off == 0.0 {
            break;
        }
        for p in 0..3 {
            for q in (p + 1)..4 {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A <- Jᵀ A J with the rotation in the (p, q) plane.
                for k in 0..4 {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..4 {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..4 {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let eigenvalues = Vector4::from_fn(|i, _| a[(order[i], order[i])]);
    let mut eigenvectors = Matrix4::zeros();
    for (dst, &src) in order.iter().enumerate() {
        let col = v.column(src).normalize();
        eigenvectors.set_column(dst, &col);
    }
    Ok(SymmetricEigen4 { eigenvalues, eigenvectors })
}
