//! Hand-eye solvers over a list of [`MotionConstraint`]s.
//!
//! Every solver works on the unified form, so the same code handles the
//! classical and the perspective-matrix formulations.

mod closed_form;
mod eigen;
mod nonlinear;
mod quadratic;
mod residuals;
mod translation;
mod tsai_lenz;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{HandEyeError, Result};
use crate::geometry::{MotionConstraint, RigidMotion};
use crate::quaternion::UnitQuaternion;

pub use closed_form::{closed_form_matrix, solve_closed_form};
pub use eigen::{eigen_sym4, SymmetricEigen4};
pub use nonlinear::{solve_nonlinear, NonlinearOptions};
pub use quadratic::{build_quadratic, direct_objective, ObjectiveWeights, QuadraticObjective};
pub use residuals::report_residuals;
pub use translation::solve_translation_ls;
pub use tsai_lenz::solve_tsai_lenz;

/// Condition-number ceiling shared by every linear solve.
pub const MAX_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    TsaiLenz,
    ClosedForm,
    #[serde(rename = "nonlinear")]
    NonLinear,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::TsaiLenz, Method::ClosedForm, Method::NonLinear];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::TsaiLenz => "tsai-lenz",
            Method::ClosedForm => "closed-form",
            Method::NonLinear => "nonlinear",
        }
    }

    /// Human-readable label used in residual tables.
    pub fn label(self) -> &'static str {
        match self {
            Method::TsaiLenz => "Tsai-Lenz",
            Method::ClosedForm => "Closed-form solution",
            Method::NonLinear => "Non-linear optimization",
        }
    }

    /// Runs this method with default settings.
    pub fn solve(self, constraints: &[MotionConstraint]) -> Result<HandEyeSolution> {
        match self {
            Method::TsaiLenz => solve_tsai_lenz(constraints),
            Method::ClosedForm => solve_closed_form(constraints),
            Method::NonLinear => solve_nonlinear(constraints, None, &NonlinearOptions::default()),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "tsai-lenz" => Ok(Method::TsaiLenz),
            "closed-form" => Ok(Method::ClosedForm),
            "nonlinear" => Ok(Method::NonLinear),
            other => Err(format!("unknown method {other:?}")),
        }
    }
}

/// An estimated hand-eye transform together with its residual metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct HandEyeSolution {
    pub rotation: UnitQuaternion,
    /// mm
    pub translation: Vector3<f64>,
    /// `Σ‖K_i R - R R_Bi‖²_F`
    pub rotation_residual: f64,
    /// `Σ‖(K_i - I)t - R p_i + p'_i‖² / Σ‖R p_i - p'_i‖²`
    pub translation_residual: f64,
    pub method: Method,
    /// Zero for the direct methods.
    pub iterations: usize,
}

impl HandEyeSolution {
    /// Assembles a solution and fills in both residual metrics.
    pub fn with_residuals(
        constraints: &[MotionConstraint],
        rotation: UnitQuaternion,
        translation: Vector3<f64>,
        method: Method,
        iterations: usize,
    ) -> Self {
        let mut s = HandEyeSolution {
            rotation,
            translation,
            rotation_residual: 0.0,
            translation_residual: 0.0,
            method,
            iterations,
        };
        let (rot, num, den) = residuals::metric_parts(constraints, &s);
        s.rotation_residual = rot;
        s.translation_residual = match (num, den) {
            (_, d) if d > 0.0 => num / d,
            (0.0, _) => 0.0,
            _ => f64::INFINITY,
        };
        s
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        self.rotation.to_rotation_matrix()
    }

    pub fn to_motion(&self) -> RigidMotion {
        RigidMotion::from_quaternion(self.rotation, self.translation)
    }
}

pub(crate) fn require_motions(constraints: &[MotionConstraint], needed: usize) -> Result<()> {
    if constraints.len() < needed {
        return Err(HandEyeError::TooFewMotions { needed, got: constraints.len() });
    }
    Ok(())
}

/// Least-squares solve of `a x = b` by Householder QR, rejecting condition
/// numbers above [`MAX_CONDITION`].
pub(crate) fn conditioned_least_squares(a: DMatrix<f64>, b: &DVector<f64>, what: &'static str) -> Result<DVector<f64>> {
    if a.nrows() < a.ncols() {
        return Err(HandEyeError::ill_conditioned(what, "underdetermined system"));
    }
    let qr = a.qr();
    let r = qr.r();
    let sv = r.singular_values();
    let (max, min) = (sv.max(), sv.min());
    let cond = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(cond <= MAX_CONDITION) {
        return Err(HandEyeError::ill_conditioned(what, format!("condition number {cond:.3e}")));
    }
    let qtb = qr.q().transpose() * b;
    r.solve_upper_triangular(&qtb).ok_or_else(|| HandEyeError::ill_conditioned(what, "singular triangular factor"))
}

/// Condition number of the stacked `[v_i]×` blocks: finite and small only if
/// at least two hand rotation axes are non-parallel.
pub(crate) fn check_axis_spread(constraints: &[MotionConstraint]) -> Result<()> {
    let mut a = DMatrix::zeros(3 * constraints.len(), 3);
    for (i, c) in constraints.iter().enumerate() {
        a.fixed_view_mut::<3, 3>(3 * i, 0).copy_from(&c.v.cross_matrix());
    }
    let sv = a.singular_values();
    let (max, min) = (sv.max(), sv.min());
    let cond = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(cond <= MAX_CONDITION) {
        return Err(HandEyeError::ill_conditioned(
            "rotation axes",
            format!("axes are parallel (condition number {cond:.3e})"),
        ));
    }
    Ok(())
}
