use thiserror::Error;

use crate::solvers::HandEyeSolution;

pub type Result<T> = std::result::Result<T, HandEyeError>;

#[derive(Debug, Clone, Error)]
pub enum HandEyeError {
    #[error("matrix is not a rotation (orthonormality residual {residual:.3e}, det {det:.6})")]
    NotARotation { residual: f64, det: f64 },

    #[error("left 3x3 block of the perspective matrix is singular (det {det:.3e})")]
    SingularN { det: f64 },

    #[error("rotation angle {angle:.3e} rad is too small to define an axis{}", fmt_index(.index))]
    DegenerateRotation { angle: f64, index: Option<usize> },

    #[error("point projects to infinity (denominator {denominator:.3e})")]
    PointAtInfinity { denominator: f64 },

    #[error("line-of-sight planes are parallel")]
    DegenerateView,

    #[error("need at least 2 poses, got {0}")]
    TooFewPoses(usize),

    #[error("pose list lengths differ: {camera} camera vs {hand} hand")]
    LengthMismatch { camera: usize, hand: usize },

    #[error("need at least {needed} motions, got {got}")]
    TooFewMotions { needed: usize, got: usize },

    #[error("{what} is ill-conditioned ({detail})")]
    IllConditioned { what: &'static str, detail: String },

    #[error("matrix is not symmetric (asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("Levenberg-Marquardt did not converge after {iterations} iterations (gradient norm {gradient_norm:.3e})")]
    NoConvergence { iterations: usize, gradient_norm: f64, best: Box<HandEyeSolution> },

    #[error("translation metric denominator is zero")]
    DivisionByZero,

    #[error("ground-truth translation has zero norm")]
    ZeroTranslation,

    #[error("invalid homogeneous matrix: bottom row {0:?}")]
    BadHomogeneousRow([f64; 4]),

    #[error("invalid intrinsics: alpha_u and alpha_v must be nonzero")]
    BadIntrinsics,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn fmt_index(index: &Option<usize>) -> String {
    match index {
        Some(i) => format!(" (constraint {i})"),
        None => String::new(),
    }
}

impl HandEyeError {
    /// Attach a constraint index to a degenerate-rotation error.
    pub fn at_index(self, i: usize) -> Self {
        match self {
            HandEyeError::DegenerateRotation { angle, .. } => {
                HandEyeError::DegenerateRotation { angle, index: Some(i) }
            }
            other => other,
        }
    }

    pub fn ill_conditioned(what: &'static str, detail: impl Into<String>) -> Self {
        HandEyeError::IllConditioned { what, detail: detail.into() }
    }
}
