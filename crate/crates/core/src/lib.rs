//! Hand-eye calibration toolkit.
//!
//! Two problem formulations are supported:
//!
//! - the classical `AX = XB`, built from camera extrinsics `A_i` and hand poses `B_i`;
//! - the perspective-matrix form `MY = M'YB`, built directly from 3×4 camera
//!   matrices `M_i` without decomposing them into intrinsics and extrinsics.
//!
//! Both reduce to the same list of [`MotionConstraint`]s, which feeds three
//! solvers: Tsai-Lenz (linear), a closed-form unit-quaternion eigen solution,
//! and a simultaneous rotation/translation Levenberg-Marquardt refinement.
//! The [`simulate`] module runs Monte-Carlo stability sweeps comparing them.
//!
//! Translations are in millimetres throughout.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod geometry;
pub mod quaternion;
pub mod simulate;
pub mod solvers;

pub use error::{HandEyeError, Result};
pub use geometry::{Formulation, Intrinsics, Line3, MotionConstraint, PerspectiveMatrix, RigidMotion};
pub use quaternion::{Quaternion, UnitQuaternion};
pub use solvers::{HandEyeSolution, Method};
