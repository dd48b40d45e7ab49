use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::rng::{gaussian, uniform01, unit_vector};
use crate::error::{HandEyeError, Result};
use crate::geometry::{
    camera_motion, reduced_motion, Formulation, Intrinsics, MotionConstraint, PerspectiveMatrix, RigidMotion,
};
use crate::quaternion::{Quaternion, UnitQuaternion};

/// Norm of the generated hand-eye translation (mm).
pub const NOMINAL_T_NORM: f64 = 157.0;
/// Motion rotation angles are drawn from this range (degrees).
pub const MOTION_ANGLE_DEG: (f64, f64) = (20.0, 90.0);
/// Minimum angle between any two motion axes (degrees).
pub const MIN_AXIS_SEPARATION_DEG: f64 = 15.0;
/// Camera-to-grid distance range (mm).
pub const CAMERA_DISTANCE: (f64, f64) = (300.0, 800.0);
/// Half-angle of the cone around the optical axis holding the grid (degrees).
const VIEW_CONE_DEG: f64 = 25.0;

/// A nominal calibration problem with known ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub formulation: Formulation,
    /// `X` for the classical formulation, `Y` for the new one.
    pub ground_truth: RigidMotion,
    /// Camera extrinsics `A_1 … A_{n+1}`.
    pub camera_poses: Vec<RigidMotion>,
    /// Used to form `M_i = C A_i` for the new formulation.
    pub intrinsics: Intrinsics,
    /// Calibration frame to robot base; only affects absolute hand poses.
    pub grid_pose: RigidMotion,
}

impl Scenario {
    /// Number of motions `n`.
    pub fn motion_count(&self) -> usize {
        self.camera_poses.len().saturating_sub(1)
    }

    /// The hand-to-camera transform `X`.
    pub fn hand_to_camera(&self) -> RigidMotion {
        match self.formulation {
            Formulation::Classical => self.ground_truth,
            Formulation::NewFormulation => self.camera_poses[0].compose(&self.ground_truth),
        }
    }

    pub fn perspective_matrices(&self) -> Vec<PerspectiveMatrix> {
        self.camera_poses.iter().map(|a| self.intrinsics.perspective(a)).collect()
    }

    /// Absolute hand poses `B_i = G A_i⁻¹ X`, `G` being [`Scenario::grid_pose`].
    pub fn hand_poses(&self) -> Vec<RigidMotion> {
        let x = self.hand_to_camera();
        self.camera_poses.iter().map(|a| self.grid_pose.compose(&a.inverse()).compose(&x)).collect()
    }

    /// Camera-side motions entering the constraints: `A_{i+1} A_i⁻¹`, or
    /// `N_1⁻¹ N_i` recovered from the perspective matrices.
    pub fn camera_motions(&self) -> Result<Vec<RigidMotion>> {
        match self.formulation {
            Formulation::Classical => Ok(self.camera_poses.windows(2).map(|w| camera_motion(&w[0], &w[1])).collect()),
            Formulation::NewFormulation => {
                let m = self.perspective_matrices();
                m[1..].iter().map(|mi| reduced_motion(&m[0], mi)).collect()
            }
        }
    }

    /// Noise-free constraints.
    pub fn constraints(&self) -> Result<Vec<MotionConstraint>> {
        let hand = derive_hand_motions(self)?;
        constraints_from(&self.camera_motions()?, &hand)
    }

    /// The same problem restricted to its first `n` motions.
    pub fn truncated(&self, n: usize) -> Scenario {
        let mut s = self.clone();
        s.camera_poses.truncate(n + 1);
        s
    }
}

pub(crate) fn constraints_from(camera: &[RigidMotion], hand: &[RigidMotion]) -> Result<Vec<MotionConstraint>> {
    camera
        .iter()
        .zip(hand)
        .enumerate()
        .map(|(i, (a, b))| MotionConstraint::from_motions(a, b).map_err(|e| e.at_index(i)))
        .collect()
}

/// Hand motions consistent with the ground truth: `X⁻¹ A X` for each camera
/// motion `A` (with `Y` in place of `X` for the new formulation).
pub fn derive_hand_motions(scenario: &Scenario) -> Result<Vec<RigidMotion>> {
    if scenario.camera_poses.len() < 2 {
        return Err(HandEyeError::TooFewPoses(scenario.camera_poses.len()));
    }
    let g = scenario.ground_truth;
    let g_inv = g.inverse();
    let motions = scenario.camera_motions()?;
    let hand: Vec<RigidMotion> = motions.iter().map(|a| g_inv.compose(a).compose(&g)).collect();
    // Surface degenerate motions with their index.
    constraints_from(&motions, &hand)?;
    Ok(hand)
}

/// Uniformly distributed rotation.
fn random_rotation<R: Rng>(rng: &mut R) -> Matrix3<f64> {
    loop {
        let q = Quaternion::new(gaussian(rng), gaussian(rng), gaussian(rng), gaussian(rng));
        if let Ok(u) = UnitQuaternion::normalize(q) {
            return u.to_rotation_matrix();
        }
    }
}

fn in_range<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * uniform01(rng)
}

/// Rotation increments with angles in [`MOTION_ANGLE_DEG`] and pairwise
/// axis separation of at least [`MIN_AXIS_SEPARATION_DEG`].
fn motion_rotations<R: Rng>(rng: &mut R, n: usize) -> Vec<Matrix3<f64>> {
    let cos_min = MIN_AXIS_SEPARATION_DEG.to_radians().cos();
    let mut axes: Vec<Vector3<f64>> = Vec::with_capacity(n);
    while axes.len() < n {
        let a = unit_vector(rng);
        if axes.iter().all(|b| a.dot(b).abs() < cos_min) {
            axes.push(a);
        }
    }
    let (lo, hi) = MOTION_ANGLE_DEG;
    axes.iter()
        .map(|a| {
            let angle = in_range(rng, (lo.to_radians(), hi.to_radians()));
            UnitQuaternion::from_axis_angle(a, angle).to_rotation_matrix()
        })
        .collect()
}

/// Grid origin in camera coordinates: distance in [`CAMERA_DISTANCE`], in a
/// cone around the optical axis.
fn grid_position<R: Rng>(rng: &mut R) -> Vector3<f64> {
    let cone = VIEW_CONE_DEG.to_radians();
    let cos_t = 1.0 - (1.0 - cone.cos()) * uniform01(rng);
    let sin_t = (1.0 - cos_t * cos_t).sqrt();
    let phi = std::f64::consts::TAU * uniform01(rng);
    let dir = Vector3::new(sin_t * phi.cos(), sin_t * phi.sin(), cos_t);
    dir * in_range(rng, CAMERA_DISTANCE)
}

/// Default classical scenario with `n` motions.
pub fn default_scenario(n: usize, seed: u64) -> Scenario {
    default_scenario_for(Formulation::Classical, n, seed)
}

/// Random nominal problem with `n ≥ 2` motions and `‖t‖ = 157` mm.
///
/// Classical poses chain the increments (`R_{A,i+1} = R_Δi R_{A,i}`) so that
/// consecutive motions have the sampled angles and axes. New-formulation
/// poses apply them to the first pose (`R_{A,i} = R_{A,1} R_Δi`).
pub fn default_scenario_for(formulation: Formulation, n: usize, seed: u64) -> Scenario {
    assert!(n >= 2, "a scenario needs at least 2 motions");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth_rotation = random_rotation(&mut rng);
    let ground_truth = RigidMotion { rotation: truth_rotation, translation: unit_vector(&mut rng) * NOMINAL_T_NORM };

    let r1 = random_rotation(&mut rng);
    let deltas = motion_rotations(&mut rng, n);
    let mut rotations = vec![r1];
    for d in &deltas {
        let r = match formulation {
            Formulation::Classical => d * rotations.last().unwrap(),
            Formulation::NewFormulation => r1 * d,
        };
        rotations.push(r);
    }
    let camera_poses =
        rotations.into_iter().map(|r| RigidMotion { rotation: r, translation: grid_position(&mut rng) }).collect();

    let grid_pose = RigidMotion {
        rotation: random_rotation(&mut rng),
        translation: Vector3::new(in_range(&mut rng, (-400.0, 400.0)), in_range(&mut rng, (-400.0, 400.0)), 0.0),
    };
    Scenario {
        formulation,
        ground_truth,
        camera_poses,
        intrinsics: Intrinsics::new(800.0, 780.0, 256.0, 256.0).expect("valid intrinsics"),
        grid_pose,
    }
}
