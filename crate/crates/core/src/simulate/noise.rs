use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rng::{centered_uniform, gaussian};
use crate::geometry::RigidMotion;
use crate::quaternion::UnitQuaternion;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    Uniform,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Targets {
    RotationOnly,
    RotationAndTranslation,
}

impl Distribution {
    pub const ALL: [Distribution; 2] = [Distribution::Uniform, Distribution::Gaussian];

    pub fn as_str(self) -> &'static str {
        match self {
            Distribution::Uniform => "uniform",
            Distribution::Gaussian => "gaussian",
        }
    }

    /// One sample whose width is set by `level`: uniform on
    /// `[-level/2, level/2]`, or Gaussian with `σ = level/2`.
    pub fn sample<R: Rng>(self, level: f64, rng: &mut R) -> f64 {
        match self {
            Distribution::Uniform => level * centered_uniform(rng),
            Distribution::Gaussian => 0.5 * level * gaussian(rng),
        }
    }
}

impl Targets {
    pub const ALL: [Targets; 2] = [Targets::RotationOnly, Targets::RotationAndTranslation];

    pub fn as_str(self) -> &'static str {
        match self {
            Targets::RotationOnly => "rotation",
            Targets::RotationAndTranslation => "rotation+translation",
        }
    }

    pub fn includes_translation(self) -> bool {
        self == Targets::RotationAndTranslation
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Targets {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Distribution {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "uniform" => Ok(Distribution::Uniform),
            "gaussian" => Ok(Distribution::Gaussian),
            other => Err(format!("unknown distribution {other:?}")),
        }
    }
}

impl FromStr for Targets {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rotation" => Ok(Targets::RotationOnly),
            "rotation+translation" => Ok(Targets::RotationAndTranslation),
            other => Err(format!("unknown noise targets {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub distribution: Distribution,
    /// Noise ratio: the full width for uniform noise, `2σ` for Gaussian.
    pub level: f64,
    pub targets: Targets,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(distribution: Distribution, level: f64, targets: Targets, seed: u64) -> Self {
        assert!(level >= 0.0, "noise level must be non-negative");
        NoiseModel { distribution, level, targets, seed }
    }

    pub fn with_level(self, level: f64) -> Self {
        NoiseModel::new(self.distribution, level, self.targets, self.seed)
    }
}

/// Mean translation norm over the camera and hand motions of one problem.
pub fn nominal_translation(camera: &[RigidMotion], hand: &[RigidMotion]) -> f64 {
    let total: f64 = camera.iter().chain(hand).map(|m| m.translation.norm()).sum();
    total / (camera.len() + hand.len()) as f64
}

/// Perturbs the rotation axis (and the translation, if targeted) of `motion`.
///
/// Each axis component gets a sample of `noise.level`; the axis is then
/// renormalized and the angle kept. Translation components get samples of
/// `noise.level * t_nominal`.
pub fn perturb<R: Rng>(motion: &RigidMotion, noise: &NoiseModel, t_nominal: f64, rng: &mut R) -> RigidMotion {
    let translation_level = if noise.targets.includes_translation() { noise.level } else { 0.0 };
    perturb_split(motion, noise.distribution, noise.level, translation_level * t_nominal, rng)
}

/// [`perturb`] with separate rotation ratio and absolute translation level (mm).
pub(crate) fn perturb_split<R: Rng>(
    motion: &RigidMotion,
    distribution: Distribution,
    rotation_level: f64,
    translation_level: f64,
    rng: &mut R,
) -> RigidMotion {
    let mut out = *motion;
    if rotation_level > 0.0 {
        let q = motion.quaternion();
        let angle = q.angle();
        let axis = q.quaternion().vector_part();
        if axis.norm() > 0.0 {
            let noise = Vector3::from_fn(|_, _| distribution.sample(rotation_level, rng));
            let noisy = axis.normalize() + noise;
            if noisy.norm() > 0.0 {
                out.rotation = UnitQuaternion::from_axis_angle(&noisy.normalize(), angle).to_rotation_matrix();
            }
        }
    }
    if translation_level > 0.0 {
        out.translation += Vector3::from_fn(|_, _| distribution.sample(translation_level, rng));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::rng::trial_stream;
    use super::*;
    use crate::geometry::rotation_axis;
    use crate::geometry::test_support::random_motion;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn motion() -> RigidMotion {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        random_motion(&mut rng, 300.0)
    }

    #[test]
    fn zero_level_is_identity() {
        let m = motion();
        let mut rng = trial_stream(0, 0, 0);
        for d in Distribution::ALL {
            let noise = NoiseModel::new(d, 0.0, Targets::RotationAndTranslation, 0);
            assert_eq!(perturb(&m, &noise, 250.0, &mut rng), m);
        }
    }

    #[test]
    fn rotation_only_keeps_translation() {
        let m = motion();
        let mut rng = trial_stream(0, 0, 0);
        let noise = NoiseModel::new(Distribution::Gaussian, 0.06, Targets::RotationOnly, 0);
        let p = perturb(&m, &noise, 250.0, &mut rng);
        assert_eq!(p.translation, m.translation);
        assert!((p.rotation - m.rotation).norm() > 0.0);
        assert!(RigidMotion::new(p.rotation, p.translation).is_ok());
    }

    #[test]
    fn angle_is_preserved() {
        let m = motion();
        let mut rng = trial_stream(5, 0, 0);
        let noise = NoiseModel::new(Distribution::Uniform, 0.06, Targets::RotationAndTranslation, 0);
        for _ in 0..100 {
            let p = perturb(&m, &noise, 250.0, &mut rng);
            assert!((p.quaternion().angle() - m.quaternion().angle()).abs() < 1e-12);
            let tilt = rotation_axis(&p.rotation).unwrap().dot(&rotation_axis(&m.rotation).unwrap()).acos();
            assert!(tilt < 0.1);
        }
    }

    #[test]
    fn gaussian_axis_noise_matches_level() {
        let mut rng = trial_stream(11, 0, 0);
        let n = 100_000;
        let s: Vec<f64> = (0..n).map(|_| Distribution::Gaussian.sample(0.06, &mut rng)).collect();
        let rms = (s.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt();
        assert!((rms / 0.03 - 1.0).abs() < 0.02, "rms {rms}");
    }

    #[test]
    fn uniform_noise_matches_level() {
        let mut rng = trial_stream(12, 0, 0);
        let n = 100_000;
        let s: Vec<f64> = (0..n).map(|_| Distribution::Uniform.sample(0.04, &mut rng)).collect();
        assert!(s.iter().all(|x| x.abs() <= 0.02));
        let rms = (s.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt();
        assert!((rms / (0.04 / 12f64.sqrt()) - 1.0).abs() < 0.02, "rms {rms}");
    }

    #[test]
    fn translation_noise_scales_with_nominal() {
        let m = motion();
        let noise = NoiseModel::new(Distribution::Gaussian, 0.02, Targets::RotationAndTranslation, 0);
        let mut rng = trial_stream(13, 0, 0);
        let n = 30_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let d = perturb(&m, &noise, 500.0, &mut rng).translation - m.translation;
            sum += d.norm_squared();
        }
        let rms = (sum / (3 * n) as f64).sqrt();
        assert!((rms / 5.0 - 1.0).abs() < 0.02, "rms {rms}");
    }

    #[test]
    fn nominal_translation_is_mean_norm() {
        let a = RigidMotion { translation: Vector3::new(3.0, 4.0, 0.0), ..RigidMotion::identity() };
        let b = RigidMotion { translation: Vector3::new(0.0, 0.0, 15.0), ..RigidMotion::identity() };
        assert_eq!(nominal_translation(&[a], &[b]), 10.0);
    }
}
