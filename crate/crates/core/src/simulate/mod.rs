//! Monte-Carlo stability analysis of the solvers.
//!
//! A [`Scenario`] fixes a nominal problem. Each trial perturbs every camera
//! and hand motion with independent noise, rebuilds the constraints, and runs
//! all requested methods on the same noisy data. Errors are reported as
//!
//! ```text
//! e_rot = sqrt(mean ‖R̃ - R‖²_F)        e_tr = sqrt(mean ‖t̃ - t‖²) / ‖t‖
//! ```
//!
//! Results are bit-identical for a given seed regardless of thread count.

pub(crate) mod noise;
pub mod rng;
mod scenario;

use std::fmt::{self, Write as _};
use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::error::{HandEyeError, Result};
use crate::geometry::RigidMotion;
use crate::solvers::{HandEyeSolution, Method};

pub use noise::{nominal_translation, perturb, Distribution, NoiseModel, Targets};
pub use scenario::{
    default_scenario, default_scenario_for, derive_hand_motions, Scenario, CAMERA_DISTANCE, MIN_AXIS_SEPARATION_DEG,
    MOTION_ANGLE_DEG, NOMINAL_T_NORM,
};

use noise::perturb_split;
use scenario::constraints_from;

/// Noise ratios of the default level sweep.
pub const DEFAULT_LEVELS: [f64; 6] = [0.01, 0.02, 0.03, 0.04, 0.05, 0.06];
/// Gaussian rotation ratio of the motion-count sweep.
pub const COUNT_SWEEP_ROTATION_LEVEL: f64 = 0.06;
/// Gaussian translation ratio of the motion-count sweep.
pub const COUNT_SWEEP_TRANSLATION_LEVEL: f64 = 0.02;

pub const CSV_HEADER: &str = "sweep_var,method,e_rot,e_tr,failed_trials";

/// `(e_rot, e_tr)` of a set of estimates against the truth.
pub fn error_stats(estimates: &[HandEyeSolution], truth: &RigidMotion) -> Result<(f64, f64)> {
    if estimates.is_empty() {
        return Err(HandEyeError::InvalidArgument("no estimates".into()));
    }
    let t_norm = truth.translation.norm();
    if t_norm == 0.0 {
        return Err(HandEyeError::ZeroTranslation);
    }
    let j = estimates.len() as f64;
    let rot: f64 = estimates.iter().map(|s| (s.rotation_matrix() - truth.rotation).norm_squared()).sum();
    let tr: f64 = estimates.iter().map(|s| (s.translation - truth.translation).norm_squared()).sum();
    Ok(((rot / j).sqrt(), (tr / j).sqrt() / t_norm))
}

/// The independent variable of one report row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepVar {
    Level(f64),
    MotionCount(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub distribution: Distribution,
    pub targets: Targets,
    pub var: SweepVar,
}

impl fmt::Display for SweepPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:", self.distribution, self.targets)?;
        match self.var {
            SweepVar::Level(l) => write!(f, "{l}"),
            SweepVar::MotionCount(n) => write!(f, "n={n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub point: SweepPoint,
    pub method: Method,
    /// NaN when every trial failed.
    pub e_rot: f64,
    pub e_tr: f64,
    pub failed_trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub rows: Vec<ReportRow>,
    pub trials: usize,
    /// `‖t‖` of the ground truth (mm).
    pub t_norm: f64,
}

impl StabilityReport {
    pub fn row(&self, point_matches: impl Fn(&SweepPoint) -> bool, method: Method) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.method == method && point_matches(&r.point))
    }

    pub fn extend(&mut self, other: StabilityReport) {
        self.rows.extend(other.rows);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            writeln!(out, "{},{},{:?},{:?},{}", r.point, r.method, r.e_rot, r.e_tr, r.failed_trials).unwrap();
        }
        out
    }
}

struct PointSpec {
    distribution: Distribution,
    rotation_level: f64,
    /// Ratio of the nominal translation.
    translation_level: f64,
}

/// Runs `trials` noisy trials of one scenario and reduces them per method.
fn run_point(
    scenario: &Scenario,
    spec: &PointSpec,
    seed: u64,
    point_index: usize,
    trials: usize,
    methods: &[Method],
) -> Result<Vec<(f64, f64, usize)>> {
    let camera = scenario.camera_motions()?;
    let hand = derive_hand_motions(scenario)?;
    let t_nominal = nominal_translation(&camera, &hand);
    let trans_abs = spec.translation_level * t_nominal;

    let outcomes: Vec<Vec<Option<HandEyeSolution>>> = (0..trials)
        .into_par_iter()
        .map(|j| {
            let mut rng = rng::trial_stream(seed, point_index, j);
            let mut noisy_camera = Vec::with_capacity(camera.len());
            let mut noisy_hand = Vec::with_capacity(hand.len());
            for (a, b) in camera.iter().zip(&hand) {
                noisy_camera.push(perturb_split(a, spec.distribution, spec.rotation_level, trans_abs, &mut rng));
                noisy_hand.push(perturb_split(b, spec.distribution, spec.rotation_level, trans_abs, &mut rng));
            }
            match constraints_from(&noisy_camera, &noisy_hand) {
                Ok(cs) => methods.iter().map(|m| m.solve(&cs).ok()).collect(),
                Err(_) => vec![None; methods.len()],
            }
        })
        .collect();

    let truth = scenario.ground_truth;
    Ok((0..methods.len())
        .map(|k| {
            let ok: Vec<HandEyeSolution> = outcomes.iter().filter_map(|o| o[k].clone()).collect();
            let failed = trials - ok.len();
            match error_stats(&ok, &truth) {
                Ok((r, t)) => (r, t, failed),
                Err(_) => (f64::NAN, f64::NAN, failed),
            }
        })
        .collect())
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(HandEyeError::InvalidArgument("trials must be at least 1".into()));
    }
    Ok(())
}

/// Errors versus noise level. Point `i` uses random streams `(noise.seed, i, j)`.
pub fn noise_sweep(
    scenario: &Scenario,
    levels: &[f64],
    noise: &NoiseModel,
    trials: usize,
    methods: &[Method],
) -> Result<StabilityReport> {
    check_trials(trials)?;
    if let Some(l) = levels.iter().find(|l| !(**l >= 0.0)) {
        return Err(HandEyeError::InvalidArgument(format!("noise level {l} is negative")));
    }
    let mut rows = Vec::with_capacity(levels.len() * methods.len());
    for (i, &level) in levels.iter().enumerate() {
        let spec = PointSpec {
            distribution: noise.distribution,
            rotation_level: level,
            translation_level: if noise.targets.includes_translation() { level } else { 0.0 },
        };
        let point =
            SweepPoint { distribution: noise.distribution, targets: noise.targets, var: SweepVar::Level(level) };
        let stats = run_point(scenario, &spec, noise.seed, i, trials, methods)?;
        for (&method, (e_rot, e_tr, failed_trials)) in methods.iter().zip(stats) {
            rows.push(ReportRow { point, method, e_rot, e_tr, failed_trials });
        }
    }
    Ok(StabilityReport { rows, trials, t_norm: scenario.ground_truth.translation.norm() })
}

/// Errors versus number of motions, using the first `n` motions of `family`
/// for each `n` in `n_range`, under Gaussian noise.
pub fn motion_count_sweep(
    family: &Scenario,
    n_range: RangeInclusive<usize>,
    rotation_level: f64,
    translation_level: f64,
    trials: usize,
    seed: u64,
    methods: &[Method],
) -> Result<StabilityReport> {
    check_trials(trials)?;
    if *n_range.start() < 2 || *n_range.end() > family.motion_count() {
        return Err(HandEyeError::InvalidArgument(format!(
            "motion range {}..={} outside 2..={}",
            n_range.start(),
            n_range.end(),
            family.motion_count()
        )));
    }
    if !(rotation_level >= 0.0 && translation_level >= 0.0) {
        return Err(HandEyeError::InvalidArgument("noise levels must be non-negative".into()));
    }
    let spec = PointSpec { distribution: Distribution::Gaussian, rotation_level, translation_level };
    let targets = if translation_level > 0.0 { Targets::RotationAndTranslation } else { Targets::RotationOnly };
    let mut rows = Vec::new();
    for (i, n) in n_range.enumerate() {
        let point = SweepPoint { distribution: Distribution::Gaussian, targets, var: SweepVar::MotionCount(n) };
        let stats = run_point(&family.truncated(n), &spec, seed, i, trials, methods)?;
        for (&method, (e_rot, e_tr, failed_trials)) in methods.iter().zip(stats) {
            rows.push(ReportRow { point, method, e_rot, e_tr, failed_trials });
        }
    }
    Ok(StabilityReport { rows, trials, t_norm: family.ground_truth.translation.norm() })
}

/// The full level grid: both distributions, both target sets, `levels`.
pub fn grid_sweep(
    scenario: &Scenario,
    levels: &[f64],
    trials: usize,
    seed: u64,
    methods: &[Method],
) -> Result<StabilityReport> {
    let mut report = StabilityReport { rows: Vec::new(), trials, t_norm: scenario.ground_truth.translation.norm() };
    for distribution in Distribution::ALL {
        for targets in Targets::ALL {
            let noise = NoiseModel::new(distribution, 0.0, targets, seed);
            report.extend(noise_sweep(scenario, levels, &noise, trials, methods)?);
        }
    }
    Ok(report)
}
