use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Map};

use super::dataset::{self, rows, CameraData, Dataset};
use super::solution::{self, residual_csv, residual_rows, residual_table, SolutionDocument, SolutionEntry};
use super::{CalibrateArgs, CliError, GenerateArgs, ResidualsArgs, SimulateArgs};
use crate::geometry::Formulation;
use crate::simulate::noise::perturb_split;
use crate::simulate::{
    default_scenario_for, motion_count_sweep, noise_sweep, nominal_translation, rng, Distribution, NoiseModel,
    StabilityReport, Targets, COUNT_SWEEP_ROTATION_LEVEL, COUNT_SWEEP_TRANSLATION_LEVEL, DEFAULT_LEVELS,
};
use crate::solvers::Method;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

fn load_dataset(path: &Path) -> Result<Dataset, CliError> {
    let (d, warnings) = dataset::parse(&read(path)?)?;
    for w in warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(d)
}

fn methods(flag: &str) -> Result<Vec<Method>, CliError> {
    if flag == "all" {
        return Ok(Method::ALL.to_vec());
    }
    flag.split(',').map(|m| m.trim().parse().map_err(CliError::Flag)).collect()
}

pub fn calibrate(args: &CalibrateArgs) -> Result<(), CliError> {
    let methods = methods(&args.method)?;
    let d = load_dataset(&args.input)?;
    if let Some(f) = args.formulation {
        if f != d.formulation {
            let expected = match f {
                Formulation::Classical => "camera_extrinsics",
                Formulation::NewFormulation => "perspective_matrices",
            };
            return Err(CliError::Schema(format!(
                "{expected}: required by --formulation {f}, dataset is {}",
                d.formulation
            )));
        }
    }
    let constraints = d.constraints()?;
    let solutions = methods
        .iter()
        .map(|m| m.solve(&constraints).map(|s| SolutionEntry::from_solution(&s)))
        .collect::<Result<Vec<_>, _>>()?;
    let doc = SolutionDocument { formulation: d.formulation, solutions };
    let mut text = serde_json::to_string_pretty(&doc).expect("solution document serializes");
    text.push('\n');
    write_out(args.output.as_deref(), &text)
}

pub fn residuals(args: &ResidualsArgs) -> Result<(), CliError> {
    let d = load_dataset(&args.input)?;
    let doc = solution::parse(&read(&args.solution)?)?;
    if doc.formulation != d.formulation {
        return Err(CliError::Schema(format!(
            "formulation: solution is {}, dataset is {}",
            doc.formulation, d.formulation
        )));
    }
    let constraints = d.constraints()?;
    let rows = residual_rows(&constraints, &doc)?;
    let table = residual_table(d.formulation, &rows);
    let csv = residual_csv(&rows);
    match &args.csv {
        Some(p) => {
            write_out(None, &table)?;
            write_out(Some(p), &csv)
        }
        None => write_out(None, &format!("{table}\n{csv}")),
    }
}

fn parse_choice<T: std::str::FromStr<Err = String> + Copy>(
    flag: &Option<String>,
    all: &[T],
) -> Result<Vec<T>, CliError> {
    match flag.as_deref() {
        None | Some("all") => Ok(all.to_vec()),
        Some(s) => s.parse().map(|v| vec![v]).map_err(CliError::Flag),
    }
}

fn parse_range(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Flag(format!("--motions: expected MIN..MAX, got {s:?}"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a < 2 || b < a {
        return Err(CliError::Flag(format!("--motions: need 2 <= MIN <= MAX, got {s:?}")));
    }
    Ok((a, b))
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    if args.trials == 0 {
        return Err(CliError::Flag("--trials must be at least 1".into()));
    }
    let report = if let Some(range) = &args.motions {
        if args.levels.is_some() || args.distribution.is_some() || args.targets.is_some() {
            return Err(CliError::Flag(
                "--motions runs a Gaussian motion-count sweep; drop --levels, --distribution and --targets".into(),
            ));
        }
        let (lo, hi) = parse_range(range)?;
        let family = default_scenario_for(args.formulation, hi, args.seed);
        motion_count_sweep(
            &family,
            lo..=hi,
            args.rotation_level.unwrap_or(COUNT_SWEEP_ROTATION_LEVEL),
            args.translation_level.unwrap_or(COUNT_SWEEP_TRANSLATION_LEVEL),
            args.trials,
            args.seed,
            &Method::ALL,
        )?
    } else {
        if args.rotation_level.is_some() || args.translation_level.is_some() {
            return Err(CliError::Flag("--rotation-level and --translation-level need --motions".into()));
        }
        if args.n < 2 {
            return Err(CliError::Flag(format!("-n: need at least 2 motions, got {}", args.n)));
        }
        let levels = args.levels.clone().unwrap_or_else(|| DEFAULT_LEVELS.to_vec());
        if let Some(l) = levels.iter().find(|l| !(**l >= 0.0)) {
            return Err(CliError::Flag(format!("--levels: {l} is negative")));
        }
        let scenario = default_scenario_for(args.formulation, args.n, args.seed);
        let mut report =
            StabilityReport { rows: Vec::new(), trials: args.trials, t_norm: scenario.ground_truth.translation.norm() };
        for d in parse_choice(&args.distribution, &Distribution::ALL)? {
            for t in parse_choice(&args.targets, &Targets::ALL)? {
                let noise = NoiseModel::new(d, 0.0, t, args.seed);
                report.extend(noise_sweep(&scenario, &levels, &noise, args.trials, &Method::ALL)?);
            }
        }
        report
    };
    write_out(args.output.as_deref(), &report.to_csv())
}

pub fn generate(args: &GenerateArgs) -> Result<(), CliError> {
    if args.motions < 2 {
        return Err(CliError::Flag(format!("--motions: need at least 2, got {}", args.motions)));
    }
    if !(args.rotation_noise >= 0.0 && args.translation_noise >= 0.0) {
        return Err(CliError::Flag("noise ratios must be non-negative".into()));
    }
    let distribution: Distribution = args.noise_distribution.parse().map_err(CliError::Flag)?;
    let s = default_scenario_for(args.formulation, args.motions, args.seed);
    let mut camera = s.camera_poses.clone();
    let mut hand = s.hand_poses();
    if args.rotation_noise > 0.0 || args.translation_noise > 0.0 {
        let t_abs = args.translation_noise * nominal_translation(&camera, &hand);
        let mut stream = rng::trial_stream(args.seed, 0, 0);
        for (a, b) in camera.iter_mut().zip(hand.iter_mut()) {
            *a = perturb_split(a, distribution, args.rotation_noise, t_abs, &mut stream);
            *b = perturb_split(b, distribution, args.rotation_noise, t_abs, &mut stream);
        }
    }
    let mut metadata = Map::new();
    metadata.insert("generator".into(), json!("handeye generate"));
    metadata.insert("seed".into(), json!(args.seed));
    metadata.insert("ground_truth".into(), rows(&s.ground_truth.to_homogeneous()));
    metadata.insert(
        "noise".into(),
        json!({
            "distribution": distribution.as_str(),
            "rotation": args.rotation_noise,
            "translation": args.translation_noise,
        }),
    );
    let camera = match args.formulation {
        Formulation::Classical => CameraData::Extrinsics(camera),
        Formulation::NewFormulation => {
            let c = s.intrinsics;
            metadata.insert(
                "intrinsics".into(),
                json!({ "alpha_u": c.alpha_u, "alpha_v": c.alpha_v, "u0": c.u0, "v0": c.v0 }),
            );
            CameraData::Perspective(camera.iter().map(|a| c.perspective(a)).collect())
        }
    };
    let d = Dataset { formulation: args.formulation, hand_poses: hand, camera, metadata };
    let mut text = serde_json::to_string_pretty(&d.to_json()).expect("dataset serializes");
    text.push('\n');
    write_out(args.output.as_deref(), &text)
}
