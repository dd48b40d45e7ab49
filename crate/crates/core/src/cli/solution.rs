//! Solution documents and residual tables.

use std::fmt::Write as _;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::geometry::{Formulation, MotionConstraint};
use crate::quaternion::{Quaternion, UnitQuaternion};
use crate::solvers::{report_residuals, HandEyeSolution, Method};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionEntry {
    pub method: Method,
    pub quaternion: Quaternion,
    /// Row-major.
    pub rotation: [[f64; 3]; 3],
    /// mm
    pub translation: [f64; 3],
    /// Unit axis; zero for the identity rotation.
    pub axis: [f64; 3],
    pub angle_deg: f64,
    pub rotation_residual: f64,
    pub translation_residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionDocument {
    pub formulation: Formulation,
    pub solutions: Vec<SolutionEntry>,
}

impl SolutionEntry {
    pub fn from_solution(s: &HandEyeSolution) -> Self {
        let r = s.rotation_matrix();
        let v = s.rotation.quaternion().vector_part();
        let axis = if v.norm() > 0.0 { v.normalize() } else { Vector3::zeros() };
        SolutionEntry {
            method: s.method,
            quaternion: s.rotation.quaternion(),
            rotation: [0, 1, 2].map(|i| [0, 1, 2].map(|j| r[(i, j)])),
            translation: [s.translation.x, s.translation.y, s.translation.z],
            axis: [axis.x, axis.y, axis.z],
            angle_deg: s.rotation.angle().to_degrees(),
            rotation_residual: s.rotation_residual,
            translation_residual: s.translation_residual,
            iterations: s.iterations,
        }
    }

    /// Rebuilds the solver output; the quaternion is authoritative.
    pub fn to_solution(&self, index: usize) -> Result<HandEyeSolution, CliError> {
        let rotation = UnitQuaternion::normalize(self.quaternion)
            .map_err(|e| CliError::Schema(format!("solutions[{index}].quaternion: {e}")))?;
        let stored = Matrix3::from_fn(|i, j| self.rotation[i][j]);
        if (stored - rotation.to_rotation_matrix()).norm() > 1e-6 {
            return Err(CliError::Schema(format!("solutions[{index}].rotation: disagrees with the quaternion")));
        }
        Ok(HandEyeSolution {
            rotation,
            translation: Vector3::from(self.translation),
            rotation_residual: self.rotation_residual,
            translation_residual: self.translation_residual,
            method: self.method,
            iterations: self.iterations,
        })
    }
}

pub fn parse(text: &str) -> Result<SolutionDocument, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse(format!("solution: {e}")))
}

/// Four significant digits; magnitudes below 1e-12 print as `0.000`.
pub fn sig4(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let a = x.abs();
    if a < 1e-12 {
        return "0.000".into();
    }
    if !(1e-4..1e6).contains(&a) {
        return format!("{x:.3e}");
    }
    let decimals = (3 - a.log10().floor() as i32).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding can carry into a new digit (9.9996 -> 10.000).
    let digits = s.chars().filter(char::is_ascii_digit).skip_while(|&c| c == '0').count();
    if digits > 4 && decimals > 0 {
        format!("{x:.prec$}", prec = decimals - 1)
    } else {
        s
    }
}

pub struct ResidualRow {
    pub method: Method,
    pub rotation: f64,
    pub translation: f64,
}

pub fn residual_rows(constraints: &[MotionConstraint], doc: &SolutionDocument) -> Result<Vec<ResidualRow>, CliError> {
    doc.solutions
        .iter()
        .enumerate()
        .map(|(i, entry)| {
            let s = entry.to_solution(i)?;
            let (rotation, translation) = report_residuals(constraints, &s)?;
            Ok(ResidualRow { method: s.method, rotation, translation })
        })
        .collect()
}

pub fn residual_table(formulation: Formulation, rows: &[ResidualRow]) -> String {
    let (head, rot, tr) = match formulation {
        Formulation::Classical => {
            ("AX=XB", "sum |R_A R_X - R_X R_B|^2", "sum |(R_A - I)t_X - R_X t_B + t_A|^2 / sum |R_X t_B - t_A|^2")
        }
        Formulation::NewFormulation => {
            ("MY=M'YB", "sum |N R_Y - R_Y R_B|^2", "sum |(N - I)t_Y - R_Y t_B + t_N|^2 / sum |R_Y t_B - t_N|^2")
        }
    };
    let mut out = String::new();
    writeln!(out, "{head:<24} | {rot:>28} | {tr}").unwrap();
    writeln!(out, "{}", "-".repeat(24 + 3 + 28 + 3 + tr.len())).unwrap();
    for r in rows {
        writeln!(out, "{:<24} | {:>28} | {}", r.method.label(), sig4(r.rotation), sig4(r.translation)).unwrap();
    }
    out
}

pub fn residual_csv(rows: &[ResidualRow]) -> String {
    let mut out = String::from("method,rotation_residual,translation_residual\n");
    for r in rows {
        writeln!(out, "{},{:?},{:?}", r.method, r.rotation, r.translation).unwrap();
    }
    out
}
