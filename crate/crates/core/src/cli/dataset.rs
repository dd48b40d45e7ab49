//! Dataset documents.
//!
//! ```json
//! {
//!   "formulation": "classical",
//!   "hand_poses": [ [[r00, r01, r02, tx], [..], [..], [0, 0, 0, 1]], ... ],
//!   "camera_extrinsics": [ ... 4x4 ... ],
//!   "metadata": { "ground_truth": [[..], [..], [..], [0, 0, 0, 1]] }
//! }
//! ```
//!
//! New-formulation files carry `"perspective_matrices"` (3x4, row-major)
//! instead of `"camera_extrinsics"`. Hand poses map the hand frame to the
//! robot base, extrinsics map the calibration frame to the camera; mm.

use nalgebra::{Matrix3x4, Matrix4};
use serde_json::{json, Map, Value};

use super::CliError;
use crate::geometry::{
    classical_constraints, new_formulation_constraints, Formulation, MotionConstraint, PerspectiveMatrix, RigidMotion,
};

const FIELDS: [&str; 5] = ["formulation", "hand_poses", "camera_extrinsics", "perspective_matrices", "metadata"];

#[derive(Debug, Clone, PartialEq)]
pub enum CameraData {
    Extrinsics(Vec<RigidMotion>),
    Perspective(Vec<PerspectiveMatrix>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub formulation: Formulation,
    pub hand_poses: Vec<RigidMotion>,
    pub camera: CameraData,
    pub metadata: Map<String, Value>,
}

impl Dataset {
    pub fn positions(&self) -> usize {
        self.hand_poses.len()
    }

    /// The unknown recorded under `metadata.ground_truth`, if any.
    pub fn ground_truth(&self) -> Result<Option<RigidMotion>, CliError> {
        match self.metadata.get("ground_truth") {
            None => Ok(None),
            Some(v) => {
                let m = matrix::<4>(v, "metadata.ground_truth")?;
                Ok(Some(rigid(&m, "metadata.ground_truth")?))
            }
        }
    }

    pub fn constraints(&self) -> crate::error::Result<Vec<MotionConstraint>> {
        match &self.camera {
            CameraData::Extrinsics(a) => classical_constraints(a, &self.hand_poses),
            CameraData::Perspective(m) => new_formulation_constraints(m, &self.hand_poses),
        }
    }

    pub fn to_json(&self) -> Value {
        let hand: Vec<Value> = self.hand_poses.iter().map(|b| rows(&b.to_homogeneous())).collect();
        let mut doc = Map::new();
        doc.insert("formulation".into(), json!(self.formulation.as_str()));
        doc.insert("hand_poses".into(), Value::Array(hand));
        match &self.camera {
            CameraData::Extrinsics(a) => {
                doc.insert("camera_extrinsics".into(), a.iter().map(|a| rows(&a.to_homogeneous())).collect());
            }
            CameraData::Perspective(m) => {
                doc.insert("perspective_matrices".into(), m.iter().map(|m| rows(&m.to_matrix())).collect());
            }
        }
        doc.insert("metadata".into(), Value::Object(self.metadata.clone()));
        Value::Object(doc)
    }
}

/// Row-major nested array.
pub fn rows<const R: usize, const C: usize, S>(
    m: &nalgebra::Matrix<f64, nalgebra::Const<R>, nalgebra::Const<C>, S>,
) -> Value
where
    S: nalgebra::storage::Storage<f64, nalgebra::Const<R>, nalgebra::Const<C>>,
{
    Value::Array((0..R).map(|i| Value::Array((0..C).map(|j| json!(m[(i, j)])).collect())).collect())
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

/// `R x 4` row-major matrix at `field`.
fn matrix<const R: usize>(v: &Value, field: &str) -> Result<[[f64; 4]; R], CliError> {
    let rows = v.as_array().ok_or_else(|| schema(format!("{field}: expected an array of {R} rows")))?;
    if rows.len() != R {
        return Err(schema(format!("{field}: expected {R} rows, got {}", rows.len())));
    }
    let mut out = [[0.0; 4]; R];
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .filter(|r| r.len() == 4)
            .ok_or_else(|| schema(format!("{field}: row {i} must have 4 numbers")))?;
        for (j, x) in row.iter().enumerate() {
            out[i][j] = x
                .as_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| schema(format!("{field}: entry ({i}, {j}) is not a finite number")))?;
        }
    }
    Ok(out)
}

fn rigid(m: &[[f64; 4]; 4], field: &str) -> Result<RigidMotion, CliError> {
    let h = Matrix4::from_fn(|i, j| m[i][j]);
    RigidMotion::from_homogeneous(&h).map_err(|e| schema(format!("{field}: {e}")))
}

fn list<'a>(doc: &'a Map<String, Value>, field: &str) -> Result<Option<&'a Vec<Value>>, CliError> {
    match doc.get(field) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Array(a)) => Ok(Some(a)),
        Some(_) => Err(schema(format!("{field}: expected an array of matrices"))),
    }
}

/// Parses and validates a dataset document. Returns the dataset plus any warnings.
pub fn parse(text: &str) -> Result<(Dataset, Vec<String>), CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::Parse(format!("dataset: {e}")))?;
    let doc = value.as_object().ok_or_else(|| schema("dataset: top level must be an object"))?;
    if let Some(k) = doc.keys().find(|k| !FIELDS.contains(&k.as_str())) {
        return Err(schema(format!("{k}: unknown field")));
    }
    let formulation: Formulation = doc
        .get("formulation")
        .and_then(Value::as_str)
        .ok_or_else(|| schema("formulation: missing or not a string"))?
        .parse()
        .map_err(|e: String| schema(format!("formulation: {e}")))?;

    let hand_raw = list(doc, "hand_poses")?.ok_or_else(|| schema("hand_poses: missing"))?;
    let hand_poses = hand_raw
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let field = format!("hand_poses[{i}]");
            rigid(&matrix::<4>(v, &field)?, &field)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let extrinsics = list(doc, "camera_extrinsics")?;
    let perspective = list(doc, "perspective_matrices")?;
    let camera = match (formulation, extrinsics, perspective) {
        (_, Some(_), Some(_)) => {
            return Err(schema("camera_extrinsics, perspective_matrices: exactly one may be present"));
        }
        (Formulation::Classical, Some(a), None) => CameraData::Extrinsics(
            a.iter()
                .enumerate()
                .map(|(i, v)| {
                    let field = format!("camera_extrinsics[{i}]");
                    rigid(&matrix::<4>(v, &field)?, &field)
                })
                .collect::<Result<_, _>>()?,
        ),
        (Formulation::NewFormulation, None, Some(m)) => CameraData::Perspective(
            m.iter()
                .enumerate()
                .map(|(i, v)| {
                    let field = format!("perspective_matrices[{i}]");
                    let raw = matrix::<3>(v, &field)?;
                    PerspectiveMatrix::from_matrix(&Matrix3x4::from_fn(|r, c| raw[r][c]))
                        .map_err(|e| schema(format!("{field}: {e}")))
                })
                .collect::<Result<_, _>>()?,
        ),
        (Formulation::Classical, _, _) => {
            return Err(schema("camera_extrinsics: required by the classical formulation"))
        }
        (Formulation::NewFormulation, _, _) => {
            return Err(schema("perspective_matrices: required by the new formulation"));
        }
    };

    let camera_len = match &camera {
        CameraData::Extrinsics(a) => a.len(),
        CameraData::Perspective(m) => m.len(),
    };
    if camera_len != hand_poses.len() {
        return Err(schema(format!("hand_poses: {} entries but {camera_len} camera entries", hand_poses.len())));
    }
    if hand_poses.len() < 2 {
        return Err(schema(format!("hand_poses: need at least 2 positions, got {}", hand_poses.len())));
    }
    let mut warnings = Vec::new();
    if hand_poses.len() == 2 {
        warnings.push("only 2 positions: a single motion does not determine the hand-eye transform".to_string());
    }
    let metadata = match doc.get("metadata") {
        None => Map::new(),
        Some(Value::Object(m)) => m.clone(),
        Some(_) => return Err(schema("metadata: expected an object")),
    };
    let dataset = Dataset { formulation, hand_poses, camera, metadata };
    dataset.ground_truth()?;
    Ok((dataset, warnings))
}
