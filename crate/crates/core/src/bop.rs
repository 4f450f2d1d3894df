//! BOP annotation and result files.
//!
//! `scene_gt.json` maps image ids to lists of `{cam_R_m2c, cam_t_m2c, obj_id}`
//! entries, `scene_gt_info.json` carries per-instance `visib_fract`, and result
//! files are CSV rows `scene_id,im_id,obj_id,score,R,t,time` with `R` and `t`
//! as space-separated numbers. Parsers take text so they can be driven
//! directly by fuzzers; thin wrappers handle paths.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::codec::{canonic_matrix, CodecError};
use crate::rotation::{RotationError, RotationMatrix, BOUNDARY_TOL, ORTHONORMAL_TOL};
use crate::symmetry::{Dataset, ObjectCatalog};

pub const RESULTS_HEADER: &str = "scene_id,im_id,obj_id,score,R,t,time";

#[derive(Debug, Error)]
pub enum BopError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("image '{image_id}': {message}")]
    Entry { image_id: String, message: String },
    #[error("image '{image_id}': {field} has {got} values, expected {expected}")]
    Arity {
        image_id: String,
        field: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("image '{image_id}': cam_R_m2c is not a rotation: {source}")]
    Rotation { image_id: String, source: RotationError },
    #[error("image '{image_id}' instance {instance}: visib_fract {value} outside [0, 1]")]
    VisibilityRange {
        image_id: String,
        instance: usize,
        value: f64,
    },
    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("object {object_id} is not cataloged for {dataset}")]
    UnknownObject { dataset: Dataset, object_id: u32 },
    #[error("scene {scene_id} image {image_id} object {object_id}: {source}")]
    Codec {
        scene_id: u32,
        image_id: u32,
        object_id: u32,
        source: CodecError,
    },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

/// One annotated or predicted object instance.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseRecord {
    pub scene_id: u32,
    pub image_id: u32,
    pub object_id: u32,
    /// Position within the image's annotation list, or the row index of a prediction.
    pub instance: usize,
    pub rotation: RotationMatrix,
    /// Millimeters.
    pub translation: [f64; 3],
    pub score: Option<f64>,
    pub visib_fract: Option<f64>,
    pub time_s: Option<f64>,
}

/// `(image_id, instance)` to visible fraction; `None` marks an entry without the field.
pub type VisibilityMap = BTreeMap<(u32, usize), Option<f64>>;

#[derive(Deserialize)]
struct GtEntry {
    #[serde(rename = "cam_R_m2c")]
    rotation: Vec<f64>,
    #[serde(rename = "cam_t_m2c")]
    translation: Vec<f64>,
    obj_id: u32,
}

fn image_key(key: &str) -> Result<u32, BopError> {
    key.trim().parse().map_err(|_| BopError::Entry {
        image_id: key.to_string(),
        message: "image key is not a non-negative integer".to_string(),
    })
}

fn image_list<'a>(key: &str, value: &'a Value) -> Result<&'a Vec<Value>, BopError> {
    value.as_array().ok_or_else(|| BopError::Entry {
        image_id: key.to_string(),
        message: "expected an array of instances".to_string(),
    })
}

/// Parses a `scene_gt.json` document. Records are ordered by numeric image id,
/// then by position within the image.
pub fn parse_scene_gt(text: &str, scene_id: u32) -> Result<Vec<PoseRecord>, BopError> {
    let root: Map<String, Value> = serde_json::from_str(text)?;
    let mut images: Vec<(u32, &String, &Value)> = Vec::with_capacity(root.len());
    for (key, value) in &root {
        images.push((image_key(key)?, key, value));
    }
    images.sort_by_key(|(id, _, _)| *id);

    let mut records = Vec::new();
    for (image_id, key, value) in images {
        for (instance, raw) in image_list(key, value)?.iter().enumerate() {
            let entry = GtEntry::deserialize(raw).map_err(|e| BopError::Entry {
                image_id: key.clone(),
                message: format!("instance {instance}: {e}"),
            })?;
            records.push(gt_record(key, scene_id, image_id, instance, entry)?);
        }
    }
    Ok(records)
}

fn gt_record(
    key: &str,
    scene_id: u32,
    image_id: u32,
    instance: usize,
    entry: GtEntry,
) -> Result<PoseRecord, BopError> {
    for (field, values, expected) in [
        ("cam_R_m2c", &entry.rotation, 9),
        ("cam_t_m2c", &entry.translation, 3),
    ] {
        if values.len() != expected {
            return Err(BopError::Arity {
                image_id: key.to_string(),
                field,
                got: values.len(),
                expected,
            });
        }
    }
    let rotation =
        RotationMatrix::from_row_major(&entry.rotation, BOUNDARY_TOL).map_err(|source| BopError::Rotation {
            image_id: key.to_string(),
            source,
        })?;
    Ok(PoseRecord {
        scene_id,
        image_id,
        object_id: entry.obj_id,
        instance,
        rotation,
        translation: [entry.translation[0], entry.translation[1], entry.translation[2]],
        score: None,
        visib_fract: None,
        time_s: None,
    })
}

fn json_number(v: f64) -> String {
    serde_json::to_string(&v).expect("finite float serializes")
}

fn json_list(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| json_number(*v)).collect();
    format!("[{}]", parts.join(", "))
}

/// Serializes records as `scene_gt.json`. Images are ordered numerically,
/// instances by their index; floats use the shortest round-trip form.
pub fn format_scene_gt(records: &[PoseRecord]) -> String {
    let mut images: BTreeMap<u32, Vec<&PoseRecord>> = BTreeMap::new();
    for r in records {
        images.entry(r.image_id).or_default().push(r);
    }
    let mut out = String::from("{");
    for (n, (image_id, mut list)) in images.into_iter().enumerate() {
        list.sort_by_key(|r| r.instance);
        out.push_str(if n == 0 { "\n" } else { ",\n" });
        let _ = write!(out, "  \"{image_id}\": [");
        for (i, r) in list.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let _ = write!(
                out,
                "{{\"cam_R_m2c\": {}, \"cam_t_m2c\": {}, \"obj_id\": {}}}",
                json_list(&r.rotation.to_row_major()),
                json_list(&r.translation),
                r.object_id
            );
        }
        out.push(']');
    }
    out.push_str("\n}\n");
    out
}

/// Parses `scene_gt_info.json` visibility fractions.
pub fn parse_scene_gt_info(text: &str) -> Result<VisibilityMap, BopError> {
    let root: Map<String, Value> = serde_json::from_str(text)?;
    let mut out = VisibilityMap::new();
    for (key, value) in &root {
        let image_id = image_key(key)?;
        for (instance, entry) in image_list(key, value)?.iter().enumerate() {
            let obj = entry.as_object().ok_or_else(|| BopError::Entry {
                image_id: key.clone(),
                message: format!("instance {instance}: expected an object"),
            })?;
            let visib = match obj.get("visib_fract") {
                None | Some(Value::Null) => None,
                Some(v) => {
                    let value = v.as_f64().ok_or_else(|| BopError::Entry {
                        image_id: key.clone(),
                        message: format!("instance {instance}: visib_fract is not a number"),
                    })?;
                    if !(0.0..=1.0).contains(&value) {
                        return Err(BopError::VisibilityRange {
                            image_id: key.clone(),
                            instance,
                            value,
                        });
                    }
                    Some(value)
                }
            };
            out.insert((image_id, instance), visib);
        }
    }
    Ok(out)
}

/// Copies visibility fractions onto ground-truth records by `(image, instance)`.
pub fn attach_visibility(records: &mut [PoseRecord], visibility: &VisibilityMap) {
    for r in records {
        r.visib_fract = visibility.get(&(r.image_id, r.instance)).copied().flatten();
    }
}

fn csv_error(line: usize, message: impl Into<String>) -> BopError {
    BopError::Csv {
        line,
        message: message.into(),
    }
}

fn parse_floats(field: &str, name: &str, expected: usize, line: usize) -> Result<Vec<f64>, BopError> {
    let values = field
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| csv_error(line, format!("{name}: {e}")))?;
    if values.len() != expected {
        return Err(csv_error(
            line,
            format!("{name} has {} values, expected {expected}", values.len()),
        ));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(csv_error(line, format!("{name} contains a non-finite value")));
    }
    Ok(values)
}

fn parse_scalar<T: std::str::FromStr>(field: &str, name: &str, line: usize) -> Result<T, BopError>
where
    T::Err: std::fmt::Display,
{
    field
        .trim()
        .parse()
        .map_err(|e| csv_error(line, format!("{name}: {e}")))
}

/// Parses a BOP results CSV. The header line is optional; blank lines are skipped.
pub fn parse_results_csv(text: &str) -> Result<Vec<PoseRecord>, BopError> {
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let row = raw.trim_end_matches('\r');
        if row.trim().is_empty() || (records.is_empty() && row.trim_start().starts_with("scene_id")) {
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 7 {
            return Err(csv_error(line, format!("expected 7 fields, found {}", fields.len())));
        }
        let r = parse_floats(fields[4], "R", 9, line)?;
        let t = parse_floats(fields[5], "t", 3, line)?;
        let rotation = RotationMatrix::from_row_major(&r, BOUNDARY_TOL)
            .map_err(|e| csv_error(line, format!("R is not a rotation: {e}")))?;
        let score: f64 = parse_scalar(fields[3], "score", line)?;
        let time: f64 = parse_scalar(fields[6], "time", line)?;
        records.push(PoseRecord {
            scene_id: parse_scalar(fields[0], "scene_id", line)?,
            image_id: parse_scalar(fields[1], "im_id", line)?,
            object_id: parse_scalar(fields[2], "obj_id", line)?,
            instance: records.len(),
            rotation,
            translation: [t[0], t[1], t[2]],
            score: Some(score),
            visib_fract: None,
            time_s: Some(time),
        });
    }
    Ok(records)
}

fn join_floats(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")
}

/// Serializes predictions with a header line and shortest round-trip floats.
/// Missing score and time are written as `1` and `-1`.
pub fn format_results_csv(records: &[PoseRecord]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.scene_id,
            r.image_id,
            r.object_id,
            r.score.unwrap_or(1.0),
            join_floats(&r.rotation.to_row_major()),
            join_floats(&r.translation),
            r.time_s.unwrap_or(-1.0)
        );
    }
    out
}

/// Per-class tally produced by [`convert_to_canonic`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConversionSummary {
    pub per_class: BTreeMap<&'static str, usize>,
    pub orthonormalized: usize,
    pub degenerate: usize,
}

/// Largest entry-wise change below which a rotation counts as already canonic
/// and is written back unchanged, so converting converted files is byte-stable.
pub const CANONIC_FIXED_POINT_TOL: f64 = 1e-12;

/// Replaces every rotation by its canonic representative. Ids and translations
/// are untouched. Rotations accepted at the file tolerance are re-orthonormalized
/// first; rotations that are already canonic keep their exact input values.
pub fn convert_to_canonic(
    records: &[PoseRecord],
    dataset: Dataset,
    catalog: &ObjectCatalog,
) -> Result<(Vec<PoseRecord>, ConversionSummary), BopError> {
    let mut summary = ConversionSummary::default();
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        let class = catalog
            .lookup(dataset, r.object_id)
            .map_err(|_| BopError::UnknownObject {
                dataset,
                object_id: r.object_id,
            })?;
        let codec_err = |source: CodecError| BopError::Codec {
            scene_id: r.scene_id,
            image_id: r.image_id,
            object_id: r.object_id,
            source,
        };
        let mut rotation = r.rotation;
        if rotation.orthonormality_residual() > ORTHONORMAL_TOL
            || (rotation.determinant() - 1.0).abs() > ORTHONORMAL_TOL
        {
            rotation = rotation
                .orthonormalized()
                .map_err(|e| codec_err(CodecError::Rotation(e)))?;
            summary.orthonormalized += 1;
        }
        let pose = canonic_matrix(&rotation, class).map_err(codec_err)?;
        if pose.degenerate {
            summary.degenerate += 1;
        }
        *summary.per_class.entry(class.id).or_default() += 1;
        let rotation = if pose.rotation.max_abs_diff(&rotation) < CANONIC_FIXED_POINT_TOL {
            rotation
        } else {
            pose.rotation
        };
        out.push(PoseRecord { rotation, ..r.clone() });
    }
    Ok((out, summary))
}

fn read_text(path: &Path) -> Result<String, BopError> {
    fs::read_to_string(path).map_err(|source| BopError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), BopError> {
    fs::write(path, text).map_err(|source| BopError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_scene_gt(path: &Path, scene_id: u32) -> Result<Vec<PoseRecord>, BopError> {
    parse_scene_gt(&read_text(path)?, scene_id)
}

pub fn write_scene_gt(records: &[PoseRecord], path: &Path) -> Result<(), BopError> {
    write_text(path, &format_scene_gt(records))
}

pub fn read_scene_gt_info(path: &Path) -> Result<VisibilityMap, BopError> {
    parse_scene_gt_info(&read_text(path)?)
}

pub fn read_results_csv(path: &Path) -> Result<Vec<PoseRecord>, BopError> {
    parse_results_csv(&read_text(path)?)
}

pub fn write_results_csv(records: &[PoseRecord], path: &Path) -> Result<(), BopError> {
    write_text(path, &format_results_csv(records))
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE: &str = r#"{"0":[{"cam_R_m2c":[1,0,0,0,1,0,0,0,1],"cam_t_m2c":[0,0,700],"obj_id":5}]}"#;

    #[test]
    fn parses_single_identity_record() {
        let recs = parse_scene_gt(ONE, 3).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].rotation, RotationMatrix::IDENTITY);
        assert_eq!((recs[0].scene_id, recs[0].image_id, recs[0].object_id), (3, 0, 5));
        assert_eq!(recs[0].translation, [0.0, 0.0, 700.0]);
    }

    #[test]
    fn scene_gt_write_read_is_a_fixed_point() {
        let text = r#"{"10":[{"cam_R_m2c":[0,-1,0,1,0,0,0,0,1],"cam_t_m2c":[1.5,-2,3e2],"obj_id":1}],
            "2":[{"cam_R_m2c":[1,0,0,0,1,0,0,0,1],"cam_t_m2c":[0,0,700],"obj_id":5},
                 {"cam_R_m2c":[1,0,0,0,0.6,-0.8,0,0.8,0.6],"cam_t_m2c":[0.1,0.2,0.3],"obj_id":7}]}"#;
        let recs = parse_scene_gt(text, 0).unwrap();
        assert_eq!(recs.iter().map(|r| r.image_id).collect::<Vec<_>>(), vec![2, 2, 10]);
        let once = format_scene_gt(&recs);
        let again = format_scene_gt(&parse_scene_gt(&once, 0).unwrap());
        assert_eq!(once, again);
        assert_eq!(parse_scene_gt(&once, 0).unwrap(), recs);
        let a: Value = serde_json::from_str(&once).unwrap();
        assert_eq!(a["2"][1]["obj_id"], 7);
    }

    #[test]
    fn arity_error_names_the_image() {
        let text = r#"{"0":[{"cam_R_m2c":[1,0,0,0,1,0,0,0],"cam_t_m2c":[0,0,700],"obj_id":5}]}"#;
        let err = parse_scene_gt(text, 0).unwrap_err();
        assert!(matches!(&err, BopError::Arity { image_id, field: "cam_R_m2c", got: 8, .. } if image_id == "0"));
        assert!(err.to_string().contains("'0'"));
    }

    #[test]
    fn rejects_non_rotations_and_bad_json() {
        let text = r#"{"4":[{"cam_R_m2c":[1,0,0,0,1,0,0,0,2],"cam_t_m2c":[0,0,700],"obj_id":5}]}"#;
        assert!(matches!(parse_scene_gt(text, 0), Err(BopError::Rotation { .. })));
        assert!(matches!(parse_scene_gt("{", 0), Err(BopError::Json(_))));
        assert!(matches!(parse_scene_gt(r#"{"x":[]}"#, 0), Err(BopError::Entry { .. })));
        assert!(matches!(parse_scene_gt(r#"{"1":[{"obj_id":1}]}"#, 0), Err(BopError::Entry { .. })));
    }

    #[test]
    fn results_csv_examples() {
        let recs = parse_results_csv("1,0,5,1.0,1 0 0 0 1 0 0 0 1,0 0 700,0.05").unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].rotation, RotationMatrix::IDENTITY);
        assert_eq!(recs[0].score, Some(1.0));
        assert_eq!(recs[0].time_s, Some(0.05));

        let text = format!("{RESULTS_HEADER}\n1,0,5,1.0,1 0 0 0 1 0 0 0 1,0 0 700,0.05\n1,0,5,1.0,1 0 0,0 0 700\n");
        let err = parse_results_csv(&text).unwrap_err();
        assert!(matches!(err, BopError::Csv { line: 3, .. }), "{err}");

        let err = parse_results_csv("1,0,5,1.0,1 0 0 0 1 0 0 0,0 0 700,0.05").unwrap_err();
        assert!(matches!(err, BopError::Csv { line: 1, .. }));
    }

    #[test]
    fn results_csv_round_trip_is_byte_stable() {
        let text = "scene_id,im_id,obj_id,score,R,t,time\n\
                    1,0,5,0.25,0 -1 0 1 0 0 0 0 1,1.5 -2 700.125,0.05\n\
                    2,7,11,1,1 0 0 0 0.6 -0.8 0 0.8 0.6,0 0 0,-1\n";
        let recs = parse_results_csv(text).unwrap();
        let once = format_results_csv(&recs);
        assert_eq!(once, text);
        assert_eq!(format_results_csv(&parse_results_csv(&once).unwrap()), once);
    }

    #[test]
    fn visibility_examples() {
        let v = parse_scene_gt_info(r#"{"0":[{"visib_fract":0.83}]}"#).unwrap();
        assert_eq!(v[&(0, 0)], Some(0.83));
        let v = parse_scene_gt_info(r#"{"0":[{"px_count_all":10}]}"#).unwrap();
        assert_eq!(v[&(0, 0)], None);
        assert!(matches!(
            parse_scene_gt_info(r#"{"0":[{"visib_fract":1.2}]}"#),
            Err(BopError::VisibilityRange { .. })
        ));
    }

    #[test]
    fn conversion_examples() {
        let catalog = ObjectCatalog::default();
        let rz = |d: f64| RotationMatrix::rot_z(d.to_radians());
        let rec = |obj: u32, r: RotationMatrix| PoseRecord {
            scene_id: 1,
            image_id: 0,
            object_id: obj,
            instance: 0,
            rotation: r,
            translation: [1.0, 2.0, 3.0],
            score: None,
            visib_fract: None,
            time_s: None,
        };
        // object 5 is two-fold about z, object 18 has no symmetry
        let (out, summary) =
            convert_to_canonic(&[rec(5, rz(190.0)), rec(5, rz(10.0)), rec(18, rz(190.0))], Dataset::Tless, &catalog)
                .unwrap();
        assert!(out[0].rotation.max_abs_diff(&rz(10.0)) < 1e-12);
        assert!(out[0].rotation.max_abs_diff(&out[1].rotation) < 1e-12);
        assert_eq!(out[2].rotation, rz(190.0));
        assert_eq!(out[1].rotation, rz(10.0));
        assert_eq!(out[0].translation, [1.0, 2.0, 3.0]);
        assert_eq!(summary.per_class["TLESS-II"], 2);
        assert_eq!(summary.per_class["TLESS-I"], 1);

        let err = convert_to_canonic(&[rec(31, rz(0.0))], Dataset::Tless, &catalog).unwrap_err();
        assert!(err.to_string().contains("31"));
    }
}
