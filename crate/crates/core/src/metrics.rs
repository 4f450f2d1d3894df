//! Symmetry-sensitive pose scoring.
//!
//! The rotational error is the geodesic angle between prediction and canonic
//! ground truth. Recall is averaged over fixed thresholds. Multiple instances of
//! one object in one image are paired by minimum-weight matching.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bop::PoseRecord;
use crate::codec::{canonic_matrix, CodecError};
use crate::rotation::RotationMatrix;
use crate::symmetry::{Dataset, ObjectCatalog};

/// Recall thresholds in degrees.
pub const THRESHOLDS_DEG: [f64; 6] = [2.0, 5.0, 10.0, 15.0, 25.0, 40.0];

/// Error assigned to a ground-truth instance without a matching prediction.
pub const MISSING_ERROR_DEG: f64 = 180.0;

const TIE_TOL: f64 = 1e-9;
const FORBIDDEN: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("cannot average recall over an empty error list")]
    Empty,
    #[error("single-instance evaluation needs visib_fract for scene {scene_id} image {image_id} object {object_id}")]
    MissingVisibility {
        scene_id: u32,
        image_id: u32,
        object_id: u32,
    },
    #[error("ground truth object {object_id} is not cataloged for {dataset}")]
    UnknownObject { dataset: Dataset, object_id: u32 },
    #[error("scene {scene_id} image {image_id} object {object_id}: {source}")]
    Codec {
        scene_id: u32,
        image_id: u32,
        object_id: u32,
        source: CodecError,
    },
}

/// Geodesic angle between two rotations in degrees, in `[0, 180]`.
pub fn rotation_error(pred: &RotationMatrix, gt: &RotationMatrix) -> f64 {
    let product = *pred * gt.transpose();
    let cos = ((product.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    cos.acos().to_degrees()
}

/// Fraction of errors at or below each threshold.
pub fn recalls(errors: &[f64]) -> Result<[f64; 6], MetricsError> {
    if errors.is_empty() {
        return Err(MetricsError::Empty);
    }
    let n = errors.len() as f64;
    let mut out = [0.0; 6];
    for (slot, t) in out.iter_mut().zip(THRESHOLDS_DEG) {
        *slot = errors.iter().filter(|&&e| e <= t).count() as f64 / n;
    }
    Ok(out)
}

/// Mean recall over the thresholds.
pub fn ar_c(errors: &[f64]) -> Result<f64, MetricsError> {
    Ok(recalls(errors)?.iter().sum::<f64>() / THRESHOLDS_DEG.len() as f64)
}

/// Optimal assignment of a square cost matrix; `result[row] = column`.
///
/// Shortest augmenting paths with row and column potentials, `O(n^3)`.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut result = vec![0; n];
    for j in 1..=n {
        result[p[j] - 1] = j - 1;
    }
    result
}

fn assignment_cost(cost: &[Vec<f64>], assignment: &[usize]) -> f64 {
    assignment.iter().enumerate().map(|(i, &j)| cost[i][j]).sum()
}

/// Optimal assignment with ties resolved toward the lexicographically smallest
/// `(row, column)` sequence.
pub fn min_cost_assignment_lexicographic(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let best = assignment_cost(cost, &min_cost_assignment(cost));
    let mut fixed: Vec<Option<usize>> = vec![None; n];
    let mut taken = vec![false; n];
    for i in 0..n {
        for j in (0..n).filter(|&j| !taken[j]) {
            let mut trial = fixed.clone();
            trial[i] = Some(j);
            let constrained: Vec<Vec<f64>> = (0..n)
                .map(|r| {
                    (0..n)
                        .map(|c| match trial[r] {
                            Some(fc) if fc == c => cost[r][c],
                            Some(_) => FORBIDDEN,
                            None if trial.contains(&Some(c)) => FORBIDDEN,
                            None => cost[r][c],
                        })
                        .collect()
                })
                .collect();
            let candidate = min_cost_assignment(&constrained);
            if assignment_cost(cost, &candidate) <= best + TIE_TOL {
                fixed[i] = Some(j);
                taken[j] = true;
                break;
            }
        }
    }
    fixed.into_iter().map(|j| j.expect("every row receives a column")).collect()
}

/// Result of pairing ground-truth instances with predictions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Matching {
    /// Matched `(gt_index, pred_index)` pairs, ordered by ground-truth index.
    pub pairs: Vec<(usize, usize)>,
    /// Error per ground-truth instance; unmatched instances carry 180.
    pub errors: Vec<f64>,
    pub unmatched_gt: Vec<usize>,
}

impl Matching {
    pub fn total(&self) -> f64 {
        self.errors.iter().sum()
    }
}

/// Minimum-weight one-to-one matching under the rotational error.
///
/// Missing predictions are padded with 180-degree virtual entries, surplus
/// predictions with zero-cost virtual ground truths.
pub fn match_instances(gt: &[RotationMatrix], pred: &[RotationMatrix]) -> Matching {
    let n = gt.len().max(pred.len());
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match (gt.get(i), pred.get(j)) {
                    (Some(g), Some(p)) => rotation_error(p, g),
                    (Some(_), None) => MISSING_ERROR_DEG,
                    (None, _) => 0.0,
                })
                .collect()
        })
        .collect();
    let assignment = min_cost_assignment_lexicographic(&cost);
    let mut pairs = Vec::new();
    let mut errors = Vec::with_capacity(gt.len());
    let mut unmatched_gt = Vec::new();
    for (i, &j) in assignment.iter().enumerate().take(gt.len()) {
        if j < pred.len() {
            pairs.push((i, j));
        } else {
            unmatched_gt.push(i);
        }
        errors.push(cost[i][j]);
    }
    Matching {
        pairs,
        errors,
        unmatched_gt,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// Single instance per object: the most visible ground truth only.
    Siso,
    /// Every annotated instance, paired with the best-scoring predictions.
    Vivo,
}

impl std::str::FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "siso" => Ok(Task::Siso),
            "vivo" => Ok(Task::Vivo),
            _ => Err(format!("unknown task '{s}' (expected siso or vivo)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub task: Task,
    pub dataset: Dataset,
    pub catalog: ObjectCatalog,
    /// Map predictions to their canonic pose before scoring.
    pub canonicalize_predictions: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectScore {
    pub ar_c: f64,
    pub n: usize,
}

/// Pairing made inside one `(scene, image, object)` group. Ground-truth
/// indices are instance positions in the scene file; prediction indices are
/// row positions in the prediction list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupAssignment {
    pub scene_id: u32,
    pub image_id: u32,
    pub object_id: u32,
    pub pairs: Vec<(usize, usize)>,
    pub errors_deg: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub task: Task,
    pub thresholds_deg: Vec<f64>,
    /// Threshold in degrees to recall.
    pub recalls: BTreeMap<u32, f64>,
    pub ar_c: f64,
    pub per_object: BTreeMap<u32, ObjectScore>,
    pub missing: usize,
    pub warnings: Vec<String>,
    pub assignments: Vec<GroupAssignment>,
    /// Recalls pool every scored instance.
    pub averaging: &'static str,
}

type GroupKey = (u32, u32, u32);

struct GroupOutcome {
    assignment: GroupAssignment,
    missing: usize,
}

/// Scores predictions against ground truth.
pub fn evaluate(
    gt: &[PoseRecord],
    preds: &[PoseRecord],
    options: &EvalOptions,
) -> Result<EvalReport, MetricsError> {
    let mut gt_groups: BTreeMap<GroupKey, Vec<&PoseRecord>> = BTreeMap::new();
    for record in gt {
        gt_groups
            .entry((record.scene_id, record.image_id, record.object_id))
            .or_default()
            .push(record);
    }
    let mut warnings = Vec::new();
    let mut pred_groups: BTreeMap<GroupKey, Vec<(usize, &PoseRecord)>> = BTreeMap::new();
    for (row, record) in preds.iter().enumerate() {
        if options.catalog.lookup(options.dataset, record.object_id).is_err() {
            warnings.push(format!(
                "prediction row {row}: object {} is not cataloged for {}; skipped",
                record.object_id, options.dataset
            ));
            continue;
        }
        pred_groups
            .entry((record.scene_id, record.image_id, record.object_id))
            .or_default()
            .push((row, record));
    }

    let orphans: Vec<&GroupKey> = pred_groups.keys().filter(|k| !gt_groups.contains_key(*k)).collect();
    if let Some(first) = orphans.first() {
        let rows: usize = orphans.iter().map(|k| pred_groups[*k].len()).sum();
        warnings.push(format!(
            "{rows} prediction rows in {} (scene, image, object) groups have no ground truth, first {:?}; check scene ids",
            orphans.len(),
            first
        ));
    }

    let groups: Vec<(GroupKey, Vec<&PoseRecord>)> = gt_groups.into_iter().collect();
    let outcomes: Vec<GroupOutcome> = groups
        .par_iter()
        .map(|(key, gts)| {
            let group_preds = pred_groups.get(key).map(Vec::as_slice).unwrap_or(&[]);
            score_group(*key, gts, group_preds, options)
        })
        .collect::<Result<_, _>>()?;

    let mut all_errors = Vec::new();
    let mut per_object_errors: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    let mut missing = 0;
    let mut assignments = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        missing += outcome.missing;
        all_errors.extend_from_slice(&outcome.assignment.errors_deg);
        per_object_errors
            .entry(outcome.assignment.object_id)
            .or_default()
            .extend_from_slice(&outcome.assignment.errors_deg);
        assignments.push(outcome.assignment);
    }

    let recall_values = recalls(&all_errors)?;
    let per_object = per_object_errors
        .into_iter()
        .map(|(id, errors)| {
            let score = ObjectScore {
                ar_c: ar_c(&errors)?,
                n: errors.len(),
            };
            Ok((id, score))
        })
        .collect::<Result<_, MetricsError>>()?;

    Ok(EvalReport {
        task: options.task,
        thresholds_deg: THRESHOLDS_DEG.to_vec(),
        recalls: THRESHOLDS_DEG
            .iter()
            .zip(recall_values)
            .map(|(t, r)| (*t as u32, r))
            .collect(),
        ar_c: recall_values.iter().sum::<f64>() / THRESHOLDS_DEG.len() as f64,
        per_object,
        missing,
        warnings,
        assignments,
        averaging: "micro",
    })
}

fn score_group(
    key: GroupKey,
    gts: &[&PoseRecord],
    preds: &[(usize, &PoseRecord)],
    options: &EvalOptions,
) -> Result<GroupOutcome, MetricsError> {
    let (scene_id, image_id, object_id) = key;
    let class = options
        .catalog
        .lookup(options.dataset, object_id)
        .map_err(|_| MetricsError::UnknownObject {
            dataset: options.dataset,
            object_id,
        })?;
    let canonic = |r: &RotationMatrix| {
        canonic_matrix(r, class)
            .map(|p| p.rotation)
            .map_err(|source| MetricsError::Codec {
                scene_id,
                image_id,
                object_id,
                source,
            })
    };
    let pred_rotation = |r: &RotationMatrix| {
        if options.canonicalize_predictions {
            canonic(r)
        } else {
            Ok(*r)
        }
    };

    let selected: Vec<&PoseRecord> = match options.task {
        Task::Siso => {
            let mut best: Option<(&PoseRecord, f64)> = None;
            for record in gts {
                let v = record.visib_fract.ok_or(MetricsError::MissingVisibility {
                    scene_id,
                    image_id,
                    object_id,
                })?;
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((record, v));
                }
            }
            best.map(|(r, _)| vec![r]).unwrap_or_default()
        }
        Task::Vivo => gts.to_vec(),
    };
    let gt_rotations = selected
        .iter()
        .map(|r| canonic(&r.rotation))
        .collect::<Result<Vec<_>, _>>()?;

    let (pairs, errors) = match options.task {
        Task::Siso => {
            let gt_rot = gt_rotations[0];
            let mut best: Option<(usize, f64)> = None;
            for (row, record) in preds {
                let e = rotation_error(&pred_rotation(&record.rotation)?, &gt_rot);
                if best.is_none_or(|(_, b)| e < b) {
                    best = Some((*row, e));
                }
            }
            match best {
                Some((row, e)) => (vec![(selected[0].instance, row)], vec![e]),
                None => (Vec::new(), vec![MISSING_ERROR_DEG]),
            }
        }
        Task::Vivo => {
            let mut ranked: Vec<&(usize, &PoseRecord)> = preds.iter().collect();
            ranked.sort_by(|a, b| {
                let sa = a.1.score.unwrap_or(f64::NEG_INFINITY);
                let sb = b.1.score.unwrap_or(f64::NEG_INFINITY);
                sb.total_cmp(&sa).then(a.0.cmp(&b.0))
            });
            ranked.truncate(selected.len());
            let pred_rotations = ranked
                .iter()
                .map(|(_, r)| pred_rotation(&r.rotation))
                .collect::<Result<Vec<_>, _>>()?;
            let m = match_instances(&gt_rotations, &pred_rotations);
            let pairs = m
                .pairs
                .iter()
                .map(|&(g, p)| (selected[g].instance, ranked[p].0))
                .collect();
            (pairs, m.errors)
        }
    };
    let missing = errors.len() - pairs.len();
    Ok(GroupOutcome {
        assignment: GroupAssignment {
            scene_id,
            image_id,
            object_id,
            pairs,
            errors_deg: errors,
        },
        missing,
    })
}
