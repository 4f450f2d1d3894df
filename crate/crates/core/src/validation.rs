//! Numerical certification of the encoding over the sampled rotation space.
//!
//! The space is the view-sphere grid used for T-LESS training images: `beta`
//! is zero, `alpha` covers 5..85 degrees (part one) and 275..355 degrees (part
//! two), and `gamma` covers the full turn. Classes with a flip about `y` use
//! part one only.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::codec::{clamp_to_canonic, sarr_forward, SarrValue, Selector};
use crate::rotation::{euler_to_matrix, matrix_to_euler, EulerXYZ, RotationMatrix};
use crate::symmetry::{SymmetryClass, SymmetryDegree};

/// Tolerance on the uniqueness deviation and on the Lipschitz comparison.
pub const SCAN_TOL: f64 = 1e-9;

/// Smallest supported grid step in degrees.
pub const MIN_STEP_DEG: f64 = 0.1;

/// Sampled rotation angles standing in for a continuous symmetry, in degrees.
pub const CONTINUOUS_SAMPLES_DEG: [f64; 4] = [37.0, 90.0, 180.0, 271.0];

const PART_ONE_START: f64 = 5.0;
const PART_TWO_START: f64 = 275.0;
const PART_SPAN: f64 = 80.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error("grid step {0} deg must be at least 0.1 and divide both 80 and 360")]
    Step(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SpacePart {
    T1,
    T2,
    Union,
}

/// A rectangular `alpha x gamma` grid at `beta = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpaceGrid {
    pub part: SpacePart,
    pub alpha_step_deg: f64,
    pub gamma_step_deg: f64,
}

impl SpaceGrid {
    /// The training-view space of a class: union of both parts, or part one for
    /// classes with a flip about `y`.
    pub fn for_class(class: &SymmetryClass) -> Self {
        SpaceGrid {
            part: default_part(class),
            alpha_step_deg: 10.0,
            gamma_step_deg: 5.0,
        }
    }

    /// `alpha` rows grouped by part, in degrees.
    pub fn alpha_parts(&self) -> Vec<Vec<f64>> {
        let starts: &[f64] = match self.part {
            SpacePart::T1 => &[PART_ONE_START],
            SpacePart::T2 => &[PART_TWO_START],
            SpacePart::Union => &[PART_ONE_START, PART_TWO_START],
        };
        let count = (PART_SPAN / self.alpha_step_deg).round() as usize + 1;
        starts
            .iter()
            .map(|s| (0..count).map(|k| s + k as f64 * self.alpha_step_deg).collect())
            .collect()
    }

    pub fn gamma_values(&self) -> Vec<f64> {
        let count = (360.0 / self.gamma_step_deg).round() as usize;
        (0..count).map(|k| k as f64 * self.gamma_step_deg).collect()
    }

    /// Every grid pose, alpha-major.
    pub fn samples(&self) -> Vec<EulerXYZ> {
        let gammas = self.gamma_values();
        self.alpha_parts()
            .into_iter()
            .flatten()
            .flat_map(|a| gammas.iter().map(move |&g| EulerXYZ::from_degrees(a, 0.0, g)))
            .collect()
    }
}

fn default_part(class: &SymmetryClass) -> SpacePart {
    if class.is_class_v() {
        SpacePart::T1
    } else {
        SpacePart::Union
    }
}

/// The training-view grid of a class: 1296 poses, or 648 for flip classes.
pub fn sample_space_t(class: &SymmetryClass) -> Vec<EulerXYZ> {
    SpaceGrid::for_class(class).samples()
}

fn check_step(step_deg: f64) -> Result<(), ValidationError> {
    let divides = |span: f64| {
        let q = span / step_deg;
        (q - q.round()).abs() < 1e-6
    };
    if !step_deg.is_finite() || step_deg < MIN_STEP_DEG - 1e-12 || !divides(PART_SPAN) || !divides(360.0) {
        return Err(ValidationError::Step(step_deg));
    }
    Ok(())
}

fn scan_grid(class: &SymmetryClass, step_deg: f64) -> Result<SpaceGrid, ValidationError> {
    check_step(step_deg)?;
    Ok(SpaceGrid {
        part: default_part(class),
        alpha_step_deg: step_deg,
        gamma_step_deg: step_deg,
    })
}

/// Pose at which the largest uniqueness deviation occurred.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessWitness {
    pub pose_deg: [f64; 3],
    pub shift_deg: [f64; 3],
    pub deviation: f64,
}

/// Adjacent grid samples that straddle a clamping boundary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryCase {
    pub gamma_from_deg: f64,
    pub gamma_to_deg: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub class_id: &'static str,
    pub step_deg: f64,
    pub samples: usize,
    pub max_uniqueness_deviation: f64,
    pub worst_uniqueness: Option<UniquenessWitness>,
    pub max_adjacent_delta: f64,
    pub lipschitz_bound: f64,
    pub boundary_cases: Vec<BoundaryCase>,
    pub pass: bool,
}

impl ScanReport {
    fn new(class: &SymmetryClass, step_deg: f64, samples: usize) -> Self {
        ScanReport {
            class_id: class.id,
            step_deg,
            samples,
            max_uniqueness_deviation: 0.0,
            worst_uniqueness: None,
            max_adjacent_delta: 0.0,
            lipschitz_bound: lipschitz_bound(class, step_deg),
            boundary_cases: Vec::new(),
            pass: true,
        }
    }

    fn evaluate(mut self) -> Self {
        self.pass = self.max_uniqueness_deviation < SCAN_TOL
            && self.max_adjacent_delta <= self.lipschitz_bound + SCAN_TOL;
        self
    }
}

/// `kappa_max * step` in radians, with `kappa_max` the largest finite degree.
pub fn lipschitz_bound(class: &SymmetryClass, step_deg: f64) -> f64 {
    class.kappa.max_finite() as f64 * step_deg * PI / 180.0
}

fn axis_shifts(degree: SymmetryDegree) -> Vec<f64> {
    match degree {
        SymmetryDegree::Finite(n) => (1..n).map(|j| 360.0 * j as f64 / n as f64).collect(),
        SymmetryDegree::Infinite => CONTINUOUS_SAMPLES_DEG.to_vec(),
    }
}

/// Non-identity Euler shifts `(d_alpha, d_beta, d_gamma)` in degrees generated
/// by the class's symmetry set. Flip classes use a single `y` half-turn applied
/// in the object frame.
pub fn symmetry_actions(class: &SymmetryClass) -> Vec<[f64; 3]> {
    if class.is_class_v() {
        return vec![[0.0, 180.0, 0.0]];
    }
    let per_axis: Vec<Vec<f64>> = class
        .kappa
        .axes()
        .iter()
        .map(|&d| std::iter::once(0.0).chain(axis_shifts(d)).collect())
        .collect();
    let mut out = Vec::new();
    for &a in &per_axis[0] {
        for &b in &per_axis[1] {
            for &g in &per_axis[2] {
                if (a, b, g) != (0.0, 0.0, 0.0) {
                    out.push([a, b, g]);
                }
            }
        }
    }
    out
}

/// Applies one symmetry action to a pose and returns the re-decomposed angles.
pub fn apply_action(class: &SymmetryClass, pose: &EulerXYZ, shift_deg: &[f64; 3]) -> EulerXYZ {
    let moved = if class.is_class_v() {
        euler_to_matrix(pose) * RotationMatrix::rot_y(shift_deg[1].to_radians())
    } else {
        euler_to_matrix(&EulerXYZ::new(
            pose.alpha + shift_deg[0].to_radians(),
            pose.beta + shift_deg[1].to_radians(),
            pose.gamma + shift_deg[2].to_radians(),
        ))
    };
    matrix_to_euler(&moved).expect("products of rotations stay valid")
}

fn encode_euler(e: &EulerXYZ, class: &'static SymmetryClass) -> SarrValue {
    sarr_forward(&clamp_to_canonic(e, class))
}

/// Largest encoding difference between each grid pose and its symmetric copies.
pub fn uniqueness_scan(class: &'static SymmetryClass, step_deg: f64) -> Result<ScanReport, ValidationError> {
    let grid = scan_grid(class, step_deg)?;
    let samples = grid.samples();
    let actions = symmetry_actions(class);
    let worst = samples
        .par_iter()
        .map(|pose| {
            let base = encode_euler(pose, class);
            let mut local: Option<UniquenessWitness> = None;
            for shift in &actions {
                let moved = apply_action(class, pose, shift);
                let deviation = base.max_abs_diff(&encode_euler(&moved, class));
                if local.as_ref().is_none_or(|w| deviation > w.deviation) {
                    local = Some(UniquenessWitness {
                        pose_deg: pose.to_degrees(),
                        shift_deg: *shift,
                        deviation,
                    });
                }
            }
            local
        })
        .reduce(
            || None,
            |a, b| match (a, b) {
                (Some(a), Some(b)) => Some(if b.deviation > a.deviation || (b.deviation == a.deviation && b.pose_deg < a.pose_deg) { b } else { a }),
                (a, None) => a,
                (None, b) => b,
            },
        );
    let mut report = ScanReport::new(class, step_deg, samples.len());
    report.max_uniqueness_deviation = worst.as_ref().map_or(0.0, |w| w.deviation);
    report.worst_uniqueness = worst;
    Ok(report.evaluate())
}

fn encode_row(alpha_deg: f64, gammas: &[f64], class: &'static SymmetryClass) -> Vec<SarrValue> {
    gammas
        .iter()
        .map(|&g| encode_euler(&EulerXYZ::from_degrees(alpha_deg, 0.0, g), class))
        .collect()
}

/// Largest encoding difference between grid neighbours. Neighbours along
/// `gamma` wrap around the full turn; neighbours along `alpha` stay within a part.
pub fn continuity_scan(class: &'static SymmetryClass, step_deg: f64) -> Result<ScanReport, ValidationError> {
    let grid = scan_grid(class, step_deg)?;
    let gammas = grid.gamma_values();
    let rows: Vec<(f64, Option<f64>)> = grid
        .alpha_parts()
        .into_iter()
        .flat_map(|part| {
            let next: Vec<Option<f64>> = part.iter().skip(1).map(|a| Some(*a)).chain([None]).collect();
            part.into_iter().zip(next)
        })
        .collect();
    let clamped_gamma: Vec<f64> = gammas
        .iter()
        .map(|&g| clamp_to_canonic(&EulerXYZ::from_degrees(0.0, 0.0, g), class).gamma)
        .collect();
    let boundary_pairs: Vec<usize> = (0..gammas.len())
        .filter(|&j| clamped_gamma[(j + 1) % gammas.len()] < clamped_gamma[j])
        .collect();

    let per_row: Vec<(f64, Vec<f64>)> = rows
        .par_iter()
        .map(|&(alpha, next_alpha)| {
            let row = encode_row(alpha, &gammas, class);
            let n = row.len();
            let mut worst = 0.0f64;
            for j in 0..n {
                worst = worst.max(row[j].max_abs_diff(&row[(j + 1) % n]));
            }
            if let Some(next_alpha) = next_alpha {
                let next = encode_row(next_alpha, &gammas, class);
                for j in 0..n {
                    worst = worst.max(row[j].max_abs_diff(&next[j]));
                }
            }
            let boundary = boundary_pairs
                .iter()
                .map(|&j| row[j].max_abs_diff(&row[(j + 1) % n]))
                .collect();
            (worst, boundary)
        })
        .collect();

    let mut report = ScanReport::new(class, step_deg, rows.len() * gammas.len());
    report.max_adjacent_delta = per_row.iter().map(|(w, _)| *w).fold(0.0, f64::max);
    report.boundary_cases = boundary_pairs
        .iter()
        .enumerate()
        .map(|(k, &j)| BoundaryCase {
            gamma_from_deg: gammas[j],
            gamma_to_deg: gammas[(j + 1) % gammas.len()],
            delta: per_row.iter().map(|(_, b)| b[k]).fold(0.0, f64::max),
        })
        .collect();
    Ok(report.evaluate())
}

/// Uniqueness and continuity at one step, merged.
pub fn full_scan(class: &'static SymmetryClass, step_deg: f64) -> Result<ScanReport, ValidationError> {
    let mut report = uniqueness_scan(class, step_deg)?;
    let continuity = continuity_scan(class, step_deg)?;
    report.samples = report.samples.max(continuity.samples);
    report.max_adjacent_delta = continuity.max_adjacent_delta;
    report.boundary_cases = continuity.boundary_cases;
    Ok(report.evaluate())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridRow {
    pub alpha_deg: f64,
    pub gamma_deg: f64,
    pub value: f64,
}

/// One encoding entry over the class's grid, alpha-major.
pub fn emit_grid(
    class: &'static SymmetryClass,
    selector: Selector,
    step_deg: f64,
) -> Result<Vec<GridRow>, ValidationError> {
    let grid = scan_grid(class, step_deg)?;
    let gammas = grid.gamma_values();
    Ok(grid
        .alpha_parts()
        .into_iter()
        .flatten()
        .flat_map(|a| {
            gammas.iter().map(move |&g| GridRow {
                alpha_deg: a,
                gamma_deg: g,
                value: encode_euler(&EulerXYZ::from_degrees(a, 0.0, g), class).select(selector),
            })
        })
        .collect())
}

fn fixed9(v: f64) -> String {
    let s = format!("{v:.9}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

/// CSV with header `alpha_deg,gamma_deg,value`, nine decimals per number.
pub fn format_grid_csv(rows: &[GridRow]) -> String {
    let mut out = String::from("alpha_deg,gamma_deg,value\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", fixed9(r.alpha_deg), fixed9(r.gamma_deg), fixed9(r.value));
    }
    out
}
