//! Symmetry-aware rotation encoding.
//!
//! A rotation is decomposed into Euler angles, clamped to the class's canonic
//! angle space, and encoded as three `(sin, cos)` columns of symmetry-scaled
//! angles. Continuous axes collapse to the constant column `(0, 1)`. For classes
//! with several finite symmetric axes the sine of every later angle is scaled by
//! the cosine of the earlier clamped angles (the `nu` cross-terms), which keeps
//! otherwise coinciding poses apart at the cost of a singularity at 90 degrees.

use std::f64::consts::{PI, TAU};

use serde::Serialize;
use thiserror::Error;

use crate::rotation::{euler_to_matrix, matrix_to_euler, wrap_angle, EulerXYZ, RotationError, RotationMatrix};
use crate::symmetry::{ClampStyle, SymmetryClass, SymmetryDegree};

/// Below this magnitude an accumulated cross-term no longer carries a usable sign.
pub const SINGULAR_TOL: f64 = 1e-6;

/// Smallest column norm accepted when renormalizing a flat vector.
pub const MIN_COLUMN_NORM: f64 = 1e-6;

/// Clamped angles this close to the top of their interval are folded to zero.
const CLAMP_SNAP: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodecError {
    #[error(transparent)]
    Rotation(#[from] RotationError),
    #[error("flat encoding must have 6 entries, got {0}")]
    Length(usize),
    #[error("non-finite entry at index {0} of the encoding")]
    NonFinite(usize),
    #[error("column {column} has near-zero norm {norm:.3e}")]
    DegenerateColumn { column: usize, norm: f64 },
}

/// Euler angles restricted to a class's canonic interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicEuler {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub class: &'static SymmetryClass,
}

impl CanonicEuler {
    pub fn as_array(&self) -> [f64; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    pub fn euler(&self) -> EulerXYZ {
        EulerXYZ::new(self.alpha, self.beta, self.gamma)
    }

    pub fn to_matrix(&self) -> RotationMatrix {
        euler_to_matrix(&self.euler())
    }

    pub fn to_degrees_array(&self) -> [f64; 3] {
        [self.alpha.to_degrees(), self.beta.to_degrees(), self.gamma.to_degrees()]
    }
}

/// The 2x3 encoding: row 0 holds `s_alpha, s_beta, s_gamma`, row 1 the cosines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SarrValue {
    pub values: [[f64; 3]; 2],
    pub class: &'static SymmetryClass,
}

impl SarrValue {
    pub fn sin(&self, axis: usize) -> f64 {
        self.values[0][axis]
    }

    pub fn cos(&self, axis: usize) -> f64 {
        self.values[1][axis]
    }

    /// Column-major flat form `(s_alpha, c_alpha, s_beta, c_beta, s_gamma, c_gamma)`.
    pub fn flat(&self) -> [f64; 6] {
        let v = &self.values;
        [v[0][0], v[1][0], v[0][1], v[1][1], v[0][2], v[1][2]]
    }

    /// Entry named by selector: `s_alpha`, `c_alpha`, `s_beta`, `c_beta`, `s_gamma`, `c_gamma`.
    pub fn select(&self, selector: Selector) -> f64 {
        self.flat()[selector as usize]
    }

    pub fn max_abs_diff(&self, other: &SarrValue) -> f64 {
        self.flat()
            .iter()
            .zip(other.flat().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Serialize for SarrValue {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.values.serialize(serializer)
    }
}

/// One entry of the encoding, in flat order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Selector {
    SinAlpha = 0,
    CosAlpha = 1,
    SinBeta = 2,
    CosBeta = 3,
    SinGamma = 4,
    CosGamma = 5,
}

impl Selector {
    pub const ALL: [Selector; 6] = [
        Selector::SinAlpha,
        Selector::CosAlpha,
        Selector::SinBeta,
        Selector::CosBeta,
        Selector::SinGamma,
        Selector::CosGamma,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Selector::SinAlpha => "s_alpha",
            Selector::CosAlpha => "c_alpha",
            Selector::SinBeta => "s_beta",
            Selector::CosBeta => "c_beta",
            Selector::SinGamma => "s_gamma",
            Selector::CosGamma => "c_gamma",
        }
    }
}

impl std::str::FromStr for Selector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Selector::ALL
            .into_iter()
            .find(|sel| sel.name() == s)
            .ok_or_else(|| format!("unknown selector '{s}' (expected one of s_alpha, c_alpha, s_beta, c_beta, s_gamma, c_gamma)"))
    }
}

/// Result of decoding: the recovered angles and whether a sign had to be guessed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decoded {
    pub euler: CanonicEuler,
    pub degenerate: bool,
}

/// Output of the full matrix-to-canonic pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicPose {
    pub rotation: RotationMatrix,
    pub clamped: CanonicEuler,
    pub value: SarrValue,
    pub recovered: CanonicEuler,
    pub degenerate: bool,
}

fn clamp_axis(angle: f64, degree: SymmetryDegree) -> f64 {
    match degree.period() {
        Some(period) => {
            let r = wrap_angle(angle, period);
            if period - r < CLAMP_SNAP {
                0.0
            } else {
                r
            }
        }
        None => 0.0,
    }
}

/// Restricts Euler angles to the class's canonic space.
pub fn clamp_to_canonic(e: &EulerXYZ, class: &'static SymmetryClass) -> CanonicEuler {
    let (alpha, beta, gamma) = match class.clamp_style {
        ClampStyle::Standard => {
            let k = class.kappa;
            (
                clamp_axis(e.alpha, k.alpha),
                clamp_axis(e.beta, k.beta),
                clamp_axis(e.gamma, k.gamma),
            )
        }
        ClampStyle::ClassV => {
            let a = wrap_angle(e.alpha, TAU);
            if a > PI {
                (wrap_angle(a - PI, TAU), -e.beta, wrap_angle(PI - e.gamma, TAU))
            } else {
                (a, wrap_angle(e.beta, TAU), wrap_angle(e.gamma, TAU))
            }
        }
    };
    CanonicEuler {
        alpha,
        beta,
        gamma,
        class,
    }
}

fn cross_term(degree: SymmetryDegree, angle: f64) -> f64 {
    if degree.has_cross_term() {
        angle.cos()
    } else {
        1.0
    }
}

/// Encodes clamped angles.
pub fn sarr_forward(c: &CanonicEuler) -> SarrValue {
    let axes = c.class.kappa.axes();
    let angles = c.as_array();
    let nu_alpha = cross_term(axes[0], angles[0]);
    let nu_beta = cross_term(axes[1], angles[1]);
    let scale = [1.0, nu_alpha, nu_alpha * nu_beta];
    let mut values = [[0.0; 3]; 2];
    for i in 0..3 {
        if axes[i].is_infinite() {
            values[0][i] = 0.0;
            values[1][i] = 1.0;
            continue;
        }
        let (s, c) = (axes[i].lambda() * angles[i]).sin_cos();
        values[0][i] = s * scale[i];
        values[1][i] = c;
    }
    SarrValue {
        values,
        class: c.class,
    }
}

/// Angle from a cosine and the sign of its sine, on the circle of the given degree.
fn recover_angle(cos: f64, negative: bool, n: u32) -> f64 {
    let acos = cos.clamp(-1.0, 1.0).acos();
    let full = if negative { TAU - acos } else { acos };
    clamp_axis(full / n as f64, SymmetryDegree::Finite(n))
}

/// Decodes an encoding back to clamped angles.
///
/// When an accumulated cross-term vanishes the sign of the next angle cannot be
/// recovered; the non-negative branch is taken and `degenerate` is set.
pub fn sarr_inverse(v: &SarrValue) -> Decoded {
    match v.class.clamp_style {
        ClampStyle::Standard => inverse_standard(v),
        ClampStyle::ClassV => inverse_class_v(v),
    }
}

fn inverse_standard(v: &SarrValue) -> Decoded {
    let axes = v.class.kappa.axes();
    let mut angles = [0.0; 3];
    let mut acc: f64 = 1.0;
    let mut degenerate = false;
    for i in 0..3 {
        let n = match axes[i] {
            SymmetryDegree::Infinite => continue,
            SymmetryDegree::Finite(n) => n,
        };
        let s = v.sin(i);
        let negative = if acc.abs() < SINGULAR_TOL {
            degenerate = true;
            false
        } else {
            s * acc < 0.0
        };
        angles[i] = recover_angle(v.cos(i), negative, n);
        if i < 2 {
            acc *= cross_term(axes[i], angles[i]);
        }
    }
    Decoded {
        euler: CanonicEuler {
            alpha: angles[0],
            beta: angles[1],
            gamma: angles[2],
            class: v.class,
        },
        degenerate,
    }
}

fn inverse_class_v(v: &SarrValue) -> Decoded {
    let n_beta = v.class.kappa.beta.finite().unwrap_or(2);
    let alpha = recover_angle(v.cos(0), v.sin(0) < 0.0, 1);
    let beta_flipped = v.sin(1) < 0.0;
    let beta = recover_angle(v.cos(1), beta_flipped, n_beta);
    let gamma_raw = recover_angle(v.cos(2), v.sin(2) < 0.0, 1);
    let gamma = if beta_flipped {
        clamp_axis(-gamma_raw, SymmetryDegree::Finite(1))
    } else {
        gamma_raw
    };
    Decoded {
        euler: CanonicEuler {
            alpha,
            beta,
            gamma,
            class: v.class,
        },
        degenerate: beta.cos().abs() < SINGULAR_TOL,
    }
}

/// Encodes a rotation matrix: decompose, clamp, encode.
pub fn encode(r: &RotationMatrix, class: &'static SymmetryClass) -> Result<SarrValue, CodecError> {
    let e = matrix_to_euler(r)?;
    Ok(sarr_forward(&clamp_to_canonic(&e, class)))
}

/// Decodes an encoding into a rotation matrix.
pub fn decode(v: &SarrValue) -> (RotationMatrix, bool) {
    let d = sarr_inverse(v);
    (d.euler.to_matrix(), d.degenerate)
}

/// Maps a rotation to the canonic representative of its symmetry orbit.
pub fn canonic_matrix(r: &RotationMatrix, class: &'static SymmetryClass) -> Result<CanonicPose, CodecError> {
    let e = matrix_to_euler(r)?;
    let clamped = clamp_to_canonic(&e, class);
    let value = sarr_forward(&clamped);
    let decoded = sarr_inverse(&value);
    Ok(CanonicPose {
        rotation: decoded.euler.to_matrix(),
        clamped,
        value,
        recovered: decoded.euler,
        degenerate: decoded.degenerate,
    })
}

pub fn sarr_flat(v: &SarrValue) -> [f64; 6] {
    v.flat()
}

/// Rebuilds an encoding from its flat form, renormalizing each column.
///
/// Cross-terms recovered from earlier columns are divided out before the norm
/// is taken and multiplied back afterwards; continuous axes are reset to `(0, 1)`.
pub fn sarr_unflatten(flat: &[f64], class: &'static SymmetryClass) -> Result<SarrValue, CodecError> {
    if flat.len() != 6 {
        return Err(CodecError::Length(flat.len()));
    }
    if let Some(i) = flat.iter().position(|v| !v.is_finite()) {
        return Err(CodecError::NonFinite(i));
    }
    let axes = class.kappa.axes();
    let mut values = [[0.0; 3]; 2];
    let mut acc: f64 = 1.0;
    for i in 0..3 {
        let n = match axes[i] {
            SymmetryDegree::Infinite => {
                values[0][i] = 0.0;
                values[1][i] = 1.0;
                continue;
            }
            SymmetryDegree::Finite(n) => n,
        };
        let divisor = if acc.abs() < SINGULAR_TOL { 1.0 } else { acc };
        // Scale by the largest entry first so huge inputs cannot overflow.
        let scale = flat[2 * i].abs().max(flat[2 * i + 1].abs());
        if scale == 0.0 {
            return Err(CodecError::DegenerateColumn { column: i, norm: 0.0 });
        }
        let s = flat[2 * i] / scale / divisor;
        let c = flat[2 * i + 1] / scale;
        let unit_norm = s.hypot(c);
        let norm = scale * unit_norm;
        if norm < MIN_COLUMN_NORM {
            return Err(CodecError::DegenerateColumn { column: i, norm });
        }
        let (s, c) = (s / unit_norm, c / unit_norm);
        values[0][i] = s * divisor;
        values[1][i] = c;
        if i < 2 && axes[i].has_cross_term() {
            let angle = wrap_angle(s.atan2(c), TAU) / n as f64;
            acc *= angle.cos();
        }
    }
    Ok(SarrValue { values, class })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetry::{class_by_name, primitive_class, Dataset};

    fn deg(v: f64) -> f64 {
        v.to_radians()
    }

    fn tless(name: &str) -> &'static SymmetryClass {
        class_by_name(Dataset::Tless, name).unwrap()
    }

    fn itodd(name: &str) -> &'static SymmetryClass {
        class_by_name(Dataset::Itodd, name).unwrap()
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn clamp_examples() {
        let c = clamp_to_canonic(&EulerXYZ::from_degrees(10.0, 20.0, 190.0), tless("II"));
        assert_close(c.alpha, deg(10.0), 1e-12);
        assert_close(c.beta, deg(20.0), 1e-12);
        assert_close(c.gamma, deg(10.0), 1e-12);

        let c = clamp_to_canonic(&EulerXYZ::from_degrees(10.0, 0.0, 123.0), tless("IV"));
        assert_eq!((c.beta, c.gamma), (0.0, 0.0));
        assert_close(c.alpha, deg(10.0), 1e-12);

        let c = clamp_to_canonic(&EulerXYZ::from_degrees(200.0, 10.0, 30.0), tless("V"));
        assert_close(c.alpha, deg(20.0), 1e-12);
        assert_close(c.beta, deg(-10.0), 1e-12);
        assert_close(c.gamma, deg(150.0), 1e-12);
    }

    #[test]
    fn clamp_folds_the_top_of_the_interval() {
        let c = clamp_to_canonic(&EulerXYZ::new(0.0, 0.0, PI - 1e-13), tless("II"));
        assert_eq!(c.gamma, 0.0);
        let c = clamp_to_canonic(&EulerXYZ::new(0.0, 0.0, -1e-300), tless("I"));
        assert_eq!(c.gamma, 0.0);
    }

    #[test]
    fn forward_examples() {
        let c = clamp_to_canonic(&EulerXYZ::from_degrees(0.0, 0.0, 10.0), tless("II"));
        let v = sarr_forward(&c);
        let expect = [[0.0, 0.0, 0.342020], [1.0, 1.0, 0.939693]];
        for (got, want) in v.values.iter().flatten().zip(expect.iter().flatten()) {
            assert_close(*got, *want, 5e-7);
        }
        assert_close(v.values[0][2], deg(20.0).sin(), 1e-15);

        let c = clamp_to_canonic(&EulerXYZ::from_degrees(0.0, 60.0, 30.0), itodd("II"));
        let v = sarr_forward(&c);
        let expect = [[0.0, 0.866025, 0.433013], [1.0, -0.5, 0.5]];
        for (got, want) in v.values.iter().flatten().zip(expect.iter().flatten()) {
            assert_close(*got, *want, 5e-7);
        }
        // independent evaluation: sin(120) * cos(0), sin(60) * cos(0) * cos(60)
        assert_close(v.values[0][1], (3f64).sqrt() / 2.0, 1e-15);
        assert_close(v.values[0][2], (3f64).sqrt() / 2.0 * 0.5, 1e-15);
    }

    #[test]
    fn continuous_axis_column_is_exact() {
        for g in [0.0, 1.0, 2.5, 123.0, -7.0] {
            let c = clamp_to_canonic(&EulerXYZ::new(0.3, 0.2, g), tless("IV"));
            let v = sarr_forward(&c);
            assert_eq!((v.sin(2), v.cos(2)), (0.0, 1.0));
        }
        let sphere = primitive_class("SPHERE").unwrap();
        let v = sarr_forward(&clamp_to_canonic(&EulerXYZ::new(1.0, -2.0, 3.0), sphere));
        assert_eq!(v.flat(), [0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn inverse_examples() {
        let v = SarrValue {
            values: [[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]],
            class: tless("IV"),
        };
        assert_eq!(sarr_inverse(&v).euler.gamma, 0.0);

        let v = SarrValue {
            values: [[-1.0, 0.0, 0.0], [0.0, 1.0, 1.0]],
            class: tless("I"),
        };
        assert_close(sarr_inverse(&v).euler.alpha, 1.5 * PI, 1e-15);

        let c = clamp_to_canonic(&EulerXYZ::from_degrees(0.0, 60.0, 30.0), itodd("II"));
        let d = sarr_inverse(&sarr_forward(&c));
        assert!(!d.degenerate);
        let got = d.euler.to_degrees_array();
        assert_close(got[0], 0.0, 1e-9);
        assert_close(got[1], 60.0, 1e-9);
        assert_close(got[2], 30.0, 1e-9);
    }

    #[test]
    fn inverse_flags_the_singular_set() {
        let c = CanonicEuler {
            alpha: 0.0,
            beta: PI / 2.0,
            gamma: deg(30.0),
            class: itodd("II"),
        };
        let d = sarr_inverse(&sarr_forward(&c));
        assert!(d.degenerate);
        assert!(d.euler.gamma >= 0.0 && d.euler.gamma < PI);
    }

    #[test]
    fn class_v_inverse_matches_flip_identity() {
        let class = tless("V");
        let c = clamp_to_canonic(&EulerXYZ::from_degrees(200.0, 10.0, 30.0), class);
        let v = sarr_forward(&c);
        let d = sarr_inverse(&v);
        // (20, -10, 150) is recovered as (20, 170, -150): the same pose up to the y flip
        let got = d.euler.to_degrees_array();
        assert_close(got[0], 20.0, 1e-9);
        assert_close(got[1], 170.0, 1e-9);
        assert_close(got[2], 210.0, 1e-9);
        assert!(sarr_forward(&d.euler).max_abs_diff(&v) < 1e-12);
        let flipped = c.to_matrix() * RotationMatrix::rot_y(PI);
        assert!(flipped.max_abs_diff(&d.euler.to_matrix()) < 1e-12);
    }

    #[test]
    fn canonic_matrix_examples() {
        for class in crate::symmetry::all_classes() {
            let p = canonic_matrix(&RotationMatrix::IDENTITY, class).unwrap();
            assert!(p.rotation.max_abs_diff(&RotationMatrix::IDENTITY) < 1e-12, "{}", class.id);
        }
        let p = canonic_matrix(&RotationMatrix::rot_z(deg(190.0)), tless("II")).unwrap();
        let want = euler_to_matrix(&EulerXYZ::from_degrees(0.0, 0.0, 10.0));
        assert!(p.rotation.max_abs_diff(&want) < 1e-12);

        let r = RotationMatrix::rot_x(deg(10.0)) * RotationMatrix::rot_z(deg(123.0));
        let p = canonic_matrix(&r, tless("IV")).unwrap();
        assert!(p.rotation.max_abs_diff(&RotationMatrix::rot_x(deg(10.0))) < 1e-12);
    }

    #[test]
    fn flat_and_unflatten() {
        let c = clamp_to_canonic(&EulerXYZ::from_degrees(0.0, 0.0, 10.0), tless("II"));
        let v = sarr_forward(&c);
        let f = sarr_flat(&v);
        let expect = [0.0, 1.0, 0.0, 1.0, 0.342020, 0.939693];
        for (a, b) in f.iter().zip(expect) {
            assert_close(*a, b, 5e-7);
        }
        assert!(sarr_unflatten(&f, tless("II")).unwrap().max_abs_diff(&v) < 1e-15);

        let c = clamp_to_canonic(&EulerXYZ::from_degrees(20.0, 60.0, 30.0), itodd("II"));
        let v = sarr_forward(&c);
        assert!(sarr_unflatten(&v.flat(), itodd("II")).unwrap().max_abs_diff(&v) < 1e-12);

        let bad = [1e-7, 1e-7, 0.0, 1.0, 0.0, 1.0];
        assert!(matches!(
            sarr_unflatten(&bad, tless("I")),
            Err(CodecError::DegenerateColumn { column: 0, .. })
        ));
        assert!(matches!(sarr_unflatten(&[0.0; 5], tless("I")), Err(CodecError::Length(5))));
    }

    #[test]
    fn unflatten_renormalizes_scaled_columns() {
        let class = tless("III");
        let v = sarr_unflatten(&[0.0, 3.0, 0.0, 0.5, 2.0, 0.0], class).unwrap();
        assert_eq!(v.flat(), [0.0, 1.0, 0.0, 1.0, 1.0, 0.0]);
        let v = sarr_unflatten(&[0.0, 1.0, 0.0, 1.0, 0.7, 0.2], tless("IV")).unwrap();
        assert_eq!((v.sin(2), v.cos(2)), (0.0, 1.0));
    }

    #[test]
    fn unflatten_survives_extreme_magnitudes() {
        let class = primitive_class("CUBOID").unwrap();
        let flat = [1.004e59, 0.0, -5.486e303, -1.783e308, -5.486e303, 1.358e-312];
        let v = sarr_unflatten(&flat, class).unwrap();
        assert!(v.flat().iter().all(|x| x.abs() <= 1.0));
    }

    #[test]
    fn rectangle_boundary_values() {
        let class = tless("II");
        let at = |g: f64| sarr_forward(&clamp_to_canonic(&EulerXYZ::from_degrees(0.0, 0.0, g), class));
        assert!(at(5.0).max_abs_diff(&at(185.0)) < 1e-12);
        // 175 and 185 straddle the boundary and stay close
        assert!(at(175.0).max_abs_diff(&at(185.0)) <= 2.0 * deg(10.0));
    }

    #[test]
    fn class_v_full_so3_case_stays_distinct() {
        // R_x(180) R_z(180) equals R_y(180), a visually identical pose, yet the encodings differ
        let class = tless("V");
        let a = EulerXYZ::from_degrees(180.0, 0.0, 180.0);
        let b = EulerXYZ::from_degrees(0.0, 0.0, 0.0);
        assert!(euler_to_matrix(&a).max_abs_diff(&RotationMatrix::rot_y(PI)) < 1e-12);
        let va = sarr_forward(&clamp_to_canonic(&a, class));
        let vb = sarr_forward(&clamp_to_canonic(&b, class));
        assert!(va.max_abs_diff(&vb) > 1.9);
    }

    #[test]
    fn cuboid_half_turn_about_y_coincides_after_clamping() {
        let class = primitive_class("CUBOID").unwrap();
        let a = sarr_forward(&clamp_to_canonic(&EulerXYZ::from_degrees(0.0, 0.0, 45.0), class));
        let b = sarr_forward(&clamp_to_canonic(&EulerXYZ::from_degrees(0.0, 180.0, 45.0), class));
        assert_eq!(a.flat(), b.flat());
    }

    #[test]
    fn selector_names_round_trip() {
        for s in Selector::ALL {
            assert_eq!(s.name().parse::<Selector>().unwrap(), s);
        }
        assert!("s_delta".parse::<Selector>().is_err());
    }
}
