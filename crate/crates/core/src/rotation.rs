//! Conversions among the standard rotation representations.
//!
//! Euler angles are always intrinsic `XYZ`: rotate about `x` by `alpha`, then
//! about the new `y` by `beta`, then about the new `z` by `gamma`. The
//! equivalent matrix is `R_x(alpha) * R_y(beta) * R_z(gamma)` acting on column
//! vectors. All angles are radians.

use std::f64::consts::TAU;
use std::ops::Mul;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance of the internal orthonormality invariant.
pub const ORTHONORMAL_TOL: f64 = 1e-9;

/// Tolerance applied to matrices arriving from files or foreign callers.
pub const BOUNDARY_TOL: f64 = 1e-6;

/// Threshold on `|cos beta|` below which the Euler decomposition is in gimbal lock.
pub const GIMBAL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RotationError {
    #[error("matrix is not a rotation: orthonormality residual {residual:.3e}, det {det:.12}")]
    NotOrthonormal { residual: f64, det: f64 },
    #[error("non-finite value in rotation input")]
    NonFinite,
    #[error("degenerate 6d input: {0}")]
    Degenerate(&'static str),
}

/// A proper rotation matrix, stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationMatrix([[f64; 3]; 3]);

impl RotationMatrix {
    pub const IDENTITY: RotationMatrix =
        RotationMatrix([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    /// Builds a rotation after checking orthonormality and determinant against `tol`.
    pub fn from_rows(rows: [[f64; 3]; 3], tol: f64) -> Result<Self, RotationError> {
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(RotationError::NonFinite);
        }
        let m = RotationMatrix(rows);
        let residual = m.orthonormality_residual();
        let det = m.determinant();
        if residual > tol || (det - 1.0).abs() > tol {
            return Err(RotationError::NotOrthonormal { residual, det });
        }
        Ok(m)
    }

    /// Row-major nine-element slice, as used by the BOP file formats.
    pub fn from_row_major(values: &[f64], tol: f64) -> Result<Self, RotationError> {
        let mut rows = [[0.0; 3]; 3];
        for (i, v) in values.iter().take(9).enumerate() {
            rows[i / 3][i % 3] = *v;
        }
        Self::from_rows(rows, tol)
    }

    pub fn rows(&self) -> &[[f64; 3]; 3] {
        &self.0
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[row][col]
    }

    pub fn to_row_major(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        for (i, v) in self.0.iter().flatten().enumerate() {
            out[i] = *v;
        }
        out
    }

    pub fn column(&self, col: usize) -> [f64; 3] {
        [self.0[0][col], self.0[1][col], self.0[2][col]]
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        RotationMatrix([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// `max |(M^T M - I)_ij|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| self.0[k][i] * self.0[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// Largest elementwise difference to `other`.
    pub fn max_abs_diff(&self, other: &RotationMatrix) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Re-projects onto SO(3) by Gram-Schmidt on the first two columns.
    pub fn orthonormalized(&self) -> Result<Self, RotationError> {
        sixd_to_matrix(&matrix_to_sixd(self))
    }

    pub fn rot_x(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        RotationMatrix([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    }

    pub fn rot_y(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        RotationMatrix([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    }

    pub fn rot_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        RotationMatrix([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    }
}

impl Mul for RotationMatrix {
    type Output = RotationMatrix;

    fn mul(self, rhs: RotationMatrix) -> RotationMatrix {
        Mul::mul(&self, &rhs)
    }
}

impl Mul for &RotationMatrix {
    type Output = RotationMatrix;

    fn mul(self, rhs: &RotationMatrix) -> RotationMatrix {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        RotationMatrix(out)
    }
}

/// Intrinsic `XYZ` Euler angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerXYZ {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerXYZ {
    pub const fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        EulerXYZ { alpha, beta, gamma }
    }

    pub fn from_degrees(alpha: f64, beta: f64, gamma: f64) -> Self {
        EulerXYZ::new(alpha.to_radians(), beta.to_radians(), gamma.to_radians())
    }

    pub fn to_degrees(&self) -> [f64; 3] {
        [
            self.alpha.to_degrees(),
            self.beta.to_degrees(),
            self.gamma.to_degrees(),
        ]
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.is_finite() && self.beta.is_finite() && self.gamma.is_finite()
    }

    /// Each angle wrapped into `[0, 2pi)`.
    pub fn normalized(&self) -> Self {
        EulerXYZ::new(
            wrap_angle(self.alpha, TAU),
            wrap_angle(self.beta, TAU),
            wrap_angle(self.gamma, TAU),
        )
    }
}

/// `angle mod period` in `[0, period)`. `rem_euclid` may round up to exactly
/// `period`; that case folds to zero.
pub fn wrap_angle(angle: f64, period: f64) -> f64 {
    let r = angle.rem_euclid(period);
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Shortest distance between two angles on a circle of the given period.
pub fn circular_distance(a: f64, b: f64, period: f64) -> f64 {
    let d = wrap_angle(a - b, period);
    d.min(period - d)
}

pub fn euler_to_matrix(e: &EulerXYZ) -> RotationMatrix {
    let (sa, ca) = e.alpha.sin_cos();
    let (sb, cb) = e.beta.sin_cos();
    let (sg, cg) = e.gamma.sin_cos();
    RotationMatrix([
        [cb * cg, -cb * sg, sb],
        [ca * sg + sa * sb * cg, ca * cg - sa * sb * sg, -sa * cb],
        [sa * sg - ca * sb * cg, sa * cg + ca * sb * sg, ca * cb],
    ])
}

/// Decomposes `R` into intrinsic `XYZ` angles.
///
/// `alpha` and `gamma` come back in `(-pi, pi]` and `beta` in `[-pi/2, pi/2]`.
/// In gimbal lock (`|cos beta| < 1e-9`) `gamma` is set to zero and `alpha`
/// absorbs the residual rotation.
pub fn matrix_to_euler(r: &RotationMatrix) -> Result<EulerXYZ, RotationError> {
    let checked = RotationMatrix::from_rows(r.0, BOUNDARY_TOL)?;
    let m = &checked.0;
    let cos_beta = m[0][0].hypot(m[0][1]);
    let beta = m[0][2].atan2(cos_beta);
    if cos_beta < GIMBAL_TOL {
        let alpha = m[2][1].atan2(m[1][1]);
        return Ok(EulerXYZ::new(alpha, beta, 0.0));
    }
    let alpha = (-m[1][2]).atan2(m[2][2]);
    let gamma = (-m[0][1]).atan2(m[0][0]);
    Ok(EulerXYZ::new(alpha, beta, gamma))
}

/// Unit quaternion `w + xi + yj + zk`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitQuaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl UnitQuaternion {
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        UnitQuaternion { w, x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn negated(&self) -> Self {
        UnitQuaternion::new(-self.w, -self.x, -self.y, -self.z)
    }

    /// Picks the representative of `{q, -q}` with positive scalar part; at
    /// `w = 0` the first nonzero vector component is made positive.
    pub fn canonic(&self) -> Self {
        let flip = if self.w != 0.0 {
            self.w < 0.0
        } else {
            [self.x, self.y, self.z]
                .into_iter()
                .find(|v| *v != 0.0)
                .is_some_and(|v| v < 0.0)
        };
        if flip {
            self.negated()
        } else {
            *self
        }
    }
}

/// Shepperd's method, returning the canonic cover.
pub fn matrix_to_quaternion(r: &RotationMatrix) -> UnitQuaternion {
    let m = &r.0;
    let trace = r.trace();
    let q = if trace > m[0][0] && trace > m[1][1] && trace > m[2][2] {
        let s = 2.0 * (1.0 + trace).sqrt();
        UnitQuaternion::new(
            0.25 * s,
            (m[2][1] - m[1][2]) / s,
            (m[0][2] - m[2][0]) / s,
            (m[1][0] - m[0][1]) / s,
        )
    } else if m[0][0] >= m[1][1] && m[0][0] >= m[2][2] {
        let s = 2.0 * (1.0 + m[0][0] - m[1][1] - m[2][2]).sqrt();
        UnitQuaternion::new(
            (m[2][1] - m[1][2]) / s,
            0.25 * s,
            (m[0][1] + m[1][0]) / s,
            (m[0][2] + m[2][0]) / s,
        )
    } else if m[1][1] >= m[2][2] {
        let s = 2.0 * (1.0 + m[1][1] - m[0][0] - m[2][2]).sqrt();
        UnitQuaternion::new(
            (m[0][2] - m[2][0]) / s,
            (m[0][1] + m[1][0]) / s,
            0.25 * s,
            (m[1][2] + m[2][1]) / s,
        )
    } else {
        let s = 2.0 * (1.0 + m[2][2] - m[0][0] - m[1][1]).sqrt();
        UnitQuaternion::new(
            (m[1][0] - m[0][1]) / s,
            (m[0][2] + m[2][0]) / s,
            (m[1][2] + m[2][1]) / s,
            0.25 * s,
        )
    };
    let n = q.norm();
    UnitQuaternion::new(q.w / n, q.x / n, q.y / n, q.z / n).canonic()
}

pub fn quaternion_to_matrix(q: &UnitQuaternion) -> RotationMatrix {
    let n = q.norm();
    let (w, x, y, z) = (q.w / n, q.x / n, q.y / n, q.z / n);
    RotationMatrix([
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ])
}

/// The first two columns of a rotation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SixD {
    pub a1: [f64; 3],
    pub a2: [f64; 3],
}

pub fn matrix_to_sixd(r: &RotationMatrix) -> SixD {
    SixD {
        a1: r.column(0),
        a2: r.column(1),
    }
}

/// Gram-Schmidt on `(a1, a2)`, third column completed by the cross product.
pub fn sixd_to_matrix(s: &SixD) -> Result<RotationMatrix, RotationError> {
    if s.a1.iter().chain(s.a2.iter()).any(|v| !v.is_finite()) {
        return Err(RotationError::NonFinite);
    }
    let n1 = norm3(&s.a1);
    if n1 < 1e-12 {
        return Err(RotationError::Degenerate("first vector is zero"));
    }
    let b1 = scale3(&s.a1, 1.0 / n1);
    let proj = dot3(&b1, &s.a2);
    let u2 = [
        s.a2[0] - proj * b1[0],
        s.a2[1] - proj * b1[1],
        s.a2[2] - proj * b1[2],
    ];
    let n2 = norm3(&u2);
    if n2 < 1e-12 || n2 < 1e-9 * norm3(&s.a2) {
        return Err(RotationError::Degenerate("vectors are parallel or second is zero"));
    }
    let b2 = scale3(&u2, 1.0 / n2);
    let b3 = cross3(&b1, &b2);
    Ok(RotationMatrix([
        [b1[0], b2[0], b3[0]],
        [b1[1], b2[1], b3[1]],
        [b1[2], b2[2], b3[2]],
    ]))
}

/// Per-angle `(sin, cos)` pairs; row 0 holds sines, row 1 cosines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigRepr(pub [[f64; 3]; 2]);

pub fn euler_to_trig(e: &EulerXYZ) -> TrigRepr {
    let mut out = [[0.0; 3]; 2];
    for (j, angle) in e.as_array().into_iter().enumerate() {
        let (s, c) = angle.sin_cos();
        out[0][j] = s;
        out[1][j] = c;
    }
    TrigRepr(out)
}

/// Uniform sample from SO(3): a normalized 4-vector of standard Gaussians.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> RotationMatrix {
    loop {
        let q = UnitQuaternion::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        if q.norm() > 1e-6 {
            return quaternion_to_matrix(&q);
        }
    }
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

fn scale3(a: &[f64; 3], k: f64) -> [f64; 3] {
    [a[0] * k, a[1] * k, a[2] * k]
}

fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}
