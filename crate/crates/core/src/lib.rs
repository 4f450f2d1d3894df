//! Symmetry-aware rotation toolkit.
//!
//! Converts between rotation representations, maps poses of symmetric objects
//! to a canonic representative, encodes them in a continuous symmetry-resolved
//! form, scores pose estimates with a symmetry-sensitive recall metric, and
//! reads and writes BOP annotation files.

pub mod bop;
pub mod codec;
pub mod golden;
pub mod metrics;
pub mod rotation;
pub mod symmetry;
pub mod validation;

pub use codec::{canonic_matrix, clamp_to_canonic, sarr_flat, sarr_forward, sarr_inverse, sarr_unflatten, CanonicEuler, CanonicPose, SarrValue};
pub use rotation::{euler_to_matrix, matrix_to_euler, EulerXYZ, RotationMatrix, UnitQuaternion};
pub use symmetry::{Dataset, ObjectCatalog, SymmetryClass, SymmetryDegree};
