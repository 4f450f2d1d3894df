//! Reference fixture shared with foreign-language bindings.
//!
//! For every T-LESS and ITODD class a seeded batch of uniform random rotations
//! is pushed through the canonic pipeline; the inputs, canonic matrices and flat
//! encodings are stored so that any binding can be checked for parity.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codec::{canonic_matrix, CodecError};
use crate::metrics::{ar_c, rotation_error};
use crate::rotation::random_rotation;
use crate::symmetry::{dataset_classes, ObjectCatalog};

pub const GOLDEN_SEED: u64 = 0x5a22_2024;
pub const GOLDEN_ROTATIONS_PER_CLASS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenCase {
    pub input: [f64; 9],
    pub canonic: [f64; 9],
    pub sarr: [f64; 6],
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenClass {
    pub dataset: String,
    pub class_id: String,
    /// Lowest object id in the class, for `(dataset, object id)` lookups.
    pub object_id: u32,
    pub cases: Vec<GoldenCase>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenErrorCase {
    pub pred: [f64; 9],
    pub gt: [f64; 9],
    pub error_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenArcCase {
    pub errors_deg: Vec<f64>,
    pub ar_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenFixture {
    pub seed: u64,
    pub rotations_per_class: usize,
    pub itodd_alternative: bool,
    pub classes: Vec<GoldenClass>,
    pub rotation_errors: Vec<GoldenErrorCase>,
    pub ar_c: Vec<GoldenArcCase>,
}

pub fn generate(per_class: usize, seed: u64) -> Result<GoldenFixture, CodecError> {
    let catalog = ObjectCatalog::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut classes = Vec::new();
    for class in dataset_classes() {
        let object_id = catalog
            .list_classes(class.dataset)
            .into_iter()
            .find(|c| c.class.id == class.id)
            .and_then(|c| c.members.first().copied())
            .unwrap_or(0);
        let mut cases = Vec::with_capacity(per_class);
        for _ in 0..per_class {
            let r = random_rotation(&mut rng);
            let pose = canonic_matrix(&r, class)?;
            cases.push(GoldenCase {
                input: r.to_row_major(),
                canonic: pose.rotation.to_row_major(),
                sarr: pose.value.flat(),
                degenerate: pose.degenerate,
            });
        }
        classes.push(GoldenClass {
            dataset: class.dataset.to_string(),
            class_id: class.id.to_string(),
            object_id,
            cases,
        });
    }

    let rotation_errors = (0..32)
        .map(|_| {
            let pred = random_rotation(&mut rng);
            let gt = random_rotation(&mut rng);
            GoldenErrorCase {
                pred: pred.to_row_major(),
                gt: gt.to_row_major(),
                error_deg: rotation_error(&pred, &gt),
            }
        })
        .collect();

    let ar_c_cases = [
        vec![0.0, 0.0, 0.0],
        vec![180.0],
        vec![1.0, 3.0, 8.0, 20.0, 50.0],
        vec![2.0, 5.0, 10.0, 15.0, 25.0, 40.0, 40.5],
    ]
    .into_iter()
    .map(|errors_deg| GoldenArcCase {
        ar_c: ar_c(&errors_deg).expect("non-empty"),
        errors_deg,
    })
    .collect();

    Ok(GoldenFixture {
        seed,
        rotations_per_class: per_class,
        itodd_alternative: catalog.itodd_alternative,
        classes,
        rotation_errors,
        ar_c: ar_c_cases,
    })
}

fn line<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("fixture values are finite")
}

/// JSON text with one case per line, stable across runs.
pub fn to_json(fixture: &GoldenFixture) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{{");
    let _ = writeln!(out, "  \"seed\": {},", fixture.seed);
    let _ = writeln!(out, "  \"rotations_per_class\": {},", fixture.rotations_per_class);
    let _ = writeln!(out, "  \"itodd_alternative\": {},", fixture.itodd_alternative);
    let _ = writeln!(out, "  \"classes\": [");
    for (ci, class) in fixture.classes.iter().enumerate() {
        let _ = writeln!(
            out,
            "    {{\"dataset\": {}, \"class_id\": {}, \"object_id\": {}, \"cases\": [",
            line(&class.dataset),
            line(&class.class_id),
            class.object_id
        );
        for (i, case) in class.cases.iter().enumerate() {
            let sep = if i + 1 == class.cases.len() { "" } else { "," };
            let _ = writeln!(out, "      {}{sep}", line(case));
        }
        let sep = if ci + 1 == fixture.classes.len() { "" } else { "," };
        let _ = writeln!(out, "    ]}}{sep}");
    }
    let _ = writeln!(out, "  ],");
    let _ = writeln!(out, "  \"rotation_errors\": [");
    for (i, case) in fixture.rotation_errors.iter().enumerate() {
        let sep = if i + 1 == fixture.rotation_errors.len() { "" } else { "," };
        let _ = writeln!(out, "    {}{sep}", line(case));
    }
    let _ = writeln!(out, "  ],");
    let _ = writeln!(out, "  \"ar_c\": [");
    for (i, case) in fixture.ar_c.iter().enumerate() {
        let sep = if i + 1 == fixture.ar_c.len() { "" } else { "," };
        let _ = writeln!(out, "    {}{sep}", line(case));
    }
    let _ = writeln!(out, "  ]");
    out.push_str("}\n");
    out
}

pub fn from_json(text: &str) -> Result<GoldenFixture, serde_json::Error> {
    serde_json::from_str(text)
}
