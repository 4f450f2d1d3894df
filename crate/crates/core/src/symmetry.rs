//! Catalog of object symmetry classes.
//!
//! Each class carries its per-axis symmetry degrees (`kappa`), the
//! elementary rotations that leave the object's appearance unchanged, and the
//! clamping style used to reach the canonic angle space. The catalog covers
//! T-LESS objects 1-30, ITODD objects 1-28 (two classifications) and eight
//! geometric primitives.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CatalogError {
    #[error("unknown dataset '{0}' (expected tless, itodd or primitive)")]
    UnknownDataset(String),
    #[error("object id {object_id} is not cataloged for dataset {dataset}")]
    UnknownObject { dataset: Dataset, object_id: u32 },
    #[error("unknown primitive '{0}'")]
    UnknownPrimitive(String),
    #[error("unknown class '{class}' for dataset {dataset}")]
    UnknownClass { dataset: Dataset, class: String },
    #[error("dataset {0} has no object ids; use a primitive name")]
    NoObjects(Dataset),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dataset {
    Tless,
    Itodd,
    Primitive,
}

impl Dataset {
    pub fn as_str(&self) -> &'static str {
        match self {
            Dataset::Tless => "tless",
            Dataset::Itodd => "itodd",
            Dataset::Primitive => "primitive",
        }
    }

    /// Inclusive object id range; primitives have none.
    pub fn object_ids(&self) -> Option<std::ops::RangeInclusive<u32>> {
        match self {
            Dataset::Tless => Some(1..=30),
            Dataset::Itodd => Some(1..=28),
            Dataset::Primitive => None,
        }
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dataset {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "tless" => Ok(Dataset::Tless),
            "itodd" => Ok(Dataset::Itodd),
            "primitive" | "primitives" => Ok(Dataset::Primitive),
            _ => Err(CatalogError::UnknownDataset(s.to_string())),
        }
    }
}

/// Degree of rotational symmetry about one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymmetryDegree {
    Finite(u32),
    Infinite,
}

impl SymmetryDegree {
    pub fn is_infinite(&self) -> bool {
        matches!(self, SymmetryDegree::Infinite)
    }

    pub fn finite(&self) -> Option<u32> {
        match self {
            SymmetryDegree::Finite(n) => Some(*n),
            SymmetryDegree::Infinite => None,
        }
    }

    /// Frequency multiplier of the trigonometric column: zero for continuous
    /// symmetry, otherwise the degree itself.
    pub fn lambda(&self) -> f64 {
        match self {
            SymmetryDegree::Finite(n) => *n as f64,
            SymmetryDegree::Infinite => 0.0,
        }
    }

    /// Width of the canonic interval, `2pi / n`; `None` for continuous symmetry.
    pub fn period(&self) -> Option<f64> {
        self.finite().map(|n| TAU / n as f64)
    }

    /// True when the angle contributes a `nu` cross-term (`1 < n < inf`).
    pub fn has_cross_term(&self) -> bool {
        matches!(self, SymmetryDegree::Finite(n) if *n > 1)
    }
}

impl fmt::Display for SymmetryDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymmetryDegree::Finite(n) => write!(f, "{n}"),
            SymmetryDegree::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for SymmetryDegree {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            SymmetryDegree::Finite(n) => serializer.serialize_u32(*n),
            SymmetryDegree::Infinite => serializer.serialize_str("inf"),
        }
    }
}

/// Per-axis degrees `[alpha, beta, gamma]` for the `x`, `y`, `z` axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SymmetryVector {
    pub alpha: SymmetryDegree,
    pub beta: SymmetryDegree,
    pub gamma: SymmetryDegree,
}

impl SymmetryVector {
    pub fn axes(&self) -> [SymmetryDegree; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    /// Largest finite degree, at least 1.
    pub fn max_finite(&self) -> u32 {
        self.axes()
            .iter()
            .filter_map(SymmetryDegree::finite)
            .max()
            .unwrap_or(1)
            .max(1)
    }

    pub fn is_asymmetric(&self) -> bool {
        self.axes() == [SymmetryDegree::Finite(1); 3]
    }
}

impl fmt::Display for SymmetryVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{}]", self.alpha, self.beta, self.gamma)
    }
}

impl Serialize for SymmetryVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(3))?;
        for d in self.axes() {
            seq.serialize_element(&d)?;
        }
        seq.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(&self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// One element of a class's symmetry set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Generator {
    /// Elementary rotation by `angle` radians.
    Discrete { axis: Axis, angle: f64 },
    /// Any rotation about the axis.
    Continuous { axis: Axis },
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Discrete { axis, angle } => {
                write!(f, "R_{:?}({:.4}deg)", axis, angle.to_degrees())
            }
            Generator::Continuous { axis } => write!(f, "R_{axis:?}(any)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClampStyle {
    Standard,
    /// Two-fold flip about `y`; the flip is resolved on `alpha` before clamping.
    ClassV,
}

impl fmt::Display for ClampStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClampStyle::Standard => "STANDARD",
            ClampStyle::ClassV => "CLASS_V",
        })
    }
}

/// A catalog entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SymmetryClass {
    /// Unique label such as `TLESS-II`, `ITODD-IX` or `CUBOID`.
    pub id: &'static str,
    /// Short name within its dataset: `II`, `IX`, `CUBOID`.
    pub name: &'static str,
    pub kappa: SymmetryVector,
    pub clamp_style: ClampStyle,
    pub dataset: Dataset,
}

impl SymmetryClass {
    /// Elementary rotations realizing the class's symmetry set, per axis:
    /// `2 pi j / n` for `j = 1..n-1` on finite axes, a continuous marker on
    /// infinite ones. Empty for asymmetric classes.
    pub fn generators(&self) -> Vec<Generator> {
        let mut out = Vec::new();
        for (axis, degree) in [Axis::X, Axis::Y, Axis::Z].into_iter().zip(self.kappa.axes()) {
            match degree {
                SymmetryDegree::Finite(n) => {
                    for j in 1..n {
                        out.push(Generator::Discrete {
                            axis,
                            angle: TAU * j as f64 / n as f64,
                        });
                    }
                }
                SymmetryDegree::Infinite => out.push(Generator::Continuous { axis }),
            }
        }
        out
    }

    pub fn is_class_v(&self) -> bool {
        self.clamp_style == ClampStyle::ClassV
    }
}

impl fmt::Display for SymmetryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id)
    }
}

const fn fin(n: u32) -> SymmetryDegree {
    SymmetryDegree::Finite(n)
}

const INF: SymmetryDegree = SymmetryDegree::Infinite;

const fn class(
    id: &'static str,
    name: &'static str,
    k: [SymmetryDegree; 3],
    dataset: Dataset,
) -> SymmetryClass {
    let clamp_style = match k {
        [SymmetryDegree::Finite(1), SymmetryDegree::Finite(2), SymmetryDegree::Finite(1)] => {
            ClampStyle::ClassV
        }
        _ => ClampStyle::Standard,
    };
    SymmetryClass {
        id,
        name,
        kappa: SymmetryVector {
            alpha: k[0],
            beta: k[1],
            gamma: k[2],
        },
        clamp_style,
        dataset,
    }
}

pub const TLESS_CLASSES: [SymmetryClass; 5] = [
    class("TLESS-I", "I", [fin(1), fin(1), fin(1)], Dataset::Tless),
    class("TLESS-II", "II", [fin(1), fin(1), fin(2)], Dataset::Tless),
    class("TLESS-III", "III", [fin(1), fin(1), fin(4)], Dataset::Tless),
    class("TLESS-IV", "IV", [fin(1), fin(1), INF], Dataset::Tless),
    class("TLESS-V", "V", [fin(1), fin(2), fin(1)], Dataset::Tless),
];

pub const ITODD_CLASSES: [SymmetryClass; 9] = [
    class("ITODD-I", "I", [fin(1), fin(1), fin(1)], Dataset::Itodd),
    class("ITODD-II", "II", [fin(2), fin(2), fin(2)], Dataset::Itodd),
    class("ITODD-III", "III", [fin(1), fin(1), INF], Dataset::Itodd),
    class("ITODD-IV", "IV", [fin(1), fin(1), fin(5)], Dataset::Itodd),
    class("ITODD-V", "V", [fin(1), fin(2), fin(1)], Dataset::Itodd),
    class("ITODD-VI", "VI", [fin(1), fin(1), fin(18)], Dataset::Itodd),
    class("ITODD-VII", "VII", [fin(1), fin(1), fin(23)], Dataset::Itodd),
    class("ITODD-VIII", "VIII", [fin(1), fin(1), fin(12)], Dataset::Itodd),
    class("ITODD-IX", "IX", [fin(2), fin(2), INF], Dataset::Itodd),
];

pub const PRIMITIVE_CLASSES: [SymmetryClass; 8] = [
    class("CUBOID", "CUBOID", [fin(2), fin(2), fin(2)], Dataset::Primitive),
    class("CUB_XY", "CUB_XY", [fin(2), fin(2), fin(4)], Dataset::Primitive),
    class("CUB_XZ", "CUB_XZ", [fin(2), fin(4), fin(2)], Dataset::Primitive),
    class("CUB_YZ", "CUB_YZ", [fin(4), fin(2), fin(2)], Dataset::Primitive),
    class("CUBE", "CUBE", [fin(4), fin(4), fin(4)], Dataset::Primitive),
    class("CYLINDER", "CYLINDER", [fin(2), fin(2), INF], Dataset::Primitive),
    class("TORUS", "TORUS", [fin(2), fin(2), INF], Dataset::Primitive),
    class("SPHERE", "SPHERE", [INF, INF, INF], Dataset::Primitive),
];

/// T-LESS class index (into `TLESS_CLASSES`) for object ids 1..=30.
const TLESS_OBJECT_CLASS: [usize; 30] = [
    3, 3, 3, 3, 1, 1, 1, 1, 1, 1, // 1-10
    1, 1, 3, 3, 3, 3, 3, 0, 4, 4, // 11-20
    0, 0, 4, 3, 1, 1, 2, 1, 1, 3, // 21-30
];

/// ITODD class index (into `ITODD_CLASSES`) for object ids 1..=28, alternative
/// classification: screw 23 continuous, objects 2, 4 and 5 asymmetric.
const ITODD_OBJECT_CLASS: [usize; 28] = [
    0, 0, 1, 0, 0, 0, 2, 3, 4, 0, // 1-10
    1, 8, 0, 5, 0, 0, 6, 4, 1, 0, // 11-20
    0, 0, 2, 2, 7, 0, 2, 8, // 21-28
];

/// Objects whose class differs in the original BOP classification.
const ITODD_ORIGINAL_OVERRIDES: [(u32, usize); 4] = [(2, 1), (4, 1), (5, 1), (23, 1)];

/// Object-id lookup over the embedded tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObjectCatalog {
    pub itodd_alternative: bool,
}

impl Default for ObjectCatalog {
    fn default() -> Self {
        ObjectCatalog {
            itodd_alternative: true,
        }
    }
}

/// A class together with the objects assigned to it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMembers {
    pub class: SymmetryClass,
    pub members: Vec<u32>,
}

impl Serialize for SymmetryClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("SymmetryClass", 6)?;
        s.serialize_field("id", self.id)?;
        s.serialize_field("name", self.name)?;
        s.serialize_field("dataset", &self.dataset)?;
        s.serialize_field("kappa", &self.kappa)?;
        s.serialize_field("clamp_style", &self.clamp_style)?;
        s.serialize_field("generators", &self.generators())?;
        s.end()
    }
}

/// One row of the catalog JSON export.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub dataset: Dataset,
    pub object_id: u32,
    pub class_id: &'static str,
    pub kappa: SymmetryVector,
    pub clamp_style: ClampStyle,
}

impl ObjectCatalog {
    pub fn new(itodd_alternative: bool) -> Self {
        ObjectCatalog { itodd_alternative }
    }

    pub fn lookup(&self, dataset: Dataset, object_id: u32) -> Result<&'static SymmetryClass, CatalogError> {
        let unknown = CatalogError::UnknownObject { dataset, object_id };
        match dataset {
            Dataset::Tless => TLESS_OBJECT_CLASS
                .get((object_id as usize).wrapping_sub(1))
                .map(|&i| &TLESS_CLASSES[i])
                .ok_or(unknown),
            Dataset::Itodd => {
                let mut idx = *ITODD_OBJECT_CLASS
                    .get((object_id as usize).wrapping_sub(1))
                    .ok_or(unknown)?;
                if !self.itodd_alternative {
                    if let Some((_, i)) =
                        ITODD_ORIGINAL_OVERRIDES.iter().find(|(id, _)| *id == object_id)
                    {
                        idx = *i;
                    }
                }
                Ok(&ITODD_CLASSES[idx])
            }
            Dataset::Primitive => Err(CatalogError::NoObjects(dataset)),
        }
    }

    /// All classes of a dataset with their member object ids, in table order.
    pub fn list_classes(&self, dataset: Dataset) -> Vec<ClassMembers> {
        let classes: &[SymmetryClass] = match dataset {
            Dataset::Tless => &TLESS_CLASSES,
            Dataset::Itodd => &ITODD_CLASSES,
            Dataset::Primitive => &PRIMITIVE_CLASSES,
        };
        classes
            .iter()
            .map(|class| {
                let members = dataset
                    .object_ids()
                    .into_iter()
                    .flatten()
                    .filter(|&id| self.lookup(dataset, id).map(|c| c.id) == Ok(class.id))
                    .collect();
                ClassMembers {
                    class: *class,
                    members,
                }
            })
            .collect()
    }

    /// Flat per-object export used for auditing the tables.
    pub fn export(&self, dataset: Dataset) -> Vec<CatalogEntry> {
        dataset
            .object_ids()
            .into_iter()
            .flatten()
            .filter_map(|object_id| {
                let class = self.lookup(dataset, object_id).ok()?;
                Some(CatalogEntry {
                    dataset,
                    object_id,
                    class_id: class.id,
                    kappa: class.kappa,
                    clamp_style: class.clamp_style,
                })
            })
            .collect()
    }

    /// Plain-text table, one line per class.
    pub fn export_text(&self, dataset: Dataset) -> String {
        let mut out = String::new();
        for entry in self.list_classes(dataset) {
            let members: Vec<String> = entry.members.iter().map(u32::to_string).collect();
            out.push_str(&format!(
                "{}\tkappa {}\t{}\tobjects [{}]\n",
                entry.class.id,
                entry.class.kappa,
                entry.class.clamp_style,
                members.join(",")
            ));
        }
        out
    }
}

/// Resolves a class by dataset-local name (`II`, `ix`) or primitive name.
pub fn class_by_name(dataset: Dataset, name: &str) -> Result<&'static SymmetryClass, CatalogError> {
    let classes: &'static [SymmetryClass] = match dataset {
        Dataset::Tless => &TLESS_CLASSES,
        Dataset::Itodd => &ITODD_CLASSES,
        Dataset::Primitive => &PRIMITIVE_CLASSES,
    };
    let wanted = name.trim();
    classes
        .iter()
        .find(|c| c.name.eq_ignore_ascii_case(wanted) || c.id.eq_ignore_ascii_case(wanted))
        .ok_or_else(|| match dataset {
            Dataset::Primitive => CatalogError::UnknownPrimitive(name.to_string()),
            _ => CatalogError::UnknownClass {
                dataset,
                class: name.to_string(),
            },
        })
}

pub fn primitive_class(name: &str) -> Result<&'static SymmetryClass, CatalogError> {
    class_by_name(Dataset::Primitive, name)
}

/// Every T-LESS and ITODD class.
pub fn dataset_classes() -> impl Iterator<Item = &'static SymmetryClass> {
    TLESS_CLASSES.iter().chain(ITODD_CLASSES.iter())
}

/// Every cataloged class, primitives included.
pub fn all_classes() -> impl Iterator<Item = &'static SymmetryClass> {
    dataset_classes().chain(PRIMITIVE_CLASSES.iter())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotation::{euler_to_matrix, EulerXYZ, RotationMatrix};

    fn kappa(c: &SymmetryClass) -> String {
        c.kappa.to_string()
    }

    #[test]
    fn table_lookups() {
        let cat = ObjectCatalog::default();
        let c = cat.lookup(Dataset::Tless, 27).unwrap();
        assert_eq!((c.name, kappa(c).as_str()), ("III", "[1,1,4]"));
        let c = cat.lookup(Dataset::Itodd, 17).unwrap();
        assert_eq!((c.name, kappa(c).as_str()), ("VII", "[1,1,23]"));
        let c = cat.lookup(Dataset::Itodd, 12).unwrap();
        assert_eq!((c.name, kappa(c).as_str()), ("IX", "[2,2,inf]"));
    }

    #[test]
    fn itodd_classification_flag() {
        let alt = ObjectCatalog::new(true);
        let orig = ObjectCatalog::new(false);
        let c = alt.lookup(Dataset::Itodd, 23).unwrap();
        assert_eq!((c.name, kappa(c).as_str()), ("III", "[1,1,inf]"));
        assert_ne!(orig.lookup(Dataset::Itodd, 23).unwrap().name, "III");
        for id in [2, 4, 5] {
            assert_eq!(alt.lookup(Dataset::Itodd, id).unwrap().name, "I");
            assert_ne!(orig.lookup(Dataset::Itodd, id).unwrap().name, "I");
        }
        for id in (1..=28).filter(|id| ![2, 4, 5, 23].contains(id)) {
            assert_eq!(
                alt.lookup(Dataset::Itodd, id).unwrap(),
                orig.lookup(Dataset::Itodd, id).unwrap()
            );
        }
    }

    #[test]
    fn out_of_range_ids() {
        let cat = ObjectCatalog::default();
        for (ds, id) in [(Dataset::Tless, 0), (Dataset::Tless, 31), (Dataset::Itodd, 29), (Dataset::Itodd, 0)] {
            assert!(matches!(cat.lookup(ds, id), Err(CatalogError::UnknownObject { .. })));
        }
        assert!(cat.lookup(Dataset::Primitive, 1).is_err());
        assert!("ycbv".parse::<Dataset>().is_err());
    }

    #[test]
    fn primitive_kappas() {
        let expect = [
            ("CUBOID", "[2,2,2]"),
            ("CUB_XY", "[2,2,4]"),
            ("CUB_XZ", "[2,4,2]"),
            ("CUB_YZ", "[4,2,2]"),
            ("CUBE", "[4,4,4]"),
            ("CYLINDER", "[2,2,inf]"),
            ("TORUS", "[2,2,inf]"),
            ("SPHERE", "[inf,inf,inf]"),
        ];
        for (name, k) in expect {
            assert_eq!(kappa(primitive_class(name).unwrap()), k, "{name}");
        }
        assert!(matches!(
            primitive_class("PYRAMID"),
            Err(CatalogError::UnknownPrimitive(_))
        ));
    }

    #[test]
    fn class_listings() {
        let cat = ObjectCatalog::default();
        let tless = cat.list_classes(Dataset::Tless);
        assert_eq!(tless.len(), 5);
        assert_eq!(tless[3].members, vec![1, 2, 3, 4, 13, 14, 15, 16, 17, 24, 30]);
        assert_eq!(tless[0].members, vec![18, 21, 22]);
        assert_eq!(tless[1].members, vec![5, 6, 7, 8, 9, 10, 11, 12, 25, 26, 28, 29]);
        assert_eq!(tless[2].members, vec![27]);
        assert_eq!(tless[4].members, vec![19, 20, 23]);

        let itodd = cat.list_classes(Dataset::Itodd);
        assert_eq!(itodd.len(), 9);
        assert_eq!(itodd[8].members, vec![12, 28]);
        assert_eq!(kappa(&itodd[8].class), "[2,2,inf]");
        assert_eq!(itodd[0].members, vec![1, 2, 4, 5, 6, 10, 13, 15, 16, 20, 21, 22, 26]);
        assert_eq!(itodd[1].members, vec![3, 11, 19]);
        assert_eq!(itodd[2].members, vec![7, 23, 24, 27]);
        assert_eq!(itodd[3].members, vec![8]);
        assert_eq!(itodd[4].members, vec![9, 18]);
        assert_eq!(itodd[5].members, vec![14]);
        assert_eq!(itodd[6].members, vec![17]);
        assert_eq!(itodd[7].members, vec![25]);

        assert_eq!(cat.list_classes(Dataset::Primitive).len(), 8);
    }

    #[test]
    fn members_partition_the_id_range() {
        for alt in [true, false] {
            let cat = ObjectCatalog::new(alt);
            for ds in [Dataset::Tless, Dataset::Itodd] {
                let mut all: Vec<u32> = cat
                    .list_classes(ds)
                    .into_iter()
                    .flat_map(|c| c.members)
                    .collect();
                all.sort_unstable();
                assert_eq!(all, ds.object_ids().unwrap().collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn class_v_entries() {
        let cat = ObjectCatalog::default();
        let v_ids = |ds: Dataset| -> Vec<u32> {
            ds.object_ids()
                .unwrap()
                .filter(|&id| cat.lookup(ds, id).unwrap().is_class_v())
                .collect()
        };
        assert_eq!(v_ids(Dataset::Tless), vec![19, 20, 23]);
        assert_eq!(v_ids(Dataset::Itodd), vec![9, 18]);
        for c in all_classes() {
            let is_121 = c.kappa.axes() == [fin(1), fin(2), fin(1)];
            assert_eq!(c.is_class_v(), is_121, "{}", c.id);
        }
    }

    #[test]
    fn generators_match_kappa_and_close_under_power() {
        for c in all_classes() {
            let gens = c.generators();
            if c.kappa.is_asymmetric() {
                assert!(gens.is_empty());
            }
            for (axis, degree) in [Axis::X, Axis::Y, Axis::Z].into_iter().zip(c.kappa.axes()) {
                let on_axis: Vec<_> = gens
                    .iter()
                    .filter(|g| match g {
                        Generator::Discrete { axis: a, .. } | Generator::Continuous { axis: a } => *a == axis,
                    })
                    .collect();
                match degree {
                    SymmetryDegree::Finite(n) => {
                        assert_eq!(on_axis.len(), n as usize - 1, "{} {:?}", c.id, axis);
                        // the smallest step raised to the n-th power is the identity
                        if let Some(Generator::Discrete { angle, .. }) = on_axis.first() {
                            let mut e = [0.0; 3];
                            e[axis.index()] = *angle;
                            let step = euler_to_matrix(&EulerXYZ::new(e[0], e[1], e[2]));
                            let mut acc = RotationMatrix::IDENTITY;
                            for _ in 0..n {
                                acc = acc * step;
                            }
                            assert!(acc.max_abs_diff(&RotationMatrix::IDENTITY) < 1e-9, "{}", c.id);
                        }
                    }
                    SymmetryDegree::Infinite => {
                        assert_eq!(on_axis.len(), 1);
                        assert!(matches!(on_axis[0], Generator::Continuous { .. }));
                    }
                }
            }
        }
    }

    #[test]
    fn json_export_shape() {
        let cat = ObjectCatalog::default();
        let rows = cat.export(Dataset::Tless);
        assert_eq!(rows.len(), 30);
        let v = serde_json::to_value(&rows[0]).unwrap();
        assert_eq!(
            v,
            serde_json::json!({
                "dataset": "tless", "object_id": 1, "class_id": "TLESS-IV",
                "kappa": [1, 1, "inf"], "clamp_style": "STANDARD"
            })
        );
        let v = serde_json::to_value(&cat.export(Dataset::Tless)[18]).unwrap();
        assert_eq!(v["clamp_style"], "CLASS_V");
    }

    #[test]
    fn names_resolve_case_insensitively() {
        assert_eq!(class_by_name(Dataset::Itodd, "ix").unwrap().id, "ITODD-IX");
        assert_eq!(class_by_name(Dataset::Tless, "TLESS-II").unwrap().id, "TLESS-II");
        assert!(class_by_name(Dataset::Tless, "XII").is_err());
    }
}
