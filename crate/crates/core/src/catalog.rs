//! Available primitive objects that a plan may reference.
//!
//! Catalogs store dimensions in millimetres. Everything downstream of the
//! catalog works in metres.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::MM_TO_M;

/// Smallest principal-axis dimension (mm) accepted in the shipped catalog.
pub const MIN_DIM_MM: f64 = 10.0;
/// Largest principal-axis dimension (mm) accepted in the shipped catalog.
pub const MAX_DIM_MM: f64 = 250.0;

const DEFAULT_CATALOG_JSON: &str = include_str!("../../../data/catalog.json");

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("failed to read catalog: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse catalog: {0}")]
    Parse(String),
    #[error("duplicate object id `{0}`")]
    DuplicateId(String),
    #[error("object `{id}` has dimension {value} mm outside [{MIN_DIM_MM}, {MAX_DIM_MM}]")]
    DimensionOutOfRange { id: String, value: f64 },
    #[error("object `{id}`: {reason}")]
    InvalidDims { id: String, reason: String },
    #[error("unknown object `{0}`")]
    UnknownObject(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ShapeKind {
    Cuboid,
    Cylinder,
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeKind::Cuboid => f.write_str("CUBOID"),
            ShapeKind::Cylinder => f.write_str("CYLINDER"),
        }
    }
}

/// Geometry of a catalog object, millimetres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObjectShape {
    Cuboid { dims: [f64; 3] },
    Cylinder { radius: f64, length: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawObject", into = "RawObject")]
pub struct ObjectType {
    pub id: String,
    pub shape: ObjectShape,
}

#[derive(Serialize, Deserialize)]
struct RawObject {
    id: String,
    shape: ShapeKind,
    dims: Vec<f64>,
}

impl TryFrom<RawObject> for ObjectType {
    type Error = CatalogError;

    fn try_from(raw: RawObject) -> Result<Self, Self::Error> {
        let invalid = |reason: &str| CatalogError::InvalidDims {
            id: raw.id.clone(),
            reason: reason.to_string(),
        };
        let shape = match raw.shape {
            ShapeKind::Cuboid => {
                let dims: [f64; 3] = raw
                    .dims
                    .as_slice()
                    .try_into()
                    .map_err(|_| invalid("cuboid needs exactly 3 dims"))?;
                ObjectShape::Cuboid { dims }
            }
            ShapeKind::Cylinder => match raw.dims.as_slice() {
                [radius, length] => ObjectShape::Cylinder {
                    radius: *radius,
                    length: *length,
                },
                _ => return Err(invalid("cylinder needs [radius, length]")),
            },
        };
        let obj = ObjectType { id: raw.id, shape };
        if obj.raw_dims().iter().any(|d| !d.is_finite() || *d <= 0.0) {
            return Err(CatalogError::InvalidDims {
                id: obj.id,
                reason: "dimensions must be strictly positive".into(),
            });
        }
        Ok(obj)
    }
}

impl From<ObjectType> for RawObject {
    fn from(obj: ObjectType) -> Self {
        RawObject {
            shape: obj.kind(),
            dims: obj.raw_dims(),
            id: obj.id,
        }
    }
}

impl ObjectType {
    pub fn cuboid(id: impl Into<String>, dims: [f64; 3]) -> Self {
        ObjectType {
            id: id.into(),
            shape: ObjectShape::Cuboid { dims },
        }
    }

    pub fn cylinder(id: impl Into<String>, radius: f64, length: f64) -> Self {
        ObjectType {
            id: id.into(),
            shape: ObjectShape::Cylinder { radius, length },
        }
    }

    pub fn kind(&self) -> ShapeKind {
        match self.shape {
            ObjectShape::Cuboid { .. } => ShapeKind::Cuboid,
            ObjectShape::Cylinder { .. } => ShapeKind::Cylinder,
        }
    }

    /// Dimensions as stored in the catalog file (mm).
    pub fn raw_dims(&self) -> Vec<f64> {
        match self.shape {
            ObjectShape::Cuboid { dims } => dims.to_vec(),
            ObjectShape::Cylinder { radius, length } => vec![radius, length],
        }
    }

    /// Extents along the object's principal axes (mm). For a cylinder that
    /// is its diameter and length.
    pub fn principal_extents_mm(&self) -> Vec<f64> {
        match self.shape {
            ObjectShape::Cuboid { dims } => dims.to_vec(),
            ObjectShape::Cylinder { radius, length } => vec![2.0 * radius, length],
        }
    }

    pub fn radius_m(&self) -> Option<f64> {
        match self.shape {
            ObjectShape::Cylinder { radius, .. } => Some(radius * MM_TO_M),
            ObjectShape::Cuboid { .. } => None,
        }
    }

    fn out_of_range(&self) -> Option<f64> {
        self.principal_extents_mm()
            .into_iter()
            .find(|d| *d < MIN_DIM_MM || *d > MAX_DIM_MM)
    }
}

/// Normalizes an id the same way plan text is normalized, so that lookups
/// survive the upper-casing applied to LLM output.
pub fn normalize_id(id: &str) -> String {
    id.trim().to_uppercase().replace('-', "_")
}

#[derive(Debug, Clone, Default)]
pub struct Catalog {
    objects: Vec<ObjectType>,
    index: HashMap<String, usize>,
    warnings: Vec<String>,
}

impl PartialEq for Catalog {
    fn eq(&self, other: &Self) -> bool {
        self.objects == other.objects
    }
}

#[derive(Serialize, Deserialize)]
struct CatalogFile {
    objects: Vec<ObjectType>,
}

impl Catalog {
    pub fn new(objects: Vec<ObjectType>) -> Result<Self, CatalogError> {
        let mut index = HashMap::with_capacity(objects.len());
        for (i, obj) in objects.iter().enumerate() {
            if index.insert(normalize_id(&obj.id), i).is_some() {
                return Err(CatalogError::DuplicateId(obj.id.clone()));
            }
        }
        let warnings = objects
            .iter()
            .filter_map(|o| {
                o.out_of_range().map(|v| {
                    CatalogError::DimensionOutOfRange {
                        id: o.id.clone(),
                        value: v,
                    }
                    .to_string()
                })
            })
            .collect();
        Ok(Catalog {
            objects,
            index,
            warnings,
        })
    }

    /// Parses a user catalog. Out-of-range dimensions are kept and reported
    /// through [`Catalog::warnings`].
    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        let file: CatalogFile =
            serde_json::from_str(text).map_err(|e| CatalogError::Parse(e.to_string()))?;
        Catalog::new(file.objects)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CatalogError> {
        let text = std::fs::read_to_string(path)?;
        Catalog::from_json(&text)
    }

    /// The shipped catalog of 41 cuboids and cylinders, all within 10–250 mm.
    pub fn default_catalog() -> Self {
        Self::strict_from_json(DEFAULT_CATALOG_JSON).expect("shipped catalog is valid")
    }

    /// Like [`Catalog::from_json`] but rejects out-of-range dimensions.
    pub fn strict_from_json(text: &str) -> Result<Self, CatalogError> {
        let catalog = Catalog::from_json(text)?;
        if let Some(obj) = catalog.objects.iter().find(|o| o.out_of_range().is_some()) {
            return Err(CatalogError::DimensionOutOfRange {
                id: obj.id.clone(),
                value: obj.out_of_range().unwrap_or_default(),
            });
        }
        Ok(catalog)
    }

    pub fn lookup(&self, id: &str) -> Result<&ObjectType, CatalogError> {
        self.index
            .get(&normalize_id(id))
            .map(|&i| &self.objects[i])
            .ok_or_else(|| CatalogError::UnknownObject(id.to_string()))
    }

    pub fn objects(&self) -> &[ObjectType] {
        &self.objects
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn to_json(&self) -> String {
        let file = CatalogFile {
            objects: self.objects.clone(),
        };
        serde_json::to_string_pretty(&file).expect("catalog serializes")
    }

    /// Human-readable listing used in prompts.
    pub fn render_listing(&self) -> String {
        let mut out = String::new();
        for obj in &self.objects {
            let line = match obj.shape {
                ObjectShape::Cuboid { dims } => format!(
                    "- {}: cuboid, dimensions {} x {} x {} mm\n",
                    obj.id, dims[0], dims[1], dims[2]
                ),
                ObjectShape::Cylinder { radius, length } => format!(
                    "- {}: cylinder, radius {} mm, length {} mm\n",
                    obj.id, radius, length
                ),
            };
            out.push_str(&line);
        }
        out
    }
}
