//! Visual similarity between a generated craft and a reference mesh.
//!
//! Both surfaces are normalised independently (AABB centre at the origin,
//! AABB diagonal 1), sampled uniformly by area, and compared with chamfer
//! distance, Hausdorff distance and F-score.

pub mod distance;
pub mod obj;
pub mod sample;

use std::path::Path;

use craft_core::assembler::Assembly;
use craft_core::mesh::TriangleMesh;
use serde::Serialize;

pub use distance::{chamfer, directed_distances, fscore, hausdorff, FScore, KdTree, NearestIndex, BRUTE_FORCE_BELOW};
pub use obj::{load_mesh, normalize_pair, normalization, parse_obj, Normalization};
pub use sample::{sample_assembly, sample_mesh, sample_parts, PointSample, OVERSAMPLING};

pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_THRESHOLD: f64 = 0.1;
pub const DEFAULT_SEED: u64 = 7;

pub const CHAMFER_VARIANT: &str = "0.5*(mean_a min_b |a-b| + mean_b min_a |a-b|), euclidean, not squared";
pub const NORMALIZATION: &str = "each surface centred on its AABB centre and scaled to AABB diagonal 1";

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed OBJ: {0}")]
    Parse(String),
    #[error("mesh has no usable triangles")]
    EmptyMesh,
    #[error("mesh has zero extent")]
    DegenerateExtent,
    #[error("only {found} of {requested} exterior points found")]
    CannotReachCount {
        requested: usize,
        found: usize,
        partial: PointSample,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsConfig {
    pub samples: usize,
    pub threshold: f64,
    pub seed: u64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            samples: DEFAULT_SAMPLES,
            threshold: DEFAULT_THRESHOLD,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub chamfer: f64,
    pub hausdorff: f64,
    pub fscore: f64,
    pub precision: f64,
    pub recall: f64,
    pub threshold: f64,
    pub samples: usize,
    pub seed: u64,
    pub chamfer_variant: &'static str,
    pub normalization: &'static str,
}

/// Scores two point samples that are already in the normalised frame.
/// `a` is the generated craft, `b` the reference.
pub fn score(a: &PointSample, b: &PointSample, config: &MetricsConfig) -> MetricsReport {
    let ia = NearestIndex::new(&a.points);
    let ib = NearestIndex::new(&b.points);
    let ab = ib.distances(&a.points);
    let ba = ia.distances(&b.points);
    let mean = |d: &[f64]| d.iter().sum::<f64>() / d.len() as f64;
    let max = |d: &[f64]| d.iter().copied().fold(0.0, f64::max);
    let f = FScore::from_distances(&ab, &ba, config.threshold);
    MetricsReport {
        chamfer: 0.5 * (mean(&ab) + mean(&ba)),
        hausdorff: max(&ab).max(max(&ba)),
        fscore: f.fscore,
        precision: f.precision,
        recall: f.recall,
        threshold: config.threshold,
        samples: config.samples,
        seed: config.seed,
        chamfer_variant: CHAMFER_VARIANT,
        normalization: NORMALIZATION,
    }
}

/// Compares a generated mesh against a reference mesh.
pub fn compare_meshes(generated: &TriangleMesh, reference: &TriangleMesh, config: &MetricsConfig) -> Result<MetricsReport, MetricsError> {
    let a = sample_mesh(generated, "generated", config.samples, config.seed)?;
    let b = sample_mesh(reference, "reference", config.samples, config.seed)?;
    let a = normalization(generated)?.apply(&a);
    let b = normalization(reference)?.apply(&b);
    Ok(score(&a, &b, config))
}

/// Compares a compiled assembly against a reference mesh. Only the
/// assembly's exterior surface is sampled.
pub fn compare_assembly(assembly: &Assembly, reference: &TriangleMesh, config: &MetricsConfig) -> Result<MetricsReport, MetricsError> {
    let mesh = assembly_mesh(assembly);
    let a = sample_assembly(assembly, config.samples, config.seed)?;
    let b = sample_mesh(reference, "reference", config.samples, config.seed)?;
    let a = normalization(&mesh)?.apply(&a);
    let b = normalization(reference)?.apply(&b);
    Ok(score(&a, &b, config))
}

/// All part meshes of an assembly merged into one.
pub fn assembly_mesh(assembly: &Assembly) -> TriangleMesh {
    let mut out = TriangleMesh::default();
    for (_, m) in craft_core::mesh::assembly_meshes(assembly) {
        out.append(&m);
    }
    out
}

pub fn compare_files(generated: &Path, reference: &Path, config: &MetricsConfig) -> Result<MetricsReport, MetricsError> {
    compare_meshes(&load_mesh(generated)?, &load_mesh(reference)?, config)
}
