//! Area-weighted surface sampling.

use craft_core::assembler::{Assembly, Solid};
use craft_core::geometry::Vec3;
use craft_core::mesh::{part_mesh, TriangleMesh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::MetricsError;

/// Candidate draws allowed per requested point before giving up.
pub const OVERSAMPLING: usize = 50;

/// Points closer than this to another part's boundary count as exterior.
const INTERIOR_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSample {
    pub source: String,
    pub seed: u64,
    pub points: Vec<Vec3>,
}

/// Picks triangles in proportion to their area.
struct AreaTable {
    cumulative: Vec<f64>,
}

impl AreaTable {
    fn new(mesh: &TriangleMesh) -> Option<AreaTable> {
        let mut total = 0.0;
        let cumulative: Vec<f64> = (0..mesh.triangles.len())
            .map(|i| {
                total += mesh.area(i);
                total
            })
            .collect();
        (total > 0.0).then_some(AreaTable { cumulative })
    }

    fn pick(&self, rng: &mut ChaCha8Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty table");
        let x = rng.gen::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= x).min(self.cumulative.len() - 1)
    }
}

fn point_on(mesh: &TriangleMesh, tri: usize, rng: &mut ChaCha8Rng) -> Vec3 {
    let [a, b, c] = mesh.triangle(tri);
    let s = rng.gen::<f64>().sqrt();
    let t = rng.gen::<f64>();
    a * (1.0 - s) + b * (s * (1.0 - t)) + c * (s * t)
}

pub fn sample_mesh(mesh: &TriangleMesh, source: &str, n: usize, seed: u64) -> Result<PointSample, MetricsError> {
    let table = AreaTable::new(mesh).ok_or(MetricsError::EmptyMesh)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| {
            let tri = table.pick(&mut rng);
            point_on(mesh, tri, &mut rng)
        })
        .collect();
    Ok(PointSample {
        source: source.to_string(),
        seed,
        points,
    })
}

fn strictly_inside(solid: &Solid, p: &Vec3) -> bool {
    solid.base.sdf(p) < -INTERIOR_EPS && solid.holes.iter().all(|h| h.sdf(p) > INTERIOR_EPS)
}

/// Samples the exterior surface of an assembly. Points on one part that
/// lie strictly inside another part are redrawn.
pub fn sample_assembly(assembly: &Assembly, n: usize, seed: u64) -> Result<PointSample, MetricsError> {
    let parts: Vec<(TriangleMesh, Solid)> = assembly.parts.iter().map(|p| (part_mesh(p), p.solid())).collect();
    sample_parts(&parts, "assembly", n, seed)
}

/// Samples the surfaces of `parts`, keeping only points that are not
/// strictly inside another entry's solid. An entry with an empty mesh only
/// occludes.
pub fn sample_parts(parts: &[(TriangleMesh, Solid)], source: &str, n: usize, seed: u64) -> Result<PointSample, MetricsError> {
    let mut mesh = TriangleMesh::default();
    let mut owner = Vec::new();
    for (i, (m, _)) in parts.iter().enumerate() {
        owner.extend(std::iter::repeat(i).take(m.triangles.len()));
        mesh.append(m);
    }
    let table = AreaTable::new(&mesh).ok_or(MetricsError::EmptyMesh)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    let mut draws = 0;
    while points.len() < n && draws < OVERSAMPLING * n {
        draws += 1;
        let tri = table.pick(&mut rng);
        let p = point_on(&mesh, tri, &mut rng);
        let own = owner[tri];
        let buried = parts
            .iter()
            .enumerate()
            .any(|(j, (_, s))| j != own && strictly_inside(s, &p));
        if !buried {
            points.push(p);
        }
    }
    let sample = PointSample {
        source: source.to_string(),
        seed,
        points,
    };
    if sample.points.len() < n {
        return Err(MetricsError::CannotReachCount {
            requested: n,
            found: sample.points.len(),
            partial: sample,
        });
    }
    Ok(sample)
}
