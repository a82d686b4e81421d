//! OBJ loading and per-mesh normalisation.

use std::io::BufReader;
use std::path::Path;

use craft_core::geometry::{Aabb, Vec3};
use craft_core::mesh::TriangleMesh;

use crate::sample::PointSample;
use crate::MetricsError;

/// Triangles smaller than this are dropped on load.
pub const MIN_TRIANGLE_AREA: f64 = 1e-12;

pub fn load_mesh(path: &Path) -> Result<TriangleMesh, MetricsError> {
    let text = std::fs::read_to_string(path).map_err(|source| MetricsError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_obj(&text)
}

/// Parses OBJ text. Polygons are fan-triangulated; every object in the
/// file is merged into one mesh.
pub fn parse_obj(text: &str) -> Result<TriangleMesh, MetricsError> {
    let options = tobj::LoadOptions {
        single_index: true,
        triangulate: true,
        ..Default::default()
    };
    let (models, _) = tobj::load_obj_buf(&mut BufReader::new(text.as_bytes()), &options, |_| {
        Err(tobj::LoadError::OpenFileFailed)
    })
    .map_err(|e| MetricsError::Parse(e.to_string()))?;

    let mut mesh = TriangleMesh::default();
    for m in &models {
        let off = mesh.vertices.len();
        mesh.vertices.extend(
            m.mesh
                .positions
                .chunks_exact(3)
                .map(|p| Vec3::new(p[0] as f64, p[1] as f64, p[2] as f64)),
        );
        for t in m.mesh.indices.chunks_exact(3) {
            mesh.triangles
                .push([off + t[0] as usize, off + t[1] as usize, off + t[2] as usize]);
        }
    }
    let keep: Vec<[usize; 3]> = (0..mesh.triangles.len())
        .filter(|&i| mesh.area(i) >= MIN_TRIANGLE_AREA)
        .map(|i| mesh.triangles[i])
        .collect();
    mesh.triangles = keep;
    if mesh.triangles.is_empty() {
        return Err(MetricsError::EmptyMesh);
    }
    Ok(mesh)
}

/// Maps a mesh's AABB centre to the origin and its AABB diagonal to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub center: Vec3,
    pub scale: f64,
}

impl Normalization {
    pub fn point(&self, p: &Vec3) -> Vec3 {
        (p - self.center) * self.scale
    }

    pub fn apply(&self, s: &PointSample) -> PointSample {
        PointSample {
            source: s.source.clone(),
            seed: s.seed,
            points: s.points.iter().map(|p| self.point(p)).collect(),
        }
    }

    pub fn mesh(&self, m: &TriangleMesh) -> TriangleMesh {
        TriangleMesh {
            vertices: m.vertices.iter().map(|p| self.point(p)).collect(),
            triangles: m.triangles.clone(),
        }
    }
}

/// Bounds of the vertices that triangles actually use.
fn used_bounds(m: &TriangleMesh) -> Aabb {
    let mut bb = Aabb::empty();
    for t in &m.triangles {
        for &i in t {
            bb.grow_point(&m.vertices[i]);
        }
    }
    bb
}

pub fn normalization(m: &TriangleMesh) -> Result<Normalization, MetricsError> {
    if m.triangles.is_empty() {
        return Err(MetricsError::EmptyMesh);
    }
    let bb = used_bounds(m);
    let d = bb.diagonal();
    if !(d > 0.0) || !d.is_finite() {
        return Err(MetricsError::DegenerateExtent);
    }
    Ok(Normalization {
        center: bb.center(),
        scale: 1.0 / d,
    })
}

pub fn normalize_pair(a: &TriangleMesh, b: &TriangleMesh) -> Result<(TriangleMesh, TriangleMesh), MetricsError> {
    Ok((normalization(a)?.mesh(a), normalization(b)?.mesh(b)))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const CUBE: &str = "\
v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nv 0 0 1\nv 1 0 1\nv 1 1 1\nv 0 1 1\n\
f 1 3 2\nf 1 4 3\nf 5 6 7\nf 5 7 8\nf 1 2 6\nf 1 6 5\n\
f 2 3 7\nf 2 7 6\nf 3 4 8\nf 3 8 7\nf 4 1 5\nf 4 5 8\n";

    #[test]
    fn unit_cube() {
        let m = parse_obj(CUBE).unwrap();
        assert_eq!(m.vertices.len(), 8);
        assert_eq!(m.triangles.len(), 12);
        let total: f64 = (0..12).map(|i| m.area(i)).sum();
        assert!((total - 6.0).abs() < 1e-12);
    }

    #[test]
    fn quads_become_two_triangles() {
        let m = parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nv 0 0 1\nv 1 0 1\nf 1 2 3 4\nf 1 2 6 5\n").unwrap();
        assert_eq!(m.triangles.len(), 4);
    }

    #[test]
    fn degenerate_and_empty() {
        assert!(matches!(parse_obj(""), Err(MetricsError::EmptyMesh)));
        // Collinear points only.
        assert!(matches!(
            parse_obj("v 0 0 0\nv 1 0 0\nv 2 0 0\nf 1 2 3\n"),
            Err(MetricsError::EmptyMesh)
        ));
        let m = parse_obj("v 0 0 0\nv 1 0 0\nv 2 0 0\nv 0 1 0\nf 1 2 3\nf 1 2 4\n").unwrap();
        assert_eq!(m.triangles.len(), 1);
    }

    #[test]
    fn malformed_face_is_a_parse_error() {
        assert!(matches!(parse_obj("v 0 0 0\nf 1 2 x\n"), Err(MetricsError::Parse(_))));
    }

    #[test]
    fn zero_extent_is_rejected() {
        let m = TriangleMesh {
            vertices: vec![Vec3::zeros(); 3],
            triangles: vec![[0, 1, 2]],
        };
        assert!(matches!(normalization(&m), Err(MetricsError::DegenerateExtent)));
    }
}
