//! Triangle meshes for export: primitive tessellation, BSP subtraction for
//! holes, and Wavefront OBJ writing.
//!
//! Meshes are a by-product. Collision and physics use the analytic solids.

use std::fmt::Write as _;

use crate::assembler::{Assembly, PlacedPart};
use crate::geometry::{Axis, Primitive, Vec3};

pub const CYLINDER_SEGMENTS: usize = 64;

const PLANE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
}

impl TriangleMesh {
    pub fn triangle(&self, i: usize) -> [Vec3; 3] {
        let t = self.triangles[i];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    pub fn area(&self, i: usize) -> f64 {
        let [a, b, c] = self.triangle(i);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn append(&mut self, other: &TriangleMesh) {
        let off = self.vertices.len();
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles
            .extend(other.triangles.iter().map(|t| [t[0] + off, t[1] + off, t[2] + off]));
    }

    /// Builds an indexed mesh, sharing bit-identical vertices.
    fn from_polygons(polys: &[Polygon]) -> TriangleMesh {
        let mut mesh = TriangleMesh::default();
        let mut index = std::collections::HashMap::new();
        let mut id = |mesh: &mut TriangleMesh, v: Vec3| -> usize {
            let key = [v.x.to_bits(), v.y.to_bits(), v.z.to_bits()];
            *index.entry(key).or_insert_with(|| {
                mesh.vertices.push(v);
                mesh.vertices.len() - 1
            })
        };
        for p in polys {
            let ids: Vec<usize> = p.vertices.iter().map(|&v| id(&mut mesh, v)).collect();
            for i in 1..ids.len().saturating_sub(1) {
                let tri = [ids[0], ids[i], ids[i + 1]];
                if tri[0] != tri[1] && tri[1] != tri[2] && tri[0] != tri[2] {
                    mesh.triangles.push(tri);
                }
            }
        }
        mesh
    }
}

#[derive(Debug, Clone, Copy)]
struct Plane {
    normal: Vec3,
    w: f64,
}

impl Plane {
    fn from_points(a: Vec3, b: Vec3, c: Vec3) -> Option<Plane> {
        let n = (b - a).cross(&(c - a));
        let len = n.norm();
        if len < 1e-18 {
            return None;
        }
        let normal = n / len;
        Some(Plane {
            normal,
            w: normal.dot(&a),
        })
    }

    fn flip(&mut self) {
        self.normal = -self.normal;
        self.w = -self.w;
    }

    /// Splits `poly` by this plane into the four output lists.
    fn split(
        &self,
        poly: &Polygon,
        coplanar_front: &mut Vec<Polygon>,
        coplanar_back: &mut Vec<Polygon>,
        front: &mut Vec<Polygon>,
        back: &mut Vec<Polygon>,
    ) {
        const COPLANAR: u8 = 0;
        const FRONT: u8 = 1;
        const BACK: u8 = 2;
        let mut kind = 0u8;
        let types: Vec<u8> = poly
            .vertices
            .iter()
            .map(|v| {
                let t = self.normal.dot(v) - self.w;
                let k = if t < -PLANE_EPS {
                    BACK
                } else if t > PLANE_EPS {
                    FRONT
                } else {
                    COPLANAR
                };
                kind |= k;
                k
            })
            .collect();
        match kind {
            COPLANAR => {
                if self.normal.dot(&poly.plane.normal) > 0.0 {
                    coplanar_front.push(poly.clone());
                } else {
                    coplanar_back.push(poly.clone());
                }
            }
            FRONT => front.push(poly.clone()),
            BACK => back.push(poly.clone()),
            _ => {
                let (mut f, mut b) = (Vec::new(), Vec::new());
                let n = poly.vertices.len();
                for i in 0..n {
                    let j = (i + 1) % n;
                    let (ti, tj) = (types[i], types[j]);
                    let (vi, vj) = (poly.vertices[i], poly.vertices[j]);
                    if ti != BACK {
                        f.push(vi);
                    }
                    if ti != FRONT {
                        b.push(vi);
                    }
                    if (ti | tj) == (FRONT | BACK) {
                        let t = (self.w - self.normal.dot(&vi)) / self.normal.dot(&(vj - vi));
                        let v = vi + (vj - vi) * t;
                        f.push(v);
                        b.push(v);
                    }
                }
                if f.len() >= 3 {
                    front.push(Polygon {
                        vertices: f,
                        plane: poly.plane,
                    });
                }
                if b.len() >= 3 {
                    back.push(Polygon {
                        vertices: b,
                        plane: poly.plane,
                    });
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Polygon {
    vertices: Vec<Vec3>,
    plane: Plane,
}

impl Polygon {
    fn new(vertices: Vec<Vec3>) -> Option<Polygon> {
        let plane = Plane::from_points(vertices[0], vertices[1], vertices[2])?;
        Some(Polygon { vertices, plane })
    }

    fn flip(&mut self) {
        self.vertices.reverse();
        self.plane.flip();
    }
}

#[derive(Default)]
struct Node {
    plane: Option<Plane>,
    front: Option<Box<Node>>,
    back: Option<Box<Node>>,
    polygons: Vec<Polygon>,
}

impl Node {
    fn new(polys: Vec<Polygon>) -> Node {
        let mut n = Node::default();
        n.build(polys);
        n
    }

    fn invert(&mut self) {
        for p in &mut self.polygons {
            p.flip();
        }
        if let Some(p) = &mut self.plane {
            p.flip();
        }
        if let Some(f) = &mut self.front {
            f.invert();
        }
        if let Some(b) = &mut self.back {
            b.invert();
        }
        std::mem::swap(&mut self.front, &mut self.back);
    }

    fn clip_polygons(&self, polys: Vec<Polygon>) -> Vec<Polygon> {
        let Some(plane) = self.plane else {
            return polys;
        };
        let (mut front, mut back) = (Vec::new(), Vec::new());
        for p in &polys {
            let (mut cf, mut cb) = (Vec::new(), Vec::new());
            plane.split(p, &mut cf, &mut cb, &mut front, &mut back);
            front.append(&mut cf);
            back.append(&mut cb);
        }
        let front = match &self.front {
            Some(f) => f.clip_polygons(front),
            None => front,
        };
        let back = match &self.back {
            Some(b) => b.clip_polygons(back),
            None => Vec::new(),
        };
        let mut out = front;
        out.extend(back);
        out
    }

    fn clip_to(&mut self, other: &Node) {
        self.polygons = other.clip_polygons(std::mem::take(&mut self.polygons));
        if let Some(f) = &mut self.front {
            f.clip_to(other);
        }
        if let Some(b) = &mut self.back {
            b.clip_to(other);
        }
    }

    fn all_polygons(&self) -> Vec<Polygon> {
        let mut out = self.polygons.clone();
        if let Some(f) = &self.front {
            out.extend(f.all_polygons());
        }
        if let Some(b) = &self.back {
            out.extend(b.all_polygons());
        }
        out
    }

    fn build(&mut self, polys: Vec<Polygon>) {
        if polys.is_empty() {
            return;
        }
        let plane = *self.plane.get_or_insert(polys[0].plane);
        let (mut front, mut back) = (Vec::new(), Vec::new());
        for p in &polys {
            let (mut cf, mut cb) = (Vec::new(), Vec::new());
            plane.split(p, &mut cf, &mut cb, &mut front, &mut back);
            self.polygons.append(&mut cf);
            self.polygons.append(&mut cb);
        }
        if !front.is_empty() {
            self.front.get_or_insert_with(Default::default).build(front);
        }
        if !back.is_empty() {
            self.back.get_or_insert_with(Default::default).build(back);
        }
    }
}

fn subtract(a: Vec<Polygon>, b: Vec<Polygon>) -> Vec<Polygon> {
    let mut a = Node::new(a);
    let mut b = Node::new(b);
    a.invert();
    a.clip_to(&b);
    b.clip_to(&a);
    b.invert();
    b.clip_to(&a);
    b.invert();
    a.build(b.all_polygons());
    a.invert();
    a.all_polygons()
}

fn box_polygons(center: Vec3, half: Vec3) -> Vec<Polygon> {
    // Corner index bits: x=1, y=2, z=4. Each face listed counter-clockwise
    // seen from outside.
    const FACES: [[usize; 4]; 6] = [
        [0, 4, 6, 2],
        [1, 3, 7, 5],
        [0, 1, 5, 4],
        [2, 6, 7, 3],
        [0, 2, 3, 1],
        [4, 5, 7, 6],
    ];
    let corner = |i: usize| {
        center
            + Vec3::new(
                if i & 1 == 0 { -half.x } else { half.x },
                if i & 2 == 0 { -half.y } else { half.y },
                if i & 4 == 0 { -half.z } else { half.z },
            )
    };
    FACES
        .iter()
        .filter_map(|f| Polygon::new(f.iter().map(|&i| corner(i)).collect()))
        .collect()
}

fn cylinder_polygons(center: Vec3, axis: Axis, radius: f64, half_length: f64, segments: usize) -> Vec<Polygon> {
    let (u, _) = axis.others();
    let (eu, ea) = (u.unit(), axis.unit());
    // Ring runs counter-clockwise around +axis.
    let ev = ea.cross(&eu);
    let ring: Vec<Vec3> = (0..segments)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / segments as f64;
            eu * (radius * t.cos()) + ev * (radius * t.sin())
        })
        .collect();
    let top = center + ea * half_length;
    let bottom = center - ea * half_length;
    let mut out = Vec::with_capacity(segments + 2);
    out.extend(Polygon::new(ring.iter().map(|r| top + r).collect()));
    out.extend(Polygon::new(ring.iter().rev().map(|r| bottom + r).collect()));
    for i in 0..segments {
        let j = (i + 1) % segments;
        out.extend(Polygon::new(vec![
            bottom + ring[i],
            bottom + ring[j],
            top + ring[j],
            top + ring[i],
        ]));
    }
    out
}

fn primitive_polygons(p: &Primitive, segments: usize) -> Vec<Polygon> {
    match *p {
        Primitive::Box { center, half } => box_polygons(center, half),
        Primitive::Cylinder {
            center,
            axis,
            radius,
            half_length,
        } => cylinder_polygons(center, axis, radius, half_length, segments),
    }
}

/// Closed surface of a bare primitive.
pub fn tessellate(p: &Primitive, segments: usize) -> TriangleMesh {
    TriangleMesh::from_polygons(&primitive_polygons(p, segments))
}

/// Surface of a placed part with its holes subtracted.
pub fn part_mesh(part: &PlacedPart) -> TriangleMesh {
    let solid = part.solid();
    let mut polys = primitive_polygons(&solid.base, CYLINDER_SEGMENTS);
    for hole in &solid.holes {
        // Stretch holes a little past the owner's faces along their axis so
        // through holes open cleanly instead of leaving coplanar slivers.
        let cutter = match *hole {
            Primitive::Box { center, mut half } => {
                let own = solid.base.half_extents();
                for k in 0..3 {
                    if (hole.aabb().min[k] - solid.base.aabb().min[k]).abs() < 1e-12
                        || (hole.aabb().max[k] - solid.base.aabb().max[k]).abs() < 1e-12
                    {
                        half[k] += 1e-6 * own[k].max(1.0);
                    }
                }
                Primitive::Box { center, half }
            }
            Primitive::Cylinder {
                center,
                axis,
                radius,
                half_length,
            } => Primitive::Cylinder {
                center,
                axis,
                radius,
                half_length: half_length + 1e-6,
            },
        };
        polys = subtract(polys, primitive_polygons(&cutter, CYLINDER_SEGMENTS));
    }
    TriangleMesh::from_polygons(&polys)
}

/// Part meshes in plan order.
pub fn assembly_meshes(assembly: &Assembly) -> Vec<(String, TriangleMesh)> {
    assembly
        .parts
        .iter()
        .map(|p| (p.name().to_string(), part_mesh(p)))
        .collect()
}

/// OBJ text with one `o` group per named mesh.
pub fn write_obj(meshes: &[(String, TriangleMesh)]) -> String {
    let mut out = String::new();
    let mut offset = 1;
    for (name, mesh) in meshes {
        let _ = writeln!(out, "o {name}");
        for v in &mesh.vertices {
            let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
        }
        for t in &mesh.triangles {
            let _ = writeln!(out, "f {} {} {}", t[0] + offset, t[1] + offset, t[2] + offset);
        }
        offset += mesh.vertices.len();
    }
    out
}
