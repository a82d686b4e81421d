//! Axis-aligned primitives shared by the assembler, collision checks, mesh
//! export and the physics back end.
//!
//! World frame: +X is FRONT, +Y is LEFT, +Z is TOP (right-handed).

use std::fmt;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

pub type Vec3 = Vector3<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn from_index(i: usize) -> Axis {
        Axis::ALL[i]
    }

    /// The two remaining axes, in increasing index order.
    pub fn others(self) -> (Axis, Axis) {
        match self {
            Axis::X => (Axis::Y, Axis::Z),
            Axis::Y => (Axis::X, Axis::Z),
            Axis::Z => (Axis::X, Axis::Y),
        }
    }

    pub fn unit(self) -> Vec3 {
        let mut v = Vec3::zeros();
        v[self.index()] = 1.0;
        v
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axis::X => "X",
            Axis::Y => "Y",
            Axis::Z => "Z",
        };
        f.write_str(s)
    }
}

/// Direction along an axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Neg,
    Pos,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Neg => -1.0,
            Side::Pos => 1.0,
        }
    }

    pub fn flip(self) -> Side {
        match self {
            Side::Neg => Side::Pos,
            Side::Pos => Side::Neg,
        }
    }
}

/// A face of an axis-aligned part, e.g. TOP is `(Z, Pos)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Face {
    pub axis: Axis,
    pub side: Side,
}

impl Face {
    pub fn opposite(self) -> Face {
        Face {
            axis: self.axis,
            side: self.side.flip(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn from_center_half(center: Vec3, half: Vec3) -> Self {
        Aabb {
            min: center - half,
            max: center + half,
        }
    }

    pub fn empty() -> Self {
        Aabb {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn extents(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn diagonal(&self) -> f64 {
        self.extents().norm()
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn grow_point(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    /// Intersection box; may be inverted (empty) on some axis.
    pub fn intersection(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.sup(&other.min),
            max: self.max.inf(&other.max),
        }
    }

    /// Smallest overlap length over the three axes (negative when apart).
    pub fn min_overlap(&self, other: &Aabb) -> f64 {
        let i = self.intersection(other);
        (0..3)
            .map(|k| i.max[k] - i.min[k])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains_aabb(&self, other: &Aabb, tol: f64) -> bool {
        (0..3).all(|k| other.min[k] >= self.min[k] - tol && other.max[k] <= self.max[k] + tol)
    }

    pub fn contains_point(&self, p: &Vec3) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }

    pub fn translated(&self, v: &Vec3) -> Aabb {
        Aabb {
            min: self.min + v,
            max: self.max + v,
        }
    }
}

/// An axis-aligned box or an axis-aligned finite cylinder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Primitive {
    Box {
        center: Vec3,
        half: Vec3,
    },
    Cylinder {
        center: Vec3,
        axis: Axis,
        radius: f64,
        half_length: f64,
    },
}

impl Primitive {
    pub fn center(&self) -> Vec3 {
        match self {
            Primitive::Box { center, .. } | Primitive::Cylinder { center, .. } => *center,
        }
    }

    pub fn half_extents(&self) -> Vec3 {
        match *self {
            Primitive::Box { half, .. } => half,
            Primitive::Cylinder {
                axis,
                radius,
                half_length,
                ..
            } => {
                let mut h = Vec3::repeat(radius);
                h[axis.index()] = half_length;
                h
            }
        }
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_center_half(self.center(), self.half_extents())
    }

    pub fn translated(&self, v: &Vec3) -> Primitive {
        let mut p = *self;
        match &mut p {
            Primitive::Box { center, .. } | Primitive::Cylinder { center, .. } => *center += v,
        }
        p
    }

    pub fn scaled(&self, s: f64) -> Primitive {
        match *self {
            Primitive::Box { center, half } => Primitive::Box {
                center: center * s,
                half: half * s,
            },
            Primitive::Cylinder {
                center,
                axis,
                radius,
                half_length,
            } => Primitive::Cylinder {
                center: center * s,
                axis,
                radius: radius * s,
                half_length: half_length * s,
            },
        }
    }

    pub fn volume(&self) -> f64 {
        match *self {
            Primitive::Box { half, .. } => 8.0 * half.x * half.y * half.z,
            Primitive::Cylinder {
                radius,
                half_length,
                ..
            } => std::f64::consts::PI * radius * radius * 2.0 * half_length,
        }
    }

    /// Closed containment test.
    pub fn contains(&self, p: &Vec3) -> bool {
        self.sdf(p) <= 0.0
    }

    /// Signed distance: negative inside, positive outside.
    pub fn sdf(&self, p: &Vec3) -> f64 {
        self.sdf_with_normal(p).0
    }

    /// Signed distance plus the outward unit normal of the nearest surface.
    pub fn sdf_with_normal(&self, p: &Vec3) -> (f64, Vec3) {
        match *self {
            Primitive::Box { center, half } => box_sdf(&(p - center), &half),
            Primitive::Cylinder {
                center,
                axis,
                radius,
                half_length,
            } => cylinder_sdf(&(p - center), axis, radius, half_length),
        }
    }
}

fn box_sdf(d: &Vec3, half: &Vec3) -> (f64, Vec3) {
    let q = Vec3::new(d.x.abs() - half.x, d.y.abs() - half.y, d.z.abs() - half.z);
    let outside = q.sup(&Vec3::zeros());
    let out_len = outside.norm();
    if out_len > 0.0 {
        let n = Vec3::new(
            outside.x * d.x.signum(),
            outside.y * d.y.signum(),
            outside.z * d.z.signum(),
        ) / out_len;
        (out_len, n)
    } else {
        let k = q.imax();
        let mut n = Vec3::zeros();
        n[k] = if d[k] >= 0.0 { 1.0 } else { -1.0 };
        (q[k], n)
    }
}

fn cylinder_sdf(d: &Vec3, axis: Axis, radius: f64, half_length: f64) -> (f64, Vec3) {
    let a = axis.index();
    let mut radial = *d;
    radial[a] = 0.0;
    let rlen = radial.norm();
    let radial_dir = if rlen > 0.0 {
        radial / rlen
    } else {
        // On the axis; any transverse direction will do.
        axis.others().0.unit()
    };
    let mut axial_dir = Vec3::zeros();
    axial_dir[a] = if d[a] >= 0.0 { 1.0 } else { -1.0 };

    let qr = rlen - radius;
    let qa = d[a].abs() - half_length;
    if qr > 0.0 || qa > 0.0 {
        let or = qr.max(0.0);
        let oa = qa.max(0.0);
        let len = (or * or + oa * oa).sqrt();
        let n = (radial_dir * or + axial_dir * oa) / len;
        (len, n)
    } else if qr >= qa {
        (qr, radial_dir)
    } else {
        (qa, axial_dir)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_sdf_inside_outside() {
        let b = Primitive::Box {
            center: Vec3::zeros(),
            half: Vec3::new(1.0, 2.0, 3.0),
        };
        let (d, n) = b.sdf_with_normal(&Vec3::new(0.5, 0.0, 0.0));
        assert!((d + 0.5).abs() < 1e-15);
        assert_eq!(n, Vec3::x());
        let (d, n) = b.sdf_with_normal(&Vec3::new(0.0, 0.0, -4.0));
        assert!((d - 1.0).abs() < 1e-15);
        assert_eq!(n, -Vec3::z());
        assert!(b.contains(&Vec3::new(1.0, 2.0, 3.0)));
    }

    #[test]
    fn cylinder_sdf_inside_outside() {
        let c = Primitive::Cylinder {
            center: Vec3::zeros(),
            axis: Axis::Y,
            radius: 1.0,
            half_length: 2.0,
        };
        let (d, n) = c.sdf_with_normal(&Vec3::new(0.0, 0.0, 0.25));
        assert!((d + 0.75).abs() < 1e-15);
        assert_eq!(n, Vec3::z());
        let (d, n) = c.sdf_with_normal(&Vec3::new(0.0, -2.5, 0.0));
        assert!((d - 0.5).abs() < 1e-15);
        assert_eq!(n, -Vec3::y());
        assert!(!c.contains(&Vec3::new(0.8, 0.0, 0.8)));
        assert_eq!(c.aabb().extents(), Vec3::new(2.0, 4.0, 2.0));
    }
}
