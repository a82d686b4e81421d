use craft_core::geometry::{Primitive, Vec3};
use nalgebra::{Matrix3, UnitQuaternion};

pub type Quat = UnitQuaternion<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BodyKind {
    Dynamic,
    /// Moves with a prescribed velocity and ignores impulses.
    Kinematic,
    Static,
}

/// A carved primitive in body-local coordinates (origin at the body's
/// centre of mass, axes aligned with the body frame).
#[derive(Debug, Clone)]
pub struct Shape {
    /// Index of the originating part, if any.
    pub part: Option<usize>,
    pub base: Primitive,
    pub holes: Vec<Primitive>,
    /// Surface points used for body-body contacts.
    pub samples: Vec<Vec3>,
}

impl Shape {
    pub fn new(part: Option<usize>, base: Primitive, holes: Vec<Primitive>) -> Shape {
        // Points that fall in a hole are not on the carved surface.
        let samples = surface_samples(&base)
            .into_iter()
            .filter(|p| holes.iter().all(|h| h.sdf_with_normal(p).0 >= -1e-9))
            .collect();
        Shape {
            part,
            base,
            holes,
            samples,
        }
    }

    /// Signed distance of the carved solid and its outward normal.
    pub fn sdf(&self, p: &Vec3) -> (f64, Vec3) {
        let mut best = self.base.sdf_with_normal(p);
        for h in &self.holes {
            let (d, n) = h.sdf_with_normal(p);
            if -d > best.0 {
                best = (-d, -n);
            }
        }
        best
    }
}

const RING: usize = 16;

fn surface_samples(p: &Primitive) -> Vec<Vec3> {
    let mut out = Vec::new();
    match *p {
        Primitive::Box { center, half } => {
            // Corners, edge midpoints and face centres.
            for i in -1..=1 {
                for j in -1..=1 {
                    for k in -1..=1 {
                        if i == 0 && j == 0 && k == 0 {
                            continue;
                        }
                        out.push(center + Vec3::new(half.x * i as f64, half.y * j as f64, half.z * k as f64));
                    }
                }
            }
        }
        Primitive::Cylinder {
            center,
            axis,
            radius,
            half_length,
        } => {
            let a = axis.unit();
            let (u, _) = axis.others();
            let eu = u.unit();
            let ev = a.cross(&eu);
            for s in [-1.0, -0.5, 0.0, 0.5, 1.0] {
                let c = center + a * (half_length * s);
                for i in 0..RING {
                    let t = std::f64::consts::TAU * i as f64 / RING as f64;
                    out.push(c + (eu * t.cos() + ev * t.sin()) * radius);
                }
                if s.abs() == 1.0 {
                    out.push(c);
                    for i in 0..RING / 2 {
                        let t = std::f64::consts::TAU * i as f64 / (RING / 2) as f64;
                        out.push(c + (eu * t.cos() + ev * t.sin()) * (0.5 * radius));
                    }
                }
            }
        }
    }
    out
}

/// Inertia tensor of a solid primitive about its own centre.
pub fn primitive_inertia(p: &Primitive, mass: f64) -> Matrix3<f64> {
    match *p {
        Primitive::Box { half, .. } => {
            let e = half * 2.0;
            Matrix3::from_diagonal(&Vec3::new(
                e.y * e.y + e.z * e.z,
                e.x * e.x + e.z * e.z,
                e.x * e.x + e.y * e.y,
            )) * (mass / 12.0)
        }
        Primitive::Cylinder {
            axis,
            radius,
            half_length,
            ..
        } => {
            let l = 2.0 * half_length;
            let perp = mass * (3.0 * radius * radius + l * l) / 12.0;
            let mut d = Vec3::repeat(perp);
            d[axis.index()] = 0.5 * mass * radius * radius;
            Matrix3::from_diagonal(&d)
        }
    }
}

/// Shifts an inertia tensor from the centre of mass to a point `d` away.
pub fn parallel_axis(i: Matrix3<f64>, mass: f64, d: &Vec3) -> Matrix3<f64> {
    i + (Matrix3::identity() * d.norm_squared() - d * d.transpose()) * mass
}

#[derive(Debug, Clone)]
pub struct Body {
    pub name: String,
    pub kind: BodyKind,
    /// Parts merged into this body.
    pub parts: Vec<usize>,
    pub shapes: Vec<Shape>,
    pub mass: f64,
    pub inv_mass: f64,
    pub inertia_local: Matrix3<f64>,
    pub inv_inertia_local: Matrix3<f64>,
    pub position: Vec3,
    pub orientation: Quat,
    pub velocity: Vec3,
    pub angular_velocity: Vec3,
    pub gravity: bool,
    pub force: Vec3,
    pub torque: Vec3,
}

impl Body {
    /// A body from world-space primitives of equal `mass_each`, in the
    /// identity orientation.
    pub fn compound(
        name: impl Into<String>,
        kind: BodyKind,
        pieces: Vec<(Option<usize>, Primitive, Vec<Primitive>)>,
        mass_each: f64,
    ) -> Body {
        let n = pieces.len() as f64;
        let com = pieces
            .iter()
            .fold(Vec3::zeros(), |acc, (_, p, _)| acc + p.center())
            / n;
        let mut inertia = Matrix3::zeros();
        let mut shapes = Vec::new();
        let mut parts = Vec::new();
        let shift = -com;
        for (part, base, holes) in pieces {
            inertia += parallel_axis(primitive_inertia(&base, mass_each), mass_each, &(base.center() - com));
            if let Some(p) = part {
                parts.push(p);
            }
            shapes.push(Shape::new(
                part,
                base.translated(&shift),
                holes.iter().map(|h| h.translated(&shift)).collect(),
            ));
        }
        let mass = mass_each * n;
        let mut body = Body {
            name: name.into(),
            kind,
            parts,
            shapes,
            mass,
            inv_mass: 0.0,
            inertia_local: inertia,
            inv_inertia_local: Matrix3::zeros(),
            position: com,
            orientation: Quat::identity(),
            velocity: Vec3::zeros(),
            angular_velocity: Vec3::zeros(),
            gravity: kind == BodyKind::Dynamic,
            force: Vec3::zeros(),
            torque: Vec3::zeros(),
        };
        if kind == BodyKind::Dynamic {
            body.inv_mass = 1.0 / mass;
            body.inv_inertia_local = inertia.try_inverse().unwrap_or_else(Matrix3::zeros);
        }
        body
    }

    pub fn set_kind(&mut self, kind: BodyKind) {
        self.kind = kind;
        if kind == BodyKind::Dynamic {
            self.inv_mass = 1.0 / self.mass;
            self.inv_inertia_local = self.inertia_local.try_inverse().unwrap_or_else(Matrix3::zeros);
        } else {
            self.inv_mass = 0.0;
            self.inv_inertia_local = Matrix3::zeros();
            if kind == BodyKind::Static {
                self.velocity = Vec3::zeros();
                self.angular_velocity = Vec3::zeros();
            }
        }
    }

    pub fn inv_inertia_world(&self) -> Matrix3<f64> {
        let r = self.orientation.to_rotation_matrix();
        r.matrix() * self.inv_inertia_local * r.matrix().transpose()
    }

    pub fn inertia_world(&self) -> Matrix3<f64> {
        let r = self.orientation.to_rotation_matrix();
        r.matrix() * self.inertia_local * r.matrix().transpose()
    }

    pub fn to_world(&self, local: &Vec3) -> Vec3 {
        self.position + self.orientation * local
    }

    pub fn to_local(&self, world: &Vec3) -> Vec3 {
        self.orientation.inverse() * (world - self.position)
    }

    /// Velocity of the material point at `world`.
    pub fn point_velocity(&self, world: &Vec3) -> Vec3 {
        self.velocity + self.angular_velocity.cross(&(world - self.position))
    }

    pub fn apply_force_at(&mut self, force: Vec3, world_point: &Vec3) {
        self.force += force;
        self.torque += (world_point - self.position).cross(&force);
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.mass * self.velocity.norm_squared()
            + 0.5 * self.angular_velocity.dot(&(self.inertia_world() * self.angular_velocity))
    }

    /// World AABB of all shapes, as (min, max).
    pub fn world_bounds(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for s in &self.shapes {
            let bb = s.base.aabb();
            for i in 0..8 {
                let c = Vec3::new(
                    if i & 1 == 0 { bb.min.x } else { bb.max.x },
                    if i & 2 == 0 { bb.min.y } else { bb.max.y },
                    if i & 4 == 0 { bb.min.z } else { bb.max.z },
                );
                let w = self.to_world(&c);
                lo = lo.inf(&w);
                hi = hi.sup(&w);
            }
        }
        (lo, hi)
    }
}

/// Lowest world points of a shape, for ground contact.
pub fn lowest_points(body: &Body, shape: &Shape) -> Vec<Vec3> {
    match shape.base {
        Primitive::Box { center, half } => (0..8)
            .map(|i| {
                let c = center
                    + Vec3::new(
                        if i & 1 == 0 { -half.x } else { half.x },
                        if i & 2 == 0 { -half.y } else { half.y },
                        if i & 4 == 0 { -half.z } else { half.z },
                    );
                body.to_world(&c)
            })
            .collect(),
        Primitive::Cylinder {
            center,
            axis,
            radius,
            half_length,
        } => {
            let a = body.orientation * axis.unit();
            let c = body.to_world(&center);
            let down = Vec3::new(0.0, 0.0, -1.0);
            let radial = down - a * down.dot(&a);
            let mut out = Vec::new();
            for s in [-1.0, 1.0] {
                let cap = c + a * (half_length * s);
                if radial.norm() > 1e-9 {
                    out.push(cap + radial.normalize() * radius);
                }
                if a.z.abs() > 0.9 {
                    let e1 = if a.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
                    let u = (e1 - a * e1.dot(&a)).normalize();
                    let v = a.cross(&u);
                    for i in 0..8 {
                        let t = std::f64::consts::TAU * i as f64 / 8.0;
                        out.push(cap + (u * t.cos() + v * t.sin()) * radius);
                    }
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use craft_core::geometry::Axis;

    #[test]
    fn compound_inertia_of_two_cubes() {
        let cube = |x: f64| Primitive::Box {
            center: Vec3::new(x, 0.0, 0.0),
            half: Vec3::repeat(0.5),
        };
        let b = Body::compound("b", BodyKind::Dynamic, vec![(None, cube(-0.5), vec![]), (None, cube(0.5), vec![])], 1.0);
        // Same as a 2x1x1 box of mass 2.
        let expect = primitive_inertia(
            &Primitive::Box {
                center: Vec3::zeros(),
                half: Vec3::new(1.0, 0.5, 0.5),
            },
            2.0,
        );
        assert!((b.inertia_local - expect).amax() < 1e-12);
        assert_eq!(b.position, Vec3::zeros());
    }

    #[test]
    fn rotated_cylinder_lowest_point() {
        let mut b = Body::compound(
            "w",
            BodyKind::Dynamic,
            vec![(
                None,
                Primitive::Cylinder {
                    center: Vec3::new(0.0, 0.0, 1.0),
                    axis: Axis::Y,
                    radius: 0.2,
                    half_length: 0.1,
                },
                vec![],
            )],
            1.0,
        );
        b.orientation = Quat::from_axis_angle(&Vec3::y_axis(), 1.0);
        let pts = lowest_points(&b, &b.shapes[0]);
        assert_eq!(pts.len(), 2);
        assert!(pts.iter().all(|p| (p.z - 0.8).abs() < 1e-12));
    }
}
