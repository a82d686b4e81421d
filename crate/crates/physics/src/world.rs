//! Fixed-step rigid-body world: semi-implicit Euler, sequential impulses
//! with Coulomb friction, revolute joints, and Baumgarte position
//! correction applied through separate pseudo-velocities so that it never
//! feeds energy into the real velocities.

use std::collections::BTreeSet;

use nalgebra::{Matrix2, Matrix3, Vector2};
use serde::Serialize;

use crate::body::{lowest_points, Body, BodyKind, Quat};
use crate::config::SimConfig;
use craft_core::geometry::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contact {
    /// Body pushed along `normal`.
    pub a: usize,
    /// Other body, or `None` for the ground plane.
    pub b: Option<usize>,
    pub point: Vec3,
    pub normal: Vec3,
    pub depth: f64,
}

/// Hinge: anchor points coincide and the axes stay parallel.
#[derive(Debug, Clone, PartialEq)]
pub struct Revolute {
    pub a: usize,
    pub b: usize,
    pub local_anchor_a: Vec3,
    pub local_anchor_b: Vec3,
    pub local_axis_a: Vec3,
    pub local_axis_b: Vec3,
}

impl Revolute {
    pub fn new(bodies: &[Body], a: usize, b: usize, anchor: Vec3, axis: Vec3) -> Revolute {
        let axis = axis.normalize();
        Revolute {
            a,
            b,
            local_anchor_a: bodies[a].to_local(&anchor),
            local_anchor_b: bodies[b].to_local(&anchor),
            local_axis_a: bodies[a].orientation.inverse() * axis,
            local_axis_b: bodies[b].orientation.inverse() * axis,
        }
    }

    pub fn world_axis(&self, bodies: &[Body]) -> Vec3 {
        bodies[self.a].orientation * self.local_axis_a
    }

    pub fn world_anchor(&self, bodies: &[Body]) -> Vec3 {
        bodies[self.a].to_world(&self.local_anchor_a)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diverged {
    pub body: String,
    pub speed: f64,
}

pub struct World {
    pub config: SimConfig,
    pub bodies: Vec<Body>,
    pub joints: Vec<Revolute>,
    /// Body pairs (low, high) that never collide with each other.
    pub ignored_pairs: BTreeSet<(usize, usize)>,
    pub ground: bool,
    pub time: f64,
    pub contacts: Vec<Contact>,
}

struct Row {
    a: usize,
    b: Option<usize>,
    ra: Vec3,
    rb: Vec3,
    n: Vec3,
    t: [Vec3; 2],
    kn: f64,
    kt: [f64; 2],
    depth: f64,
    ln: f64,
    lt: [f64; 2],
    lp: f64,
}

struct JointRow {
    a: usize,
    b: usize,
    ra: Vec3,
    rb: Vec3,
    k_lin: Option<Matrix3<f64>>,
    basis: [Vec3; 2],
    k_ang: Option<Matrix2<f64>>,
    pos_err: Vec3,
    ang_err: Vector2<f64>,
}

/// Per-step velocity state, so the pseudo pass can reuse the same code.
struct Vel {
    v: Vec<Vec3>,
    w: Vec<Vec3>,
}

fn skew(r: &Vec3) -> Matrix3<f64> {
    r.cross_matrix()
}

fn tangents(n: &Vec3) -> [Vec3; 2] {
    let helper = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let t1 = (helper - n * n.dot(&helper)).normalize();
    [t1, n.cross(&t1)]
}

impl World {
    pub fn new(config: SimConfig, bodies: Vec<Body>) -> World {
        World {
            config,
            bodies,
            joints: Vec::new(),
            ignored_pairs: BTreeSet::new(),
            ground: true,
            time: 0.0,
            contacts: Vec::new(),
        }
    }

    pub fn ignore_pair(&mut self, a: usize, b: usize) {
        self.ignored_pairs.insert((a.min(b), a.max(b)));
    }

    pub fn add_joint(&mut self, j: Revolute) {
        self.ignore_pair(j.a, j.b);
        self.joints.push(j);
    }

    pub fn total_energy(&self) -> f64 {
        self.bodies
            .iter()
            .filter(|b| b.kind == BodyKind::Dynamic)
            .map(|b| {
                let pe = if b.gravity {
                    b.mass * self.config.gravity * b.position.z
                } else {
                    0.0
                };
                b.kinetic_energy() + pe
            })
            .sum()
    }

    pub fn generate_contacts(&self) -> Vec<Contact> {
        let mut out = Vec::new();
        if self.ground {
            for (i, body) in self.bodies.iter().enumerate() {
                if body.kind != BodyKind::Dynamic {
                    continue;
                }
                for shape in &body.shapes {
                    for p in lowest_points(body, shape) {
                        if p.z < 0.0 {
                            out.push(Contact {
                                a: i,
                                b: None,
                                point: p,
                                normal: Vec3::z(),
                                depth: -p.z,
                            });
                        }
                    }
                }
            }
        }
        let bounds: Vec<(Vec3, Vec3)> = self.bodies.iter().map(|b| b.world_bounds()).collect();
        for i in 0..self.bodies.len() {
            for j in i + 1..self.bodies.len() {
                let (bi, bj) = (&self.bodies[i], &self.bodies[j]);
                if bi.kind != BodyKind::Dynamic && bj.kind != BodyKind::Dynamic {
                    continue;
                }
                if self.ignored_pairs.contains(&(i, j)) {
                    continue;
                }
                let (li, hi) = bounds[i];
                let (lj, hj) = bounds[j];
                if (0..3).any(|k| li[k] > hj[k] || lj[k] > hi[k]) {
                    continue;
                }
                sample_contacts(&self.bodies, i, j, &mut out);
                sample_contacts(&self.bodies, j, i, &mut out);
            }
        }
        out
    }

    /// Advances one timestep.
    pub fn step(&mut self) -> Result<(), Diverged> {
        let dt = self.config.timestep;
        let g = Vec3::new(0.0, 0.0, -self.config.gravity);
        let inv_i: Vec<Matrix3<f64>> = self.bodies.iter().map(|b| b.inv_inertia_world()).collect();

        for (b, ii) in self.bodies.iter_mut().zip(&inv_i) {
            if b.kind == BodyKind::Dynamic {
                let mut acc = b.force * b.inv_mass;
                if b.gravity {
                    acc += g;
                }
                b.velocity += acc * dt;
                b.angular_velocity += ii * b.torque * dt;
            }
            b.force = Vec3::zeros();
            b.torque = Vec3::zeros();
        }

        self.contacts = self.generate_contacts();
        let mut rows = self.contact_rows(&inv_i);
        let mut jrows = self.joint_rows(&inv_i);

        let mut vel = Vel {
            v: self.bodies.iter().map(|b| b.velocity).collect(),
            w: self.bodies.iter().map(|b| b.angular_velocity).collect(),
        };
        let mu = self.config.friction;
        for _ in 0..self.config.solver_iterations {
            for j in &jrows {
                self.solve_joint(j, &inv_i, &mut vel, None);
            }
            for r in &mut rows {
                self.solve_contact(r, &inv_i, &mut vel, mu);
            }
        }

        let mut pseudo = Vel {
            v: vec![Vec3::zeros(); self.bodies.len()],
            w: vec![Vec3::zeros(); self.bodies.len()],
        };
        let beta = self.config.baumgarte;
        let slop = self.config.slop;
        for _ in 0..self.config.solver_iterations {
            for j in &mut jrows {
                let bias = (j.pos_err * (-beta / dt), j.ang_err * (beta / dt));
                self.solve_joint(j, &inv_i, &mut pseudo, Some(bias));
            }
            for r in &mut rows {
                let bias = beta * (r.depth - slop).max(0.0) / dt;
                let vn = rel_velocity(&pseudo, r.a, r.b, &r.ra, &r.rb).dot(&r.n);
                let mut l = (bias - vn) / r.kn;
                let old = r.lp;
                r.lp = (old + l).max(0.0);
                l = r.lp - old;
                apply(&self.bodies, &inv_i, &mut pseudo, r.a, r.b, &r.ra, &r.rb, r.n * l);
            }
        }

        for (i, b) in self.bodies.iter_mut().enumerate() {
            if b.kind == BodyKind::Dynamic {
                b.velocity = vel.v[i];
                b.angular_velocity = vel.w[i];
            }
            if b.kind == BodyKind::Static {
                continue;
            }
            let v = b.velocity + pseudo.v[i];
            let w = b.angular_velocity + pseudo.w[i];
            b.position += v * dt;
            b.orientation = Quat::from_scaled_axis(w * dt) * b.orientation;
        }
        self.time += dt;

        for b in &self.bodies {
            let speed = b.velocity.norm();
            if !speed.is_finite() || speed > self.config.divergence_speed {
                return Err(Diverged {
                    body: b.name.clone(),
                    speed,
                });
            }
        }
        Ok(())
    }

    fn contact_rows(&self, inv_i: &[Matrix3<f64>]) -> Vec<Row> {
        self.contacts
            .iter()
            .map(|c| {
                let ra = c.point - self.bodies[c.a].position;
                let rb = c.b.map_or(Vec3::zeros(), |b| c.point - self.bodies[b].position);
                let t = tangents(&c.normal);
                let k = |d: &Vec3| self.effective_mass(inv_i, c.a, c.b, &ra, &rb, d);
                Row {
                    a: c.a,
                    b: c.b,
                    ra,
                    rb,
                    n: c.normal,
                    kn: k(&c.normal),
                    kt: [k(&t[0]), k(&t[1])],
                    t,
                    depth: c.depth,
                    ln: 0.0,
                    lt: [0.0; 2],
                    lp: 0.0,
                }
            })
            .collect()
    }

    fn effective_mass(&self, inv_i: &[Matrix3<f64>], a: usize, b: Option<usize>, ra: &Vec3, rb: &Vec3, d: &Vec3) -> f64 {
        let ca = ra.cross(d);
        let mut k = self.bodies[a].inv_mass + ca.dot(&(inv_i[a] * ca));
        if let Some(b) = b {
            let cb = rb.cross(d);
            k += self.bodies[b].inv_mass + cb.dot(&(inv_i[b] * cb));
        }
        k
    }

    fn joint_rows(&self, inv_i: &[Matrix3<f64>]) -> Vec<JointRow> {
        self.joints
            .iter()
            .map(|j| {
                let (ba, bb) = (&self.bodies[j.a], &self.bodies[j.b]);
                let ra = ba.orientation * j.local_anchor_a;
                let rb = bb.orientation * j.local_anchor_b;
                let k_lin = Matrix3::identity() * (ba.inv_mass + bb.inv_mass)
                    - skew(&ra) * inv_i[j.a] * skew(&ra)
                    - skew(&rb) * inv_i[j.b] * skew(&rb);
                let axis_a = ba.orientation * j.local_axis_a;
                let axis_b = bb.orientation * j.local_axis_b;
                let basis = tangents(&axis_a);
                let sum = inv_i[j.a] + inv_i[j.b];
                let k_ang = Matrix2::new(
                    basis[0].dot(&(sum * basis[0])),
                    basis[0].dot(&(sum * basis[1])),
                    basis[1].dot(&(sum * basis[0])),
                    basis[1].dot(&(sum * basis[1])),
                );
                let e = axis_a.cross(&axis_b);
                JointRow {
                    a: j.a,
                    b: j.b,
                    ra,
                    rb,
                    k_lin: k_lin.try_inverse(),
                    basis,
                    k_ang: k_ang.try_inverse(),
                    pos_err: (ba.position + ra) - (bb.position + rb),
                    // Rotating A about +e turns its axis toward B's.
                    ang_err: Vector2::new(e.dot(&basis[0]), e.dot(&basis[1])),
                }
            })
            .collect()
    }

    fn solve_joint(&self, j: &JointRow, inv_i: &[Matrix3<f64>], vel: &mut Vel, bias: Option<(Vec3, Vector2<f64>)>) {
        let (lin_target, ang_target) = bias.unwrap_or((Vec3::zeros(), Vector2::zeros()));
        if let Some(kinv) = j.k_lin {
            let dv = rel_velocity(vel, j.a, Some(j.b), &j.ra, &j.rb);
            let p = kinv * (lin_target - dv);
            apply(&self.bodies, inv_i, vel, j.a, Some(j.b), &j.ra, &j.rb, p);
        }
        if let Some(kinv) = j.k_ang {
            let dw = vel.w[j.a] - vel.w[j.b];
            let c = Vector2::new(dw.dot(&j.basis[0]), dw.dot(&j.basis[1]));
            let l = kinv * (ang_target - c);
            let imp = j.basis[0] * l.x + j.basis[1] * l.y;
            if self.bodies[j.a].kind == BodyKind::Dynamic {
                vel.w[j.a] += inv_i[j.a] * imp;
            }
            if self.bodies[j.b].kind == BodyKind::Dynamic {
                vel.w[j.b] -= inv_i[j.b] * imp;
            }
        }
    }

    fn solve_contact(&self, r: &mut Row, inv_i: &[Matrix3<f64>], vel: &mut Vel, mu: f64) {
        let dv = rel_velocity(vel, r.a, r.b, &r.ra, &r.rb);
        let mut l = -dv.dot(&r.n) / r.kn;
        let old = r.ln;
        r.ln = (old + l).max(0.0);
        l = r.ln - old;
        apply(&self.bodies, inv_i, vel, r.a, r.b, &r.ra, &r.rb, r.n * l);

        let limit = mu * r.ln;
        for k in 0..2 {
            let dv = rel_velocity(vel, r.a, r.b, &r.ra, &r.rb);
            let mut l = -dv.dot(&r.t[k]) / r.kt[k];
            let old = r.lt[k];
            r.lt[k] = (old + l).clamp(-limit, limit);
            l = r.lt[k] - old;
            apply(&self.bodies, inv_i, vel, r.a, r.b, &r.ra, &r.rb, r.t[k] * l);
        }
    }
}

fn rel_velocity(vel: &Vel, a: usize, b: Option<usize>, ra: &Vec3, rb: &Vec3) -> Vec3 {
    let va = vel.v[a] + vel.w[a].cross(ra);
    match b {
        Some(b) => va - (vel.v[b] + vel.w[b].cross(rb)),
        None => va,
    }
}

#[allow(clippy::too_many_arguments)]
fn apply(bodies: &[Body], inv_i: &[Matrix3<f64>], vel: &mut Vel, a: usize, b: Option<usize>, ra: &Vec3, rb: &Vec3, p: Vec3) {
    if bodies[a].kind == BodyKind::Dynamic {
        vel.v[a] += p * bodies[a].inv_mass;
        vel.w[a] += inv_i[a] * ra.cross(&p);
    }
    if let Some(b) = b {
        if bodies[b].kind == BodyKind::Dynamic {
            vel.v[b] -= p * bodies[b].inv_mass;
            vel.w[b] -= inv_i[b] * rb.cross(&p);
        }
    }
}

/// Surface samples of body `a` that lie inside body `b`.
fn sample_contacts(bodies: &[Body], a: usize, b: usize, out: &mut Vec<Contact>) {
    let (ba, bb) = (&bodies[a], &bodies[b]);
    for sa in &ba.shapes {
        for p in &sa.samples {
            let world = ba.to_world(p);
            let local = bb.to_local(&world);
            for sb in &bb.shapes {
                let bbx = sb.base.aabb();
                if !bbx.contains_point(&local) {
                    continue;
                }
                let (d, n) = sb.sdf(&local);
                if d < 0.0 {
                    out.push(Contact {
                        a,
                        b: Some(b),
                        point: world,
                        normal: bb.orientation * n,
                        depth: -d,
                    });
                    break;
                }
            }
        }
    }
}
