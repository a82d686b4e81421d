//! Pairwise overlap of carved primitives.
//!
//! Two solids collide when some point lies at least `tol / 2` inside both
//! bases and at least `tol / 2` outside every hole. Insetting both solids by
//! the same margin makes the test symmetric and keeps exact face contact
//! legal. The penetration depth is twice the largest such margin, which for
//! two boxes equals the smallest interval overlap.
//!
//! Each hole's complement is split into convex-ish pieces (half-spaces, and
//! the outside of a round hole) and every combination of pieces is tested.
//! A single combination is a box, a few inside-disk constraints and a few
//! outside-disk constraints, all with world axes. When those disks use at
//! most two distinct axes, sweeping the remaining coordinate leaves
//! independent 1D problems per coordinate whose structure only changes at
//! closed-form critical values, so testing those values and the midpoints
//! between them is exact. Disks along all three axes fall back to a grid.

use serde::Serialize;

use crate::assembler::{Assembly, Solid};
use crate::geometry::{Aabb, Primitive, Vec3};

/// Contacts shallower than this are touching, not colliding.
pub const COLLISION_TOL: f64 = 1e-6;

const GRID: usize = 40;
const BISECTION_STEPS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overlap {
    pub depth: f64,
    pub point: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollisionPair {
    pub a: String,
    pub b: String,
    pub depth_m: f64,
    pub point: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollisionReport {
    pub ok: bool,
    pub pairs: Vec<CollisionPair>,
}

/// Tests every pair of parts, connected or not.
pub fn validate_collisions(assembly: &Assembly) -> CollisionReport {
    let solids: Vec<Solid> = assembly.parts.iter().map(|p| p.solid()).collect();
    let mut pairs = Vec::new();
    for i in 0..solids.len() {
        for j in i + 1..solids.len() {
            if let Some(o) = pair_overlap(&solids[i], &solids[j], COLLISION_TOL) {
                let (mut a, mut b) = (assembly.parts[i].name(), assembly.parts[j].name());
                if b < a {
                    std::mem::swap(&mut a, &mut b);
                }
                pairs.push(CollisionPair {
                    a: a.to_string(),
                    b: b.to_string(),
                    depth_m: o.depth,
                    point: [o.point.x, o.point.y, o.point.z],
                });
            }
        }
    }
    pairs.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));
    CollisionReport {
        ok: pairs.is_empty(),
        pairs,
    }
}

/// Overlap of two carved solids, or `None` if they at most touch.
pub fn pair_overlap(a: &Solid, b: &Solid, tol: f64) -> Option<Overlap> {
    // Canonical order so that swapping the arguments repeats the exact same
    // arithmetic.
    let (a, b) = if solid_key(a).cmp_total(&solid_key(b)).is_gt() {
        (b, a)
    } else {
        (a, b)
    };
    if a.base.aabb().min_overlap(&b.base.aabb()) <= tol {
        return None;
    }
    let half = tol * 0.5;
    if let (Primitive::Box { .. }, Primitive::Box { .. }, true, true) =
        (a.base, b.base, a.holes.is_empty(), b.holes.is_empty())
    {
        let i = a.base.aabb().intersection(&b.base.aabb());
        let depth = i.min_overlap(&i);
        return (depth > tol).then(|| Overlap {
            depth,
            point: i.center(),
        });
    }

    let mut best = feasible_at(a, b, half)?;
    let mut lo = half;
    let mut hi = max_inset(&a.base).min(max_inset(&b.base));
    if let Some(p) = feasible_at(a, b, hi) {
        return Some(Overlap {
            depth: 2.0 * hi,
            point: p,
        });
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        match feasible_at(a, b, mid) {
            Some(p) => {
                lo = mid;
                best = p;
            }
            None => hi = mid,
        }
        if hi - lo <= 1e-15 * hi.max(1.0) {
            break;
        }
    }
    Some(Overlap {
        depth: 2.0 * lo,
        point: best,
    })
}

fn max_inset(p: &Primitive) -> f64 {
    let h = p.half_extents();
    h.x.min(h.y).min(h.z)
}

struct Key(Vec<f64>);

impl Key {
    fn cmp_total(&self, other: &Key) -> std::cmp::Ordering {
        for (x, y) in self.0.iter().zip(&other.0) {
            let c = x.total_cmp(y);
            if c.is_ne() {
                return c;
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

fn solid_key(s: &Solid) -> Key {
    let mut k = Vec::new();
    for p in std::iter::once(&s.base).chain(&s.holes) {
        match *p {
            Primitive::Box { center, half } => {
                k.push(0.0);
                k.extend(center.iter());
                k.extend(half.iter());
            }
            Primitive::Cylinder {
                center,
                axis,
                radius,
                half_length,
            } => {
                k.push(1.0 + axis.index() as f64);
                k.extend(center.iter());
                k.extend([radius, half_length]);
            }
        }
    }
    Key(k)
}

/// A disk constraint in the plane perpendicular to `axis`.
#[derive(Debug, Clone, Copy)]
struct Disk {
    axis: usize,
    center: Vec3,
    radius: f64,
    inside: bool,
}

#[derive(Debug, Clone)]
struct Problem {
    lo: Vec3,
    hi: Vec3,
    disks: Vec<Disk>,
}

enum Piece {
    /// Keep the half-space `x[axis] <= value` (`upper`) or `>= value`.
    Clip { axis: usize, upper: bool, value: f64 },
    Outside(Disk),
}

/// Adds the constraints of a base primitive shrunk by `d`.
fn add_base(p: &mut Problem, base: &Primitive, d: f64) {
    let bb = base.aabb();
    p.lo = p.lo.sup(&bb.min.add_scalar(d));
    p.hi = p.hi.inf(&bb.max.add_scalar(-d));
    if let Primitive::Cylinder {
        center,
        axis,
        radius,
        ..
    } = *base
    {
        p.disks.push(Disk {
            axis: axis.index(),
            center,
            radius: radius - d,
            inside: true,
        });
    }
}

/// Complement pieces of a hole grown by `d`.
fn hole_pieces(hole: &Primitive, d: f64) -> Vec<Piece> {
    let bb = hole.aabb();
    match *hole {
        Primitive::Box { .. } => (0..3)
            .flat_map(|k| {
                [
                    Piece::Clip {
                        axis: k,
                        upper: true,
                        value: bb.min[k] - d,
                    },
                    Piece::Clip {
                        axis: k,
                        upper: false,
                        value: bb.max[k] + d,
                    },
                ]
            })
            .collect(),
        Primitive::Cylinder {
            center,
            axis,
            radius,
            ..
        } => {
            let k = axis.index();
            vec![
                Piece::Clip {
                    axis: k,
                    upper: true,
                    value: bb.min[k] - d,
                },
                Piece::Clip {
                    axis: k,
                    upper: false,
                    value: bb.max[k] + d,
                },
                Piece::Outside(Disk {
                    axis: k,
                    center,
                    radius: radius + d,
                    inside: false,
                }),
            ]
        }
    }
}

/// A point at inset `d` inside both solids, if one exists.
fn feasible_at(a: &Solid, b: &Solid, d: f64) -> Option<Vec3> {
    let mut base = Problem {
        lo: Vec3::repeat(f64::NEG_INFINITY),
        hi: Vec3::repeat(f64::INFINITY),
        disks: Vec::new(),
    };
    add_base(&mut base, &a.base, d);
    add_base(&mut base, &b.base, d);
    if (0..3).any(|k| base.lo[k] > base.hi[k]) || base.disks.iter().any(|c| c.radius < 0.0) {
        return None;
    }
    let region = Aabb {
        min: base.lo,
        max: base.hi,
    };
    let holes: Vec<Vec<Piece>> = a
        .holes
        .iter()
        .chain(&b.holes)
        .filter(|h| {
            let g = h.aabb();
            let g = Aabb {
                min: g.min.add_scalar(-d),
                max: g.max.add_scalar(d),
            };
            g.min_overlap(&region) >= 0.0
        })
        .map(|h| hole_pieces(h, d))
        .collect();
    search(&base, &holes)
}

/// Depth-first over one piece per hole.
fn search(p: &Problem, holes: &[Vec<Piece>]) -> Option<Vec3> {
    let Some((first, rest)) = holes.split_first() else {
        return solve(p);
    };
    for piece in first {
        let mut q = p.clone();
        match *piece {
            Piece::Clip { axis, upper, value } => {
                if upper {
                    q.hi[axis] = q.hi[axis].min(value);
                } else {
                    q.lo[axis] = q.lo[axis].max(value);
                }
                if q.lo[axis] > q.hi[axis] {
                    continue;
                }
            }
            Piece::Outside(disk) => q.disks.push(disk),
        }
        if let Some(x) = search(&q, rest) {
            return Some(x);
        }
    }
    None
}

fn solve(p: &Problem) -> Option<Vec3> {
    if (0..3).any(|k| p.lo[k] > p.hi[k]) {
        return None;
    }
    let mut used = [false; 3];
    for c in &p.disks {
        used[c.axis] = true;
    }
    match (0..3).find(|&s| !used[s]) {
        Some(s) => sweep(p, s),
        None => grid(p),
    }
}

/// Coordinate constrained by a disk once the sweep coordinate is fixed.
fn other_axis(disk_axis: usize, s: usize) -> usize {
    3 - disk_axis - s
}

/// Sweeps coordinate `s`, which no disk is aligned with.
fn sweep(p: &Problem, s: usize) -> Option<Vec3> {
    let (lo, hi) = (p.lo[s], p.hi[s]);
    let mut ts = vec![lo, hi];
    let mut push = |t: f64| {
        if t.is_finite() && t > lo && t < hi {
            ts.push(t);
        }
    };
    for (i, c) in p.disks.iter().enumerate() {
        let k = other_axis(c.axis, s);
        let cs = c.center[s];
        push(cs - c.radius);
        push(cs + c.radius);
        for bound in [p.lo[k], p.hi[k]] {
            let rem = c.radius * c.radius - (bound - c.center[k]).powi(2);
            if rem >= 0.0 {
                push(cs - rem.sqrt());
                push(cs + rem.sqrt());
            }
        }
        for e in &p.disks[i + 1..] {
            if other_axis(e.axis, s) == k {
                for t in endpoint_crossings(c, e, s, k) {
                    push(t);
                }
            }
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();

    let mut candidates = Vec::with_capacity(2 * ts.len());
    for (i, &t) in ts.iter().enumerate() {
        candidates.push(t);
        if let Some(&next) = ts.get(i + 1) {
            candidates.push(0.5 * (t + next));
        }
    }
    for t in candidates {
        let mut x = Vec3::zeros();
        x[s] = t;
        let mut ok = true;
        for k in (0..3).filter(|&k| k != s) {
            match solve_1d(p, s, t, k) {
                Some(v) => x[k] = v,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Some(x);
        }
    }
    None
}

/// Values of the sweep coordinate where an interval endpoint of disk `c`
/// meets one of disk `e` (both constraining coordinate `k`).
fn endpoint_crossings(c: &Disk, e: &Disk, s: usize, k: usize) -> Vec<f64> {
    // w_c(t)^2 - w_e(t)^2 is linear in t: m t + q.
    let (a1, a2) = (c.center[s], e.center[s]);
    let (r1, r2) = (c.radius, e.radius);
    let dist = e.center[k] - c.center[k];
    let m = 2.0 * (a1 - a2);
    let q = r1 * r1 - r2 * r2 - a1 * a1 + a2 * a2;
    // (m t + q - D^2)^2 = 4 D^2 (r2^2 - (t - a2)^2)
    let qq = q - dist * dist;
    let d2 = 4.0 * dist * dist;
    let qa = m * m + d2;
    let qb = 2.0 * m * qq - 2.0 * d2 * a2;
    let qc = qq * qq + d2 * (a2 * a2 - r2 * r2);
    let mut out = Vec::new();
    if qa.abs() < 1e-300 {
        if qb.abs() > 1e-300 {
            out.push(-qc / qb);
        }
        return out;
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        out.push((-qb - sq) / (2.0 * qa));
        out.push((-qb + sq) / (2.0 * qa));
    }
    out
}

/// Feasible value of coordinate `k` with the sweep coordinate at `t`.
fn solve_1d(p: &Problem, s: usize, t: f64, k: usize) -> Option<f64> {
    let (mut lo, mut hi) = (p.lo[k], p.hi[k]);
    let mut holes: Vec<(f64, f64)> = Vec::new();
    for c in p.disks.iter().filter(|c| other_axis(c.axis, s) == k) {
        let w2 = c.radius * c.radius - (t - c.center[s]).powi(2);
        if c.inside {
            if w2 < 0.0 {
                return None;
            }
            let w = w2.sqrt();
            lo = lo.max(c.center[k] - w);
            hi = hi.min(c.center[k] + w);
        } else if w2 > 0.0 {
            let w = w2.sqrt();
            holes.push((c.center[k] - w, c.center[k] + w));
        }
    }
    if lo > hi {
        return None;
    }
    let mut candidates = vec![0.5 * (lo + hi), lo, hi];
    for &(a, b) in &holes {
        candidates.extend([a, b]);
    }
    candidates
        .into_iter()
        .filter(|x| *x >= lo && *x <= hi)
        .find(|&x| holes.iter().all(|&(a, b)| x <= a || x >= b))
}

fn satisfies(p: &Problem, x: &Vec3) -> bool {
    (0..3).all(|k| x[k] >= p.lo[k] && x[k] <= p.hi[k])
        && p.disks.iter().all(|c| {
            let mut d = x - c.center;
            d[c.axis] = 0.0;
            let r2 = d.norm_squared();
            if c.inside {
                r2 <= c.radius * c.radius
            } else {
                r2 >= c.radius * c.radius
            }
        })
}

/// Approximate search for disk constraints along all three axes.
fn grid(p: &Problem) -> Option<Vec3> {
    let step = |k: usize, i: usize| p.lo[k] + (p.hi[k] - p.lo[k]) * (i as f64 + 0.5) / GRID as f64;
    for i in 0..GRID {
        for j in 0..GRID {
            for l in 0..GRID {
                let x = Vec3::new(step(0, i), step(1, j), step(2, l));
                if satisfies(p, &x) {
                    return Some(x);
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Axis;

    fn cube(c: [f64; 3], h: f64) -> Solid {
        Solid {
            base: Primitive::Box {
                center: Vec3::from(c),
                half: Vec3::repeat(h),
            },
            holes: vec![],
        }
    }

    fn cyl(c: [f64; 3], axis: Axis, r: f64, hl: f64) -> Primitive {
        Primitive::Cylinder {
            center: Vec3::from(c),
            axis,
            radius: r,
            half_length: hl,
        }
    }

    #[test]
    fn coincident_unit_boxes() {
        let o = pair_overlap(&cube([0.0; 3], 0.5), &cube([0.0; 3], 0.5), COLLISION_TOL).unwrap();
        assert_eq!(o.depth, 1.0);
    }

    #[test]
    fn shared_face_is_contact() {
        assert!(pair_overlap(&cube([0.0; 3], 0.5), &cube([1.0, 0.0, 0.0], 0.5), COLLISION_TOL).is_none());
        assert!(pair_overlap(&cube([0.0; 3], 0.5), &cube([0.999, 0.0, 0.0], 0.5), COLLISION_TOL).is_some());
    }

    #[test]
    fn axle_in_clearance_hole_is_exempt() {
        let wheel = Solid {
            base: cyl([0.0; 3], Axis::Y, 0.02, 0.01),
            holes: vec![cyl([0.0; 3], Axis::Y, 0.011, 0.01)],
        };
        let axle = Solid {
            base: cyl([0.0; 3], Axis::Y, 0.01, 0.06),
            holes: vec![],
        };
        assert!(pair_overlap(&wheel, &axle, COLLISION_TOL).is_none());
        assert!(pair_overlap(&axle, &wheel, COLLISION_TOL).is_none());
        // Off-center by 2 mm the axle bites into the rim.
        let shifted = Solid {
            base: cyl([0.002, 0.0, 0.0], Axis::Y, 0.01, 0.06),
            holes: vec![],
        };
        let o = pair_overlap(&wheel, &shifted, COLLISION_TOL).unwrap();
        assert!((o.depth - 0.001).abs() < 1e-9, "{}", o.depth);
        assert!(wheel.contains(&o.point) && shifted.contains(&o.point));
    }

    #[test]
    fn perpendicular_cylinders() {
        let a = Solid {
            base: cyl([0.0; 3], Axis::X, 0.1, 1.0),
            holes: vec![],
        };
        let b = Solid {
            base: cyl([0.0, 0.0, 0.19], Axis::Y, 0.1, 1.0),
            holes: vec![],
        };
        let o = pair_overlap(&a, &b, COLLISION_TOL).unwrap();
        // Largest margin is on the segment between the axes.
        assert!((o.depth - 0.01).abs() < 1e-9, "{}", o.depth);
        let c = Solid {
            base: cyl([0.0, 0.0, 0.2], Axis::Y, 0.1, 1.0),
            holes: vec![],
        };
        assert!(pair_overlap(&a, &c, COLLISION_TOL).is_none());
    }

    #[test]
    fn crossing_corner_misses_round_cylinder() {
        // The box corner pokes into the cylinder's AABB but not the cylinder.
        let c = Solid {
            base: cyl([0.0; 3], Axis::Z, 0.1, 0.1),
            holes: vec![],
        };
        let b = cube([0.13, 0.13, 0.0], 0.05);
        assert!(pair_overlap(&c, &b, COLLISION_TOL).is_none());
        let b = cube([0.1, 0.1, 0.0], 0.05);
        assert!(pair_overlap(&c, &b, COLLISION_TOL).is_some());
    }

    #[test]
    fn square_hole_exempts_square_peg() {
        let block = Solid {
            base: Primitive::Box {
                center: Vec3::zeros(),
                half: Vec3::repeat(0.03),
            },
            holes: vec![Primitive::Box {
                center: Vec3::zeros(),
                half: Vec3::new(0.011, 0.011, 0.03),
            }],
        };
        let peg = Solid {
            base: Primitive::Box {
                center: Vec3::zeros(),
                half: Vec3::new(0.01, 0.01, 0.1),
            },
            holes: vec![],
        };
        assert!(pair_overlap(&block, &peg, COLLISION_TOL).is_none());
    }
}
