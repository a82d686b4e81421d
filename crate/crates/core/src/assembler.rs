//! Compiles a validated plan into world-space solids.
//!
//! Parts are placed one at a time from a seed. A part's pose comes from the
//! first of its connections whose target is already placed; if none is, a
//! placed part that connects *to* it fixes its pose instead. Every declared
//! connection is checked afterwards.

use serde::Serialize;
use serde_json::{json, Value};

use crate::catalog::{Catalog, ObjectShape};
use crate::geometry::{Aabb, Axis, Primitive, Vec3};
use crate::plan::tokens::{Align, HoleSpan, ModAlign};
use crate::plan::{Contact, ConnectionSpec, CraftPlan, JointType, ModificationSpec, Orientation, PartSpec};
use crate::MM_TO_M;

/// Positional tolerance for declared contacts, metres.
pub const CONTACT_TOL: f64 = 1e-6;
/// Radial clearance added around inserted parts, metres.
pub const HOLE_CLEARANCE: f64 = 1e-3;
/// Radius of a hole that nothing is inserted into, metres.
pub const DEFAULT_HOLE_RADIUS: f64 = 5e-3;
/// Gap between an unconnected part and the rest of the assembly, metres.
const RESEED_GAP: f64 = 10e-3;

#[derive(Debug, Clone, PartialEq, thiserror::Error, Serialize)]
#[serde(tag = "error")]
pub enum PlacementError {
    #[error("part {part} cannot be placed: {reason}")]
    Unplaceable { part: String, reason: String },
    #[error("connection from {part} to {to_part} does not hold after placement: {reason}")]
    InconsistentConnection {
        part: String,
        to_part: String,
        reason: String,
    },
    #[error("{part} is inserted into {to_part}.{modification} before {to_part} is placed")]
    HoleNotCarvedYet {
        part: String,
        to_part: String,
        modification: String,
    },
    #[error("hole {modification} does not fit inside {part}")]
    HoleExceedsOwner { part: String, modification: String },
}

impl PlacementError {
    pub fn part(&self) -> &str {
        match self {
            PlacementError::Unplaceable { part, .. }
            | PlacementError::InconsistentConnection { part, .. }
            | PlacementError::HoleNotCarvedYet { part, .. }
            | PlacementError::HoleExceedsOwner { part, .. } => part,
        }
    }
}

/// World-axis shape of a part before it is positioned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedShape {
    /// Full AABB extents along X, Y, Z, metres.
    pub extents: Vec3,
    /// For cylinders, the principal axis and radius.
    pub cylinder: Option<(Axis, f64)>,
}

impl ResolvedShape {
    pub fn half(&self) -> Vec3 {
        self.extents * 0.5
    }

    /// Cylinder axis, or the longest box axis (first one on ties).
    pub fn principal_axis(&self) -> Axis {
        match self.cylinder {
            Some((axis, _)) => axis,
            None => {
                let mut best = Axis::X;
                for a in [Axis::Y, Axis::Z] {
                    if self.extents[a.index()] > self.extents[best.index()] {
                        best = a;
                    }
                }
                best
            }
        }
    }

    pub fn primitive(&self, center: Vec3) -> Primitive {
        match self.cylinder {
            Some((axis, radius)) => Primitive::Cylinder {
                center,
                axis,
                radius,
                half_length: self.extents[axis.index()] * 0.5,
            },
            None => Primitive::Box {
                center,
                half: self.half(),
            },
        }
    }
}

/// Maps a part's orientation onto world-axis extents.
pub fn resolve_orientation(spec: &PartSpec, shape: &ObjectShape) -> ResolvedShape {
    match (&spec.orientation, shape) {
        (Orientation::Cuboid(d), _) => ResolvedShape {
            extents: Vec3::new(d[0], d[1], d[2]) * MM_TO_M,
            cylinder: None,
        },
        (Orientation::Cylinder(axis), ObjectShape::Cylinder { radius, length }) => {
            let r = radius * MM_TO_M;
            let mut extents = Vec3::repeat(2.0 * r);
            extents[axis.index()] = length * MM_TO_M;
            ResolvedShape {
                extents,
                cylinder: Some((*axis, r)),
            }
        }
        (Orientation::Cylinder(_), ObjectShape::Cuboid { .. }) => {
            unreachable!("format validation pairs cylinder tokens with cylinders")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum HoleSection {
    Round { radius: f64 },
    Square { side: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoleRegion {
    pub owner: String,
    pub name: String,
    pub axis: Axis,
    pub center: Vec3,
    pub section: HoleSection,
    pub depth: f64,
    pub through: bool,
}

impl HoleRegion {
    pub fn primitive(&self) -> Primitive {
        match self.section {
            HoleSection::Round { radius } => Primitive::Cylinder {
                center: self.center,
                axis: self.axis,
                radius,
                half_length: self.depth * 0.5,
            },
            HoleSection::Square { side } => {
                let mut half = Vec3::repeat(side * 0.5);
                half[self.axis.index()] = self.depth * 0.5;
                Primitive::Box {
                    center: self.center,
                    half,
                }
            }
        }
    }

    fn to_json(&self) -> Value {
        let mut v = json!({
            "name": self.name,
            "axis": self.axis.to_string(),
            "center": vec3_json(&self.center),
            "depth": self.depth,
            "through": self.through,
        });
        match self.section {
            HoleSection::Round { radius } => {
                v["section"] = json!("round");
                v["radius"] = json!(radius);
            }
            HoleSection::Square { side } => {
                v["section"] = json!("square");
                v["side"] = json!(side);
            }
        }
        v
    }
}

/// A primitive minus the regions carved out of it.
#[derive(Debug, Clone, PartialEq)]
pub struct Solid {
    pub base: Primitive,
    pub holes: Vec<Primitive>,
}

impl Solid {
    pub fn contains(&self, p: &Vec3) -> bool {
        self.base.contains(p) && !self.holes.iter().any(|h| h.sdf(p) < 0.0)
    }

    pub fn translated(&self, v: &Vec3) -> Solid {
        Solid {
            base: self.base.translated(v),
            holes: self.holes.iter().map(|h| h.translated(v)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacedPart {
    pub spec: PartSpec,
    pub shape: ResolvedShape,
    /// AABB center, metres.
    pub position: Vec3,
    pub holes: Vec<HoleRegion>,
}

impl PlacedPart {
    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn half(&self) -> Vec3 {
        self.shape.half()
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_center_half(self.position, self.half())
    }

    pub fn base(&self) -> Primitive {
        self.shape.primitive(self.position)
    }

    pub fn solid(&self) -> Solid {
        Solid {
            base: self.base(),
            holes: self.holes.iter().map(HoleRegion::primitive).collect(),
        }
    }

    pub fn hole(&self, name: &str) -> Option<&HoleRegion> {
        self.holes.iter().find(|h| h.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// Index of the declaring part.
    pub from: usize,
    pub to: usize,
    pub connection: ConnectionSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assembly {
    /// Parts in plan order.
    pub parts: Vec<PlacedPart>,
    pub edges: Vec<Edge>,
    /// Names of parts resting on the ground plane.
    pub ground_set: Vec<String>,
}

impl Assembly {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.parts.iter().position(|p| p.spec.name == name)
    }

    pub fn part(&self, name: &str) -> Option<&PlacedPart> {
        self.parts.iter().find(|p| p.spec.name == name)
    }

    pub fn aabb(&self) -> Aabb {
        self.parts
            .iter()
            .fold(Aabb::empty(), |acc, p| acc.union(&p.aabb()))
    }

    pub fn translated(&self, v: &Vec3) -> Assembly {
        let mut out = self.clone();
        for p in &mut out.parts {
            p.position += v;
            for h in &mut p.holes {
                h.center += v;
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let parts: Vec<Value> = self
            .parts
            .iter()
            .map(|p| {
                let mut v = json!({
                    "name": p.spec.name,
                    "object": p.spec.available_obj,
                    "center": vec3_json(&p.position),
                    "extents": vec3_json(&p.shape.extents),
                });
                match p.shape.cylinder {
                    Some((axis, radius)) => {
                        v["shape"] = json!("cylinder");
                        v["axis"] = json!(axis.to_string());
                        v["radius"] = json!(radius);
                    }
                    None => v["shape"] = json!("box"),
                }
                v["holes"] = Value::Array(p.holes.iter().map(HoleRegion::to_json).collect());
                v
            })
            .collect();
        let edges: Vec<Value> = self
            .edges
            .iter()
            .map(|e| {
                let mut v = json!({
                    "from": self.parts[e.from].spec.name,
                    "to": self.parts[e.to].spec.name,
                    "contact": e.connection.contact_name(),
                    "joint": match e.connection.joint {
                        JointType::Fixed => "FIXED",
                        JointType::NonFixed => "NON_FIXED",
                    },
                });
                if let Contact::Inserted { to_modification } = &e.connection.contact {
                    v["modification"] = json!(to_modification);
                }
                v
            })
            .collect();
        json!({
            "parts": parts,
            "edges": edges,
            "ground_set": self.ground_set,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("assembly serializes")
    }
}

fn vec3_json(v: &Vec3) -> Value {
    json!([v.x, v.y, v.z])
}

/// Places, carves and checks every part of a format-valid plan.
pub fn place_parts(plan: &CraftPlan, catalog: &Catalog) -> Result<Assembly, PlacementError> {
    let shapes: Vec<ResolvedShape> = plan
        .parts
        .iter()
        .map(|p| {
            let obj = catalog
                .lookup(&p.available_obj)
                .expect("format validation resolved every object");
            resolve_orientation(p, &obj.shape)
        })
        .collect();

    let mut placer = Placer {
        plan,
        shapes: &shapes,
        positions: vec![None; plan.parts.len()],
        holes: vec![Vec::new(); plan.parts.len()],
    };
    placer.run()?;

    let positions: Vec<Vec3> = placer.positions.iter().map(|p| p.expect("all placed")).collect();
    let mut parts: Vec<PlacedPart> = plan
        .parts
        .iter()
        .zip(&shapes)
        .zip(positions)
        .zip(placer.holes)
        .map(|(((spec, shape), position), holes)| PlacedPart {
            spec: spec.clone(),
            shape: *shape,
            position,
            holes,
        })
        .collect();

    // Rest the lowest part on the ground.
    let min_z = parts
        .iter()
        .map(|p| p.aabb().min.z)
        .fold(f64::INFINITY, f64::min);
    if min_z != 0.0 {
        let shift = Vec3::new(0.0, 0.0, -min_z);
        for p in &mut parts {
            p.position += shift;
        }
    }
    let shapes: Vec<ResolvedShape> = parts.iter().map(|p| p.shape).collect();
    for (i, p) in parts.iter_mut().enumerate() {
        p.holes = p
            .spec
            .modifications
            .iter()
            .map(|m| hole_region(plan, &shapes, i, m, p.position))
            .collect::<Result<_, _>>()?;
    }

    let mut edges = Vec::new();
    for (i, spec) in plan.parts.iter().enumerate() {
        for c in &spec.connections {
            let j = plan.index_of(&c.to_part).expect("references validated");
            check_connection(&parts[i], &parts[j], c)?;
            edges.push(Edge {
                from: i,
                to: j,
                connection: c.clone(),
            });
        }
    }

    let ground_set = parts
        .iter()
        .filter(|p| p.aabb().min.z.abs() <= 1e-9)
        .map(|p| p.spec.name.clone())
        .collect();

    Ok(Assembly {
        parts,
        edges,
        ground_set,
    })
}

/// Recomputes every hole region from the current part positions. Holes are
/// sized from the parts inserted into them.
pub fn carve_modifications(assembly: &Assembly, plan: &CraftPlan) -> Result<Assembly, PlacementError> {
    let shapes: Vec<ResolvedShape> = assembly.parts.iter().map(|p| p.shape).collect();
    let mut out = assembly.clone();
    for (i, part) in out.parts.iter_mut().enumerate() {
        part.holes = part
            .spec
            .modifications
            .iter()
            .map(|m| hole_region(plan, &shapes, i, m, part.position))
            .collect::<Result<_, _>>()?;
    }
    Ok(out)
}

fn hole_region(
    plan: &CraftPlan,
    shapes: &[ResolvedShape],
    owner: usize,
    m: &ModificationSpec,
    position: Vec3,
) -> Result<HoleRegion, PlacementError> {
    let owner_spec = &plan.parts[owner];
    let half = shapes[owner].half();
    let (axis, span) = m.hole_axis();
    let (u, v) = axis.others();

    let mut center = position;
    for t in [u, v] {
        if let ModAlign::At(Align::Flush(side)) = m.align[t.index()] {
            // Quarter point towards the named face.
            center[t.index()] += side.sign() * half[t.index()] * 0.5;
        }
    }
    let h = half[axis.index()];
    let (depth, through) = match span {
        HoleSpan::Full => (2.0 * h, true),
        HoleSpan::HalfFrom(side) => {
            center[axis.index()] += side.sign() * h * 0.5;
            (h, false)
        }
    };

    let inserted: Vec<&ResolvedShape> = plan
        .parts
        .iter()
        .enumerate()
        .filter(|(_, p)| {
            p.connections.iter().any(|c| {
                c.to_part == owner_spec.name
                    && matches!(&c.contact, Contact::Inserted { to_modification } if *to_modification == m.name)
            })
        })
        .map(|(i, _)| &shapes[i])
        // A part across the hole axis cannot be inserted at all; placement
        // reports it, so it must not inflate the hole first.
        .filter(|s| s.principal_axis() == axis)
        .collect();

    let section = if inserted.is_empty() {
        HoleSection::Round {
            radius: DEFAULT_HOLE_RADIUS,
        }
    } else if inserted.iter().any(|s| s.cylinder.is_some()) {
        let reach = inserted
            .iter()
            .map(|s| {
                let hs = s.half();
                let (a, b) = (hs[u.index()], hs[v.index()]);
                match s.cylinder {
                    Some((ax, r)) if ax == axis => r,
                    _ => (a * a + b * b).sqrt(),
                }
            })
            .fold(0.0, f64::max);
        HoleSection::Round {
            radius: reach + HOLE_CLEARANCE,
        }
    } else {
        let width = inserted
            .iter()
            .map(|s| s.extents[u.index()].max(s.extents[v.index()]))
            .fold(0.0, f64::max);
        HoleSection::Square {
            side: width + 2.0 * HOLE_CLEARANCE,
        }
    };

    let region = HoleRegion {
        owner: owner_spec.name.clone(),
        name: m.name.clone(),
        axis,
        center,
        section,
        depth,
        through,
    };
    let owner_box = Aabb::from_center_half(position, half);
    if !owner_box.contains_aabb(&region.primitive().aabb(), 1e-9) {
        return Err(PlacementError::HoleExceedsOwner {
            part: owner_spec.name.clone(),
            modification: m.name.clone(),
        });
    }
    Ok(region)
}

struct Placer<'a> {
    plan: &'a CraftPlan,
    shapes: &'a [ResolvedShape],
    positions: Vec<Option<Vec3>>,
    holes: Vec<Vec<HoleRegion>>,
}

impl Placer<'_> {
    fn run(&mut self) -> Result<(), PlacementError> {
        let n = self.plan.parts.len();
        if n == 0 {
            return Ok(());
        }
        let seed = self
            .plan
            .parts
            .iter()
            .position(|p| p.connections.is_empty())
            .unwrap_or(0);
        let h = self.shapes[seed].half();
        self.set(seed, Vec3::new(0.0, 0.0, h.z))?;

        loop {
            let mut progressed = true;
            while progressed {
                progressed = false;
                for i in 0..n {
                    if self.positions[i].is_some() {
                        continue;
                    }
                    if let Some(pos) = self.pose_from_placed(i)? {
                        self.set(i, pos)?;
                        progressed = true;
                    }
                }
            }
            let leftover: Vec<usize> = (0..n).filter(|&i| self.positions[i].is_none()).collect();
            let Some(&first) = leftover.first() else {
                return Ok(());
            };
            // Nothing placed touches the remaining parts. Start a new island
            // next to the assembly so connectivity checking can report it.
            let Some(&island) = leftover
                .iter()
                .find(|&&i| self.plan.parts[i].connections.is_empty())
            else {
                let spec = &self.plan.parts[first];
                let c = &spec.connections[0];
                return Err(match &c.contact {
                    Contact::Inserted { to_modification } => PlacementError::HoleNotCarvedYet {
                        part: spec.name.clone(),
                        to_part: c.to_part.clone(),
                        modification: to_modification.clone(),
                    },
                    Contact::Surface { .. } => PlacementError::Unplaceable {
                        part: spec.name.clone(),
                        reason: "no connection leads to a placed part".into(),
                    },
                });
            };
            let max_y = (0..n)
                .filter_map(|i| self.positions[i].map(|p| p.y + self.shapes[i].half().y))
                .fold(f64::NEG_INFINITY, f64::max);
            let h = self.shapes[island].half();
            self.set(island, Vec3::new(0.0, max_y + RESEED_GAP + h.y, h.z))?;
        }
    }

    fn set(&mut self, i: usize, position: Vec3) -> Result<(), PlacementError> {
        self.positions[i] = Some(position);
        let shapes = self.shapes;
        let spec = &self.plan.parts[i];
        self.holes[i] = spec
            .modifications
            .iter()
            .map(|m| hole_region(self.plan, shapes, i, m, position))
            .collect::<Result<_, _>>()?;
        Ok(())
    }

    fn index(&self, name: &str) -> usize {
        self.plan.index_of(name).expect("references validated")
    }

    /// Pose of part `i` from its first connection to a placed part, or
    /// else from a placed part's connection to it.
    fn pose_from_placed(&self, i: usize) -> Result<Option<Vec3>, PlacementError> {
        let spec = &self.plan.parts[i];
        for c in &spec.connections {
            let t = self.index(&c.to_part);
            if let Some(tp) = self.positions[t] {
                return self.forward(i, t, tp, c).map(Some);
            }
        }
        for (j, other) in self.plan.parts.iter().enumerate() {
            let Some(cp) = self.positions[j] else {
                continue;
            };
            if let Some(c) = other.connections.iter().find(|c| c.to_part == spec.name) {
                return self.reverse(i, j, cp, c).map(Some);
            }
        }
        Ok(None)
    }

    /// Places `i`, which declares `c` towards the placed part `t`.
    fn forward(&self, i: usize, t: usize, tp: Vec3, c: &ConnectionSpec) -> Result<Vec3, PlacementError> {
        let ch = self.shapes[i].half();
        let th = self.shapes[t].half();
        match &c.contact {
            Contact::Surface { to_face, align } => {
                let n = to_face.axis.index();
                let s = to_face.side.sign();
                let mut p = tp;
                p[n] = tp[n] - s * (th[n] + ch[n]);
                let (u, v) = to_face.axis.others();
                for a in [u, v] {
                    let k = a.index();
                    if let Align::Flush(side) = align[k] {
                        p[k] = tp[k] + side.sign() * (th[k] - ch[k]);
                    }
                }
                Ok(p)
            }
            Contact::Inserted { to_modification } => {
                let hole = self.holes[t]
                    .iter()
                    .find(|h| &h.name == to_modification)
                    .expect("references validated");
                self.check_insert_axis(i, hole)?;
                Ok(hole.center)
            }
        }
    }

    /// Places `i`, the target of connection `c` declared by the placed part `j`.
    fn reverse(&self, i: usize, j: usize, cp: Vec3, c: &ConnectionSpec) -> Result<Vec3, PlacementError> {
        let th = self.shapes[i].half();
        let ch = self.shapes[j].half();
        match &c.contact {
            Contact::Surface { to_face, align } => {
                let n = to_face.axis.index();
                let s = to_face.side.sign();
                let mut p = cp;
                p[n] = cp[n] + s * (th[n] + ch[n]);
                let (u, v) = to_face.axis.others();
                for a in [u, v] {
                    let k = a.index();
                    if let Align::Flush(side) = align[k] {
                        p[k] = cp[k] - side.sign() * (th[k] - ch[k]);
                    }
                }
                Ok(p)
            }
            Contact::Inserted { to_modification } => {
                // Carve at the origin to learn the hole's offset from the
                // owner's center.
                let m = self.plan.parts[i]
                    .modifications
                    .iter()
                    .find(|m| &m.name == to_modification)
                    .expect("references validated");
                let local = hole_region(self.plan, self.shapes, i, m, Vec3::zeros())?;
                self.check_insert_axis(j, &local)?;
                Ok(cp - local.center)
            }
        }
    }

    fn check_insert_axis(&self, inserter: usize, hole: &HoleRegion) -> Result<(), PlacementError> {
        let axis = self.shapes[inserter].principal_axis();
        if axis != hole.axis {
            return Err(PlacementError::Unplaceable {
                part: self.plan.parts[inserter].name.clone(),
                reason: format!(
                    "principal axis {axis} does not match the {} axis of {}.{}",
                    hole.axis, hole.owner, hole.name
                ),
            });
        }
        Ok(())
    }
}

/// Verifies that a declared connection holds between two placed parts.
fn check_connection(part: &PlacedPart, target: &PlacedPart, c: &ConnectionSpec) -> Result<(), PlacementError> {
    let fail = |reason: String| PlacementError::InconsistentConnection {
        part: part.spec.name.clone(),
        to_part: target.spec.name.clone(),
        reason,
    };
    match &c.contact {
        Contact::Surface { to_face, .. } => {
            let n = to_face.axis.index();
            let s = to_face.side.sign();
            let own_plane = part.position[n] + s * part.half()[n];
            let their_plane = target.position[n] - s * target.half()[n];
            if (own_plane - their_plane).abs() > CONTACT_TOL {
                return Err(fail(format!(
                    "faces are {:.6} m apart",
                    (own_plane - their_plane).abs()
                )));
            }
            let (a, b) = (part.aabb(), target.aabb());
            let (u, v) = to_face.axis.others();
            for t in [u, v] {
                let k = t.index();
                let overlap = a.max[k].min(b.max[k]) - a.min[k].max(b.min[k]);
                if overlap <= CONTACT_TOL {
                    return Err(fail(format!("faces do not overlap along {t}")));
                }
            }
            Ok(())
        }
        Contact::Inserted { to_modification } => {
            let hole = target.hole(to_modification).expect("references validated");
            if part.shape.principal_axis() != hole.axis {
                return Err(fail(format!(
                    "principal axis {} does not match hole axis {}",
                    part.shape.principal_axis(),
                    hole.axis
                )));
            }
            let (u, v) = hole.axis.others();
            for t in [u, v] {
                let k = t.index();
                if (part.position[k] - hole.center[k]).abs() > CONTACT_TOL {
                    return Err(fail(format!("not centered in {to_modification} along {t}")));
                }
            }
            let k = hole.axis.index();
            let (lo, hi) = (hole.center[k] - hole.depth * 0.5, hole.center[k] + hole.depth * 0.5);
            let (plo, phi) = (part.aabb().min[k], part.aabb().max[k]);
            if phi.min(hi) - plo.max(lo) <= CONTACT_TOL {
                return Err(fail(format!("does not reach into {to_modification}")));
            }
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize)]
#[error("assembly splits into {} disconnected groups", components.len())]
pub struct DisconnectedError {
    pub components: Vec<Vec<String>>,
}

/// Ok iff the connection graph has exactly one component. Components are
/// listed in order of their first part, members in plan order.
pub fn connectivity_check(assembly: &Assembly) -> Result<(), DisconnectedError> {
    let components = connected_components(assembly);
    if components.len() <= 1 {
        Ok(())
    } else {
        Err(DisconnectedError { components })
    }
}

pub fn connected_components(assembly: &Assembly) -> Vec<Vec<String>> {
    let n = assembly.parts.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for e in &assembly.edges {
        let (a, b) = (find(&mut parent, e.from), find(&mut parent, e.to));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: Vec<(usize, Vec<String>)> = Vec::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, members)) => members.push(assembly.parts[i].spec.name.clone()),
            None => groups.push((root, vec![assembly.parts[i].spec.name.clone()])),
        }
    }
    groups.into_iter().map(|(_, m)| m).collect()
}
