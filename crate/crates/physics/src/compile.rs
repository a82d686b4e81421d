use craft_core::assembler::Assembly;
use craft_core::geometry::{Primitive, Vec3};
use craft_core::plan::{Contact, JointType};

use crate::body::{lowest_points, Body, BodyKind};
use crate::config::SimConfig;
use crate::world::{Revolute, World};

/// A declared connection whose two sides live on different bodies.
#[derive(Debug, Clone, PartialEq)]
pub struct Watch {
    pub edge: usize,
    /// Part names of the connection, child first.
    pub from: String,
    pub to: String,
    pub body_a: usize,
    pub body_b: usize,
    pub local_a: Vec3,
    pub local_b: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartRef {
    pub name: String,
    pub body: usize,
    pub shape: usize,
    /// Part centre in the body frame.
    pub local_center: Vec3,
    pub exec: bool,
    pub edges: usize,
}

/// A compiled craft: the world plus the bookkeeping the function tests
/// need to map parts and connections onto bodies.
pub struct Craft {
    pub world: World,
    pub parts: Vec<PartRef>,
    pub watches: Vec<Watch>,
    /// Joint index created for each edge, if any.
    pub edge_joint: Vec<Option<usize>>,
    /// Parts resting on the ground when compiled.
    pub ground_set: Vec<usize>,
    pub craft_bodies: usize,
}

impl Craft {
    pub fn part_center(&self, i: usize) -> Vec3 {
        let p = &self.parts[i];
        self.world.bodies[p.body].to_world(&p.local_center)
    }

    pub fn part_lowest_z(&self, i: usize) -> f64 {
        let p = &self.parts[i];
        let body = &self.world.bodies[p.body];
        lowest_points(body, &body.shapes[p.shape])
            .iter()
            .map(|q| q.z)
            .fold(f64::INFINITY, f64::min)
    }

    /// Mean of part centres; parts all carry the same mass.
    pub fn centroid(&self) -> Vec3 {
        let n = self.parts.len().max(1) as f64;
        (0..self.parts.len()).fold(Vec3::zeros(), |acc, i| acc + self.part_center(i)) / n
    }

    /// Part with the most connection edges; ties go to plan order.
    pub fn hub_part(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.parts.iter().enumerate() {
            if p.edges > self.parts[best].edges {
                best = i;
            }
        }
        best
    }

    /// Rigidly moves the whole craft.
    pub fn translate(&mut self, offset: &Vec3) {
        for b in self.world.bodies.iter_mut().take(self.craft_bodies) {
            b.position += offset;
        }
        self.refresh_ground_set();
    }

    pub fn refresh_ground_set(&mut self) {
        let t = self.world.config.ground_contact_threshold;
        self.ground_set = (0..self.parts.len()).filter(|&i| self.part_lowest_z(i) <= t).collect();
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Merges fixed clusters into bodies, turns non-fixed insertions into
/// hinges and records every cross-body connection for separation checks.
pub fn compile_bodies(assembly: &Assembly, config: &SimConfig) -> Craft {
    let n = assembly.parts.len();
    let s = config.scale;
    let mut parent: Vec<usize> = (0..n).collect();
    for e in &assembly.edges {
        if e.connection.joint == JointType::Fixed {
            let (a, b) = (find(&mut parent, e.from), find(&mut parent, e.to));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    let mut cluster_ids: Vec<usize> = Vec::new();
    for &r in &roots {
        if !cluster_ids.contains(&r) {
            cluster_ids.push(r);
        }
    }

    let mut bodies = Vec::new();
    let mut parts: Vec<Option<PartRef>> = vec![None; n];
    for &root in &cluster_ids {
        let members: Vec<usize> = (0..n).filter(|&i| roots[i] == root).collect();
        let pieces = members
            .iter()
            .map(|&i| {
                let solid = assembly.parts[i].solid();
                (
                    Some(i),
                    solid.base.scaled(s),
                    solid.holes.iter().map(|h| h.scaled(s)).collect::<Vec<Primitive>>(),
                )
            })
            .collect();
        let name = members
            .iter()
            .map(|&i| assembly.parts[i].name())
            .collect::<Vec<_>>()
            .join("+");
        let body = Body::compound(name, BodyKind::Dynamic, pieces, config.part_mass);
        let bi = bodies.len();
        for (k, &i) in members.iter().enumerate() {
            let p = &assembly.parts[i];
            parts[i] = Some(PartRef {
                name: p.name().to_string(),
                body: bi,
                shape: k,
                local_center: body.to_local(&(p.position * s)),
                exec: p.spec.exec_function,
                edges: assembly.edges.iter().filter(|e| e.from == i || e.to == i).count(),
            });
        }
        bodies.push(body);
    }
    let parts: Vec<PartRef> = parts.into_iter().map(|p| p.expect("every part clustered")).collect();

    let craft_bodies = bodies.len();
    let mut world = World::new(config.clone(), bodies);
    let mut watches = Vec::new();
    let mut edge_joint = vec![None; assembly.edges.len()];
    for (k, e) in assembly.edges.iter().enumerate() {
        let (ba, bb) = (parts[e.from].body, parts[e.to].body);
        if ba == bb {
            continue;
        }
        let anchor = match &e.connection.contact {
            Contact::Inserted { to_modification } => {
                let hole = assembly.parts[e.to]
                    .hole(to_modification)
                    .expect("validated modification reference");
                if e.connection.joint == JointType::NonFixed {
                    edge_joint[k] = Some(world.joints.len());
                    let j = Revolute::new(&world.bodies, ba, bb, hole.center * s, hole.axis.unit());
                    world.add_joint(j);
                }
                hole.center * s
            }
            Contact::Surface { .. } => {
                let i = assembly.parts[e.from]
                    .aabb()
                    .intersection(&assembly.parts[e.to].aabb());
                i.center() * s
            }
        };
        watches.push(Watch {
            edge: k,
            from: parts[e.from].name.clone(),
            to: parts[e.to].name.clone(),
            body_a: ba,
            body_b: bb,
            local_a: world.bodies[ba].to_local(&anchor),
            local_b: world.bodies[bb].to_local(&anchor),
        });
    }

    let mut craft = Craft {
        world,
        parts,
        watches,
        edge_joint,
        ground_set: Vec::new(),
        craft_bodies,
    };
    craft.refresh_ground_set();
    craft
}
