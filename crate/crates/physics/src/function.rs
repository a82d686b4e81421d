//! The three function tests and the two failure conditions they share.

use std::collections::BTreeMap;
use std::io::Write;

use craft_core::assembler::Assembly;
use craft_core::geometry::{Axis, Primitive, Vec3};
use serde::Serialize;
use serde_json::json;

use crate::body::{Body, BodyKind};
use crate::compile::{compile_bodies, Craft};
use crate::config::{Function, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FailureReason {
    None,
    PartSeparated,
    NewGroundContact,
    InsufficientRotation,
    InsufficientDistance,
    Veered,
    MovedUnderLoad,
    PegMissed,
    PegOutsideHole,
    NumericalDivergence,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub body: String,
    /// Rows of `[t, x, y, z, qw, qx, qy, qz]`.
    pub samples: Vec<[f64; 8]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimOutcome {
    pub function: Function,
    pub success: bool,
    pub failure_reason: FailureReason,
    /// Part or connection that triggered the failure, when there is one.
    pub detail: Option<String>,
    pub time_s: f64,
    /// Rotation about the hinge axis, per flagged part (rad).
    pub cumulative_rotation: BTreeMap<String, f64>,
    /// Craft centroid displacement at the end of the run (m).
    pub displacement: [f64; 3],
    pub max_part_displacement: f64,
    pub peg_descent: Option<f64>,
    pub trajectories: Vec<Trajectory>,
}

/// Shared failure conditions, checked after every step.
pub fn check_failure_conditions(craft: &Craft) -> Option<(FailureReason, String)> {
    let bodies = &craft.world.bodies;
    for w in &craft.watches {
        let pa = bodies[w.body_a].to_world(&w.local_a);
        let pb = bodies[w.body_b].to_world(&w.local_b);
        if (pa - pb).norm() > craft.world.config.separation_threshold {
            let who = format!("{}->{}", w.from, w.to);
            return Some((FailureReason::PartSeparated, who));
        }
    }
    let t = craft.world.config.ground_contact_threshold;
    for i in 0..craft.parts.len() {
        if !craft.ground_set.contains(&i) && craft.part_lowest_z(i) <= t {
            return Some((FailureReason::NewGroundContact, craft.parts[i].name.clone()));
        }
    }
    None
}

struct Run<'a> {
    craft: Craft,
    function: Function,
    step: usize,
    trajectories: Vec<Trajectory>,
    trace: Option<&'a mut dyn Write>,
    start_centers: Vec<Vec3>,
    start_centroid: Vec3,
    max_part_displacement: f64,
}

impl<'a> Run<'a> {
    fn new(craft: Craft, function: Function, trace: Option<&'a mut dyn Write>) -> Run<'a> {
        let start_centers = (0..craft.parts.len()).map(|i| craft.part_center(i)).collect();
        let start_centroid = craft.centroid();
        let trajectories = craft
            .world
            .bodies
            .iter()
            .map(|b| Trajectory {
                body: b.name.clone(),
                samples: Vec::new(),
            })
            .collect();
        let mut run = Run {
            craft,
            function,
            step: 0,
            trajectories,
            trace,
            start_centers,
            start_centroid,
            max_part_displacement: 0.0,
        };
        run.record();
        run
    }

    fn record(&mut self) {
        let t = self.craft.world.time;
        let every = self.craft.world.config.sample_every.max(1);
        if self.step % every == 0 {
            for (traj, b) in self.trajectories.iter_mut().zip(&self.craft.world.bodies) {
                let q = b.orientation.quaternion();
                traj.samples
                    .push([t, b.position.x, b.position.y, b.position.z, q.w, q.i, q.j, q.k]);
            }
        }
        if let Some(w) = self.trace.as_mut() {
            let bodies: Vec<_> = self
                .craft
                .world
                .bodies
                .iter()
                .map(|b| {
                    let q = b.orientation.quaternion();
                    json!({
                        "body": b.name,
                        "p": [b.position.x, b.position.y, b.position.z],
                        "q": [q.w, q.i, q.j, q.k],
                    })
                })
                .collect();
            let _ = writeln!(w, "{}", json!({ "step": self.step, "t": t, "bodies": bodies }));
        }
    }

    /// One step plus the shared checks.
    fn advance(&mut self) -> Result<(), (FailureReason, String)> {
        if let Err(d) = self.craft.world.step() {
            return Err((FailureReason::NumericalDivergence, d.body));
        }
        self.step += 1;
        self.record();
        for i in 0..self.craft.parts.len() {
            let d = (self.craft.part_center(i) - self.start_centers[i]).norm();
            self.max_part_displacement = self.max_part_displacement.max(d);
        }
        match check_failure_conditions(&self.craft) {
            Some(f) => Err(f),
            None => Ok(()),
        }
    }

    fn finish(
        mut self,
        failure: Option<(FailureReason, String)>,
        rotation: BTreeMap<String, f64>,
        peg_descent: Option<f64>,
    ) -> SimOutcome {
        // Always keep the final pose.
        let every = self.craft.world.config.sample_every.max(1);
        if self.step % every != 0 {
            let t = self.craft.world.time;
            for (traj, b) in self.trajectories.iter_mut().zip(&self.craft.world.bodies) {
                let q = b.orientation.quaternion();
                traj.samples
                    .push([t, b.position.x, b.position.y, b.position.z, q.w, q.i, q.j, q.k]);
            }
        }
        let d = self.craft.centroid() - self.start_centroid;
        let (reason, detail) = match failure {
            Some((r, d)) => (r, Some(d)),
            None => (FailureReason::None, None),
        };
        SimOutcome {
            function: self.function,
            success: reason == FailureReason::None,
            failure_reason: reason,
            detail,
            time_s: self.craft.world.time,
            cumulative_rotation: rotation,
            displacement: [d.x, d.y, d.z],
            max_part_displacement: self.max_part_displacement,
            peg_descent,
            trajectories: self.trajectories,
        }
    }
}

/// Runs the test that matches `function`.
pub fn run_function_test(
    function: Function,
    assembly: &Assembly,
    config: &SimConfig,
    trace: Option<&mut dyn Write>,
) -> SimOutcome {
    match function {
        Function::Rolling => run_rolling_test(assembly, config, trace),
        Function::Support => run_support_test(assembly, config, trace),
        Function::Hit => run_hit_test(assembly, config, trace),
    }
}

/// Hinge-axis spin rate of a part relative to whatever holds it.
fn spin_rate(craft: &Craft, part: usize) -> f64 {
    let bodies = &craft.world.bodies;
    let body = craft.parts[part].body;
    for j in &craft.world.joints {
        if j.a == body || j.b == body {
            let axis = j.world_axis(bodies);
            return (bodies[j.a].angular_velocity - bodies[j.b].angular_velocity).dot(&axis);
        }
    }
    let b = &bodies[body];
    let axis = match b.shapes[craft.parts[part].shape].base {
        Primitive::Cylinder { axis, .. } => b.orientation * axis.unit(),
        Primitive::Box { .. } => Axis::Y.unit(),
    };
    b.angular_velocity.dot(&axis)
}

pub fn run_rolling_test(assembly: &Assembly, config: &SimConfig, trace: Option<&mut dyn Write>) -> SimOutcome {
    let craft = compile_bodies(assembly, config);
    let hub = craft.hub_part();
    let flagged: Vec<usize> = (0..craft.parts.len()).filter(|&i| craft.parts[i].exec).collect();
    let mut angle = vec![0.0; craft.parts.len()];
    let mut run = Run::new(craft, Function::Rolling, trace);
    let dt = config.timestep;
    let mut veered = false;
    let mut reached = false;
    let mut failure = None;
    for _ in 0..config.steps() {
        let p = run.craft.part_center(hub);
        let body = run.craft.parts[hub].body;
        run.craft.world.bodies[body].apply_force_at(Vec3::new(config.rolling_force, 0.0, 0.0), &p);
        if let Err(f) = run.advance() {
            failure = Some(f);
            break;
        }
        for &i in &flagged {
            angle[i] += spin_rate(&run.craft, i) * dt;
        }
        let d = run.craft.centroid() - run.start_centroid;
        if !reached && d.x >= config.rolling_distance {
            reached = true;
            veered = d.y.abs() > config.veer_limit;
        }
    }
    let rotation: BTreeMap<String, f64> = flagged
        .iter()
        .map(|&i| (run.craft.parts[i].name.clone(), angle[i].abs()))
        .collect();
    if failure.is_none() {
        if let Some((name, _)) = rotation.iter().find(|(_, a)| **a < std::f64::consts::TAU) {
            failure = Some((FailureReason::InsufficientRotation, name.clone()));
        } else if !reached {
            failure = Some((FailureReason::InsufficientDistance, "craft".to_string()));
        } else if veered {
            failure = Some((FailureReason::Veered, "craft".to_string()));
        }
    }
    run.finish(failure, rotation, None)
}

pub fn run_support_test(assembly: &Assembly, config: &SimConfig, trace: Option<&mut dyn Write>) -> SimOutcome {
    let craft = compile_bodies(assembly, config);
    let flagged: Vec<usize> = (0..craft.parts.len()).filter(|&i| craft.parts[i].exec).collect();
    let mut run = Run::new(craft, Function::Support, trace);
    let mut failure = None;
    for _ in 0..config.steps() {
        for &i in &flagged {
            let part = &run.craft.parts[i];
            let body = &run.craft.world.bodies[part.body];
            let half = body.shapes[part.shape].base.half_extents();
            let top = body.to_world(&(part.local_center + Vec3::new(0.0, 0.0, half.z)));
            let bi = part.body;
            run.craft.world.bodies[bi].apply_force_at(Vec3::new(0.0, 0.0, -config.support_force), &top);
        }
        if let Err(f) = run.advance() {
            failure = Some(f);
            break;
        }
        let centroid_moved = (run.craft.centroid() - run.start_centroid).norm();
        if run.max_part_displacement >= config.support_tolerance || centroid_moved >= config.support_tolerance {
            let worst = (0..run.craft.parts.len())
                .max_by(|&a, &b| {
                    let da = (run.craft.part_center(a) - run.start_centers[a]).norm();
                    let db = (run.craft.part_center(b) - run.start_centers[b]).norm();
                    da.total_cmp(&db)
                })
                .map_or_else(|| "craft".to_string(), |i| run.craft.parts[i].name.clone());
            failure = Some((FailureReason::MovedUnderLoad, worst));
            break;
        }
    }
    run.finish(failure, BTreeMap::new(), None)
}

const HOLE_OVERRUN: f64 = 0.01;

/// Peg-and-hole fixture for the hit test, in scaled metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HitFixture {
    pub peg_radius: f64,
    pub peg_length: f64,
    pub peg_gap: f64,
    pub hole_radius: f64,
    pub hole_depth: f64,
    pub block_half: [f64; 3],
    /// Distance from the flagged part's lowest point to the peg top.
    pub craft_gap: f64,
}

impl Default for HitFixture {
    fn default() -> Self {
        HitFixture {
            peg_radius: 0.1,
            peg_length: 0.5,
            peg_gap: 0.05,
            hole_radius: 0.12,
            hole_depth: 0.4,
            block_half: [0.6, 0.6, 0.25],
            craft_gap: 0.1,
        }
    }
}

pub fn run_hit_test(assembly: &Assembly, config: &SimConfig, trace: Option<&mut dyn Write>) -> SimOutcome {
    run_hit_test_with(assembly, config, &HitFixture::default(), trace)
}

pub fn run_hit_test_with(
    assembly: &Assembly,
    config: &SimConfig,
    fx: &HitFixture,
    trace: Option<&mut dyn Write>,
) -> SimOutcome {
    let mut craft = compile_bodies(assembly, config);
    let block_top = 2.0 * fx.block_half[2];
    let peg_bottom = block_top + fx.peg_gap;
    let peg_top = peg_bottom + fx.peg_length;

    let Some(flag) = (0..craft.parts.len()).find(|&i| craft.parts[i].exec) else {
        let run = Run::new(craft, Function::Hit, trace);
        return run.finish(Some((FailureReason::PegMissed, "no flagged part".to_string())), BTreeMap::new(), None);
    };
    let c = craft.part_center(flag);
    let lowest = (0..craft.parts.len())
        .map(|i| craft.part_lowest_z(i))
        .fold(f64::INFINITY, f64::min);
    let lift = peg_top + fx.craft_gap - lowest;
    craft.translate(&Vec3::new(-c.x, -c.y, lift));

    let root = craft.parts[craft.hub_part()].body;
    let drive = Vec3::new(0.0, 0.0, -config.drive_speed);
    for (i, b) in craft.world.bodies.iter_mut().enumerate() {
        b.velocity = drive;
        if i == root {
            b.set_kind(BodyKind::Kinematic);
        }
    }

    let block = Body::compound(
        "BLOCK",
        BodyKind::Static,
        vec![(
            None,
            Primitive::Box {
                center: Vec3::new(0.0, 0.0, fx.block_half[2]),
                half: Vec3::from(fx.block_half),
            },
            // Runs a little past the top face so the opening is clean.
            vec![Primitive::Cylinder {
                center: Vec3::new(0.0, 0.0, block_top - 0.5 * fx.hole_depth + 0.5 * HOLE_OVERRUN),
                axis: Axis::Z,
                radius: fx.hole_radius,
                half_length: 0.5 * (fx.hole_depth + HOLE_OVERRUN),
            }],
        )],
        config.part_mass,
    );
    let mut peg = Body::compound(
        "PEG",
        BodyKind::Dynamic,
        vec![(
            None,
            Primitive::Cylinder {
                center: Vec3::new(0.0, 0.0, peg_bottom + 0.5 * fx.peg_length),
                axis: Axis::Z,
                radius: fx.peg_radius,
                half_length: 0.5 * fx.peg_length,
            },
            vec![],
        )],
        config.part_mass,
    );
    peg.gravity = false;
    let block_id = craft.world.bodies.len();
    craft.world.bodies.push(block);
    let peg_id = craft.world.bodies.len();
    craft.world.bodies.push(peg);

    let mut run = Run::new(craft, Function::Hit, trace);
    let half_len = 0.5 * fx.peg_length;
    let peg_end = |run: &Run, s: f64| {
        let b = &run.craft.world.bodies[peg_id];
        b.to_world(&Vec3::new(0.0, 0.0, s * half_len))
    };
    let mut touched = false;
    let mut halted = false;
    let mut failure = None;
    let mut descent = 0.0;
    let mut centred = true;
    for _ in 0..config.steps() {
        if let Err(f) = run.advance() {
            failure = Some(f);
            break;
        }
        let craft_bodies = run.craft.craft_bodies;
        if !touched {
            touched = run.craft.world.contacts.iter().any(|c| {
                let other = if c.a == peg_id { c.b } else if c.b == Some(peg_id) { Some(c.a) } else { None };
                other.is_some_and(|o| o < craft_bodies)
            });
            if touched {
                run.craft.world.bodies[peg_id].gravity = true;
            }
        }
        if !halted && penetrates(&run.craft.world.bodies[root], &run.craft.world.bodies[block_id], config.slop) {
            halted = true;
            run.craft.world.bodies[root].set_kind(BodyKind::Static);
            if !touched {
                failure = Some((FailureReason::PegMissed, run.craft.world.bodies[root].name.clone()));
                break;
            }
        }
        descent = peg_top - peg_end(&run, 1.0).z;
        let bottom = peg_end(&run, -1.0);
        centred = run.craft.world.bodies[peg_id].position.xy().norm() <= fx.hole_radius;
        if bottom.xy().norm() > fx.hole_radius {
            failure = Some((FailureReason::PegOutsideHole, "PEG".to_string()));
            break;
        }
        if descent >= 0.5 * fx.hole_depth && centred {
            break;
        }
    }
    if failure.is_none() && !(descent >= 0.5 * fx.hole_depth && centred) {
        failure = Some(if touched {
            (FailureReason::InsufficientDistance, "PEG".to_string())
        } else {
            (FailureReason::PegMissed, "PEG".to_string())
        });
    }
    run.finish(failure, BTreeMap::new(), Some(descent))
}

/// Whether any surface sample of `a` sits deeper than `tol` inside `b`.
fn penetrates(a: &Body, b: &Body, tol: f64) -> bool {
    a.shapes.iter().any(|sa| {
        sa.samples.iter().any(|p| {
            let local = b.to_local(&a.to_world(p));
            b.shapes.iter().any(|sb| sb.sdf(&local).0 < -tol)
        })
    })
}
