use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Function {
    Hit,
    Support,
    Rolling,
}

impl Function {
    pub fn parse(s: &str) -> Option<Function> {
        match s.to_ascii_lowercase().as_str() {
            "hit" => Some(Function::Hit),
            "support" => Some(Function::Support),
            "rolling" => Some(Function::Rolling),
            _ => None,
        }
    }
}

/// Simulation parameters. Lengths are in scaled metres (after `scale`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub timestep: f64,
    pub scale: f64,
    pub part_mass: f64,
    pub friction: f64,
    pub gravity: f64,
    pub duration: f64,
    /// Applied along +X for the rolling test.
    pub rolling_force: f64,
    /// Applied along -Z on each flagged part in the support test.
    pub support_force: f64,
    pub restitution: f64,
    pub solver_iterations: usize,
    pub baumgarte: f64,
    pub slop: f64,
    pub separation_threshold: f64,
    pub ground_contact_threshold: f64,
    pub veer_limit: f64,
    pub rolling_distance: f64,
    pub support_tolerance: f64,
    pub drive_speed: f64,
    pub divergence_speed: f64,
    /// Steps between stored trajectory samples.
    pub sample_every: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            timestep: 1.0 / 500.0,
            scale: 10.0,
            part_mass: 10.0,
            friction: 0.5,
            gravity: 9.81,
            duration: 5.0,
            rolling_force: 200.0,
            support_force: 50.0,
            restitution: 0.0,
            solver_iterations: 10,
            baumgarte: 0.2,
            slop: 1e-4,
            separation_threshold: 0.05,
            ground_contact_threshold: 1e-4,
            veer_limit: 0.3,
            rolling_distance: 1.0,
            support_tolerance: 0.01,
            drive_speed: 0.5,
            divergence_speed: 1e3,
            sample_every: 50,
        }
    }
}

impl SimConfig {
    pub fn steps(&self) -> usize {
        (self.duration / self.timestep).round() as usize
    }
}
