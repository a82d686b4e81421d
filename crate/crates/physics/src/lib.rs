//! Rigid-body functional testing for compiled craft assemblies.
//!
//! Lengths are scaled up (x10 by default) before simulation. Parts joined by
//! fixed connections become one compound body, and non-fixed insertions
//! become hinges about the hole axis.

pub mod body;
pub mod compile;
pub mod config;
pub mod function;
pub mod world;

pub use compile::{compile_bodies, Craft};
pub use config::{Function, SimConfig};
pub use function::{
    check_failure_conditions, run_function_test, run_hit_test, run_rolling_test, run_support_test,
    FailureReason, HitFixture, SimOutcome,
};
pub use world::World;
