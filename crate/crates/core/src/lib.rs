//! Plan language, catalog, assembler and geometric validation for craft
//! assemblies built from cuboids and cylinders.

pub mod assembler;
pub mod catalog;
pub mod collision;
pub mod geometry;
pub mod mesh;
pub mod plan;

/// Millimetres to metres.
pub const MM_TO_M: f64 = 0.001;
