//! Sandbox engine for procedurally generated roguelike gridworlds.

pub mod builder;
pub mod catalog;
pub mod compiler;
pub mod dsl;
pub mod env;
pub mod geom;
pub mod observe;
pub mod protocol;
pub mod reward;
pub mod rng;
pub mod tasks;
pub mod terrain;
pub mod world;
