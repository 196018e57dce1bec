//! Tile self-assembly, self-assembling agents, and the synchronous mesh
//! network that simulates them.

pub mod agent;
pub mod assembly;
pub mod error;
pub mod format;
pub mod harness;
pub mod lattice;
pub mod lcl;
pub mod mesh;
pub mod rng;
pub mod tam;
pub mod tilesets;

pub use error::{Error, Result};
pub use lattice::{Direction, Mesh, Point};
