//! Flow indices for one-dimensional quantum walks, quantum cellular automata and
//! reversible classical cellular automata on finite rings.

pub mod builtins;
pub mod classical;
pub mod cli;
pub mod error;
pub mod io;
pub mod linalg;
pub mod operator_algebra;
pub mod qca;
pub mod report;
pub mod tolerance;
pub mod verify;
pub mod walk;
pub mod walk_ti;

pub use error::{Error, Result};
pub use tolerance::Tolerances;
