//! Level-synchronous breadth-first search with 1D and 2D distributions on a
//! simulated process grid, plus the analytic cost model used to check the
//! measured communication.

pub mod bench;
pub mod bfs;
pub mod comm;
pub mod cost;
pub mod error;
pub mod graph;
pub mod sparse;

pub use error::{Error, Result};
