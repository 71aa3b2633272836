//! Facility location on planar graphs: exact and local-search oracles, a
//! primal-dual baseline, and a decomposition-based approximation scheme
//! with self-checking at every stage.

pub mod baseline;
pub mod checks;
pub mod decomp;
pub mod dp;
pub mod error;
pub mod generate;
pub mod graph;
pub mod instance;
pub mod io;
pub mod num;
pub mod oracles;
pub mod reduce;
pub mod ringprep;
pub mod run;

pub use error::{FlError, Result};
pub use graph::EmbeddedGraph;
pub use instance::{Client, CostModel, Facility, FlInstance, Solution};
