//! Abstract simplicial complexes, their homology, random geometric complexes on
//! the torus and a vertex-removal reduction that preserves low-dimensional
//! Betti numbers.

pub mod complex;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod graph;
pub mod homology;
pub mod io;
pub mod reduction;

pub use complex::{Removal, Simplex, SimplicialComplex, VertexId};
pub use error::{Error, Result};
pub use geometry::{Metric, PointConfiguration, RipsParams, TorusSpec};
pub use homology::{betti_numbers, BettiVector, FieldChoice};
pub use reduction::{reduce, ReduceOptions, ReductionReport};
