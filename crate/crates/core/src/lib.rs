pub mod chain;
pub mod complex;
pub mod entropy;
pub mod error;
pub mod freeproduct;
pub mod graph;
pub mod group;
pub mod l1norm;
pub mod linalg;
pub mod lp;
pub mod permutahedron;
pub mod systole;
pub mod table;
pub mod verify;

pub use chain::Chain;
pub use complex::DeltaComplex;
pub use error::{Error, Result};
pub use graph::{CoverSpec, MetricGraph};
