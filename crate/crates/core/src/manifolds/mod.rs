//! Base manifolds, matrix Lie groups and arc covers of the circle.

pub mod base;
pub mod cover;
pub mod group;

pub use base::BaseManifold;
pub use cover::{ChartArc, Cover, PartitionOfUnity};
pub use group::{LinearSubgroup, MatrixGroup};
