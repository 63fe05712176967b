//! Numerical primitives: dual numbers, matrices, finite differences, RK4,
//! Newton solvers and periodic grid functions.

pub mod dual;
pub mod fd;
pub mod grid;
pub mod matrix;
pub mod ode;
pub mod root;

pub use dual::{Dual, Scalar};
pub use grid::PeriodicGridFunction;
pub use matrix::Mat;
pub use ode::IntegrationParams;
