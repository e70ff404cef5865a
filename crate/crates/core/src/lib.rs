//! Method-of-lines phase-field laboratory: a multiphase KKS model on
//! Cartesian grids, explicit and super-time-stepping integrators with
//! adaptive step control, and verification benchmarks with analytic
//! references.

pub mod benchmarks;
pub mod config;
pub mod contour;
pub mod driver;
pub mod dump;
pub mod field;
pub mod grid;
pub mod integrators;
pub mod model;
pub mod stencil;
pub mod stepcontrol;
