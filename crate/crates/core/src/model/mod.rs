//! Multiphase obstacle-potential KKS model.

mod energy;
mod kks;
mod params;
mod system;

pub use energy::free_energy;
pub use kks::{
    gibbs_energy, grand_potential, kks_partition, profile, simplex_project, thin_interface_mobility, DegenerateSimplex,
    Partition, PartitionError, THIN_INTERFACE_MF,
};
pub use params::{ModelParams, PairMatrix, ParamError, PhysicalParams};
pub use system::{concentration_rhs, phase_rhs, KksSystem, State, SystemError, MAX_CAPACITY};
