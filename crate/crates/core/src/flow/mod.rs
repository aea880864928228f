//! Biheat flow and biharmonic map heat flow into a sphere on periodic boxes.

pub mod archive;
pub mod energy;
pub mod field;
pub mod solver;
pub mod trajectory;

pub use archive::{Manifest, SnapshotArchive};
pub use energy::{check_apriori_sphere, check_linear_estimates, energies, energy_ledger_update, Energies, EnergyLedger, LinearEstimates, SphereApriori};
pub use field::{init_field, time_derivative, Field, InitSpec, Target};
pub use solver::{sphere_step_limit, step, step_linear_spectral, step_sphere_flow};
pub use trajectory::{ArchiveTrajectory, LinearTrajectory, PatchSample, Trajectory};
