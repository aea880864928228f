//! The weighted energy Ψ, its R-derivative decomposition and monotonicity scans.

pub mod cutoff;
pub mod functional;
pub mod growth;
pub mod scan;
pub mod shrinker;

pub use cutoff::{build_cutoff, CutOff, CutOffValues};
pub use functional::{LayerIntegrals, Probe, PsiValue, SliceIntegrals, SpatialRule};
pub use shrinker::{sol_norm_at, soliton_check, ShrinkerTrajectory, SolitonReport};
pub use growth::{claim_quantities, growth_claim_check, GrowthReport, GrowthRow};
pub use scan::{check_r_grid, default_r_grid, monotonicity_scan, r_window, EnergyScale, EntropyReport, ScanRow, Variant};
