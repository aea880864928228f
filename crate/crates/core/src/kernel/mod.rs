//! The kernel profile f_n, the backwards biharmonic heat kernel and its identities.

pub mod bounds;
pub mod harnack;
pub mod heat;
pub mod profile;
pub mod special;
pub mod table;

pub use bounds::{bound_constants, c1, c2, check_bound_windows, eta1, eta2, first_zero, fit_decay_bound, positivity_lower_bound, BoundConstants, BoundWindows, DecayBound};
pub use harnack::{check_identity, check_matrix_harnack, kernel_samples, HarnackResidual, IdentityResidual, Sample};
pub use heat::{HeatKernel, KernelTerms, ProfileSource};
pub use profile::{normalization_alpha, sphere_area, RadialProfile};
pub use special::{bessel_j, bessel_p, gamma_fn};
pub use table::ProfileTable;
