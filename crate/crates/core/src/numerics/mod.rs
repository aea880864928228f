//! Periodic grids, derivative operators and quadrature.

pub mod gauss_kronrod;
pub mod grid;
pub mod polar;
pub mod quadrature;
pub mod spectral;
pub mod stencil;
pub mod trig;

pub use grid::Grid;
pub use polar::{ball_rule, gauss_legendre};
pub use quadrature::{integrate_layer, integrate_space, Layer, TimeRule, DEFAULT_SNAPSHOTS, MIN_SNAPSHOTS};
pub use spectral::Spectral;
pub use stencil::{fd_bilaplacian, fd_grad_laplacian, fd_gradient, fd_laplacian};
pub use trig::{Jet, Nodes, TrigPolynomial};
