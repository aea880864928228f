//! Fourier-multiplier derivatives on periodic grids.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::Grid;
use crate::error::{Error, Result};

/// FFT plans and wavenumbers for one grid.
#[derive(Clone)]
pub struct Spectral {
    pub grid: Grid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid: grid.clone(),
            forward: planner.plan_fft_forward(grid.points),
            inverse: planner.plan_fft_inverse(grid.points),
        }
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let g = &self.grid;
        let p = g.points;
        let mut line = vec![Complex64::new(0.0, 0.0); p];
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        for axis in 0..g.n {
            let stride = g.stride(axis);
            for start in 0..data.len() {
                if (start / stride) % p != 0 {
                    continue;
                }
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[start + j * stride];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for (j, v) in line.iter().enumerate() {
                    data[start + j * stride] = *v;
                }
            }
        }
    }

    /// Unnormalized forward transform.
    pub fn forward(&self, u: &[f64]) -> Result<Vec<Complex64>> {
        if u.len() != self.grid.len() {
            return Err(Error::Domain(format!("field has {} values, grid has {}", u.len(), self.grid.len())));
        }
        let mut data: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, &self.forward);
        Ok(data)
    }

    /// Inverse transform including the 1/Nⁿ factor; returns the real part.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut data = coeffs.to_vec();
        self.transform(&mut data, &self.inverse);
        let scale = 1.0 / self.grid.len() as f64;
        data.iter().map(|c| c.re * scale).collect()
    }

    /// Per-axis wavenumbers of a flat coefficient index.
    pub fn wavevector(&self, flat: usize) -> [f64; 3] {
        let idx = self.grid.unflatten(flat);
        let mut k = [0.0; 3];
        for a in 0..self.grid.n {
            k[a] = self.grid.wavenumber(idx[a]);
        }
        k
    }

    /// Whether any axis of a flat coefficient index sits on the Nyquist bin.
    pub fn is_nyquist(&self, flat: usize) -> bool {
        let idx = self.grid.unflatten(flat);
        idx.iter().take(self.grid.n).any(|&m| m == self.grid.points / 2)
    }

    /// |k|² of a flat coefficient index.
    pub fn k_squared(&self, flat: usize) -> f64 {
        self.wavevector(flat).iter().map(|k| k * k).sum()
    }

    /// Applies a multiplier m(k) in Fourier space.
    pub fn apply<F: Fn(usize) -> Complex64>(&self, u: &[f64], multiplier: F) -> Result<Vec<f64>> {
        let mut c = self.forward(u)?;
        for (i, v) in c.iter_mut().enumerate() {
            *v *= multiplier(i);
        }
        Ok(self.inverse(&c))
    }

    pub fn partial(&self, u: &[f64], axis: usize) -> Result<Vec<f64>> {
        self.apply(u, |i| {
            if self.is_nyquist(i) {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, self.wavevector(i)[axis])
            }
        })
    }

    pub fn gradient(&self, u: &[f64]) -> Result<Vec<Vec<f64>>> {
        (0..self.grid.n).map(|a| self.partial(u, a)).collect()
    }

    pub fn laplacian(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.apply(u, |i| Complex64::new(-self.k_squared(i), 0.0))
    }

    pub fn bilaplacian(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.apply(u, |i| Complex64::new(self.k_squared(i).powi(2), 0.0))
    }

    pub fn grad_laplacian(&self, u: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.gradient(&self.laplacian(u)?)
    }
}
