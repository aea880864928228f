//! Fourth-order central finite differences with periodic wrap.

use super::grid::Grid;
use crate::error::{Error, Result};

const MIN_POINTS: usize = 16;

fn check(grid: &Grid, u: &[f64]) -> Result<()> {
    if grid.points < MIN_POINTS {
        return Err(Error::Domain(format!(
            "finite-difference stencils need >= {MIN_POINTS} points per axis, got {}",
            grid.points
        )));
    }
    if u.len() != grid.len() {
        return Err(Error::Domain(format!("field has {} values, grid has {}", u.len(), grid.len())));
    }
    Ok(())
}

/// ∂u/∂x_axis ≈ (−u₂ + 8u₁ − 8u₋₁ + u₋₂)/(12h).
pub fn fd_partial(grid: &Grid, u: &[f64], axis: usize) -> Result<Vec<f64>> {
    check(grid, u)?;
    let c = 1.0 / (12.0 * grid.spacing());
    Ok((0..u.len())
        .map(|i| {
            let at = |o| u[grid.shifted(i, axis, o)];
            c * (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2))
        })
        .collect())
}

pub fn fd_gradient(grid: &Grid, u: &[f64]) -> Result<Vec<Vec<f64>>> {
    (0..grid.n).map(|a| fd_partial(grid, u, a)).collect()
}

/// Σ_axis (−u₂ + 16u₁ − 30u₀ + 16u₋₁ − u₋₂)/(12h²).
pub fn fd_laplacian(grid: &Grid, u: &[f64]) -> Result<Vec<f64>> {
    check(grid, u)?;
    let c = 1.0 / (12.0 * grid.spacing().powi(2));
    Ok((0..u.len())
        .map(|i| {
            let mut acc = 0.0;
            for axis in 0..grid.n {
                let at = |o| u[grid.shifted(i, axis, o)];
                acc += -at(2) + 16.0 * at(1) - 30.0 * u[i] + 16.0 * at(-1) - at(-2);
            }
            c * acc
        })
        .collect())
}

pub fn fd_bilaplacian(grid: &Grid, u: &[f64]) -> Result<Vec<f64>> {
    fd_laplacian(grid, &fd_laplacian(grid, u)?)
}

pub fn fd_grad_laplacian(grid: &Grid, u: &[f64]) -> Result<Vec<Vec<f64>>> {
    fd_gradient(grid, &fd_laplacian(grid, u)?)
}

/// Discrete divergence Σ_a ∂_a v_a with the same stencil.
pub fn fd_divergence(grid: &Grid, v: &[Vec<f64>]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; grid.len()];
    for (axis, comp) in v.iter().enumerate() {
        for (o, d) in out.iter_mut().zip(fd_partial(grid, comp, axis)?) {
            *o += d;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constants_are_annihilated() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let u = vec![3.5; g.len()];
        assert!(fd_laplacian(&g, &u).unwrap().iter().all(|v| v.abs() < 1e-10));
        assert!(fd_gradient(&g, &u).unwrap().iter().flatten().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn eigenfunction_fourth_order() {
        let err = |points| {
            let g = Grid::new(1, points, 2.0).unwrap();
            let u = g.sample(|x| (PI * x[0] / 2.0).sin());
            let lap = fd_laplacian(&g, &u).unwrap();
            let k2 = (PI / 2.0).powi(2);
            lap.iter().zip(&u).map(|(l, v)| (l + k2 * v).abs()).fold(0.0, f64::max)
        };
        let rate = (err(32) / err(64)).log2();
        assert!(rate > 3.7, "rate {rate}");
    }

    #[test]
    fn rejects_coarse_grids() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        assert!(fd_laplacian(&g, &[0.0; 8]).is_err());
    }
}
