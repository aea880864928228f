use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid on center + [−L, L)ⁿ, axis 0 varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n: usize,
    pub points: usize,
    pub half_width: f64,
    pub center: Vec<f64>,
}

impl Grid {
    /// Box grid centered at the origin.
    pub fn new(n: usize, points: usize, half_width: f64) -> Result<Self> {
        Self::centered(vec![0.0; n], points, half_width)
    }

    /// Grid on `center` + [−L, L)ⁿ.
    pub fn centered(center: Vec<f64>, points: usize, half_width: f64) -> Result<Self> {
        let n = center.len();
        if !(1..=3).contains(&n) {
            return Err(Error::Domain(format!("grid dimension must be 1, 2 or 3, got {n}")));
        }
        if points < 4 || !points.is_power_of_two() {
            return Err(Error::Domain(format!("points per axis must be a power of two >= 4, got {points}")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::Domain(format!("box half-width must be positive, got {half_width}")));
        }
        Ok(Self { n, points, half_width, center })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell volume hⁿ.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.n as i32)
    }

    /// Coordinate of node `i` along `axis`.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.center[axis] - self.half_width + i as f64 * self.spacing()
    }

    /// Stride of `axis` in the flat layout.
    pub fn stride(&self, axis: usize) -> usize {
        self.points.pow(axis as u32)
    }

    /// Per-axis indices of a flat index.
    pub fn unflatten(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        for slot in idx.iter_mut().take(self.n) {
            *slot = flat % self.points;
            flat /= self.points;
        }
        idx
    }

    /// Position of a flat index.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let idx = self.unflatten(flat);
        (0..self.n).map(|a| self.coord(a, idx[a])).collect()
    }

    /// Flat index of the node shifted by `offset` along `axis`, with periodic wrap.
    pub fn shifted(&self, flat: usize, axis: usize, offset: isize) -> usize {
        let stride = self.stride(axis);
        let i = (flat / stride) % self.points;
        let p = self.points as isize;
        let j = ((i as isize + offset) % p + p) % p;
        flat - i * stride + j as usize * stride
    }

    /// Whether a flat index lies on the first or last node of some axis.
    pub fn on_boundary(&self, flat: usize) -> bool {
        let idx = self.unflatten(flat);
        idx.iter().take(self.n).any(|&i| i == 0 || i + 1 == self.points)
    }

    /// Signed mode number of FFT bin `m`.
    pub fn signed_mode(&self, m: usize) -> i64 {
        if m < self.points / 2 {
            m as i64
        } else {
            m as i64 - self.points as i64
        }
    }

    /// Angular wavenumber of FFT bin `m`.
    pub fn wavenumber(&self, m: usize) -> f64 {
        std::f64::consts::PI * self.signed_mode(m) as f64 / self.half_width
    }

    /// Values of `f` at every node.
    pub fn sample<F: Fn(&[f64]) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.len()).map(|i| f(&self.point(i))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_and_wrap() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        assert_eq!(g.len(), 64);
        assert_eq!(g.spacing(), 0.25);
        assert_eq!(g.point(9), vec![-0.75, -0.75]);
        assert_eq!(g.shifted(0, 0, -1), 7);
        assert_eq!(g.shifted(0, 1, -1), 56);
        assert_eq!(g.shifted(63, 1, 2), 15);
        assert!(g.on_boundary(0) && !g.on_boundary(9));
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(2, 12, 1.0).is_err());
        assert!(Grid::new(4, 8, 1.0).is_err());
        assert!(Grid::new(1, 8, 0.0).is_err());
    }

    #[test]
    fn wavenumbers() {
        let g = Grid::new(1, 8, std::f64::consts::PI).unwrap();
        let ks: Vec<i64> = (0..8).map(|m| g.signed_mode(m)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert_eq!(g.wavenumber(3), 3.0);
    }
}
