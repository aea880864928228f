use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::bound_constants;
use crate::numerics::Grid;

/// Patch half-width as a multiple of the outer radius.
pub const PATCH_MARGIN: f64 = 1.05;

/// Radial cut-off φ = φ̃⁴ with a quintic smoothstep base φ̃.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutOff {
    pub center: Vec<f64>,
    pub r0: f64,
    pub eta2: f64,
    pub r_in: f64,
    pub r_out: f64,
}

/// φ and the derivatives entering the entropy integrands at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutOffValues {
    pub phi: f64,
    pub grad: [f64; 3],
    pub lap: f64,
    /// (x − x₀)·∇φ
    pub sol: f64,
}

fn smoothstep(s: f64) -> (f64, f64, f64) {
    if s <= 0.0 {
        (0.0, 0.0, 0.0)
    } else if s >= 1.0 {
        (1.0, 0.0, 0.0)
    } else {
        (
            s * s * s * (10.0 - 15.0 * s + 6.0 * s * s),
            30.0 * s * s * (1.0 - s) * (1.0 - s),
            60.0 * s * (1.0 - s) * (1.0 - 2.0 * s),
        )
    }
}

pub fn build_cutoff(n: usize, x0: Vec<f64>, r0: f64) -> Result<CutOff> {
    if x0.len() != n {
        return Err(Error::Domain(format!("center has {} coordinates, expected {n}", x0.len())));
    }
    if !(r0 > 0.0) || !r0.is_finite() {
        return Err(Error::Domain(format!("R0 must be positive, got {r0}")));
    }
    let eta2 = bound_constants(n)?.eta2_min();
    Ok(CutOff { center: x0, r0, eta2, r_in: eta2 * r0 / 4.0, r_out: eta2 * r0 / 2.0 })
}

impl CutOff {
    pub fn dimension(&self) -> usize {
        self.center.len()
    }

    /// φ̃ and its first two radial derivatives.
    pub fn base(&self, r: f64) -> (f64, f64, f64) {
        let w = self.r_out - self.r_in;
        let (s, ds, dds) = smoothstep((r - self.r_in) / w);
        (1.0 - s, -ds / w, -dds / (w * w))
    }

    pub fn values(&self, x: &[f64]) -> CutOffValues {
        let n = self.dimension();
        let mut y = [0.0; 3];
        for a in 0..n {
            y[a] = x[a] - self.center[a];
        }
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let (p, dp, ddp) = self.base(r);
        if r <= self.r_in || r >= self.r_out {
            return CutOffValues { phi: if r <= self.r_in { 1.0 } else { 0.0 }, grad: [0.0; 3], lap: 0.0, sol: 0.0 };
        }
        let p3 = p * p * p;
        let radial = 4.0 * p3 * dp;
        let mut grad = [0.0; 3];
        for a in 0..n {
            grad[a] = radial * y[a] / r;
        }
        CutOffValues {
            phi: p3 * p,
            grad,
            lap: 4.0 * p3 * (ddp + (n as f64 - 1.0) * dp / r) + 12.0 * p * p * dp * dp,
            sol: radial * r,
        }
    }

    /// φ_R(y) = φ(R y).
    pub fn scaled(&self, r: f64) -> CutOff {
        CutOff {
            center: self.center.iter().map(|c| c / r).collect(),
            r0: self.r0 / r,
            eta2: self.eta2,
            r_in: self.r_in / r,
            r_out: self.r_out / r,
        }
    }

    /// Integration patch covering the support.
    pub fn patch(&self, points: usize) -> Result<Grid> {
        Grid::centered(self.center.clone(), points, PATCH_MARGIN * self.r_out)
    }

    /// The box must be at least twice the support radius and contain the support.
    pub fn check_box(&self, grid: &Grid) -> Result<()> {
        let reach = (0..self.dimension())
            .map(|a| (self.center[a] - grid.center[a]).abs() + PATCH_MARGIN * self.r_out)
            .fold(0.0, f64::max);
        if grid.half_width < 2.0 * self.r_out || reach >= grid.half_width {
            return Err(Error::Domain(format!(
                "cut-off support (radius {:.4} around {:?}) does not fit twice into the box of half-width {}",
                self.r_out, self.center, grid.half_width
            )));
        }
        Ok(())
    }
}
