//! Integrals over slices and parabolic layers.

use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::error::{Error, Result};

/// Σ field·weight·hⁿ over the grid.
///
/// The weight must vanish on the outermost nodes so the periodic box does not
/// truncate an integral meant over ℝⁿ.
pub fn integrate_space(grid: &Grid, field: &[f64], weight: &[f64]) -> Result<f64> {
    if field.len() != grid.len() || weight.len() != grid.len() {
        return Err(Error::Domain("field and weight must match the grid".into()));
    }
    let mut sum = 0.0;
    for (i, (f, w)) in field.iter().zip(weight).enumerate() {
        if *w != 0.0 {
            if grid.on_boundary(i) {
                return Err(Error::Domain(format!(
                    "weight support reaches the box boundary at {:?}",
                    grid.point(i)
                )));
            }
            sum += f * w;
        }
    }
    Ok(sum * grid.cell_volume())
}

/// Time quadrature rule across a layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeRule {
    /// Fejér's first rule on Chebyshev points, clustered at both ends.
    Fejer,
    /// Composite midpoint rule on uniform cells.
    Midpoint,
}

/// Snapshot times and weights inside (t₀ − 16R⁴, t₀ − R⁴).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub t0: f64,
    pub r: f64,
    pub times: Vec<f64>,
    pub weights: Vec<f64>,
}

pub const MIN_SNAPSHOTS: usize = 8;
pub const DEFAULT_SNAPSHOTS: usize = 32;

impl Layer {
    pub fn new(t0: f64, r: f64, count: usize, rule: TimeRule) -> Result<Self> {
        if count < MIN_SNAPSHOTS {
            return Err(Error::Domain(format!("a layer needs >= {MIN_SNAPSHOTS} snapshot times, got {count}")));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("layer scale must be positive, got {r}")));
        }
        let r4 = r.powi(4);
        let (a, b) = (t0 - 16.0 * r4, t0 - r4);
        let (nodes, weights) = match rule {
            TimeRule::Fejer => fejer_first(count),
            TimeRule::Midpoint => {
                let h = 2.0 / count as f64;
                ((0..count).map(|i| -1.0 + (i as f64 + 0.5) * h).collect(), vec![h; count])
            }
        };
        let half = 0.5 * (b - a);
        Ok(Self {
            t0,
            r,
            times: nodes.iter().map(|x| a + half * (x + 1.0)).collect(),
            weights: weights.iter().map(|w| w * half).collect(),
        })
    }

    /// Length 15R⁴ of the layer.
    pub fn measure(&self) -> f64 {
        15.0 * self.r.powi(4)
    }
}

/// Nodes (increasing) and weights of Fejér's first rule on [−1, 1].
fn fejer_first(count: usize) -> (Vec<f64>, Vec<f64>) {
    let nf = count as f64;
    let mut nodes = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    for k in (1..=count).rev() {
        let theta = (2 * k - 1) as f64 * std::f64::consts::PI / (2.0 * nf);
        let mut s = 0.0;
        for j in 1..=count / 2 {
            let jf = j as f64;
            s += (2.0 * jf * theta).cos() / (4.0 * jf * jf - 1.0);
        }
        nodes.push(theta.cos());
        weights.push(2.0 / nf * (1.0 - 2.0 * s));
    }
    (nodes, weights)
}

/// Σ_j w_j · values_j.
pub fn integrate_layer(values: &[f64], layer: &Layer) -> Result<f64> {
    if values.len() != layer.times.len() {
        return Err(Error::Domain(format!(
            "{} integrand values for {} snapshot times",
            values.len(),
            layer.times.len()
        )));
    }
    Ok(values.iter().zip(&layer.weights).map(|(v, w)| v * w).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layer_measure_and_interior() {
        for rule in [TimeRule::Fejer, TimeRule::Midpoint] {
            let l = Layer::new(1.0, 0.4, 16, rule).unwrap();
            let total = integrate_layer(&vec![1.0; 16], &l).unwrap();
            assert!((total - l.measure()).abs() < 1e-14);
            let (a, b) = (1.0 - 16.0 * 0.4f64.powi(4), 1.0 - 0.4f64.powi(4));
            assert!(l.times.windows(2).all(|w| w[0] < w[1]));
            assert!(l.times[0] > a && *l.times.last().unwrap() < b);
        }
    }

    #[test]
    fn fejer_is_spectrally_accurate() {
        let l = Layer::new(1.0, 0.5, 12, TimeRule::Fejer).unwrap();
        let v: Vec<f64> = l.times.iter().map(|t| t.exp()).collect();
        let exact = (1.0 - 0.0625f64).exp() - 0.0f64.exp();
        assert!((integrate_layer(&v, &l).unwrap() - exact).abs() < 1e-13);
    }

    #[test]
    fn midpoint_converges_second_order() {
        let err = |count| {
            let l = Layer::new(1.0, 0.5, count, TimeRule::Midpoint).unwrap();
            let v: Vec<f64> = l.times.iter().map(|t| (3.0 * t).sin()).collect();
            let exact = (1.0 - (3.0 * 0.9375f64).cos()) / 3.0;
            (integrate_layer(&v, &l).unwrap() - exact).abs()
        };
        let ratio = err(16) / err(32);
        assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn space_integral_checks_support() {
        let g = Grid::new(1, 16, 1.0).unwrap();
        let f = vec![2.0; 16];
        let mut w = vec![0.0; 16];
        assert_eq!(integrate_space(&g, &f, &w).unwrap(), 0.0);
        w[5] = 1.0;
        w[6] = 0.5;
        assert!((integrate_space(&g, &f, &w).unwrap() - 3.0 * 0.125).abs() < 1e-15);
        w[0] = 1.0;
        assert!(integrate_space(&g, &f, &w).is_err());
        assert!(Layer::new(1.0, 0.5, 4, TimeRule::Fejer).is_err());
    }
}
