use serde::{Deserialize, Serialize};

use super::functional::Probe;
use crate::error::{Error, Result};
use crate::flow::{PatchSample, Trajectory};
use crate::numerics::{fd_bilaplacian, fd_grad_laplacian, fd_gradient, fd_laplacian, Grid, Jet, Nodes};

const SERIES_TERMS: usize = 60;

/// Radial self-shrinker of ∂_t u = −Δ²u:
/// u(x,t) = V(|x−x₀|/(t₀−t)^{1/4}) with ρV'/4 = −Δ²V and V = ρ² + O(ρ⁶).
#[derive(Debug, Clone, PartialEq)]
pub struct ShrinkerTrajectory {
    pub n: usize,
    pub x0: Vec<f64>,
    pub t0: f64,
    pub t_start: f64,
    /// Coefficients of ρ², ρ⁶, ρ¹⁰, ...
    coeffs: Vec<f64>,
}

impl ShrinkerTrajectory {
    pub fn new(x0: Vec<f64>, t0: f64, t_start: f64) -> Result<Self> {
        let n = x0.len();
        if !(1..=3).contains(&n) || !(t_start < t0) {
            return Err(Error::Domain("shrinker needs n in 1..=3 and t_start < t0".into()));
        }
        let nf = n as f64;
        let mut coeffs = vec![1.0];
        let mut m = 1.0;
        for _ in 1..SERIES_TERMS {
            let prev = *coeffs.last().expect("nonempty");
            let k = 2.0 * m;
            coeffs.push(-prev * (m / 2.0) / ((k + 4.0) * (k + nf + 2.0) * (k + 2.0) * (k + nf)));
            m += 2.0;
        }
        Ok(Self { n, x0, t0, t_start, coeffs })
    }

    /// V(ρ).
    pub fn profile(&self, rho: f64) -> f64 {
        let r2 = rho * rho;
        let r4 = r2 * r2;
        let mut power = r2;
        let mut sum = 0.0;
        for c in &self.coeffs {
            let term = c * power;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
            power *= r4;
        }
        sum
    }

    pub fn value(&self, x: &[f64], t: f64) -> f64 {
        let r = x.iter().zip(&self.x0).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        self.profile(r / (self.t0 - t).powf(0.25))
    }
}

impl Trajectory for ShrinkerTrajectory {
    fn dimension(&self) -> usize {
        self.n
    }

    fn components(&self) -> usize {
        1
    }

    fn time_range(&self) -> (f64, f64) {
        (self.t_start, self.t0)
    }

    /// Stencil derivatives on a grid of twice the size around the patch.
    fn sample(&self, t: f64, nodes: &Nodes) -> Result<PatchSample> {
        if !(t >= self.t_start && t < self.t0) {
            return Err(Error::Range(format!("t = {t} outside [{}, {})", self.t_start, self.t0)));
        }
        let Nodes::Grid(patch) = nodes else {
            return Err(Error::Domain("the shrinker is sampled on grids only".into()));
        };
        let padded = Grid::centered(patch.center.clone(), 2 * patch.points, 2.0 * patch.half_width)?;
        let u = padded.sample(|x| self.value(x, t));
        let grad = fd_gradient(&padded, &u)?;
        let lap = fd_laplacian(&padded, &u)?;
        let grad_lap = fd_grad_laplacian(&padded, &u)?;
        let bilap = fd_bilaplacian(&padded, &u)?;
        let offset = patch.points / 2;
        let map: Vec<usize> = (0..patch.len())
            .map(|i| {
                let idx = patch.unflatten(i);
                (0..self.n).map(|a| (idx[a] + offset) * padded.stride(a)).sum()
            })
            .collect();
        let pick = |v: &[f64]| map.iter().map(|&j| v[j]).collect::<Vec<f64>>();
        let jet = Jet {
            u: pick(&u),
            grad: grad.iter().map(|g| pick(g)).collect(),
            lap: pick(&lap),
            grad_lap: grad_lap.iter().map(|g| pick(g)).collect(),
            bilap: pick(&bilap),
        };
        let dt = jet.bilap.iter().map(|v| -v).collect();
        Ok(PatchSample { jets: vec![jet], dt: vec![dt] })
    }

    fn initial_energy(&self) -> Option<[f64; 3]> {
        None
    }

    fn domain(&self) -> Option<Grid> {
        None
    }
}

/// Soliton residuals over one layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonReport {
    pub r: f64,
    /// (∫_{T_R}|Sol u|²Bφ/(4|t−t₀|))^{1/2} over the same norm of ∇u·(x−x₀).
    pub sol_relative: f64,
    /// |K₁ + … + K₇| over Ψ/R.
    pub sol_terms_relative: f64,
    /// (K₈ + K₉) over Ψ/R; carries Sol φ, not Sol u.
    pub cutoff_terms_relative: f64,
    pub psi: f64,
}

pub fn soliton_check(probe: &Probe, trajectory: &dyn Trajectory, r: f64) -> Result<SolitonReport> {
    let li = probe.layer_integrals(trajectory, r)?;
    let scale = li.psi.value / r;
    if !(scale > 0.0) {
        return Err(Error::Domain("Ψ vanishes; no scale for the soliton residual".into()));
    }
    Ok(SolitonReport {
        r,
        sol_relative: (li.k[0] / li.radial).sqrt(),
        sol_terms_relative: li.k[..7].iter().sum::<f64>().abs() / scale,
        cutoff_terms_relative: (li.k[7] + li.k[8]) / scale,
        psi: li.psi.value,
    })
}

/// ∫|Sol u|²Bφ/(4|t−t₀|) and ∫|∇u·(x−x₀)|²Bφ/(4|t−t₀|) at one time.
pub fn sol_norm_at(probe: &Probe, trajectory: &dyn Trajectory, t: f64) -> Result<(f64, f64)> {
    let s = probe.slice(trajectory, t, true)?;
    Ok((s.k[0], s.radial_sq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{build_cutoff, SpatialRule};
    use crate::kernel::HeatKernel;
    use crate::numerics::TimeRule;

    #[test]
    fn profile_solves_the_ode() {
        for n in 1..=3 {
            let s = ShrinkerTrajectory::new(vec![0.0; n], 1.0, 0.0).unwrap();
            let nf = n as f64;
            // ρV'/4 + Δ²V, with radial derivatives by differences of the series
            let h = 1e-2;
            let rho = 1.3;
            let v = |r: f64| s.profile(r);
            let d1 = |r: f64| (v(r - 2.0 * h) - 8.0 * v(r - h) + 8.0 * v(r + h) - v(r + 2.0 * h)) / (12.0 * h);
            let lap = |r: f64| {
                let d2 = (-v(r - 2.0 * h) + 16.0 * v(r - h) - 30.0 * v(r) + 16.0 * v(r + h) - v(r + 2.0 * h)) / (12.0 * h * h);
                d2 + (nf - 1.0) * d1(r) / r
            };
            let lap1 = |r: f64| (lap(r - 2.0 * h) - 8.0 * lap(r - h) + 8.0 * lap(r + h) - lap(r + 2.0 * h)) / (12.0 * h);
            let lap2 = (-lap(rho - 2.0 * h) + 16.0 * lap(rho - h) - 30.0 * lap(rho) + 16.0 * lap(rho + h) - lap(rho + 2.0 * h))
                / (12.0 * h * h);
            let bilap = lap2 + (nf - 1.0) * lap1(rho) / rho;
            assert!((rho * d1(rho) / 4.0 + bilap).abs() < 1e-6, "n = {n}");
        }
    }

    #[test]
    fn residual_falls_under_refinement() {
        let n = 2;
        let x0 = vec![0.0; n];
        let kernel = HeatKernel::tabulated(n, x0.clone(), 1.0).unwrap();
        let cutoff = build_cutoff(n, x0.clone(), 0.4).unwrap();
        let traj = ShrinkerTrajectory::new(x0, 1.0, 0.0).unwrap();
        let mut last = f64::INFINITY;
        for points in [16, 32] {
            let probe = Probe::new(kernel.clone(), cutoff.clone(), SpatialRule::Cartesian { points }, 8, TimeRule::Fejer).unwrap();
            let rep = soliton_check(&probe, &traj, 0.45).unwrap();
            assert!(rep.sol_relative < last && rep.sol_relative < 1e-4, "{rep:?}");
            assert!(rep.sol_terms_relative < 1e-4);
            last = rep.sol_relative;
        }
    }
}
