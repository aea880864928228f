use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cutoff::{CutOff, CutOffValues};
use crate::error::{Error, Result};
use crate::flow::{PatchSample, Trajectory};
use crate::kernel::HeatKernel;
use crate::numerics::{ball_rule, integrate_layer, Layer, Nodes, TimeRule, DEFAULT_SNAPSHOTS};

/// Relative steps of the Richardson-extrapolated centered difference in R.
pub const FD_STEPS: [f64; 2] = [1e-3, 5e-4];

/// How the spatial integrals over the cut-off support are discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum SpatialRule {
    /// Trapezoid sums on a uniform patch covering the support.
    Cartesian { points: usize },
    /// Gauss panels in r split at the plateau radius, uniform/Gauss in angle.
    Polar { radial: usize, angular: usize },
}

impl SpatialRule {
    pub fn standard(n: usize) -> Self {
        match n {
            1 => SpatialRule::Polar { radial: 16, angular: 2 },
            2 => SpatialRule::Polar { radial: 16, angular: 32 },
            _ => SpatialRule::Polar { radial: 14, angular: 24 },
        }
    }

    /// The same rule with every node count doubled.
    pub fn refined(&self) -> Self {
        match *self {
            SpatialRule::Cartesian { points } => SpatialRule::Cartesian { points: 2 * points },
            SpatialRule::Polar { radial, angular } => SpatialRule::Polar { radial: 2 * radial, angular: 2 * angular },
        }
    }
}

/// Kernel, cut-off and discretization shared by every evaluation of Ψ.
#[derive(Debug, Clone)]
pub struct Probe {
    pub kernel: HeatKernel,
    pub cutoff: CutOff,
    pub rule: SpatialRule,
    pub snapshots: usize,
    pub time_rule: TimeRule,
    nodes: Nodes,
    /// (node index, quadrature weight, cut-off values) on the support.
    support: Vec<(usize, f64, CutOffValues)>,
}

/// Spatial integrals at one time, before time quadrature and the 1/R factor.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SliceIntegrals {
    /// ½∫|Δu|²Bφ
    pub first: f64,
    /// −½∫|∇u|²ΔBφ
    pub second: f64,
    pub k: [f64; 9],
    /// ∫|∇u·(x−x₀)|²Bφ/(4|t−t₀|)
    pub radial_sq: f64,
}

/// Ψ and its two addends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiValue {
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

/// Everything one R contributes to a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerIntegrals {
    pub r: f64,
    pub psi: PsiValue,
    pub k: [f64; 9],
    /// (1/R)∫_{T_R}|∇u·(x−x₀)|²Bφ/(4|t−t₀|), the size K₁ would have if ∂_t u vanished.
    pub radial: f64,
}

impl LayerIntegrals {
    pub fn sum_k(&self) -> f64 {
        self.k.iter().sum()
    }
}

impl Probe {
    pub fn new(kernel: HeatKernel, cutoff: CutOff, rule: SpatialRule, snapshots: usize, time_rule: TimeRule) -> Result<Self> {
        if kernel.n != cutoff.dimension() {
            return Err(Error::Domain("kernel and cut-off dimensions differ".into()));
        }
        if kernel.x0.iter().zip(&cutoff.center).any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + a.abs())) {
            return Err(Error::Domain("cut-off must be centered at the kernel center".into()));
        }
        let (nodes, weights) = match rule {
            SpatialRule::Cartesian { points } => {
                let patch = cutoff.patch(points)?;
                let w = patch.cell_volume();
                let len = patch.len();
                (Nodes::Grid(patch), vec![w; len])
            }
            SpatialRule::Polar { radial, angular } => ball_rule(&cutoff.center, &[cutoff.r_in, cutoff.r_out], radial, angular)?,
        };
        let support = (0..nodes.len())
            .filter_map(|i| {
                let v = cutoff.values(&nodes.point(i));
                let live = v.phi != 0.0 || v.lap != 0.0 || v.sol != 0.0;
                live.then_some((i, weights[i], v))
            })
            .collect();
        Ok(Self { kernel, cutoff, rule, snapshots, time_rule, nodes, support })
    }

    /// Probe with the default spatial rule and snapshot count.
    pub fn standard(kernel: HeatKernel, cutoff: CutOff) -> Result<Self> {
        let rule = SpatialRule::standard(kernel.n);
        Self::new(kernel, cutoff, rule, DEFAULT_SNAPSHOTS, TimeRule::Fejer)
    }

    pub fn nodes(&self) -> &Nodes {
        &self.nodes
    }

    pub fn layer(&self, r: f64) -> Result<Layer> {
        Layer::new(self.kernel.t0, r, self.snapshots, self.time_rule)
    }

    /// Checks that the trajectory's box contains the cut-off support twice over.
    pub fn check_trajectory(&self, trajectory: &dyn Trajectory) -> Result<()> {
        if trajectory.dimension() != self.kernel.n {
            return Err(Error::Domain("trajectory and kernel dimensions differ".into()));
        }
        match trajectory.domain() {
            Some(grid) => self.cutoff.check_box(&grid),
            None => Ok(()),
        }
    }

    /// ∫ g·w over the support nodes for a per-node integrand.
    pub fn integrate<F: Fn(usize, &CutOffValues) -> f64>(&self, g: F) -> f64 {
        self.support.iter().map(|(i, w, cv)| w * g(*i, cv)).sum()
    }

    /// Sol u = ∇u·(x−x₀) + 4(t−t₀)∂_t u at every patch node, per component.
    pub fn sol_field(&self, sample: &PatchSample, t: f64) -> Vec<Vec<f64>> {
        let n = self.kernel.n;
        let tau = self.kernel.t0 - t;
        sample
            .jets
            .iter()
            .zip(&sample.dt)
            .map(|(jet, dt)| {
                (0..self.nodes.len())
                    .map(|i| {
                        let x = self.nodes.point(i);
                        let radial: f64 = (0..n).map(|a| jet.grad[a][i] * (x[a] - self.kernel.x0[a])).sum();
                        radial - 4.0 * tau * dt[i]
                    })
                    .collect()
            })
            .collect()
    }

    /// Spatial integrals at time t; the nine K integrands only when `with_k`.
    pub fn slice(&self, trajectory: &dyn Trajectory, t: f64, with_k: bool) -> Result<SliceIntegrals> {
        let sample = trajectory.sample(t, &self.nodes)?;
        let n = self.kernel.n;
        let tau = self.kernel.t0 - t;
        let mut s = SliceIntegrals::default();
        let mut y = vec![0.0; n];
        for &(i, w, cv) in &self.support {
            let x = self.nodes.point(i);
            for a in 0..n {
                y[a] = x[a] - self.kernel.x0[a];
            }
            let kt = self.kernel.terms_at_offset(&y, tau)?;
            let mut lap2 = 0.0;
            let mut grad2 = 0.0;
            for jet in &sample.jets {
                lap2 += jet.lap[i] * jet.lap[i];
                grad2 += (0..n).map(|a| jet.grad[a][i].powi(2)).sum::<f64>();
            }
            s.first += w * 0.5 * lap2 * kt.b * cv.phi;
            s.second -= w * 0.5 * grad2 * kt.lap * cv.phi;
            if !with_k {
                continue;
            }
            let mut k = [0.0; 9];
            let grad_b_phi: f64 = (0..n).map(|a| kt.grad[a] * cv.grad[a]).sum();
            for (jet, dt) in sample.jets.iter().zip(&sample.dt) {
                let radial: f64 = (0..n).map(|a| jet.grad[a][i] * y[a]).sum();
                let sol = radial - 4.0 * tau * dt[i];
                let gl_grad_b: f64 = (0..n).map(|a| jet.grad_lap[a][i] * kt.grad[a]).sum();
                let gl_grad_phi: f64 = (0..n).map(|a| jet.grad_lap[a][i] * cv.grad[a]).sum();
                let grad_grad_phi: f64 = (0..n).map(|a| jet.grad[a][i] * cv.grad[a]).sum();
                let lap = jet.lap[i];
                k[0] += sol * sol * kt.b * cv.phi / (4.0 * tau);
                k[1] += 2.0 * gl_grad_b * sol * cv.phi;
                k[2] += 2.0 * gl_grad_phi * sol * kt.b;
                k[3] += 2.0 * lap * sol * kt.lap * cv.phi;
                k[4] += 2.0 * lap * sol * grad_b_phi;
                k[5] += lap * sol * kt.b * cv.lap;
                k[6] += grad_grad_phi * sol * kt.lap;
                s.radial_sq += w * radial * radial * kt.b * cv.phi / (4.0 * tau);
            }
            k[7] = 0.5 * lap2 * kt.b * cv.sol;
            k[8] = -0.5 * grad2 * kt.lap * cv.sol;
            for (acc, v) in s.k.iter_mut().zip(k) {
                *acc += w * v;
            }
        }
        Ok(s)
    }

    fn slices(&self, trajectory: &dyn Trajectory, layer: &Layer, with_k: bool) -> Result<Vec<SliceIntegrals>> {
        layer.times.par_iter().map(|&t| self.slice(trajectory, t, with_k)).collect()
    }

    /// Ψ(u, R, φ) = ½∫_{T_R}|Δu|²Bφ − ½∫_{T_R}|∇u|²ΔBφ.
    pub fn psi(&self, trajectory: &dyn Trajectory, r: f64) -> Result<PsiValue> {
        let layer = self.layer(r)?;
        let s = self.slices(trajectory, &layer, false)?;
        psi_from(&s, &layer)
    }

    /// Φ(u, R, φ) = (R⁴/2)[∫|Δu|²Bφ − ∫|∇u|²ΔBφ] at t = t₀ − R⁴.
    pub fn phi_slice(&self, trajectory: &dyn Trajectory, r: f64) -> Result<f64> {
        let s = self.slice(trajectory, self.kernel.t0 - r.powi(4), false)?;
        Ok(r.powi(4) * (s.first + s.second))
    }

    /// Ψ together with K₁…K₉.
    pub fn layer_integrals(&self, trajectory: &dyn Trajectory, r: f64) -> Result<LayerIntegrals> {
        let layer = self.layer(r)?;
        let s = self.slices(trajectory, &layer, true)?;
        let mut k = [0.0; 9];
        for (j, slot) in k.iter_mut().enumerate() {
            let v: Vec<f64> = s.iter().map(|x| x.k[j]).collect();
            *slot = integrate_layer(&v, &layer)? / r;
        }
        let radial: Vec<f64> = s.iter().map(|x| x.radial_sq).collect();
        Ok(LayerIntegrals { r, psi: psi_from(&s, &layer)?, k, radial: integrate_layer(&radial, &layer)? / r })
    }

    pub fn k_decomposition(&self, trajectory: &dyn Trajectory, r: f64) -> Result<[f64; 9]> {
        Ok(self.layer_integrals(trajectory, r)?.k)
    }

    /// dΨ/dR from centered differences at two steps, Richardson-extrapolated.
    pub fn dpsi_dr(&self, trajectory: &dyn Trajectory, r: f64) -> Result<f64> {
        let centered = |d: f64| -> Result<f64> {
            let hi = self.psi(trajectory, r * (1.0 + d))?.value;
            let lo = self.psi(trajectory, r * (1.0 - d))?.value;
            Ok((hi - lo) / (2.0 * r * d))
        };
        let coarse = centered(FD_STEPS[0])?;
        let fine = centered(FD_STEPS[1])?;
        Ok((4.0 * fine - coarse) / 3.0)
    }
}

fn psi_from(s: &[SliceIntegrals], layer: &Layer) -> Result<PsiValue> {
    let first = integrate_layer(&s.iter().map(|x| x.first).collect::<Vec<_>>(), layer)?;
    let second = integrate_layer(&s.iter().map(|x| x.second).collect::<Vec<_>>(), layer)?;
    Ok(PsiValue { value: first + second, first, second })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::cutoff::build_cutoff;
    use crate::flow::{init_field, InitSpec, LinearTrajectory, Target};
    use crate::numerics::{Grid, Spectral};

    fn linear(n: usize, seed: u64) -> LinearTrajectory {
        let g = Grid::new(n, 16, std::f64::consts::PI).unwrap();
        let s = Spectral::new(&g);
        let f = init_field(&g, &s, &InitSpec::BandLimited { seed, max_mode: 3, amplitude: 1.0 }, 1, Target::Euclidean).unwrap();
        LinearTrajectory::from_field(&f, &s, 1.0).unwrap()
    }

    fn probe(n: usize, rule: SpatialRule) -> Probe {
        let x0 = vec![0.3; n];
        let kernel = HeatKernel::tabulated(n, x0.clone(), 0.5).unwrap();
        Probe::new(kernel, build_cutoff(n, x0, 0.3).unwrap(), rule, 16, TimeRule::Fejer).unwrap()
    }

    #[test]
    fn constant_trajectory_vanishes() {
        let g = Grid::new(1, 16, 2.0).unwrap();
        let s = Spectral::new(&g);
        let f = init_field(&g, &s, &InitSpec::Constant(vec![1.5]), 1, Target::Euclidean).unwrap();
        let traj = LinearTrajectory::from_field(&f, &s, 1.0).unwrap();
        let p = probe(1, SpatialRule::Cartesian { points: 128 });
        let li = p.layer_integrals(&traj, 0.35).unwrap();
        assert!(li.psi.value.abs() < 1e-20);
        assert!(li.k.iter().all(|v| v.abs() < 1e-20));
        assert!(p.phi_slice(&traj, 0.35).unwrap().abs() < 1e-20);
    }

    #[test]
    fn addends_nonnegative_and_k1_positive() {
        let traj = linear(2, 3);
        let p = probe(2, SpatialRule::standard(2));
        let li = p.layer_integrals(&traj, 0.35).unwrap();
        assert!(li.psi.first > 0.0 && li.psi.second > 0.0);
        assert!(li.k[0] > 0.0);
    }

    #[test]
    fn sum_of_k_is_the_r_derivative() {
        let traj = linear(1, 7);
        let p = probe(1, SpatialRule::standard(1));
        for r in [0.32, 0.4] {
            let li = p.layer_integrals(&traj, r).unwrap();
            let fd = p.dpsi_dr(&traj, r).unwrap();
            let rel = (li.sum_k() - fd).abs() / (fd.abs() + li.k[0]);
            assert!(rel < 1e-3, "R = {r}: sum K {} vs {fd} (rel {rel:e})", li.sum_k());
        }
    }
}
