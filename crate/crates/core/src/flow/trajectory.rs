//! Space-time access to a flow, for integrals over parabolic layers.

use super::archive::SnapshotArchive;
use super::field::{Field, Target};
use crate::error::{Error, Result};
use crate::numerics::{Grid, Jet, Nodes, Spectral, TrigPolynomial};

/// Per-component jets and ∂_t u on a node set at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchSample {
    pub jets: Vec<Jet>,
    pub dt: Vec<Vec<f64>>,
}

pub trait Trajectory: Send + Sync {
    fn dimension(&self) -> usize;
    fn components(&self) -> usize;
    /// Closed interval of times that can be sampled.
    fn time_range(&self) -> (f64, f64);
    fn sample(&self, t: f64, nodes: &Nodes) -> Result<PatchSample>;
    /// (∫|∇u|², ∫|Δu|², ∫|∇Δu|²) over the box at the first time.
    fn initial_energy(&self) -> Option<[f64; 3]>;
    /// Periodic box the data lives on.
    fn domain(&self) -> Option<Grid>;
}

fn check_time(range: (f64, f64), t: f64) -> Result<()> {
    let slack = 1e-12 * range.1.abs().max(1.0);
    if t < range.0 - slack || t > range.1 + slack {
        return Err(Error::Range(format!("t = {t} outside the trajectory range [{}, {}]", range.0, range.1)));
    }
    Ok(())
}

fn k4(k: &[f64; 3]) -> f64 {
    k.iter().map(|v| v * v).sum::<f64>().powi(2)
}

fn spectral_energy(polys: &[TrigPolynomial]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for p in polys {
        let g = &p.grid;
        let volume = (2.0 * g.half_width).powi(g.n as i32);
        for (i, c) in p.coefficients().iter().enumerate() {
            let idx = g.unflatten(i);
            let k2: f64 = (0..g.n).map(|a| g.wavenumber(idx[a]).powi(2)).sum();
            out[0] += volume * k2 * c.norm_sqr();
            out[1] += volume * k2 * k2 * c.norm_sqr();
            out[2] += volume * k2 * k2 * k2 * c.norm_sqr();
        }
    }
    out
}

fn linear_sample(polys: &[TrigPolynomial], elapsed: f64, nodes: &Nodes) -> Result<PatchSample> {
    let mut jets = Vec::with_capacity(polys.len());
    let mut dt = Vec::with_capacity(polys.len());
    for p in polys {
        let jet = if elapsed == 0.0 { p.evaluate(nodes)? } else { p.scaled(|k| (-k4(k) * elapsed).exp()).evaluate(nodes)? };
        dt.push(jet.bilap.iter().map(|v| -v).collect());
        jets.push(jet);
    }
    Ok(PatchSample { jets, dt })
}

/// Exact solution of ∂_t u = −Δ²u from band-limited data.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearTrajectory {
    polys: Vec<TrigPolynomial>,
    t_start: f64,
    t_end: f64,
}

impl LinearTrajectory {
    pub fn new(polys: Vec<TrigPolynomial>, t_start: f64, t_end: f64) -> Result<Self> {
        if polys.is_empty() || !(t_end > t_start) {
            return Err(Error::Domain("a trajectory needs data and t_end > t_start".into()));
        }
        Ok(Self { polys, t_start, t_end })
    }

    pub fn from_field(field: &Field, spectral: &Spectral, t_end: f64) -> Result<Self> {
        if field.target != Target::Euclidean {
            return Err(Error::Domain("linear trajectories need a euclidean field".into()));
        }
        let polys = field.values.iter().map(|c| TrigPolynomial::from_values(spectral, c)).collect::<Result<_>>()?;
        Self::new(polys, field.time, t_end)
    }

    /// v(y, s) = u(R y, R⁴ s).
    pub fn rescaled(&self, r: f64) -> Result<Self> {
        let polys = self.polys.iter().map(|p| p.rescaled(r)).collect::<Result<_>>()?;
        let r4 = r.powi(4);
        Self::new(polys, self.t_start / r4, self.t_end / r4)
    }
}

impl Trajectory for LinearTrajectory {
    fn dimension(&self) -> usize {
        self.polys[0].grid.n
    }

    fn components(&self) -> usize {
        self.polys.len()
    }

    fn time_range(&self) -> (f64, f64) {
        (self.t_start, self.t_end)
    }

    fn sample(&self, t: f64, nodes: &Nodes) -> Result<PatchSample> {
        check_time(self.time_range(), t)?;
        linear_sample(&self.polys, (t - self.t_start).max(0.0), nodes)
    }

    fn initial_energy(&self) -> Option<[f64; 3]> {
        Some(spectral_energy(&self.polys))
    }

    fn domain(&self) -> Option<Grid> {
        Some(self.polys[0].grid.clone())
    }
}

/// Trajectory read back from a snapshot archive.
///
/// Euclidean runs are propagated exactly from the preceding snapshot. Sphere
/// runs use cubic Hermite interpolation in time with the stored ∂_t u,
/// renormalized pointwise.
pub struct ArchiveTrajectory {
    grid: Grid,
    spectral: Spectral,
    target: Target,
    times: Vec<f64>,
    snapshots: Vec<Vec<Vec<f64>>>,
    rates: Vec<Vec<Vec<f64>>>,
    initial: [f64; 3],
}

impl ArchiveTrajectory {
    pub fn new(archive: &SnapshotArchive) -> Result<Self> {
        if archive.snapshots.is_empty() {
            return Err(Error::Domain("archive holds no snapshots".into()));
        }
        let grid = archive.grid()?;
        let spectral = Spectral::new(&grid);
        let target = archive.manifest.target;
        let rates = archive
            .snapshots
            .iter()
            .map(|s| super::field::time_derivative_of(&spectral, target, s))
            .collect::<Result<Vec<_>>>()?;
        let first = archive.snapshots[0]
            .iter()
            .map(|c| TrigPolynomial::from_values(&spectral, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            initial: spectral_energy(&first),
            grid,
            spectral,
            target,
            times: archive.manifest.times.clone(),
            snapshots: archive.snapshots.clone(),
            rates,
        })
    }

    fn bracket(&self, t: f64) -> usize {
        let j = self.times.partition_point(|&s| s <= t);
        j.saturating_sub(1).min(self.times.len().saturating_sub(2))
    }

    fn sphere_values(&self, t: f64) -> Vec<Vec<f64>> {
        if self.times.len() == 1 {
            return self.snapshots[0].clone();
        }
        let j = self.bracket(t);
        let h = self.times[j + 1] - self.times[j];
        let s = ((t - self.times[j]) / h).clamp(0.0, 1.0);
        let (h00, h10, h01, h11) = (
            2.0 * s.powi(3) - 3.0 * s * s + 1.0,
            s.powi(3) - 2.0 * s * s + s,
            -2.0 * s.powi(3) + 3.0 * s * s,
            s.powi(3) - s * s,
        );
        let mut out: Vec<Vec<f64>> = (0..self.snapshots[j].len())
            .map(|c| {
                let (u0, u1) = (&self.snapshots[j][c], &self.snapshots[j + 1][c]);
                let (r0, r1) = (&self.rates[j][c], &self.rates[j + 1][c]);
                (0..self.grid.len()).map(|i| h00 * u0[i] + h10 * h * r0[i] + h01 * u1[i] + h11 * h * r1[i]).collect()
            })
            .collect();
        for i in 0..self.grid.len() {
            let norm = out.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt();
            out.iter_mut().for_each(|c| c[i] /= norm);
        }
        out
    }
}

impl Trajectory for ArchiveTrajectory {
    fn dimension(&self) -> usize {
        self.grid.n
    }

    fn components(&self) -> usize {
        self.snapshots[0].len()
    }

    fn time_range(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().expect("nonempty"))
    }

    fn sample(&self, t: f64, nodes: &Nodes) -> Result<PatchSample> {
        check_time(self.time_range(), t)?;
        match self.target {
            Target::Euclidean => {
                let j = self.times.partition_point(|&s| s <= t).saturating_sub(1);
                let polys = self.snapshots[j]
                    .iter()
                    .map(|c| TrigPolynomial::from_values(&self.spectral, c))
                    .collect::<Result<Vec<_>>>()?;
                linear_sample(&polys, (t - self.times[j]).max(0.0), nodes)
            }
            Target::Sphere => {
                let values = self.sphere_values(t);
                let jets = values
                    .iter()
                    .map(|c| TrigPolynomial::from_values(&self.spectral, c)?.evaluate(nodes))
                    .collect::<Result<Vec<_>>>()?;
                let mut dt = vec![vec![0.0; nodes.len()]; jets.len()];
                for i in 0..nodes.len() {
                    let dot: f64 = jets.iter().map(|j| j.u[i] * j.bilap[i]).sum();
                    for (d, j) in dt.iter_mut().zip(&jets) {
                        d[i] = -(j.bilap[i] - dot * j.u[i]);
                    }
                }
                Ok(PatchSample { jets, dt })
            }
        }
    }

    fn initial_energy(&self) -> Option<[f64; 3]> {
        Some(self.initial)
    }

    fn domain(&self) -> Option<Grid> {
        Some(self.grid.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::field::{init_field, InitSpec};
    use crate::flow::solver::step;
    use crate::flow::energy::energies;
    use std::f64::consts::PI;

    #[test]
    fn linear_matches_solver_and_energy() {
        let g = Grid::new(2, 16, PI).unwrap();
        let s = Spectral::new(&g);
        let f = init_field(&g, &s, &InitSpec::BandLimited { seed: 4, max_mode: 3, amplitude: 1.0 }, 1, Target::Euclidean).unwrap();
        let traj = LinearTrajectory::from_field(&f, &s, 1.0).unwrap();
        let later = step(&f, &s, 0.05).unwrap();
        let sample = traj.sample(0.05, &Nodes::Grid(g.clone())).unwrap();
        for i in 0..g.len() {
            assert!((sample.jets[0].u[i] - later.values[0][i]).abs() < 1e-12);
            assert!((sample.dt[0][i] - later.rhs[0][i]).abs() < 1e-9);
        }
        let e = energies(&f, &s).unwrap();
        let [grad, lap, grad_lap] = traj.initial_energy().unwrap();
        assert!((grad - e.grad_sq).abs() < 1e-10 * e.grad_sq);
        assert!((lap - e.lap_sq).abs() < 1e-10 * e.lap_sq);
        assert!((grad_lap - e.grad_lap_sq).abs() < 1e-10 * e.grad_lap_sq);
        assert!(matches!(traj.sample(2.0, &Nodes::Grid(g.clone())), Err(Error::Range(_))));
    }

    #[test]
    fn rescaled_trajectory_is_the_scaled_solution() {
        let g = Grid::new(1, 32, 2.0).unwrap();
        let s = Spectral::new(&g);
        let f = init_field(&g, &s, &InitSpec::BandLimited { seed: 8, max_mode: 4, amplitude: 1.0 }, 1, Target::Euclidean).unwrap();
        let traj = LinearTrajectory::from_field(&f, &s, 1.0).unwrap();
        let r = 0.5;
        let scaled = traj.rescaled(r).unwrap();
        let patch = Nodes::Grid(Grid::centered(vec![0.3], 8, 0.5).unwrap());
        let big = Nodes::Points((0..8).map(|i| vec![r * (-0.2 + i as f64 * 0.125)]).collect());
        let a = scaled.sample(0.2 / r.powi(4), &patch).unwrap();
        let b = traj.sample(0.2, &big).unwrap();
        for i in 0..patch.len() {
            assert!((a.jets[0].u[i] - b.jets[0].u[i]).abs() < 1e-13);
            assert!((a.jets[0].grad[0][i] - r * b.jets[0].grad[0][i]).abs() < 1e-12);
            assert!((a.dt[0][i] - r.powi(4) * b.dt[0][i]).abs() < 1e-11);
        }
    }

    #[test]
    fn archive_replays_linear_run() {
        let g = Grid::new(1, 16, PI).unwrap();
        let s = Spectral::new(&g);
        let mut f = init_field(&g, &s, &InitSpec::BandLimited { seed: 9, max_mode: 3, amplitude: 1.0 }, 1, Target::Euclidean).unwrap();
        let traj = LinearTrajectory::from_field(&f, &s, 0.2).unwrap();
        let mut archive = SnapshotArchive::new(&g, 1, Target::Euclidean, 0.05);
        archive.push(&f).unwrap();
        for _ in 0..4 {
            f = step(&f, &s, 0.05).unwrap();
            archive.push(&f).unwrap();
        }
        let replay = ArchiveTrajectory::new(&archive).unwrap();
        let patch = Nodes::Grid(Grid::centered(vec![0.1], 8, 1.0).unwrap());
        let (a, b) = (replay.sample(0.13, &patch).unwrap(), traj.sample(0.13, &patch).unwrap());
        for i in 0..patch.len() {
            assert!((a.jets[0].u[i] - b.jets[0].u[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_archive_interpolates_on_the_sphere() {
        let g = Grid::new(1, 32, PI).unwrap();
        let s = Spectral::new(&g);
        let mut f = init_field(&g, &s, &InitSpec::BandLimited { seed: 2, max_mode: 2, amplitude: 0.3 }, 2, Target::Sphere).unwrap();
        let dt = 0.5 * crate::flow::solver::sphere_step_limit(&f);
        let mut archive = SnapshotArchive::new(&g, 2, Target::Sphere, dt);
        archive.push(&f).unwrap();
        for _ in 0..3 {
            f = step(&f, &s, dt).unwrap();
            archive.push(&f).unwrap();
        }
        let replay = ArchiveTrajectory::new(&archive).unwrap();
        let mid = replay.sample(1.5 * dt, &Nodes::Grid(g.clone())).unwrap();
        for i in 0..g.len() {
            let norm = mid.jets.iter().map(|j| j.u[i] * j.u[i]).sum::<f64>();
            assert!((norm - 1.0).abs() < 1e-10, "{norm}");
        }
        let end = replay.sample(3.0 * dt, &Nodes::Grid(g.clone())).unwrap();
        for i in 0..g.len() {
            assert!((end.jets[0].u[i] - f.values[0][i]).abs() < 1e-9, "{}", end.jets[0].u[i] - f.values[0][i]);
        }
    }
}
