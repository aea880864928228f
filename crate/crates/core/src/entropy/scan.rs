use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::functional::Probe;
use crate::error::{Error, Result};
use crate::flow::Trajectory;

pub const SCHEMA_VERSION: &str = "1";
/// Uniform times at which the local sup-in-time energies are sampled.
pub const SUP_SAMPLES: usize = 33;
/// Slack allowed below zero for quantities that are non-negative in exact arithmetic.
pub const SIGN_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "withoutSUP")]
    WithoutSup,
    #[serde(rename = "withSUP")]
    WithSup,
    #[serde(rename = "slice")]
    Slice,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::WithoutSup => "withoutSUP",
            Variant::WithSup => "withSUP",
            Variant::Slice => "slice",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "withoutSUP" => Ok(Variant::WithoutSup),
            "withSUP" => Ok(Variant::WithSup),
            "slice" => Ok(Variant::Slice),
            _ => Err(Error::Domain(format!("unknown variant {s:?} (expected withoutSUP, withSUP or slice)"))),
        }
    }
}

/// One R of a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub r: f64,
    pub psi: f64,
    pub psi_first: f64,
    pub psi_second: f64,
    pub phi: f64,
    pub k: [f64; 9],
    pub sum_k: f64,
    pub dpsi_dr_fd: f64,
    /// |ΣK − dΨ/dR| / (|dΨ/dR| + K₁)
    pub k_residual: f64,
    /// ∫_{T_R}|Sol u|²Bφ/(4|t−t₀|)
    pub sol_norm_sq: f64,
}

/// Energies entering the monotonicity constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyScale {
    pub grad0: f64,
    pub lap0: f64,
    pub grad_lap0: f64,
    /// sup_t ∫_{φ>0}|∇u|² over [t_start, t₀ − R₀⁴] (withSUP only).
    pub sup_grad_local: Option<f64>,
    /// sup_t ∫_{φ>0}|∇Δu|² over the same times (withSUP only).
    pub sup_grad_lap_local: Option<f64>,
    pub e0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub schema_version: String,
    pub n: usize,
    pub x0: Vec<f64>,
    pub t0: f64,
    pub r0: f64,
    pub window: f64,
    pub variant: Variant,
    pub rows: Vec<ScanRow>,
    pub energy: EnergyScale,
    /// Smallest C ≥ 0 with Q(R₁) ≤ Q(R₂) + C(R₂−R₁)E₀ over all grid pairs (Q = Ψ, or Φ for the slice variant).
    pub fitted_c: f64,
    /// Largest positive part of Q(R₁) − Q(R₂) − C(R₂−R₁)E₀ with the fitted C.
    pub max_defect: f64,
    /// Smallest C in dΨ/dR ≥ ½K₁ − C(1+R^{1−n})∫|∇u₀|² − C(R⁴+R^{3−n})∫|Δu₀|² (withoutSUP only).
    pub lower_bound_c: Option<f64>,
    pub max_k_residual: f64,
    pub addends_nonnegative: bool,
    pub k1_nonnegative: bool,
    /// R values whose difference stencil reaches past the window.
    pub near_boundary: Vec<f64>,
}

/// min(t₀^{1/4}/2, 1).
pub fn r_window(t0: f64) -> f64 {
    (t0.max(0.0).powf(0.25) / 2.0).min(1.0)
}

pub fn check_r_grid(r0: f64, t0: f64, grid: &[f64]) -> Result<f64> {
    let window = r_window(t0);
    if !(r0 > 0.0 && r0 < window) {
        return Err(Error::Domain(format!("R0 = {r0} must satisfy 0 < R0 < min(t0^(1/4)/2, 1) = {window}")));
    }
    if grid.is_empty() {
        return Err(Error::Domain("empty R grid".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("R grid must be strictly increasing".into()));
    }
    if grid[0] < r0 || *grid.last().expect("nonempty") >= window {
        return Err(Error::Domain(format!("R grid must lie in [R0, {window}) = [{r0}, {window})")));
    }
    Ok(window)
}

/// Uniform grid of `count` values from R₀ to just inside the window.
pub fn default_r_grid(r0: f64, t0: f64, count: usize) -> Vec<f64> {
    let hi = r_window(t0) * 0.995;
    if count < 2 {
        return vec![r0];
    }
    (0..count).map(|i| r0 + (hi - r0) * i as f64 / (count - 1) as f64).collect()
}

fn local_sup(probe: &Probe, trajectory: &dyn Trajectory, t_end: f64) -> Result<(f64, f64)> {
    let (t_start, _) = trajectory.time_range();
    let n = probe.kernel.n;
    let mut sup = (0.0f64, 0.0f64);
    for j in 0..SUP_SAMPLES {
        let t = t_start + (t_end - t_start) * j as f64 / (SUP_SAMPLES - 1) as f64;
        let sample = trajectory.sample(t, probe.nodes())?;
        let grad = probe.integrate(|i, cv| {
            if cv.phi > 0.0 {
                sample.jets.iter().map(|jet| (0..n).map(|a| jet.grad[a][i].powi(2)).sum::<f64>()).sum()
            } else {
                0.0
            }
        });
        let grad_lap = probe.integrate(|i, cv| {
            if cv.phi > 0.0 {
                sample.jets.iter().map(|jet| (0..n).map(|a| jet.grad_lap[a][i].powi(2)).sum::<f64>()).sum()
            } else {
                0.0
            }
        });
        sup = (sup.0.max(grad), sup.1.max(grad_lap));
    }
    Ok(sup)
}

fn residual(sum_k: f64, fd: f64, k1: f64) -> f64 {
    let scale = fd.abs() + k1;
    if scale > 0.0 {
        (sum_k - fd).abs() / scale
    } else {
        (sum_k - fd).abs()
    }
}

/// Ψ, Φ, K₁…K₉ and the difference quotient of Ψ at every R, plus the fitted constants.
pub fn monotonicity_scan(trajectory: &dyn Trajectory, probe: &Probe, r_grid: &[f64], variant: Variant) -> Result<EntropyReport> {
    probe.check_trajectory(trajectory)?;
    let (t0, r0, n) = (probe.kernel.t0, probe.cutoff.r0, probe.kernel.n);
    let window = check_r_grid(r0, t0, r_grid)?;
    let [grad0, lap0, grad_lap0] = trajectory
        .initial_energy()
        .ok_or_else(|| Error::Domain("monotonicity scans need a trajectory with initial energies".into()))?;

    let mut rows = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let li = probe.layer_integrals(trajectory, r)?;
        let fd = probe.dpsi_dr(trajectory, r)?;
        let sum_k = li.sum_k();
        rows.push(ScanRow {
            r,
            psi: li.psi.value,
            psi_first: li.psi.first,
            psi_second: li.psi.second,
            phi: probe.phi_slice(trajectory, r)?,
            k: li.k,
            sum_k,
            dpsi_dr_fd: fd,
            k_residual: residual(sum_k, fd, li.k[0]),
            sol_norm_sq: li.k[0] * r,
        });
    }

    let (sup_grad_local, sup_grad_lap_local, e0) = match variant {
        Variant::WithSup => {
            let (g, gl) = local_sup(probe, trajectory, t0 - r0.powi(4))?;
            (Some(g), Some(gl), g + lap0 + gl)
        }
        _ => (None, None, grad0 + lap0),
    };
    let quantity = |row: &ScanRow| if variant == Variant::Slice { row.phi } else { row.psi };
    let mut fitted_c = 0.0f64;
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[i + 1..] {
            let drop = quantity(a) - quantity(b);
            if drop > 0.0 {
                fitted_c = fitted_c.max(drop / ((b.r - a.r) * e0));
            }
        }
    }
    let mut max_defect = 0.0f64;
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[i + 1..] {
            max_defect = max_defect.max(quantity(a) - quantity(b) - fitted_c * (b.r - a.r) * e0);
        }
    }
    let lower_bound_c = (variant == Variant::WithoutSup).then(|| {
        let nf = n as f64;
        rows.iter()
            .map(|row| {
                let weight = (1.0 + row.r.powf(1.0 - nf)) * grad0 + (row.r.powi(4) + row.r.powf(3.0 - nf)) * lap0;
                let gap = 0.5 * row.k[0] - row.dpsi_dr_fd;
                if gap > 0.0 && weight > 0.0 {
                    gap / weight
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max)
    });
    Ok(EntropyReport {
        schema_version: SCHEMA_VERSION.into(),
        n,
        x0: probe.kernel.x0.clone(),
        t0,
        r0,
        window,
        variant,
        max_k_residual: rows.iter().map(|r| r.k_residual).fold(0.0, f64::max),
        addends_nonnegative: rows.iter().all(|r| r.psi_first >= -SIGN_SLACK && r.psi_second >= -SIGN_SLACK),
        k1_nonnegative: rows.iter().all(|r| r.k[0] >= -SIGN_SLACK),
        near_boundary: rows.iter().map(|r| r.r).filter(|r| r * (1.0 + super::functional::FD_STEPS[0]) >= window).collect(),
        rows,
        energy: EnergyScale { grad0, lap0, grad_lap0, sup_grad_local, sup_grad_lap_local, e0 },
        fitted_c,
        max_defect: max_defect.max(0.0),
        lower_bound_c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{build_cutoff, SpatialRule};
    use crate::flow::{init_field, InitSpec, LinearTrajectory, Target};
    use crate::kernel::HeatKernel;
    use crate::numerics::{Grid, Spectral, TimeRule};

    fn setup(n: usize, spec: InitSpec) -> (LinearTrajectory, Probe) {
        let g = Grid::new(n, 16, std::f64::consts::PI).unwrap();
        let s = Spectral::new(&g);
        let f = init_field(&g, &s, &spec, 1, Target::Euclidean).unwrap();
        let traj = LinearTrajectory::from_field(&f, &s, 1.0).unwrap();
        let x0 = vec![0.2; n];
        let kernel = HeatKernel::tabulated(n, x0.clone(), 0.6).unwrap();
        let probe = Probe::new(kernel, build_cutoff(n, x0, 0.3).unwrap(), SpatialRule::standard(n), 12, TimeRule::Fejer).unwrap();
        (traj, probe)
    }

    #[test]
    fn constant_trajectory_fits_zero() {
        let (traj, probe) = setup(1, InitSpec::Constant(vec![2.0]));
        let grid = default_r_grid(0.3, 0.6, 3);
        let rep = monotonicity_scan(&traj, &probe, &grid, Variant::WithoutSup).unwrap();
        assert_eq!(rep.fitted_c, 0.0);
        assert_eq!(rep.max_defect, 0.0);
        for row in &rep.rows {
            assert_eq!(row.psi, 0.0);
            assert!(row.k.iter().all(|k| *k == 0.0));
        }
    }

    #[test]
    fn scan_reports_consistent_rows() {
        let (traj, probe) = setup(1, InitSpec::BandLimited { seed: 5, max_mode: 3, amplitude: 1.0 });
        let grid = default_r_grid(0.3, 0.6, 4);
        let rep = monotonicity_scan(&traj, &probe, &grid, Variant::WithoutSup).unwrap();
        assert!(rep.max_k_residual < 1e-5, "{:?}", rep.rows.iter().map(|r| r.k_residual).collect::<Vec<_>>());
        assert!(rep.addends_nonnegative && rep.k1_nonnegative);
        assert!(rep.fitted_c.is_finite() && rep.fitted_c >= 0.0);
        assert!(rep.max_defect <= 1e-12 * rep.rows.iter().map(|r| r.psi.abs()).fold(0.0, f64::max));
        for row in &rep.rows {
            assert!((row.psi - row.psi_first - row.psi_second).abs() <= 1e-15 * row.psi.abs().max(1e-300) * 4.0);
        }
        let sup = monotonicity_scan(&traj, &probe, &grid, Variant::WithSup).unwrap();
        assert!(sup.energy.sup_grad_local.unwrap() > 0.0);
    }

    #[test]
    fn rejects_bad_grids() {
        let (traj, probe) = setup(1, InitSpec::BandLimited { seed: 5, max_mode: 3, amplitude: 1.0 });
        for grid in [vec![], vec![0.4, 0.35], vec![0.25], vec![0.3, 0.9]] {
            assert!(matches!(monotonicity_scan(&traj, &probe, &grid, Variant::Slice), Err(Error::Domain(_))));
        }
        assert!(check_r_grid(0.5, 0.6, &[0.5]).is_err());
    }
}
