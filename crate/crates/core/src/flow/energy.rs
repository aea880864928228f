use serde::{Deserialize, Serialize};

use super::field::Field;
use crate::error::Result;
use crate::numerics::Spectral;

/// Instantaneous energies of one field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Energies {
    pub grad_sq: f64,
    pub lap_sq: f64,
    pub grad_lap_sq: f64,
    pub dt_sq: f64,
    pub hessian_sq: f64,
}

/// Σ over components of the box integrals of |∇u|², |Δu|², |∇Δu|², |∂_t u|², |∇²u|².
///
/// Spatial energies come from one transform per component through Parseval,
/// with the same Nyquist handling as the derivative operators.
pub fn energies(field: &Field, spectral: &Spectral) -> Result<Energies> {
    let dv = field.grid.cell_volume();
    let norm = dv / field.grid.len() as f64;
    let mut e = Energies { grad_sq: 0.0, lap_sq: 0.0, grad_lap_sq: 0.0, dt_sq: 0.0, hessian_sq: 0.0 };
    for (u, r) in field.values.iter().zip(&field.rhs) {
        let c = spectral.forward(u)?;
        for (i, v) in c.iter().enumerate() {
            let p = v.norm_sqr() * norm;
            let k2 = spectral.k_squared(i);
            e.lap_sq += k2 * k2 * p;
            if !spectral.is_nyquist(i) {
                e.grad_sq += k2 * p;
                e.grad_lap_sq += k2 * k2 * k2 * p;
                e.hessian_sq += k2 * k2 * p;
            }
        }
        e.dt_sq += r.iter().map(|x| x * x).sum::<f64>() * dv;
    }
    Ok(e)
}

/// Time series of energies with trapezoid-accumulated dissipation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub times: Vec<f64>,
    pub grad_sq: Vec<f64>,
    pub lap_sq: Vec<f64>,
    pub grad_lap_sq: Vec<f64>,
    pub dt_sq: Vec<f64>,
    pub hessian_sq: Vec<f64>,
    /// ∫₀ᵗ∫|∂_t u|².
    pub dissipation: Vec<f64>,
    /// ∫₀ᵗ∫|∇Δu|².
    pub grad_lap_dissipation: Vec<f64>,
}

impl EnergyLedger {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Appends the energies of `field` to the ledger.
pub fn energy_ledger_update(field: &Field, spectral: &Spectral, ledger: &mut EnergyLedger) -> Result<()> {
    let e = energies(field, spectral)?;
    let (diss, gl_diss) = match ledger.times.last() {
        None => (0.0, 0.0),
        Some(&t_prev) => {
            let k = ledger.len() - 1;
            let h = field.time - t_prev;
            (
                ledger.dissipation[k] + 0.5 * h * (ledger.dt_sq[k] + e.dt_sq),
                ledger.grad_lap_dissipation[k] + 0.5 * h * (ledger.grad_lap_sq[k] + e.grad_lap_sq),
            )
        }
    };
    ledger.times.push(field.time);
    ledger.grad_sq.push(e.grad_sq);
    ledger.lap_sq.push(e.lap_sq);
    ledger.grad_lap_sq.push(e.grad_lap_sq);
    ledger.dt_sq.push(e.dt_sq);
    ledger.hessian_sq.push(e.hessian_sq);
    ledger.dissipation.push(diss);
    ledger.grad_lap_dissipation.push(gl_diss);
    Ok(())
}

/// Worst defects of the three linear a priori estimates, each relative to its initial right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearEstimates {
    /// max_t [½∫|Δu|² + ∫₀ᵗ∫|∂_t u|² − ½∫|Δu₀|²]⁺ / ½∫|Δu₀|².
    pub lap: f64,
    /// max_t [½∫|∇u|² + ∫₀ᵗ∫|∇Δu|² − ½∫|∇u₀|²]⁺ / ½∫|∇u₀|².
    pub grad: f64,
    /// max_t [∫|∇Δu|² − ∫|∇Δu₀|²]⁺ / ∫|∇Δu₀|².
    pub grad_lap: f64,
}

fn relative(defect: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        defect.max(0.0) / scale
    } else {
        defect.max(0.0)
    }
}

pub fn check_linear_estimates(ledger: &EnergyLedger) -> LinearEstimates {
    let mut out = LinearEstimates { lap: 0.0, grad: 0.0, grad_lap: 0.0 };
    if ledger.is_empty() {
        return out;
    }
    let (l0, g0, gl0) = (0.5 * ledger.lap_sq[0], 0.5 * ledger.grad_sq[0], ledger.grad_lap_sq[0]);
    for k in 0..ledger.len() {
        out.lap = out.lap.max(relative(0.5 * ledger.lap_sq[k] + ledger.dissipation[k] - l0, l0));
        out.grad = out.grad.max(relative(0.5 * ledger.grad_sq[k] + ledger.grad_lap_dissipation[k] - g0, g0));
        out.grad_lap = out.grad_lap.max(relative(ledger.grad_lap_sq[k] - gl0, gl0));
    }
    out
}

/// Sphere-flow energy report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereApriori {
    /// max_t ∫|∇²u|² / ∫|Δu₀|² (0 when both vanish).
    pub hessian_ratio: f64,
    /// Largest single-step increase of ½∫|Δu|², relative to ½∫|Δu₀|².
    pub max_step_increase: f64,
    /// Largest increase of ½∫|Δu|² + ∫₀ᵗ∫|∂_t u|² over ½∫|Δu₀|², per unit time.
    pub dissipation_defect_rate: f64,
}

pub fn check_apriori_sphere(ledger: &EnergyLedger) -> SphereApriori {
    let mut out = SphereApriori { hessian_ratio: 0.0, max_step_increase: 0.0, dissipation_defect_rate: 0.0 };
    if ledger.is_empty() {
        return out;
    }
    let e0 = ledger.lap_sq[0];
    for k in 0..ledger.len() {
        out.hessian_ratio = out.hessian_ratio.max(relative(ledger.hessian_sq[k], e0));
        if k > 0 {
            out.max_step_increase = out.max_step_increase.max(relative(0.5 * (ledger.lap_sq[k] - ledger.lap_sq[k - 1]), 0.5 * e0));
            let elapsed = ledger.times[k] - ledger.times[0];
            let defect = 0.5 * ledger.lap_sq[k] + ledger.dissipation[k] - 0.5 * e0;
            if elapsed > 0.0 {
                out.dissipation_defect_rate = out.dissipation_defect_rate.max(relative(defect, 0.5 * e0) / elapsed);
            }
        }
    }
    out
}
