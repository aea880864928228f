use serde::{Deserialize, Serialize};

use super::cutoff::CutOff;
use crate::error::{Error, Result};
use crate::kernel::HeatKernel;

pub const RADIAL_SAMPLES: usize = 400;
pub const TIME_SAMPLES: usize = 65;
/// The uncut control runs out to this many kernel lengths (t₀−t)^{1/4}.
pub const UNCUT_REACH: f64 = 40.0;

/// Suprema over T_R of the two growth quantities at one R.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub r: f64,
    /// sup η²R|B|φ / (1 + R^{1−n})
    pub claim1: f64,
    /// sup (1+η²)²|B|φ / (R(1 + R^{−(n+1)}))
    pub claim2: f64,
    /// The same suprema with φ ≡ 1 over all of ℝⁿ.
    pub claim1_uncut: f64,
    pub claim2_uncut: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub schema_version: String,
    pub n: usize,
    pub rows: Vec<GrowthRow>,
    pub sup_claim1: f64,
    pub sup_claim2: f64,
    pub sup_claim1_uncut: f64,
    pub sup_claim2_uncut: f64,
}

/// Both growth quantities at offset y = x − x₀ and time t, for cut-off value φ.
pub fn claim_quantities(kernel: &HeatKernel, y: &[f64], t: f64, phi: f64, r: f64) -> Result<(f64, f64)> {
    let tau = kernel.t0 - t;
    let terms = kernel.terms_at_offset(y, tau)?;
    let eta2 = y.iter().map(|v| v * v).sum::<f64>() / tau.sqrt();
    let nf = kernel.n as f64;
    let b = terms.b.abs() * phi;
    Ok((eta2 * r * b / (1.0 + r.powf(1.0 - nf)), (1.0 + eta2).powi(2) * b / (r * (1.0 + r.powf(-(nf + 1.0))))))
}

fn row(kernel: &HeatKernel, cutoff: &CutOff, r: f64) -> Result<GrowthRow> {
    let n = kernel.n;
    let r4 = r.powi(4);
    let mut out = GrowthRow { r, claim1: 0.0, claim2: 0.0, claim1_uncut: 0.0, claim2_uncut: 0.0 };
    let mut y = vec![0.0; n];
    for j in 0..TIME_SAMPLES {
        let t = kernel.t0 - 16.0 * r4 + 15.0 * r4 * j as f64 / (TIME_SAMPLES - 1) as f64;
        let reach = UNCUT_REACH * (kernel.t0 - t).powf(0.25);
        for i in 0..=RADIAL_SAMPLES {
            let s = i as f64 / RADIAL_SAMPLES as f64;
            y[0] = s * cutoff.r_out;
            let phi = cutoff.base(y[0]).0.powi(4);
            let (q1, q2) = claim_quantities(kernel, &y, t, phi, r)?;
            out.claim1 = out.claim1.max(q1);
            out.claim2 = out.claim2.max(q2);
            y[0] = s * reach;
            let (q1, q2) = claim_quantities(kernel, &y, t, 1.0, r)?;
            out.claim1_uncut = out.claim1_uncut.max(q1);
            out.claim2_uncut = out.claim2_uncut.max(q2);
        }
    }
    Ok(out)
}

/// Suprema of the growth quantities over radial samples × layer times for every R.
pub fn growth_claim_check(kernel: &HeatKernel, cutoff: &CutOff, r_values: &[f64]) -> Result<GrowthReport> {
    if kernel.n != cutoff.dimension() {
        return Err(Error::Domain("kernel and cut-off dimensions differ".into()));
    }
    if r_values.iter().any(|r| !(*r > 0.0) || 16.0 * r.powi(4) >= kernel.t0) {
        return Err(Error::Domain("every R needs 0 < 16R^4 < t0 so the layer stays before t0".into()));
    }
    let rows = r_values.iter().map(|&r| row(kernel, cutoff, r)).collect::<Result<Vec<_>>>()?;
    let sup = |f: fn(&GrowthRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    Ok(GrowthReport {
        schema_version: super::scan::SCHEMA_VERSION.into(),
        n: kernel.n,
        sup_claim1: sup(|r| r.claim1),
        sup_claim2: sup(|r| r.claim2),
        sup_claim1_uncut: sup(|r| r.claim1_uncut),
        sup_claim2_uncut: sup(|r| r.claim2_uncut),
        rows,
    })
}
