use serde::{Deserialize, Serialize};

use super::profile::RadialProfile;
use super::special::gamma_fn;
use crate::error::{Error, Result};

/// Published c₁ values for n = 1, 2 (no closed form applies there).
pub const C1_TABULATED: [f64; 2] = [0.00105414, 0.000333013];

const ZERO_SEARCH_LIMIT: f64 = 40.0;
const ZERO_SEARCH_STEP: f64 = 0.05;
const BISECTION_TOL: f64 = 1e-8;

/// Positivity and concavity windows of f_n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub n: usize,
    pub eta1: f64,
    pub eta2: f64,
    pub c1: f64,
    pub c2: f64,
    pub xi1: f64,
}

impl BoundConstants {
    /// min(η̃₁, η̃₂), the radius scale of the cut-off.
    pub fn eta2_min(&self) -> f64 {
        self.eta1.min(self.eta2)
    }
}

fn check_dimension(n: usize) -> Result<()> {
    if (1..=10).contains(&n) {
        Ok(())
    } else {
        Err(Error::Domain(format!("dimension must satisfy 1 <= n <= 10, got {n}")))
    }
}

/// η̃₁(n) = 2√(2Γ((n+4)/4)/Γ((n+2)/4)), lowered by 1/1000 for n ∈ {1, 2}.
pub fn eta1(n: usize) -> Result<f64> {
    check_dimension(n)?;
    let nf = n as f64;
    let raw = 2.0 * (2.0 * gamma_fn((nf + 4.0) / 4.0)? / gamma_fn((nf + 2.0) / 4.0)?).sqrt();
    Ok(if n <= 2 { raw - 1e-3 } else { raw })
}

/// η̃₂(n) = √(4n/(n+1) · Γ((n+6)/4)/Γ((n+4)/4)).
pub fn eta2(n: usize) -> Result<f64> {
    check_dimension(n)?;
    let nf = n as f64;
    Ok((4.0 * nf / (nf + 1.0) * gamma_fn((nf + 6.0) / 4.0)? / gamma_fn((nf + 4.0) / 4.0)?).sqrt())
}

/// Lower bound 2^{−(n−2)/2}[Γ(n/4)/4 − η²Γ((n+2)/4)/(8n)] for Γ(n/2)·f_n(η).
pub fn positivity_lower_bound(n: usize, eta: f64) -> Result<f64> {
    let nf = n as f64;
    Ok(2f64.powf(-(nf - 2.0) / 2.0)
        * (gamma_fn(nf / 4.0)? / 4.0 - eta * eta * gamma_fn((nf + 2.0) / 4.0)? / (8.0 * nf)))
}

/// c₁(n): tabulated for n ≤ 2, else 2^{−(n−2)/2}/n · (Γ((n+4)/4) − Γ((n+2)/4)).
pub fn c1(n: usize) -> Result<f64> {
    check_dimension(n)?;
    if n <= 2 {
        return Ok(C1_TABULATED[n - 1]);
    }
    let nf = n as f64;
    Ok(2f64.powf(-(nf - 2.0) / 2.0) / nf * (gamma_fn((nf + 4.0) / 4.0)? - gamma_fn((nf + 2.0) / 4.0)?))
}

/// c₂(n) = −2^{−n/2} · n/(n+2) · (Γ((n+4)/4) − Γ((n+6)/4)).
pub fn c2(n: usize) -> Result<f64> {
    check_dimension(n)?;
    let nf = n as f64;
    Ok(-(2f64.powf(-nf / 2.0)) * nf / (nf + 2.0) * (gamma_fn((nf + 4.0) / 4.0)? - gamma_fn((nf + 6.0) / 4.0)?))
}

/// Smallest positive zero of f_n, bracketed outward from η̃₁(n).
pub fn first_zero(n: usize) -> Result<f64> {
    check_dimension(n)?;
    let p = RadialProfile::new(n)?;
    let mut lo = eta1(n)?;
    let mut f_lo = p.value(lo)?;
    if !(f_lo > 0.0) {
        return Err(Error::Search(format!("f_{n} is not positive at eta1 = {lo}")));
    }
    let mut hi = lo;
    loop {
        hi += ZERO_SEARCH_STEP;
        if hi > ZERO_SEARCH_LIMIT {
            return Err(Error::Search(format!("no sign change of f_{n} in (0, {ZERO_SEARCH_LIMIT}]")));
        }
        let f_hi = p.value(hi)?;
        if f_hi <= 0.0 {
            break;
        }
        lo = hi;
        f_lo = f_hi;
    }
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        let f_mid = p.value(mid)?;
        if f_mid > 0.0 {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    debug_assert!(f_lo > 0.0);
    Ok(0.5 * (lo + hi))
}

/// All constants for dimension n.
pub fn bound_constants(n: usize) -> Result<BoundConstants> {
    Ok(BoundConstants { n, eta1: eta1(n)?, eta2: eta2(n)?, c1: c1(n)?, c2: c2(n)?, xi1: first_zero(n)? })
}

/// Smallest margins of f_n ≥ c₁ on [0, η̃₁] and Δ^η f_n ≤ −c₂ on [0, η̃₂].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundWindows {
    pub n: usize,
    /// min (f_n − c₁)
    pub positivity_margin: f64,
    /// min (−c₂ − Δ^η f_n)
    pub concavity_margin: f64,
}

impl BoundWindows {
    pub fn holds(&self) -> bool {
        self.positivity_margin >= 0.0 && self.concavity_margin >= 0.0
    }
}

/// Samples both windows at spacing `step`, endpoints included.
pub fn check_bound_windows(n: usize, step: f64) -> Result<BoundWindows> {
    if !(step > 0.0) {
        return Err(Error::Domain(format!("sampling step must be positive, got {step}")));
    }
    let b = bound_constants(n)?;
    let p = RadialProfile::new(n)?;
    let window = |end: f64, g: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
        let count = (end / step).floor() as usize;
        let mut worst = g(end)?;
        for i in 0..=count {
            worst = worst.min(g(i as f64 * step)?);
        }
        Ok(worst)
    };
    Ok(BoundWindows {
        n,
        positivity_margin: window(b.eta1, &|eta| Ok(p.value(eta)? - b.c1))?,
        concavity_margin: window(b.eta2, &|eta| Ok(-b.c2 - p.eta_laplacian(eta)?))?,
    })
}

/// Envelope |f_n(η)| ≤ K exp(−μ η^{4/3}).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayBound {
    #[serde(rename = "K")]
    pub k: f64,
    pub mu: f64,
}

impl DecayBound {
    pub fn envelope(&self, eta: f64) -> f64 {
        self.k * (-self.mu * eta.powf(4.0 / 3.0)).exp()
    }
}

/// Fits the decay envelope on η ∈ [2, eta_max].
///
/// μ is the least-squares slope of log|f_n| against η^{4/3} through the local
/// maxima of |f_n|; K is then the smallest amplitude covering every sample.
/// Samples below the quadrature resolution count as satisfying the bound.
pub fn fit_decay_bound(profile: &RadialProfile, eta_max: f64) -> Result<DecayBound> {
    if !(eta_max >= 10.0) {
        return Err(Error::Domain(format!("fit_decay_bound needs eta_max >= 10, got {eta_max}")));
    }
    let floor = 100.0 * profile.quad_tol * profile.value_at_origin()?;
    let step = 0.02;
    let count = ((eta_max - 2.0) / step).round() as usize;
    let samples: Vec<(f64, f64)> = (0..=count)
        .map(|i| {
            let eta = 2.0 + i as f64 * step;
            profile.value(eta).map(|f| (eta, f.abs()))
        })
        .collect::<Result<_>>()?;
    let resolved = |v: f64| v > floor;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for w in samples.windows(3) {
        if w[1].1 >= w[0].1 && w[1].1 >= w[2].1 && resolved(w[1].1) {
            xs.push(w[1].0.powf(4.0 / 3.0));
            ys.push(w[1].1.ln());
        }
    }
    if xs.len() < 2 {
        return Err(Error::Search("fewer than two resolved envelope peaks for the decay fit".into()));
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let mu = -sxy / sxx;
    if !(mu > 0.0) {
        return Err(Error::Search(format!("decay fit produced non-positive rate {mu}")));
    }
    let k = samples
        .iter()
        .filter(|(_, f)| resolved(*f))
        .map(|(eta, f)| f * (mu * eta.powf(4.0 / 3.0)).exp())
        .fold(0.0, f64::max);
    Ok(DecayBound { k, mu })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_bound_values() {
        assert!((eta1(1).unwrap() - 2.43156).abs() < 1e-5);
        assert!((eta1(2).unwrap() - 2.66167).abs() < 1e-5);
        assert!((c1(3).unwrap() - 0.002984).abs() < 1e-6);
        assert!((c1(4).unwrap() - 0.014222).abs() < 1e-6);
        assert!((c2(3).unwrap() - 0.045384).abs() < 1e-6);
    }

    #[test]
    fn eta_estimates_hold_in_corrected_direction() {
        for n in 3..=10 {
            assert!(eta1(n).unwrap() > 2.0 * 2f64.sqrt());
        }
        for n in 1..=10 {
            let nf = n as f64;
            assert!(eta2(n).unwrap() > (4.0 * nf / (nf + 1.0)).sqrt());
        }
    }

    #[test]
    fn first_zero_of_n1() {
        // Dense sign scan at step 1e-3 as the independent bracket.
        let p = RadialProfile::new(1).unwrap();
        let mut eta = 3.0;
        while p.value(eta + 1e-3).unwrap() > 0.0 {
            eta += 1e-3;
        }
        let z = first_zero(1).unwrap();
        assert!(z > eta && z <= eta + 1e-3 + 1e-8, "{z} not in [{eta}, {}]", eta + 1e-3);
        assert!((z - 3.45346).abs() < 1e-5);
    }

    #[test]
    fn decay_fit_covers_samples() {
        let p = RadialProfile::new(3).unwrap();
        let fit = fit_decay_bound(&p, 12.0).unwrap();
        assert!(fit.mu > 0.0 && fit.k > 0.0);
        assert!(p.value(10.0).unwrap().abs() <= fit.envelope(10.0) * (1.0 + 1e-12));
        assert!(p.value(12.0).unwrap().abs() <= fit.envelope(12.0) * (1.0 + 1e-12));
    }

    #[test]
    fn domain_checks() {
        assert!(bound_constants(0).is_err());
        assert!(bound_constants(11).is_err());
        assert!(fit_decay_bound(&RadialProfile::new(1).unwrap(), 5.0).is_err());
    }
}
