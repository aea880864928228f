use serde::{Deserialize, Serialize};

use super::special::{bessel_p, gamma_fn};
use crate::error::{Error, Result};
use crate::numerics::gauss_kronrod;

/// Default relative quadrature tolerance.
pub const DEFAULT_QUAD_TOL: f64 = 1e-13;
/// Beyond this η the profile is taken to be zero (it sits far below the decay envelope).
pub const DEFAULT_ETA_SWITCH: f64 = 25.0;
const MAX_DEPTH: u32 = 40;
/// Radial range for moments: r^{n−1} weights make the tail past 25 visible.
const MOMENT_RANGE: f64 = 45.0;

/// Evaluator for the radial kernel profile
///
/// f_n(η) = η^{1−n} ∫₀^∞ exp(−s⁴) (ηs)^{n/2} J_{(n−2)/2}(ηs) ds.
///
/// Internally the integrand is rewritten as 2^{−(n−2)/2} exp(−s⁴) s^{n−1} P_ν(ηs)
/// with P_ν(x) = J_ν(x)/(x/2)^ν, which has no removable singularity at η = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub n: usize,
    pub quad_tol: f64,
    pub eta_switch: f64,
}

impl RadialProfile {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_settings(n, DEFAULT_QUAD_TOL, DEFAULT_ETA_SWITCH)
    }

    pub fn with_settings(n: usize, quad_tol: f64, eta_switch: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("dimension n must be >= 1".into()));
        }
        if !(quad_tol > 0.0 && quad_tol < 1e-2) {
            return Err(Error::Domain(format!("quad_tol must lie in (0, 1e-2), got {quad_tol}")));
        }
        if !(eta_switch > 0.0) {
            return Err(Error::Domain(format!("eta_switch must be positive, got {eta_switch}")));
        }
        Ok(Self { n, quad_tol, eta_switch })
    }

    /// The same evaluator in dimension n + 2k.
    pub fn raised(&self, k: usize) -> Self {
        Self { n: self.n + 2 * k, ..*self }
    }

    fn nu(&self) -> f64 {
        (self.n as f64 - 2.0) / 2.0
    }

    fn prefactor(&self) -> f64 {
        2f64.powf(-self.nu())
    }

    /// f_n(0) = 2^{−(n−2)/2} Γ(n/4) / (4 Γ(n/2)).
    pub fn value_at_origin(&self) -> Result<f64> {
        let n = self.n as f64;
        Ok(self.prefactor() * gamma_fn(n / 4.0)? / (4.0 * gamma_fn(n / 2.0)?))
    }

    /// Upper limit of the s-integral.
    pub fn s_max(&self) -> f64 {
        (-self.quad_tol.ln()).powf(0.25) + 2.0
    }

    /// f_n(η).
    pub fn value(&self, eta: f64) -> Result<f64> {
        if !(eta >= 0.0) || !eta.is_finite() {
            return Err(Error::Domain(format!("eta must be finite and >= 0, got {eta}")));
        }
        if eta == 0.0 {
            return self.value_at_origin();
        }
        if eta >= self.eta_switch {
            return Ok(0.0);
        }
        let nu = self.nu();
        let power = (self.n - 1) as i32;
        let integrand = |s: f64| -> Result<f64> {
            let s2 = s * s;
            Ok((-s2 * s2).exp() * s.powi(power) * bessel_p(nu, eta * s)?)
        };
        let s_max = self.s_max();
        let panels = ((eta * s_max / std::f64::consts::PI).ceil() as usize).max(4);
        let q = gauss_kronrod::integrate(&integrand, 0.0, s_max, panels, self.quad_tol, MAX_DEPTH)
            .map_err(|e| match e {
                Error::Accuracy { estimate, .. } => Error::Accuracy {
                    message: format!("f_{}({eta}) quadrature did not converge", self.n),
                    estimate: estimate * self.prefactor(),
                },
                other => other,
            })?;
        Ok(self.prefactor() * q.value)
    }

    /// f_n'(η) = −η f_{n+2}(η).
    pub fn derivative(&self, eta: f64) -> Result<f64> {
        if eta == 0.0 {
            return Ok(0.0);
        }
        Ok(-eta * self.raised(1).value(eta)?)
    }

    /// Δ^η f_n(η) = η² f_{n+4}(η) − n f_{n+2}(η).
    pub fn eta_laplacian(&self, eta: f64) -> Result<f64> {
        let lower = self.n as f64 * self.raised(1).value(eta)?;
        if eta == 0.0 {
            return Ok(-lower);
        }
        Ok(eta * eta * self.raised(2).value(eta)? - lower)
    }
}

/// Surface area of the unit sphere in ℝⁿ, ω_{n−1} = 2π^{n/2}/Γ(n/2).
pub fn sphere_area(n: usize) -> Result<f64> {
    let n = n as f64;
    Ok(2.0 * std::f64::consts::PI.powf(n / 2.0) / gamma_fn(n / 2.0)?)
}

/// α_n with ∫ b(x, 1) dx = 1, from α_n^{−1} = ω_{n−1} ∫₀^∞ f_n(r) r^{n−1} dr.
pub fn normalization_alpha(n: usize) -> Result<f64> {
    if !(1..=10).contains(&n) {
        return Err(Error::Domain(format!("normalization_alpha requires 1 <= n <= 10, got {n}")));
    }
    let wide = RadialProfile::with_settings(n, DEFAULT_QUAD_TOL, MOMENT_RANGE)?;
    let mass = radial_moment(&wide, n - 1)?;
    Ok(1.0 / (sphere_area(n)? * mass))
}

/// ∫₀^{η_switch} f_n(r) r^p dr.
pub fn radial_moment(profile: &RadialProfile, p: usize) -> Result<f64> {
    let f = |r: f64| -> Result<f64> { Ok(profile.value(r)? * r.powi(p as i32)) };
    let panels = (profile.eta_switch * 2.0).ceil() as usize;
    let q = gauss_kronrod::integrate(&f, 0.0, profile.eta_switch, panels, 1e-10, 12)?;
    Ok(q.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_values() {
        let expected = [0.723_204_542_316, 0.443_113_462_726, 0.244_435_266_862, 0.125];
        for (i, &e) in expected.iter().enumerate() {
            let p = RadialProfile::new(i + 1).unwrap();
            assert!((p.value_at_origin().unwrap() - e).abs() < 1e-11);
            // continuity of the quadrature at the origin
            assert!((p.value(1e-8).unwrap() - e).abs() < 1e-11);
        }
    }

    #[test]
    fn n1_is_a_cosine_transform() {
        // f_1(η) = √(2/π) ∫ exp(−s⁴) cos(ηs) ds; checked against a plain Simpson sum.
        let p = RadialProfile::new(1).unwrap();
        for &eta in &[0.5, 2.0, 6.0] {
            let m = 20000;
            let h = 6.0 / m as f64;
            let mut acc = 0.0;
            for i in 0..=m {
                let s = i as f64 * h;
                let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * (-s.powi(4)).exp() * (eta * s).cos();
            }
            let simpson = (2.0 / std::f64::consts::PI).sqrt() * acc * h / 3.0;
            assert!((p.value(eta).unwrap() - simpson).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_and_laplacian_at_origin() {
        let p = RadialProfile::new(3).unwrap();
        assert_eq!(p.derivative(0.0).unwrap(), 0.0);
        let lap = p.eta_laplacian(0.0).unwrap();
        assert!((lap + 3.0 * p.raised(1).value_at_origin().unwrap()).abs() < 1e-15);
        assert!(lap < 0.0);
    }

    #[test]
    fn beyond_switch_is_zero() {
        let p = RadialProfile::new(2).unwrap();
        assert_eq!(p.value(30.0).unwrap(), 0.0);
        assert!(p.value(-1.0).is_err());
    }

    #[test]
    fn deterministic() {
        let p = RadialProfile::new(4).unwrap();
        assert_eq!(p.value(3.3).unwrap().to_bits(), p.value(3.3).unwrap().to_bits());
    }

    #[test]
    fn unit_mass_normalization() {
        // b is the inverse Fourier transform of exp(−|k|⁴), so α_n = (2π)^{−n/2}.
        for n in 1..=4 {
            let alpha = normalization_alpha(n).unwrap();
            let exact = (2.0 * std::f64::consts::PI).powf(-(n as f64) / 2.0);
            assert!((alpha / exact - 1.0).abs() < 1e-10, "n={n}: {alpha}");
        }
        assert!(normalization_alpha(0).is_err());
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(1).unwrap() - 2.0).abs() < 1e-14);
        assert!((sphere_area(2).unwrap() - 2.0 * std::f64::consts::PI).abs() < 1e-13);
        assert!((sphere_area(3).unwrap() - 4.0 * std::f64::consts::PI).abs() < 1e-13);
    }
}
