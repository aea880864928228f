use std::sync::{Arc, OnceLock};

use super::profile::{normalization_alpha, RadialProfile};
use super::table::ProfileTable;
use crate::error::{Error, Result};

/// Highest raised order any kernel derivative below needs (f_{n+8}).
pub const KERNEL_ORDERS: usize = 4;

/// Where the radial profiles come from.
#[derive(Debug, Clone)]
pub enum ProfileSource {
    /// Adaptive quadrature at every call.
    Direct(RadialProfile),
    /// Hermite table, for grid-heavy work.
    Table(Arc<ProfileTable>),
}

impl ProfileSource {
    pub fn dimension(&self) -> usize {
        match self {
            ProfileSource::Direct(p) => p.n,
            ProfileSource::Table(t) => t.n,
        }
    }

    /// f_{n+2k}(η).
    pub fn raised(&self, k: usize, eta: f64) -> Result<f64> {
        match self {
            ProfileSource::Direct(p) => p.raised(k).value(eta),
            ProfileSource::Table(t) => {
                if k > t.orders {
                    return Err(Error::Domain(format!(
                        "profile table holds {} raised orders, asked for {k}",
                        t.orders
                    )));
                }
                Ok(t.value(k, eta))
            }
        }
    }

    /// (f_n, f_{n+2}, …, f_{n+2·count−2}) at η.
    pub fn jet(&self, count: usize, eta: f64) -> Result<[f64; KERNEL_ORDERS + 1]> {
        let mut out = [0.0; KERNEL_ORDERS + 1];
        for (k, slot) in out.iter_mut().enumerate().take(count) {
            *slot = self.raised(k, eta)?;
        }
        Ok(out)
    }
}

/// Cached α_n for n ≤ 10.
pub fn cached_alpha(n: usize) -> Result<f64> {
    static CACHE: [OnceLock<f64>; 11] = [const { OnceLock::new() }; 11];
    if !(1..=10).contains(&n) {
        return normalization_alpha(n);
    }
    if let Some(a) = CACHE[n].get() {
        return Ok(*a);
    }
    let a = normalization_alpha(n)?;
    Ok(*CACHE[n].get_or_init(|| a))
}

/// The backwards biharmonic heat kernel
/// B(x,t) = α_n (t₀−t)^{−n/4} f_n(|x−x₀|/(t₀−t)^{1/4}).
#[derive(Debug, Clone)]
pub struct HeatKernel {
    pub n: usize,
    pub x0: Vec<f64>,
    pub t0: f64,
    pub alpha: f64,
    pub profile: ProfileSource,
}

/// Everything the entropy integrands need from B at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTerms {
    pub b: f64,
    pub grad: Vec<f64>,
    pub lap: f64,
    pub grad_lap: Vec<f64>,
}

/// Position data shared by every derivative formula.
struct Local {
    y: Vec<f64>,
    tau: f64,
    eta: f64,
}

impl HeatKernel {
    /// Kernel with quadrature-backed profiles and unit-mass normalization.
    pub fn new(n: usize, x0: Vec<f64>, t0: f64) -> Result<Self> {
        Self::with_source(x0, t0, ProfileSource::Direct(RadialProfile::new(n)?))
    }

    /// Kernel with tabulated profiles.
    pub fn tabulated(n: usize, x0: Vec<f64>, t0: f64) -> Result<Self> {
        Self::with_source(x0, t0, ProfileSource::Table(ProfileTable::shared(n, KERNEL_ORDERS)?))
    }

    pub fn with_source(x0: Vec<f64>, t0: f64, profile: ProfileSource) -> Result<Self> {
        let n = profile.dimension();
        if x0.len() != n {
            return Err(Error::Domain(format!("center has {} coordinates, expected {n}", x0.len())));
        }
        if !t0.is_finite() {
            return Err(Error::Domain("t0 must be finite".into()));
        }
        Ok(Self { n, x0, t0, alpha: cached_alpha(n)?, profile })
    }

    /// The same kernel moved to a new center.
    pub fn recentered(&self, x0: Vec<f64>, t0: f64) -> Result<Self> {
        Self::with_source(x0, t0, self.profile.clone())
    }

    fn local(&self, x: &[f64], t: f64) -> Result<Local> {
        if x.len() != self.n {
            return Err(Error::Domain(format!("point has {} coordinates, expected {}", x.len(), self.n)));
        }
        if !(t < self.t0) {
            return Err(Error::Domain(format!("kernel evaluated at t = {t} >= t0 = {}", self.t0)));
        }
        let tau = self.t0 - t;
        let y: Vec<f64> = x.iter().zip(&self.x0).map(|(a, b)| a - b).collect();
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok(Local { y, tau, eta: r / tau.powf(0.25) })
    }

    fn scale(&self, tau: f64, quarter_power: f64) -> f64 {
        self.alpha * tau.powf(-quarter_power / 4.0)
    }

    /// B(x,t).
    pub fn value(&self, x: &[f64], t: f64) -> Result<f64> {
        let l = self.local(x, t)?;
        Ok(self.scale(l.tau, self.n as f64) * self.profile.raised(0, l.eta)?)
    }

    /// ∇B = −α τ^{−(n+2)/4} f_{n+2}(η) (x−x₀).
    pub fn gradient(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        let l = self.local(x, t)?;
        let c = -self.scale(l.tau, self.n as f64 + 2.0) * self.profile.raised(1, l.eta)?;
        Ok(l.y.iter().map(|v| c * v).collect())
    }

    /// ∇²B, row-major n×n.
    pub fn hessian(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        let l = self.local(x, t)?;
        let c = -self.scale(l.tau, self.n as f64 + 2.0);
        let f1 = self.profile.raised(1, l.eta)?;
        let f2 = self.profile.raised(2, l.eta)? / l.tau.sqrt();
        Ok(outer_plus_identity(&l.y, c * f1, -c * f2))
    }

    /// ΔB = α τ^{−(n+2)/4} Δ^η f_n(η).
    pub fn laplacian(&self, x: &[f64], t: f64) -> Result<f64> {
        let l = self.local(x, t)?;
        let f = self.profile.jet(3, l.eta)?;
        Ok(self.scale(l.tau, self.n as f64 + 2.0) * (l.eta * l.eta * f[2] - self.n as f64 * f[1]))
    }

    /// ∇ΔB = α τ^{−(n+4)/4} [(n+2) f_{n+4} − η² f_{n+6}] (x−x₀).
    pub fn grad_laplacian(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        let l = self.local(x, t)?;
        let f = self.profile.jet(4, l.eta)?;
        let g = (self.n as f64 + 2.0) * f[2] - l.eta * l.eta * f[3];
        let c = self.scale(l.tau, self.n as f64 + 4.0) * g;
        Ok(l.y.iter().map(|v| c * v).collect())
    }

    /// ∇²ΔB, row-major n×n.
    pub fn hessian_laplacian(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        let l = self.local(x, t)?;
        let f = self.profile.jet(5, l.eta)?;
        let (g, h) = self.g_h(&f, l.eta);
        let c = self.scale(l.tau, self.n as f64 + 4.0);
        Ok(outer_plus_identity(&l.y, c * g, c * h / l.tau.sqrt()))
    }

    /// Δ²B = α τ^{−(n+4)/4} (n g + η² h).
    pub fn bilaplacian(&self, x: &[f64], t: f64) -> Result<f64> {
        let l = self.local(x, t)?;
        let f = self.profile.jet(5, l.eta)?;
        let (g, h) = self.g_h(&f, l.eta);
        Ok(self.scale(l.tau, self.n as f64 + 4.0) * (self.n as f64 * g + l.eta * l.eta * h))
    }

    /// ∂_t B, from differentiating τ^{−n/4} f_n(η) in t directly.
    pub fn time_derivative(&self, x: &[f64], t: f64) -> Result<f64> {
        let l = self.local(x, t)?;
        let f = self.profile.jet(2, l.eta)?;
        Ok(self.scale(l.tau, self.n as f64 + 4.0) * (self.n as f64 * f[0] - l.eta * l.eta * f[1]) / 4.0)
    }

    /// B, ∇B, ΔB and ∇ΔB from a single profile jet.
    pub fn terms(&self, x: &[f64], t: f64) -> Result<KernelTerms> {
        let l = self.local(x, t)?;
        let f = self.profile.jet(4, l.eta)?;
        Ok(self.terms_from_jet(&l.y, l.tau, l.eta, &f))
    }

    /// Same as [`terms`](Self::terms) for a displacement y = x − x₀ and τ = t₀ − t > 0.
    pub fn terms_at_offset(&self, y: &[f64], tau: f64) -> Result<KernelTerms> {
        if !(tau > 0.0) {
            return Err(Error::Domain(format!("kernel needs t0 - t > 0, got {tau}")));
        }
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let eta = r / tau.powf(0.25);
        let f = self.profile.jet(4, eta)?;
        Ok(self.terms_from_jet(y, tau, eta, &f))
    }

    fn terms_from_jet(&self, y: &[f64], tau: f64, eta: f64, f: &[f64; KERNEL_ORDERS + 1]) -> KernelTerms {
        let n = self.n as f64;
        let s2 = self.scale(tau, n + 2.0);
        let grad_c = -s2 * f[1];
        let g = (n + 2.0) * f[2] - eta * eta * f[3];
        let gl_c = self.scale(tau, n + 4.0) * g;
        KernelTerms {
            b: self.scale(tau, n) * f[0],
            grad: y.iter().map(|v| grad_c * v).collect(),
            lap: s2 * (eta * eta * f[2] - n * f[1]),
            grad_lap: y.iter().map(|v| gl_c * v).collect(),
        }
    }

    fn g_h(&self, f: &[f64; KERNEL_ORDERS + 1], eta: f64) -> (f64, f64) {
        let n = self.n as f64;
        let e2 = eta * eta;
        ((n + 2.0) * f[2] - e2 * f[3], e2 * f[4] - (n + 4.0) * f[3])
    }
}

fn outer_plus_identity(y: &[f64], diag: f64, outer: f64) -> Vec<f64> {
    let n = y.len();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = outer * y[i] * y[j] + if i == j { diag } else { 0.0 };
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kernel(n: usize) -> HeatKernel {
        HeatKernel::new(n, vec![0.1; n], 1.0).unwrap()
    }

    #[test]
    fn rejects_future_times() {
        let k = kernel(2);
        assert!(matches!(k.value(&[0.0, 0.0], 1.0), Err(Error::Domain(_))));
        assert!(k.value(&[0.0, 0.0], 1.5).is_err());
    }

    #[test]
    fn center_limits() {
        let k = kernel(3);
        let x = k.x0.clone();
        assert!(k.gradient(&x, 0.2).unwrap().iter().all(|v| *v == 0.0));
        assert!(k.grad_laplacian(&x, 0.2).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let k = kernel(2);
        let x = [0.7, -0.35];
        let t = 0.6;
        let h = 1e-4;
        let shift = |d: usize, s: f64| {
            let mut p = x;
            p[d] += s;
            p
        };
        let grad = k.gradient(&x, t).unwrap();
        let lap_fd = |f: &dyn Fn(&[f64]) -> f64| -> f64 {
            (0..2)
                .map(|d| (f(&shift(d, h)) - 2.0 * f(&x) + f(&shift(d, -h))) / (h * h))
                .sum()
        };
        for d in 0..2 {
            let fd = (k.value(&shift(d, h), t).unwrap() - k.value(&shift(d, -h), t).unwrap()) / (2.0 * h);
            assert!((fd - grad[d]).abs() < 1e-7, "{fd} vs {}", grad[d]);
        }
        let lap = lap_fd(&|p| k.value(p, t).unwrap());
        assert!((lap - k.laplacian(&x, t).unwrap()).abs() < 1e-5);
        let gl = k.grad_laplacian(&x, t).unwrap();
        for d in 0..2 {
            let fd = (k.laplacian(&shift(d, h), t).unwrap() - k.laplacian(&shift(d, -h), t).unwrap()) / (2.0 * h);
            assert!((fd - gl[d]).abs() < 1e-6);
        }
        let bl = lap_fd(&|p| k.laplacian(p, t).unwrap());
        assert!((bl - k.bilaplacian(&x, t).unwrap()).abs() < 1e-4);
        let dt = (k.value(&x, t + h).unwrap() - k.value(&x, t - h).unwrap()) / (2.0 * h);
        assert!((dt - k.time_derivative(&x, t).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn backwards_kernel_solves_backwards_equation() {
        // B(·, t) = b(·, t0 − t), so ∂_t B = Δ²B.
        let k = kernel(3);
        for &(x, t) in &[([0.2, 0.4, -0.1], 0.5), ([1.1, 0.0, 0.3], 0.9)] {
            let lhs = k.time_derivative(&x, t).unwrap();
            let rhs = k.bilaplacian(&x, t).unwrap();
            assert!((lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn terms_agree_with_single_calls() {
        let k = kernel(2);
        let x = [0.3, 0.5];
        let t = 0.75;
        let terms = k.terms(&x, t).unwrap();
        assert_eq!(terms.b, k.value(&x, t).unwrap());
        assert_eq!(terms.grad, k.gradient(&x, t).unwrap());
        assert!((terms.lap - k.laplacian(&x, t).unwrap()).abs() < 1e-15);
        assert_eq!(terms.grad_lap, k.grad_laplacian(&x, t).unwrap());
    }
}
