use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::heat::HeatKernel;
use crate::error::Result;

/// One (x, t) sample with t < t₀.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub t: f64,
}

/// Seeded samples with η uniform in [0, eta_max] and t₀ − t uniform in [tau_min, tau_max].
pub fn kernel_samples(
    kernel: &HeatKernel,
    count: usize,
    eta_max: f64,
    tau_range: (f64, f64),
    seed: u64,
) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let tau = rng.gen_range(tau_range.0..=tau_range.1);
            let eta = rng.gen_range(0.0..=eta_max);
            let mut dir: Vec<f64> = (0..kernel.n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
            dir.iter_mut().for_each(|v| *v /= norm);
            let r = eta * tau.powf(0.25);
            let x = dir.iter().zip(&kernel.x0).map(|(d, c)| c + r * d).collect();
            Sample { x, t: kernel.t0 - tau }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    /// max |∇ΔB − (x−x₀)B/(4(t₀−t))| divided by the peak of |(x−x₀)B|/(4(t₀−t)) on that time slice.
    pub relative: f64,
    /// max |∇ΔB − (x−x₀)B/(4(t₀−t))| / (1 + |∇ΔB|).
    pub mixed: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarnackResidual {
    /// Full matrix residual, over all (i, j), relative to the slice peak of b²/(4t).
    pub matrix: f64,
    /// Traced form with ∂_t b and Δ|∇b|² evaluated independently.
    pub traced: f64,
    pub samples: usize,
}

/// Peak of η|f_n(η)|/4 over [0, eta_max].
fn identity_peak(kernel: &HeatKernel, eta_max: f64) -> Result<f64> {
    let steps = (eta_max / 0.02).ceil() as usize;
    let mut peak: f64 = 0.0;
    for i in 0..=steps {
        let eta = i as f64 * eta_max / steps as f64;
        peak = peak.max(eta * kernel.profile.raised(0, eta)?.abs() / 4.0);
    }
    Ok(peak)
}

/// Checks ∇ΔB = (x−x₀)B/(4(t₀−t)) at every sample.
pub fn check_identity(kernel: &HeatKernel, samples: &[Sample], eta_max: f64) -> Result<IdentityResidual> {
    let peak = identity_peak(kernel, eta_max)?;
    let mut relative: f64 = 0.0;
    let mut mixed: f64 = 0.0;
    for s in samples {
        let tau = kernel.t0 - s.t;
        let terms = kernel.terms(&s.x, s.t)?;
        let mut diff: f64 = 0.0;
        let mut size: f64 = 0.0;
        for (i, gl) in terms.grad_lap.iter().enumerate() {
            let rhs = (s.x[i] - kernel.x0[i]) * terms.b / (4.0 * tau);
            diff = diff.max((gl - rhs).abs());
            size += gl * gl;
        }
        let slice_scale = kernel.alpha * tau.powf(-(kernel.n as f64 + 3.0) / 4.0) * peak;
        relative = relative.max(diff / slice_scale);
        mixed = mixed.max(diff / (1.0 + size.sqrt()));
    }
    Ok(IdentityResidual { relative, mixed, samples: samples.len() })
}

/// Δ|∇b|² = α² τ^{−(n+2)/2} [2n f² − (2n+8)η² f f₄ + 2η⁴(f₄² + f f₆)] with f = f_{n+2}.
pub fn laplacian_of_gradient_square(kernel: &HeatKernel, x: &[f64], t: f64) -> Result<f64> {
    let tau = kernel.t0 - t;
    let r2: f64 = x.iter().zip(&kernel.x0).map(|(a, b)| (a - b) * (a - b)).sum();
    let e2 = r2 / tau.sqrt();
    let f = kernel.profile.raised(1, e2.sqrt())?;
    let f4 = kernel.profile.raised(2, e2.sqrt())?;
    let f6 = kernel.profile.raised(3, e2.sqrt())?;
    let n = kernel.n as f64;
    let q = 2.0 * n * f * f - (2.0 * n + 8.0) * e2 * f * f4 + 2.0 * e2 * e2 * (f4 * f4 + f * f6);
    Ok(kernel.alpha * kernel.alpha * tau.powf(-(n + 2.0) / 2.0) * q)
}

/// Matrix Harnack and traced residuals of the forward kernel b(·, τ) = B(·, t₀ − τ).
pub fn check_matrix_harnack(kernel: &HeatKernel, samples: &[Sample]) -> Result<HarnackResidual> {
    let n = kernel.n;
    let f0 = kernel.profile.raised(0, 0.0)?;
    let mut matrix: f64 = 0.0;
    let mut traced: f64 = 0.0;
    for s in samples {
        let tau = kernel.t0 - s.t;
        let b = kernel.value(&s.x, s.t)?;
        let grad = kernel.gradient(&s.x, s.t)?;
        let grad_lap = kernel.grad_laplacian(&s.x, s.t)?;
        let hess_lap = kernel.hessian_laplacian(&s.x, s.t)?;
        let hess = kernel.hessian(&s.x, s.t)?;
        let peak = (kernel.alpha * tau.powf(-(n as f64) / 4.0) * f0).powi(2) / (4.0 * tau);
        for i in 0..n {
            for j in 0..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                let r = b * hess_lap[i * n + j] - grad_lap[i] * grad[j] - delta * b * b / (4.0 * tau);
                matrix = matrix.max(r.abs() / peak);
            }
        }
        // forward time derivative: ∂_τ b = −∂_t B
        let dt_b = -kernel.time_derivative(&s.x, s.t)?;
        let hess_sq: f64 = hess.iter().map(|v| v * v).sum();
        let lap_grad_sq = laplacian_of_gradient_square(kernel, &s.x, s.t)?;
        let r = dt_b * b + 0.5 * lap_grad_sq - hess_sq + n as f64 * b * b / (4.0 * tau);
        traced = traced.max(r.abs() / peak);
    }
    Ok(HarnackResidual { matrix, traced, samples: samples.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_residuals_vanish_off_diagonal() {
        let k = HeatKernel::new(2, vec![0.0, 0.0], 1.0).unwrap();
        let s = [Sample { x: vec![0.0, 0.0], t: 0.5 }];
        let h = check_matrix_harnack(&k, &s).unwrap();
        assert!(h.matrix < 1e-10);
        let hl = k.hessian_laplacian(&[0.0, 0.0], 0.5).unwrap();
        assert_eq!(hl[1], 0.0);
    }

    #[test]
    fn laplacian_of_gradient_square_matches_differences() {
        let k = HeatKernel::new(2, vec![0.0, 0.0], 1.0).unwrap();
        let x = [0.4, 0.3];
        let t = 0.5;
        let h = 1e-3;
        let g2 = |p: &[f64]| k.gradient(p, t).unwrap().iter().map(|v| v * v).sum::<f64>();
        let mut fd = 0.0;
        for d in 0..2 {
            let mut a = x;
            let mut b = x;
            a[d] += h;
            b[d] -= h;
            fd += (g2(&a) - 2.0 * g2(&x) + g2(&b)) / (h * h);
        }
        let exact = laplacian_of_gradient_square(&k, &x, t).unwrap();
        assert!((fd - exact).abs() < 1e-5 * (1.0 + exact.abs()), "{fd} vs {exact}");
    }

    #[test]
    fn samples_are_reproducible() {
        let k = HeatKernel::new(3, vec![0.0; 3], 1.0).unwrap();
        let a = kernel_samples(&k, 5, 8.0, (0.1, 1.0), 7);
        let b = kernel_samples(&k, 5, 8.0, (0.1, 1.0), 7);
        assert_eq!(a, b);
        assert!(a.iter().all(|s| s.t < k.t0));
    }
}
