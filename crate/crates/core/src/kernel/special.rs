//! Gamma and Bessel functions of the first kind.

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};

// Lanczos coefficients (g = 10.900511), as in statrs.
const GAMMA_R: f64 = 10.900511;

const GAMMA_DK: [f64; 11] = [
    2.48574089138753565546e-5,
    1.05142378581721974210,
    -3.45687097222016235469,
    4.51227709466894823700,
    -2.98285225323576655721,
    1.05639711577126713077,
    -1.95428773191645869583e-1,
    1.70970543404441224307e-2,
    -5.71926117404305781283e-4,
    4.63399473359905636708e-6,
    -2.71994908488607703910e-9,
];

const TWO_SQRT_E_OVER_PI: f64 = 1.860_382_734_205_265_7;

/// Series/large-argument crossover for `bessel_j`.
pub const BESSEL_CROSSOVER: f64 = 12.0;
/// Beyond this argument the Hankel expansion is used.
pub const HANKEL_CROSSOVER: f64 = 25.0;
const SERIES_TERMS: usize = 40;

/// Γ(x) for x > 0.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma_fn requires x > 0, got {x}")));
    }
    if x < 0.5 {
        // Γ(x) = Γ(x+1)/x keeps the Lanczos sum on its accurate branch.
        return Ok(lanczos(x + 1.0) / x);
    }
    Ok(lanczos(x))
}

fn lanczos(x: f64) -> f64 {
    let s = GAMMA_DK
        .iter()
        .enumerate()
        .skip(1)
        .fold(GAMMA_DK[0], |s, (i, &dk)| s + dk / (x + i as f64 - 1.0));
    s * TWO_SQRT_E_OVER_PI * ((x - 0.5 + GAMMA_R) / E).powf(x - 0.5)
}

/// J_ν(x) for ν ≥ −1/2 and x ≥ 0.
///
/// Beyond the crossover only integer and half-integer orders are supported,
/// which covers every ν = (n−2)/2.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    check_order(nu, x)?;
    if x == 0.0 {
        return Ok(if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        });
    }
    if x < BESSEL_CROSSOVER || nu >= x {
        Ok((0.5 * x).powf(nu) * series_p(nu, x)?)
    } else {
        large_argument(nu, x)
    }
}

/// P_ν(x) = J_ν(x)/(x/2)^ν, continuous at 0 with P_ν(0) = 1/Γ(ν+1).
pub fn bessel_p(nu: f64, x: f64) -> Result<f64> {
    check_order(nu, x)?;
    if x < BESSEL_CROSSOVER || nu >= x {
        series_p(nu, x)
    } else {
        Ok(large_argument(nu, x)? / (0.5 * x).powf(nu))
    }
}

fn check_order(nu: f64, x: f64) -> Result<()> {
    if !(nu >= -0.5) || !nu.is_finite() {
        return Err(Error::Domain(format!("bessel order must be >= -1/2, got {nu}")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("bessel argument must be >= 0, got {x}")));
    }
    Ok(())
}

fn series_p(nu: f64, x: f64) -> Result<f64> {
    let q = 0.25 * x * x;
    let mut term = 1.0 / gamma_fn(nu + 1.0)?;
    let mut sum = term;
    let max_terms = if x < BESSEL_CROSSOVER { SERIES_TERMS } else { 400 };
    for m in 1..max_terms {
        let mf = m as f64;
        term *= -q / (mf * (nu + mf));
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() && mf > q.sqrt() {
            break;
        }
    }
    Ok(sum)
}

fn large_argument(nu: f64, x: f64) -> Result<f64> {
    if x >= HANKEL_CROSSOVER {
        return Ok(hankel(nu, x));
    }
    let twice = 2.0 * nu;
    if (twice - twice.round()).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "bessel_j beyond x = {BESSEL_CROSSOVER} supports integer and half-integer orders only, got {nu}"
        )));
    }
    let twice = twice.round() as i64;
    if twice % 2 == 0 {
        Ok(integer_order(twice / 2, x))
    } else {
        Ok(half_integer_order(twice, x))
    }
}

// J_ν(x) = √(2/(πx)) (P cos χ − Q sin χ), χ = x − (ν/2 + 1/4)π.
fn hankel(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term: f64 = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        let next = term * (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * x);
        if next.abs() > term.abs() && k > 2 {
            break;
        }
        term = next;
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

// Trapezoid rule for J_m(x) = (1/2π)∫ cos(mθ − x sin θ) dθ; the integrand is
// periodic and entire, so the error decays like J_{M−m}(x).
fn integer_order(m: i64, x: f64) -> f64 {
    let points = (1.3 * x + m as f64 + 60.0).ceil() as usize;
    let mf = m as f64;
    let dtheta = 2.0 * PI / points as f64;
    let mut sum = 0.0;
    for j in 0..points {
        let theta = j as f64 * dtheta;
        sum += (mf * theta - x * theta.sin()).cos();
    }
    sum / points as f64
}

// Closed forms for ν = ±1/2 and upward recurrence, stable for x > ν.
fn half_integer_order(twice_nu: i64, x: f64) -> f64 {
    let scale = (2.0 / (PI * x)).sqrt();
    let j_minus = scale * x.cos();
    if twice_nu == -1 {
        return j_minus;
    }
    let mut prev = j_minus;
    let mut cur = scale * x.sin();
    let mut order = 0.5f64;
    while ((2.0 * order).round() as i64) < twice_nu {
        let next = 2.0 * order / x * cur - prev;
        prev = cur;
        cur = next;
        order += 1.0;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn gamma_known_values() {
        assert!(rel(gamma_fn(1.0).unwrap(), 1.0) < 1e-14);
        assert!(rel(gamma_fn(0.5).unwrap(), PI.sqrt()) < 1e-14);
        assert!(rel(gamma_fn(0.25).unwrap(), 3.625_609_908_221_908_3) < 1e-13);
        assert!(rel(gamma_fn(0.75).unwrap(), 1.225_416_702_465_177_6) < 1e-13);
        assert!(rel(gamma_fn(6.0).unwrap(), 120.0) < 1e-13);
        assert!(rel(gamma_fn(1.25).unwrap(), 0.25 * gamma_fn(0.25).unwrap()) < 1e-13);
    }

    #[test]
    fn gamma_rejects_nonpositive() {
        assert!(matches!(gamma_fn(0.0), Err(Error::Domain(_))));
        assert!(matches!(gamma_fn(-1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn bessel_closed_forms() {
        assert_eq!(bessel_j(0.0, 0.0).unwrap(), 1.0);
        assert!(bessel_j(0.5, PI).unwrap().abs() < 1e-15);
        for &x in &[0.3, 2.0, 7.5, 11.9, 12.0, 25.0, 59.0] {
            let s = (2.0 / (PI * x)).sqrt();
            assert!((bessel_j(0.5, x).unwrap() - s * x.sin()).abs() < 5e-12 * s);
            assert!((bessel_j(-0.5, x).unwrap() - s * x.cos()).abs() < 5e-12 * s);
            let j32 = s * (x.sin() / x - x.cos());
            assert!((bessel_j(1.5, x).unwrap() - j32).abs() < 5e-12 * s);
        }
    }

    #[test]
    fn bessel_reference_values() {
        // Abramowitz & Stegun table values.
        assert!(rel(bessel_j(0.0, 1.0).unwrap(), 0.765_197_686_557_966_6) < 1e-13);
        assert!(rel(bessel_j(1.0, 1.0).unwrap(), 0.440_050_585_744_933_5) < 1e-13);
        assert!(rel(bessel_j(0.0, 20.0).unwrap(), 0.167_024_664_340_583_34) < 1e-11);
        assert!(rel(bessel_j(1.0, 50.0).unwrap(), -0.097_511_828_125_175_5) < 1e-10);
        assert!(rel(bessel_j(3.0, 15.0).unwrap(), -0.194_018_257_820_123) < 1e-10);
    }

    #[test]
    fn branches_agree_at_crossover() {
        for &nu in &[-0.5, 0.0, 0.5, 1.0, 2.5, 4.0] {
            let below = (0.5 * 12.0f64).powf(nu) * series_p(nu, 12.0).unwrap();
            let above = large_argument(nu, 12.0).unwrap();
            assert!((below - above).abs() < 1e-11, "nu={nu}: {below} vs {above}");
        }
    }

    #[test]
    fn hankel_agrees_with_trapezoid() {
        for &nu in &[0.0, 1.0, 2.0, 3.0, 4.0] {
            for &x in &[25.0, 31.7, 60.0] {
                let a = hankel(nu, x);
                let b = integer_order(nu as i64, x);
                assert!((a - b).abs() < 1e-14, "nu={nu} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn rejects_bad_order() {
        assert!(matches!(bessel_j(-0.75, 1.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_j(0.3, 20.0), Err(Error::Domain(_))));
    }
}
