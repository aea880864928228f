//! Adaptive 10-point Gauss / 21-point Kronrod quadrature.

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// One panel estimate.
#[derive(Debug, Clone, Copy)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    pub value: f64,
    pub error: f64,
    pub abs_value: f64,
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// 21-point Kronrod estimate with the QUADPACK error heuristic.
pub fn gk21<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut res_g = 0.0;
    let mut res_k = fc * WGK[10];
    let mut res_abs = fc.abs() * WGK[10];
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Panel { a, b, value, error, abs_value: res_abs })
}

/// Adaptive integration of `f` over [a, b].
///
/// The interval is first split into `initial_panels` equal panels; a panel is
/// bisected until its error is below its share of `rel_tol · ∫|f|`.
/// Panels are summed left to right so results are reproducible.
pub fn integrate<F: Fn(f64) -> Result<f64>>(
    f: &F,
    a: f64,
    b: f64,
    initial_panels: usize,
    rel_tol: f64,
    max_depth: u32,
) -> Result<Quadrature> {
    if !(b > a) {
        return Ok(Quadrature { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let count = initial_panels.max(1);
    let width = (b - a) / count as f64;
    let mut stack: Vec<(Panel, u32)> = Vec::with_capacity(count);
    let mut scale = 0.0;
    for i in (0..count).rev() {
        let lo = a + i as f64 * width;
        let hi = if i + 1 == count { b } else { a + (i + 1) as f64 * width };
        let p = gk21(f, lo, hi)?;
        scale += p.abs_value;
        stack.push((p, 0));
    }
    let mut evaluations = 21 * count;
    let tol = rel_tol * scale.max(f64::MIN_POSITIVE);
    let length = b - a;
    let mut accepted: Vec<Panel> = Vec::new();
    let mut failed = false;
    while let Some((p, depth)) = stack.pop() {
        let share = tol * (p.b - p.a) / length;
        if p.error <= share {
            accepted.push(p);
        } else if depth >= max_depth {
            failed = true;
            accepted.push(p);
        } else {
            let mid = 0.5 * (p.a + p.b);
            let left = gk21(f, p.a, mid)?;
            let right = gk21(f, mid, p.b)?;
            evaluations += 42;
            stack.push((right, depth + 1));
            stack.push((left, depth + 1));
        }
    }
    let value: f64 = accepted.iter().map(|p| p.value).sum();
    let error: f64 = accepted.iter().map(|p| p.error).sum();
    if failed {
        return Err(Error::Accuracy {
            message: format!("adaptive quadrature on [{a}, {b}] hit depth limit {max_depth}"),
            estimate: error,
        });
    }
    Ok(Quadrature { value, error, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let f = |x: f64| Ok(x.powi(20) - 3.0 * x.powi(7));
        let q = integrate(&f, 0.0, 1.0, 1, 1e-13, 10).unwrap();
        assert!((q.value - (1.0 / 21.0 - 3.0 / 8.0)).abs() < 1e-15);
    }

    #[test]
    fn oscillatory() {
        let f = |x: f64| Ok((50.0 * x).cos());
        let q = integrate(&f, 0.0, 3.0, 4, 1e-13, 30).unwrap();
        assert!((q.value - (150.0f64).sin() / 50.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_tail() {
        let f = |x: f64| Ok((-x * x).exp());
        let q = integrate(&f, 0.0, 10.0, 3, 1e-13, 30).unwrap();
        assert!((q.value - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn depth_limit_reports_accuracy_error() {
        let f = |x: f64| Ok(1.0 / x.sqrt().max(1e-300));
        let err = integrate(&f, 0.0, 1.0, 1, 1e-15, 2).unwrap_err();
        assert!(matches!(err, Error::Accuracy { estimate, .. } if estimate > 0.0));
    }
}
