//! Ball quadrature in polar coordinates with radial panels.

use super::trig::Nodes;
use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on [−1, 1], nodes increasing.
pub fn gauss_legendre(count: usize) -> (Vec<f64>, Vec<f64>) {
    let nf = count as f64;
    let mut nodes = vec![0.0; count];
    let mut weights = vec![0.0; count];
    for i in 0..count.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=count {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[count - 1 - i] = x;
        weights[i] = w;
        weights[count - 1 - i] = w;
    }
    (nodes, weights)
}

/// Points of the ball |x − center| < radii.last() with product weights.
///
/// Radial Gauss panels run between consecutive entries of `[0, radii...]`;
/// directions are ±1 (n = 1), a uniform circle (n = 2), or Gauss in cos θ
/// times a uniform azimuth (n = 3).
pub fn ball_rule(center: &[f64], radii: &[f64], radial: usize, angular: usize) -> Result<(Nodes, Vec<f64>)> {
    let n = center.len();
    if !(1..=3).contains(&n) || radii.is_empty() || radial == 0 || (n > 1 && angular < 2) {
        return Err(Error::Domain("ball quadrature needs n in 1..=3, radii and positive node counts".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
        return Err(Error::Domain("panel radii must increase from a positive value".into()));
    }
    let (gx, gw) = gauss_legendre(radial);
    let mut rs = Vec::new();
    let mut lo = 0.0;
    for &hi in radii {
        for (x, w) in gx.iter().zip(&gw) {
            let r = lo + 0.5 * (hi - lo) * (x + 1.0);
            rs.push((r, 0.5 * (hi - lo) * w * r.powi(n as i32 - 1)));
        }
        lo = hi;
    }
    let mut dirs: Vec<(Vec<f64>, f64)> = Vec::new();
    match n {
        1 => dirs.extend([(vec![-1.0], 1.0), (vec![1.0], 1.0)]),
        2 => {
            for j in 0..angular {
                let th = 2.0 * std::f64::consts::PI * j as f64 / angular as f64;
                dirs.push((vec![th.cos(), th.sin()], 2.0 * std::f64::consts::PI / angular as f64));
            }
        }
        _ => {
            let (cx, cw) = gauss_legendre(angular / 2);
            for (c, w) in cx.iter().zip(&cw) {
                let s = (1.0 - c * c).sqrt();
                for j in 0..angular {
                    let ph = 2.0 * std::f64::consts::PI * j as f64 / angular as f64;
                    dirs.push((vec![s * ph.cos(), s * ph.sin(), *c], w * 2.0 * std::f64::consts::PI / angular as f64));
                }
            }
        }
    }
    let mut points = Vec::with_capacity(rs.len() * dirs.len());
    let mut weights = Vec::with_capacity(rs.len() * dirs.len());
    for (r, wr) in &rs {
        for (d, wd) in &dirs {
            points.push(center.iter().zip(d).map(|(c, e)| c + r * e).collect());
            weights.push(wr * wd);
        }
    }
    Ok((Nodes::Points(points), weights))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        for p in 0..14 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "degree {p}");
        }
        let (x1, w1) = gauss_legendre(1);
        assert_eq!((x1[0], w1[0]), (0.0, 2.0));
    }

    #[test]
    fn ball_volumes_and_moments() {
        let unit = [2.0, std::f64::consts::PI, 4.0 * std::f64::consts::PI / 3.0];
        for n in 1..=3 {
            let c = vec![0.2; n];
            let (nodes, w) = ball_rule(&c, &[0.5, 1.0], 6, 12).unwrap();
            assert!((w.iter().sum::<f64>() - unit[n - 1]).abs() < 1e-13);
            // ∫|x−c|² over the unit ball = n·vol/(n+2)
            let m2: f64 = (0..nodes.len())
                .map(|i| w[i] * nodes.point(i).iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
                .sum();
            assert!((m2 - n as f64 * unit[n - 1] / (n as f64 + 2.0)).abs() < 1e-13);
        }
    }
}
