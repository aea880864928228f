//! Exact evaluation of band-limited periodic data at arbitrary nodes.

use num_complex::Complex64;

use super::grid::Grid;
use super::spectral::Spectral;
use crate::error::{Error, Result};

/// Relative magnitude below which Fourier modes are dropped before evaluation.
pub const MODE_CUTOFF: f64 = 1e-15;

/// Trigonometric interpolant of grid data, u(x) = Σ a_m exp(i k_m·(x − x_start)).
///
/// The Nyquist bins are dropped, so the interpolant is real and its odd
/// derivatives are well defined.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    pub grid: Grid,
    coeffs: Vec<Complex64>,
}

/// u, ∇u, Δu, ∇Δu and Δ²u on a node set.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub u: Vec<f64>,
    pub grad: Vec<Vec<f64>>,
    pub lap: Vec<f64>,
    pub grad_lap: Vec<Vec<f64>>,
    pub bilap: Vec<f64>,
}

impl TrigPolynomial {
    pub fn from_values(spectral: &Spectral, u: &[f64]) -> Result<Self> {
        let mut coeffs = spectral.forward(u)?;
        let scale = 1.0 / spectral.grid.len() as f64;
        for (i, c) in coeffs.iter_mut().enumerate() {
            *c = if spectral.is_nyquist(i) { Complex64::new(0.0, 0.0) } else { *c * scale };
        }
        Ok(Self { grid: spectral.grid.clone(), coeffs })
    }

    /// Normalized coefficients in FFT bin order.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Multiplies each coefficient by `factor(k)`.
    pub fn scaled<F: Fn(&[f64; 3]) -> f64>(&self, factor: F) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * factor(&self.wavevector(i)))
            .collect();
        Self { grid: self.grid.clone(), coeffs }
    }

    /// The same coefficients on a box scaled by 1/R: v(y) = u(Ry).
    pub fn rescaled(&self, r: f64) -> Result<Self> {
        let center = self.grid.center.iter().map(|c| c / r).collect();
        Ok(Self { grid: Grid::centered(center, self.grid.points, self.grid.half_width / r)?, coeffs: self.coeffs.clone() })
    }

    fn wavevector(&self, flat: usize) -> [f64; 3] {
        let idx = self.grid.unflatten(flat);
        let mut k = [0.0; 3];
        for a in 0..self.grid.n {
            k[a] = self.grid.wavenumber(idx[a]);
        }
        k
    }

    /// Values on the box grid.
    pub fn values(&self, spectral: &Spectral) -> Vec<f64> {
        let full: Vec<Complex64> = self.coeffs.iter().map(|c| c * self.grid.len() as f64).collect();
        spectral.inverse(&full)
    }

    /// Largest retained |signed mode| per axis.
    fn band(&self) -> usize {
        let max = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut band = 0;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.norm() > MODE_CUTOFF * max {
                let idx = self.grid.unflatten(i);
                for &m in idx.iter().take(self.grid.n) {
                    band = band.max(self.grid.signed_mode(m).unsigned_abs() as usize);
                }
            }
        }
        band
    }

    /// Retained coefficients on the (2·band+1)ⁿ mode cube, axis 0 fastest, with their wavevectors.
    fn compact(&self) -> (usize, Vec<Complex64>, Vec<[f64; 3]>) {
        let n = self.grid.n;
        let band = self.band();
        let width = 2 * band + 1;
        let kstep = std::f64::consts::PI / self.grid.half_width;
        let len = width.pow(n as u32);
        let mut compact = vec![Complex64::new(0.0, 0.0); len];
        let mut kvecs = vec![[0.0f64; 3]; len];
        for (ci, slot) in compact.iter_mut().enumerate() {
            let mut rem = ci;
            let mut flat = 0;
            for a in 0..n {
                let m = (rem % width) as i64 - band as i64;
                rem /= width;
                let bin = ((m + self.grid.points as i64) % self.grid.points as i64) as usize;
                flat += bin * self.grid.stride(a);
                kvecs[ci][a] = kstep * m as f64;
            }
            *slot = self.coeffs[flat];
        }
        (width, compact, kvecs)
    }

    /// Evaluates u and its derivatives at every node of `nodes`.
    pub fn jet(&self, nodes: &Grid) -> Result<Jet> {
        let n = self.grid.n;
        if nodes.n != n {
            return Err(Error::Domain("evaluation grid dimension differs from the data grid".into()));
        }
        let (width, compact, kvecs) = self.compact();
        let band = (width - 1) as i64 / 2;
        let kstep = std::f64::consts::PI / self.grid.half_width;
        // Per-axis phase matrices, rows = nodes, columns = modes.
        let phases: Vec<Vec<Complex64>> = (0..n)
            .map(|a| {
                let start = self.grid.center[a] - self.grid.half_width;
                let mut e = Vec::with_capacity(nodes.points * width);
                for p in 0..nodes.points {
                    let x = nodes.coord(a, p) - start;
                    for m in -band..=band {
                        let theta = kstep * m as f64 * x;
                        e.push(Complex64::new(theta.cos(), theta.sin()));
                    }
                }
                e
            })
            .collect();
        let eval = |mult: &dyn Fn(&[f64; 3]) -> Complex64| -> Vec<f64> {
            let mut data: Vec<Complex64> = compact.iter().zip(&kvecs).map(|(c, k)| c * mult(k)).collect();
            let mut dims = vec![width; n];
            for a in 0..n {
                data = contract(&data, &dims, a, &phases[a], nodes.points, width);
                dims[a] = nodes.points;
            }
            data.iter().map(|c| c.re).collect()
        };
        let i = Complex64::new(0.0, 1.0);
        Ok(Jet {
            u: eval(&|_| Complex64::new(1.0, 0.0)),
            grad: (0..n).map(|a| eval(&|k| i * k[a])).collect(),
            lap: eval(&|k| Complex64::new(-k2(k), 0.0)),
            grad_lap: (0..n).map(|a| eval(&|k| -i * k[a] * k2(k))).collect(),
            bilap: eval(&|k| Complex64::new(k2(k).powi(2), 0.0)),
        })
    }

    /// Evaluates u and its derivatives at scattered points.
    pub fn jet_at(&self, points: &[Vec<f64>]) -> Result<Jet> {
        let n = self.grid.n;
        if points.iter().any(|p| p.len() != n) {
            return Err(Error::Domain("evaluation point dimension differs from the data grid".into()));
        }
        let (width, compact, kvecs) = self.compact();
        let band = (width - 1) as i64 / 2;
        let kstep = std::f64::consts::PI / self.grid.half_width;
        let i = Complex64::new(0.0, 1.0);
        // Field order: u, ∂_a u, Δu, ∂_a Δu, Δ²u.
        let fields = 2 * n + 3;
        let mut tensors = vec![Complex64::new(0.0, 0.0); compact.len() * fields];
        for (ci, (c, k)) in compact.iter().zip(&kvecs).enumerate() {
            let q = k2(k);
            let row = &mut tensors[ci * fields..(ci + 1) * fields];
            row[0] = *c;
            for a in 0..n {
                row[1 + a] = c * i * k[a];
                row[n + 2 + a] = -c * i * k[a] * q;
            }
            row[n + 1] = -c * q;
            row[2 * n + 2] = c * q * q;
        }
        let block = width * fields;
        let mut out = vec![vec![0.0; points.len()]; fields];
        let mut level1 = vec![Complex64::new(0.0, 0.0); fields * width.pow(n.saturating_sub(1) as u32)];
        let mut level2 = vec![Complex64::new(0.0, 0.0); fields * if n == 3 { width } else { 1 }];
        let mut e = vec![Complex64::new(0.0, 0.0); n * width];
        for (pi, p) in points.iter().enumerate() {
            for a in 0..n {
                let x = p[a] - (self.grid.center[a] - self.grid.half_width);
                let step = Complex64::from_polar(1.0, kstep * x);
                let mut z = Complex64::from_polar(1.0, -kstep * x * band as f64);
                for m in 0..width {
                    e[a * width + m] = z;
                    z *= step;
                }
            }
            // Sum over axis 0 for every remaining index.
            let rows = compact.len() / width;
            for r in 0..rows {
                let acc = &mut level1[r * fields..(r + 1) * fields];
                acc.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                let src = &tensors[r * block..(r + 1) * block];
                for m in 0..width {
                    let w = e[m];
                    for (d, s) in acc.iter_mut().zip(&src[m * fields..(m + 1) * fields]) {
                        *d += w * s;
                    }
                }
            }
            let result: Vec<Complex64> = match n {
                1 => level1[..fields].to_vec(),
                _ => {
                    let outer = if n == 3 { width } else { 1 };
                    for o in 0..outer {
                        let acc = &mut level2[o * fields..(o + 1) * fields];
                        acc.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                        for m in 0..width {
                            let w = e[width + m];
                            let src = &level1[(o * width + m) * fields..(o * width + m + 1) * fields];
                            for (d, s) in acc.iter_mut().zip(src) {
                                *d += w * s;
                            }
                        }
                    }
                    if n == 2 {
                        level2[..fields].to_vec()
                    } else {
                        let mut acc = vec![Complex64::new(0.0, 0.0); fields];
                        for m in 0..width {
                            let w = e[2 * width + m];
                            for (d, s) in acc.iter_mut().zip(&level2[m * fields..(m + 1) * fields]) {
                                *d += w * s;
                            }
                        }
                        acc
                    }
                }
            };
            for (f, v) in result.iter().enumerate() {
                out[f][pi] = v.re;
            }
        }
        let mut it = out.into_iter();
        let u = it.next().expect("field");
        let grad = (0..n).map(|_| it.next().expect("field")).collect();
        let lap = it.next().expect("field");
        let grad_lap = (0..n).map(|_| it.next().expect("field")).collect();
        let bilap = it.next().expect("field");
        Ok(Jet { u, grad, lap, grad_lap, bilap })
    }

    /// Dispatches on the node layout.
    pub fn evaluate(&self, nodes: &Nodes) -> Result<Jet> {
        match nodes {
            Nodes::Grid(g) => self.jet(g),
            Nodes::Points(p) => self.jet_at(p),
        }
    }
}

fn k2(k: &[f64; 3]) -> f64 {
    k.iter().map(|v| v * v).sum()
}

/// Where a field is evaluated: a tensor grid or a list of points.
#[derive(Debug, Clone, PartialEq)]
pub enum Nodes {
    Grid(Grid),
    Points(Vec<Vec<f64>>),
}

impl Nodes {
    pub fn len(&self) -> usize {
        match self {
            Nodes::Grid(g) => g.len(),
            Nodes::Points(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        match self {
            Nodes::Grid(g) => g.point(i),
            Nodes::Points(p) => p[i].clone(),
        }
    }
}

/// Replaces tensor axis `axis` (length `inner`) by `outer` rows of `matrix`.
fn contract(data: &[Complex64], dims: &[usize], axis: usize, matrix: &[Complex64], outer: usize, inner: usize) -> Vec<Complex64> {
    let below: usize = dims[..axis].iter().product();
    let above: usize = dims[axis + 1..].iter().product();
    let mut out = vec![Complex64::new(0.0, 0.0); below * outer * above];
    for hi in 0..above {
        for p in 0..outer {
            let row = &matrix[p * inner..(p + 1) * inner];
            let dst = &mut out[(hi * outer + p) * below..(hi * outer + p + 1) * below];
            for (m, e) in row.iter().enumerate() {
                let src = &data[(hi * inner + m) * below..(hi * inner + m + 1) * below];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += e * s;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn reproduces_grid_values_and_derivatives() {
        let g = Grid::new(2, 16, PI).unwrap();
        let s = Spectral::new(&g);
        let f = |x: &[f64]| (2.0 * x[0]).sin() * (x[1]).cos() + 0.3 * (3.0 * x[1]).sin();
        let u = g.sample(f);
        let p = TrigPolynomial::from_values(&s, &u).unwrap();
        let patch = Grid::centered(vec![0.3, -0.2], 8, 0.5).unwrap();
        let jet = p.jet(&patch).unwrap();
        for i in 0..patch.len() {
            let x = patch.point(i);
            assert!((jet.u[i] - f(&x)).abs() < 1e-13);
            let dx = 2.0 * (2.0 * x[0]).cos() * x[1].cos();
            assert!((jet.grad[0][i] - dx).abs() < 1e-12);
            let lap = -5.0 * (2.0 * x[0]).sin() * x[1].cos() - 2.7 * (3.0 * x[1]).sin();
            assert!((jet.lap[i] - lap).abs() < 1e-12);
            let bl = 25.0 * (2.0 * x[0]).sin() * x[1].cos() + 24.3 * (3.0 * x[1]).sin();
            assert!((jet.bilap[i] - bl).abs() < 1e-11);
            let gl = -10.0 * (2.0 * x[0]).cos() * x[1].cos();
            assert!((jet.grad_lap[0][i] - gl).abs() < 1e-11);
        }
    }

    #[test]
    fn scattered_evaluation_matches_grid() {
        for n in 1..=3 {
            let g = Grid::new(n, 8, 1.5).unwrap();
            let s = Spectral::new(&g);
            let u = g.sample(|x| x.iter().enumerate().map(|(a, v)| ((a + 1) as f64 * v).sin() + 0.2 * (2.0 * v).cos()).product());
            let p = TrigPolynomial::from_values(&s, &u).unwrap();
            let patch = Grid::centered(vec![0.1; n], 4, 0.7).unwrap();
            let a = p.jet(&patch).unwrap();
            let points: Vec<Vec<f64>> = (0..patch.len()).map(|i| patch.point(i)).collect();
            let b = p.jet_at(&points).unwrap();
            let close = |x: &[f64], y: &[f64]| x.iter().zip(y).all(|(p, q)| (p - q).abs() < 1e-11);
            assert!(close(&a.u, &b.u) && close(&a.lap, &b.lap) && close(&a.bilap, &b.bilap));
            for d in 0..n {
                assert!(close(&a.grad[d], &b.grad[d]) && close(&a.grad_lap[d], &b.grad_lap[d]));
            }
        }
    }

    #[test]
    fn rescaling_moves_nodes() {
        let g = Grid::new(1, 16, 2.0).unwrap();
        let s = Spectral::new(&g);
        let u = g.sample(|x| (PI * x[0] / 2.0).cos());
        let p = TrigPolynomial::from_values(&s, &u).unwrap();
        let q = p.rescaled(0.5).unwrap();
        let nodes = Grid::centered(vec![0.4], 8, 0.3).unwrap();
        let jet = q.jet(&nodes).unwrap();
        for i in 0..nodes.len() {
            let y = nodes.point(i)[0];
            assert!((jet.u[i] - (PI * 0.5 * y / 2.0).cos()).abs() < 1e-13);
        }
    }
}
