use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Grid, Spectral};

/// Target of the map u.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Euclidean,
    Sphere,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Euclidean => "euclidean",
            Target::Sphere => "sphere",
        })
    }
}

impl std::str::FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Target::Euclidean),
            "sphere" => Ok(Target::Sphere),
            _ => Err(Error::Domain(format!("unknown target {s:?} (expected euclidean or sphere)"))),
        }
    }
}

pub type Expression = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// How to fill the initial field.
#[derive(Clone)]
pub enum InitSpec {
    Constant(Vec<f64>),
    /// Σ over modes |m_a| ≤ max_mode of random Fourier pairs with amplitude/(1+|m|²).
    /// For the sphere target the last unit vector is added before normalizing.
    BandLimited { seed: u64, max_mode: usize, amplitude: f64 },
    /// Gaussian bump exp(−|x|²/width²)·amplitude in every component.
    Bump { amplitude: f64, width: f64 },
    Expression(Expression),
}

impl fmt::Debug for InitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitSpec::Constant(v) => write!(f, "Constant({v:?})"),
            InitSpec::BandLimited { seed, max_mode, amplitude } => {
                write!(f, "BandLimited {{ seed: {seed}, max_mode: {max_mode}, amplitude: {amplitude} }}")
            }
            InitSpec::Bump { amplitude, width } => write!(f, "Bump {{ amplitude: {amplitude}, width: {width} }}"),
            InitSpec::Expression(_) => f.write_str("Expression(..)"),
        }
    }
}

/// Discretized map u: box → ℝ^k at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub target: Target,
    pub time: f64,
    /// One vector of grid values per component.
    pub values: Vec<Vec<f64>>,
    /// ∂_t u for the current values.
    pub rhs: Vec<Vec<f64>>,
}

impl Field {
    pub fn components(&self) -> usize {
        self.values.len()
    }

    /// Builds a field from raw component values, normalizing for the sphere target.
    pub fn from_values(grid: &Grid, spectral: &Spectral, target: Target, time: f64, mut values: Vec<Vec<f64>>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::Domain("component arrays must match the grid".into()));
        }
        if target == Target::Sphere {
            if values.len() < 2 {
                return Err(Error::Domain("sphere target needs at least two components".into()));
            }
            for i in 0..grid.len() {
                let norm = values.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt();
                if !(norm > 0.0) {
                    return Err(Error::Domain(format!("zero vector at {:?} cannot be projected to the sphere", grid.point(i))));
                }
                values.iter_mut().for_each(|c| c[i] /= norm);
            }
        }
        let rhs = time_derivative_of(spectral, target, &values)?;
        Ok(Self { grid: grid.clone(), target, time, values, rhs })
    }

    /// Largest deviation of |u| from 1.
    pub fn sphere_defect(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| (self.values.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Builds the initial field on `grid`.
pub fn init_field(grid: &Grid, spectral: &Spectral, spec: &InitSpec, components: usize, target: Target) -> Result<Field> {
    if components == 0 {
        return Err(Error::Domain("a field needs at least one component".into()));
    }
    let values: Vec<Vec<f64>> = match spec {
        InitSpec::Constant(v) => {
            if v.len() != components {
                return Err(Error::Domain(format!("constant has {} entries, expected {components}", v.len())));
            }
            v.iter().map(|&c| vec![c; grid.len()]).collect()
        }
        InitSpec::BandLimited { seed, max_mode, amplitude } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut out: Vec<Vec<f64>> = (0..components)
                .map(|_| band_limited(grid, &mut rng, *max_mode, *amplitude))
                .collect();
            if target == Target::Sphere {
                out[components - 1].iter_mut().for_each(|v| *v += 1.0);
            }
            out
        }
        InitSpec::Bump { amplitude, width } => {
            let bump = grid.sample(|x| amplitude * (-x.iter().map(|v| v * v).sum::<f64>() / (width * width)).exp());
            let mut out = vec![bump; components];
            if target == Target::Sphere {
                out[components - 1].iter_mut().for_each(|v| *v += 1.0);
            }
            out
        }
        InitSpec::Expression(f) => {
            let mut out = vec![vec![0.0; grid.len()]; components];
            for i in 0..grid.len() {
                let v = f(&grid.point(i));
                if v.len() != components {
                    return Err(Error::Domain(format!("expression returned {} components, expected {components}", v.len())));
                }
                for (c, val) in out.iter_mut().zip(v) {
                    c[i] = val;
                }
            }
            out
        }
    };
    Field::from_values(grid, spectral, target, 0.0, values)
}

fn band_limited(grid: &Grid, rng: &mut ChaCha8Rng, max_mode: usize, amplitude: f64) -> Vec<f64> {
    let n = grid.n;
    let width = 2 * max_mode + 1;
    let kstep = std::f64::consts::PI / grid.half_width;
    let mut modes = Vec::new();
    for flat in 0..width.pow(n as u32) {
        let mut rem = flat;
        let mut m = [0i64; 3];
        for slot in m.iter_mut().take(n) {
            *slot = (rem % width) as i64 - max_mode as i64;
            rem /= width;
        }
        let m2: i64 = m.iter().map(|v| v * v).sum();
        if m2 == 0 {
            continue;
        }
        let a = rng.gen_range(-1.0..1.0) * amplitude / (1.0 + m2 as f64);
        let b = rng.gen_range(-1.0..1.0) * amplitude / (1.0 + m2 as f64);
        modes.push((m, a, b));
    }
    grid.sample(|x| {
        modes
            .iter()
            .map(|(m, a, b)| {
                let phase: f64 = (0..n).map(|d| kstep * m[d] as f64 * (x[d] + grid.half_width - grid.center[d])).sum();
                a * phase.cos() + b * phase.sin()
            })
            .sum()
    })
}

/// ∂_t u: −Δ²u, or its tangential part −(Δ²u − ⟨Δ²u, u⟩u) on the sphere.
pub fn time_derivative_of(spectral: &Spectral, target: Target, values: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let bilap: Vec<Vec<f64>> = values.iter().map(|c| spectral.bilaplacian(c)).collect::<Result<_>>()?;
    Ok(match target {
        Target::Euclidean => bilap.iter().map(|c| c.iter().map(|v| -v).collect()).collect(),
        Target::Sphere => {
            let len = values[0].len();
            let mut out = vec![vec![0.0; len]; values.len()];
            for i in 0..len {
                let dot: f64 = values.iter().zip(&bilap).map(|(u, b)| u[i] * b[i]).sum();
                for (c, (u, b)) in out.iter_mut().zip(values.iter().zip(&bilap)) {
                    c[i] = -(b[i] - dot * u[i]);
                }
            }
            out
        }
    })
}

/// ∂_t u of a field, recomputed from its values.
pub fn time_derivative(field: &Field, spectral: &Spectral) -> Result<Vec<Vec<f64>>> {
    time_derivative_of(spectral, field.target, &field.values)
}
