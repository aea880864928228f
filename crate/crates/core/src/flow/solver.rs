use num_complex::Complex64;

use super::field::{time_derivative_of, Field, Target};
use crate::error::{Error, Result};
use crate::numerics::Spectral;

/// Smallest |u| tolerated before renormalizing a sphere step.
const MIN_NORM: f64 = 0.5;

/// Exact step of ∂_t u = −Δ²u: Fourier coefficients times exp(−|k|⁴ dt).
pub fn step_linear_spectral(field: &Field, spectral: &Spectral, dt: f64) -> Result<Field> {
    if field.target != Target::Euclidean {
        return Err(Error::Domain("step_linear_spectral needs a euclidean target".into()));
    }
    let values: Vec<Vec<f64>> = field
        .values
        .iter()
        .map(|c| propagate(spectral, c, dt))
        .collect::<Result<_>>()?;
    let rhs = time_derivative_of(spectral, Target::Euclidean, &values)?;
    Ok(Field { grid: field.grid.clone(), target: field.target, time: field.time + dt, values, rhs })
}

fn propagate(spectral: &Spectral, u: &[f64], dt: f64) -> Result<Vec<f64>> {
    spectral.apply(u, |i| Complex64::new((-spectral.k_squared(i).powi(2) * dt).exp(), 0.0))
}

/// Largest stable step h⁴/8 of the explicit normal correction.
pub fn sphere_step_limit(field: &Field) -> f64 {
    field.grid.spacing().powi(4) / 8.0
}

/// One step of ∂_t u = −(Δ²u − ⟨Δ²u, u⟩u) into the unit sphere.
///
/// The stiff part −Δ²u goes through the exact integrating factor, the normal
/// correction ⟨Δ²u, u⟩u is explicit, and the result is renormalized.
pub fn step_sphere_flow(field: &Field, spectral: &Spectral, dt: f64) -> Result<Field> {
    if field.target != Target::Sphere {
        return Err(Error::Domain("step_sphere_flow needs a sphere target".into()));
    }
    let limit = sphere_step_limit(field);
    if dt > limit {
        return Err(Error::StepSize(format!("dt = {dt:e} exceeds the stability bound h^4/8 = {limit:e}")));
    }
    let len = field.grid.len();
    // rhs = −Δ²u + ⟨Δ²u,u⟩u, so the normal correction is rhs + Δ²u.
    let bilap: Vec<Vec<f64>> = field.values.iter().map(|c| spectral.bilaplacian(c)).collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(field.components());
    for (c, (u, r)) in field.values.iter().zip(&field.rhs).enumerate() {
        let staged: Vec<f64> = (0..len).map(|i| u[i] + dt * (r[i] + bilap[c][i])).collect();
        values.push(propagate(spectral, &staged, dt)?);
    }
    for i in 0..len {
        let norm = values.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt();
        if !(norm >= MIN_NORM) {
            return Err(Error::StepSize(format!("|u| = {norm} < 1/2 at {:?}; reduce dt", field.grid.point(i))));
        }
        values.iter_mut().for_each(|c| c[i] /= norm);
    }
    let rhs = time_derivative_of(spectral, Target::Sphere, &values)?;
    Ok(Field { grid: field.grid.clone(), target: field.target, time: field.time + dt, values, rhs })
}

/// Dispatches on the field's target.
pub fn step(field: &Field, spectral: &Spectral, dt: f64) -> Result<Field> {
    match field.target {
        Target::Euclidean => step_linear_spectral(field, spectral, dt),
        Target::Sphere => step_sphere_flow(field, spectral, dt),
    }
}
