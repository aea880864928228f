use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use super::profile::RadialProfile;
use crate::error::{Error, Result};

/// Cubic Hermite table of f_n, f_{n+2}, …, f_{n+2K} on a uniform η-grid.
///
/// Node slopes come from f_m' = −η f_{m+2}, so one extra order is stored.
/// Past `eta_max` every order is zero.
#[derive(Debug, Clone)]
pub struct ProfileTable {
    pub n: usize,
    pub orders: usize,
    pub step: f64,
    pub eta_max: f64,
    values: Vec<Vec<f64>>,
}

pub const DEFAULT_TABLE_STEP: f64 = 0.01;

impl ProfileTable {
    /// Tabulates orders 0..=`orders` (dimensions n..=n+2·orders).
    pub fn build(n: usize, orders: usize, eta_max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && eta_max > step) {
            return Err(Error::Domain(format!("bad table range: step {step}, eta_max {eta_max}")));
        }
        let base = RadialProfile::new(n)?;
        let nodes = (eta_max / step).ceil() as usize + 1;
        let values = (0..=orders + 1)
            .map(|k| {
                let p = base.raised(k);
                (0..nodes)
                    .into_par_iter()
                    .map(|i| p.value(i as f64 * step))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, orders, step, eta_max: (nodes - 1) as f64 * step, values })
    }

    /// Process-wide cached table on [0, 25] with the default step.
    pub fn shared(n: usize, orders: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<ProfileTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(t) = cache.lock().expect("profile cache poisoned").get(&(n, orders)) {
            return Ok(t.clone());
        }
        let table = Arc::new(Self::build(
            n,
            orders,
            super::profile::DEFAULT_ETA_SWITCH,
            DEFAULT_TABLE_STEP,
        )?);
        let mut guard = cache.lock().expect("profile cache poisoned");
        Ok(guard.entry((n, orders)).or_insert(table).clone())
    }

    /// Interpolated f_{n+2k}(η).
    pub fn value(&self, k: usize, eta: f64) -> f64 {
        debug_assert!(k <= self.orders);
        if eta >= self.eta_max {
            return 0.0;
        }
        let u = eta / self.step;
        let i = (u.floor() as usize).min(self.values[k].len() - 2);
        let s = u - i as f64;
        let e0 = i as f64 * self.step;
        let e1 = e0 + self.step;
        let f0 = self.values[k][i];
        let f1 = self.values[k][i + 1];
        let d0 = -e0 * self.values[k + 1][i] * self.step;
        let d1 = -e1 * self.values[k + 1][i + 1] * self.step;
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * f0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * f1
            + (s3 - s2) * d1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_matches_quadrature() {
        let table = ProfileTable::build(2, 1, 6.0, 0.01).unwrap();
        let direct = RadialProfile::new(2).unwrap();
        for &eta in &[0.0, 0.003, 0.5173, 1.9999, 3.0807, 5.2] {
            let exact = direct.value(eta).unwrap();
            assert!((table.value(0, eta) - exact).abs() < 1e-10, "eta={eta}");
            let exact4 = direct.raised(1).value(eta).unwrap();
            assert!((table.value(1, eta) - exact4).abs() < 1e-10, "eta={eta}");
        }
        assert_eq!(table.value(0, 7.0), 0.0);
    }
}
