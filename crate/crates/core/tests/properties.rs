use std::f64::consts::PI;

use proptest::prelude::*;

use bientropy::entropy::{build_cutoff, Probe, SpatialRule, Variant};
use bientropy::flow::{init_field, step_sphere_flow, sphere_step_limit, InitSpec, LinearTrajectory, Target};
use bientropy::kernel::HeatKernel;
use bientropy::numerics::{Grid, Spectral, TimeRule};

fn linear(n: usize, seed: u64, t_end: f64) -> LinearTrajectory {
    let g = Grid::new(n, 16, PI).unwrap();
    let s = Spectral::new(&g);
    let f = init_field(&g, &s, &InitSpec::BandLimited { seed, max_mode: 3, amplitude: 1.0 }, 1, Target::Euclidean).unwrap();
    LinearTrajectory::from_field(&f, &s, t_end).unwrap()
}

fn probe(n: usize, x0: Vec<f64>, t0: f64, r0: f64, snapshots: usize) -> Probe {
    let kernel = HeatKernel::tabulated(n, x0.clone(), t0).unwrap();
    Probe::new(kernel, build_cutoff(n, x0, r0).unwrap(), SpatialRule::standard(n), snapshots, TimeRule::Fejer).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn addends_and_k1_are_nonnegative(seed in 0u64..10_000, n in 1usize..=2, x in -1.0f64..1.0, r in 0.3f64..0.49) {
        let traj = linear(n, seed, 1.0);
        let p = probe(n, vec![x; n], 1.0, 0.3, 12);
        let li = p.layer_integrals(&traj, r).unwrap();
        prop_assert!(li.psi.first >= 0.0);
        prop_assert!(li.psi.second >= -1e-12 * li.psi.first.max(1e-300));
        prop_assert!(li.k[0] >= 0.0);
    }

    #[test]
    fn cutoff_stays_in_unit_interval(n in 1usize..=3, r0 in 0.05f64..1.0, t in 0.0f64..1.5, dir in prop::collection::vec(-1.0f64..1.0, 3)) {
        let c = build_cutoff(n, vec![0.0; n], r0).unwrap();
        let norm = dir[..n].iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-9);
        let rad = t * c.r_out;
        let x: Vec<f64> = dir[..n].iter().map(|v| v / norm * rad).collect();
        let v = c.values(&x);
        prop_assert!((0.0..=1.0).contains(&v.phi));
        if rad <= c.r_in {
            prop_assert_eq!(v.phi, 1.0);
            prop_assert_eq!(v.sol, 0.0);
        }
        if rad >= c.r_out {
            prop_assert_eq!(v.phi, 0.0);
        }
    }

    #[test]
    fn kernel_identity_holds_pointwise(n in 1usize..=4, tau in 0.05f64..2.0, eta in 0.0f64..8.0, dir in prop::collection::vec(-1.0f64..1.0, 4)) {
        let k = HeatKernel::tabulated(n, vec![0.0; n], 1.0).unwrap();
        let norm = dir[..n].iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-9);
        let y: Vec<f64> = dir[..n].iter().map(|v| v / norm * eta * tau.powf(0.25)).collect();
        let t = k.terms_at_offset(&y, tau).unwrap();
        let peak = k.alpha * tau.powf(-(n as f64 + 3.0) / 4.0);
        for a in 0..n {
            prop_assert!((t.grad_lap[a] - y[a] * t.b / (4.0 * tau)).abs() <= 1e-8 * peak);
        }
    }

    #[test]
    fn variant_names_round_trip(v in prop::sample::select(vec![Variant::WithoutSup, Variant::WithSup, Variant::Slice])) {
        prop_assert_eq!(v.to_string().parse::<Variant>().unwrap(), v);
        let json = serde_json::to_string(&v).unwrap();
        prop_assert_eq!(serde_json::from_str::<Variant>(&json).unwrap(), v);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn psi_and_phi_are_scale_invariant(seed in 0u64..10_000, r in 0.45f64..0.9) {
        let (t0, r0) = (30.0, 0.4);
        let g = Grid::new(1, 32, 4.0 * PI).unwrap();
        let s = Spectral::new(&g);
        let f = init_field(&g, &s, &InitSpec::BandLimited { seed, max_mode: 3, amplitude: 1.0 }, 1, Target::Euclidean).unwrap();
        let traj = LinearTrajectory::from_field(&f, &s, t0).unwrap();
        let base = probe(1, vec![0.3], t0, r0, 16);
        let kernel = HeatKernel::tabulated(1, vec![0.3 / r], t0 / r.powi(4)).unwrap();
        let scaled = Probe::new(kernel, base.cutoff.scaled(r), SpatialRule::standard(1), 16, TimeRule::Fejer).unwrap();
        let rt = traj.rescaled(r).unwrap();
        let (a, b) = (base.psi(&traj, r).unwrap().value, scaled.psi(&rt, 1.0).unwrap().value);
        prop_assert!((a - b).abs() <= 1e-4 * a.abs());
        let (a, b) = (base.phi_slice(&traj, r).unwrap(), scaled.phi_slice(&rt, 1.0).unwrap());
        prop_assert!((a - b).abs() <= 1e-4 * a.abs());
    }

    #[test]
    fn sum_of_k_tracks_the_difference_quotient(seed in 0u64..10_000, x in -0.5f64..0.5, r in 0.3f64..0.48) {
        let traj = linear(1, seed, 1.0);
        let p = probe(1, vec![x], 1.0, 0.3, 32);
        let li = p.layer_integrals(&traj, r).unwrap();
        let fd = p.dpsi_dr(&traj, r).unwrap();
        prop_assert!((li.sum_k() - fd).abs() <= 1e-3 * (fd.abs() + li.k[0]));
    }

    #[test]
    fn sphere_flow_stays_on_the_sphere(seed in 0u64..10_000, amplitude in 0.05f64..0.6) {
        let g = Grid::new(2, 16, PI).unwrap();
        let s = Spectral::new(&g);
        let mut f = init_field(&g, &s, &InitSpec::BandLimited { seed, max_mode: 2, amplitude }, 3, Target::Sphere).unwrap();
        let dt = sphere_step_limit(&f);
        let e0: f64 = f.values.iter().map(|u| s.laplacian(u).unwrap().iter().map(|v| v * v).sum::<f64>()).sum();
        for _ in 0..40 {
            f = step_sphere_flow(&f, &s, dt).unwrap();
            prop_assert!(f.sphere_defect() <= 1e-12);
        }
        let e: f64 = f.values.iter().map(|u| s.laplacian(u).unwrap().iter().map(|v| v * v).sum::<f64>()).sum();
        prop_assert!(e <= e0 * (1.0 + 1e-9));
    }
}
