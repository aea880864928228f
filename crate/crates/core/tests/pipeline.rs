use std::f64::consts::PI;

use bientropy::entropy::{build_cutoff, default_r_grid, growth_claim_check, monotonicity_scan, Probe, SpatialRule, Variant};
use bientropy::flow::{init_field, step, ArchiveTrajectory, InitSpec, LinearTrajectory, SnapshotArchive, Target};
use bientropy::kernel::HeatKernel;
use bientropy::numerics::{Grid, Spectral, TimeRule};

#[test]
fn archived_run_scans_like_the_exact_trajectory() {
    let g = Grid::new(1, 32, PI).unwrap();
    let s = Spectral::new(&g);
    let mut f = init_field(&g, &s, &InitSpec::BandLimited { seed: 21, max_mode: 3, amplitude: 1.0 }, 1, Target::Euclidean).unwrap();
    let exact = LinearTrajectory::from_field(&f, &s, 1.0).unwrap();
    let mut archive = SnapshotArchive::new(&g, 1, Target::Euclidean, 0.01);
    archive.push(&f).unwrap();
    for _ in 0..100 {
        f = step(&f, &s, 0.01).unwrap();
        archive.push(&f).unwrap();
    }
    let dir = tempfile_dir("pipeline");
    archive.save(&dir).unwrap();
    let loaded = SnapshotArchive::load(&dir).unwrap();
    std::fs::remove_dir_all(&dir).unwrap();
    let replay = ArchiveTrajectory::new(&loaded).unwrap();

    let kernel = HeatKernel::tabulated(1, vec![0.1], 0.9).unwrap();
    let p = Probe::new(kernel, build_cutoff(1, vec![0.1], 0.3).unwrap(), SpatialRule::standard(1), 16, TimeRule::Fejer).unwrap();
    let grid = default_r_grid(0.3, 0.9, 3);
    let a = monotonicity_scan(&exact, &p, &grid, Variant::WithoutSup).unwrap();
    let b = monotonicity_scan(&replay, &p, &grid, Variant::WithoutSup).unwrap();
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert!((x.psi - y.psi).abs() < 1e-10 * x.psi.abs(), "{} vs {}", x.psi, y.psi);
        assert!(y.k_residual < 1e-3);
    }
}

#[test]
fn growth_suprema_are_uniform_in_r_with_the_cutoff() {
    let k = HeatKernel::tabulated(2, vec![0.0, 0.0], 20.0).unwrap();
    let c = build_cutoff(2, vec![0.0, 0.0], 0.3).unwrap();
    let rs: Vec<f64> = (0..=7).map(|i| 0.3 + 0.1 * i as f64).collect();
    let rep = growth_claim_check(&k, &c, &rs).unwrap();
    let spread = |f: fn(&bientropy::entropy::GrowthRow) -> f64| {
        let lo = rep.rows.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = rep.rows.iter().map(f).fold(0.0, f64::max);
        hi / lo
    };
    assert!(spread(|r| r.claim1) < 50.0);
    assert!(spread(|r| r.claim2) < 50.0);
}

fn tempfile_dir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("bientropy-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
