use std::path::{Path, PathBuf};

use bientropy::entropy::{
    build_cutoff, default_r_grid, monotonicity_scan, sol_norm_at, soliton_check, EntropyReport, Probe, ShrinkerTrajectory,
    SolitonReport, SpatialRule,
};
use bientropy::flow::{
    check_apriori_sphere, check_linear_estimates, energy_ledger_update, init_field, sphere_step_limit, step, ArchiveTrajectory,
    EnergyLedger, InitSpec, LinearEstimates, SnapshotArchive, SphereApriori, Target, Trajectory,
};
use bientropy::io::write_atomic;
use bientropy::kernel::{
    bound_constants, check_bound_windows, check_identity, check_matrix_harnack, eta1, first_zero, fit_decay_bound,
    kernel_samples, BoundConstants, BoundWindows, DecayBound, HarnackResidual, HeatKernel, IdentityResidual, RadialProfile,
};
use bientropy::numerics::{Grid, Spectral, TimeRule};
use serde::Serialize;

use crate::config::{EntropyScan, FlowRun, KernelTable, Soliton, Source, VerifyKernel};
use crate::svg::{line_plot, Series};
use crate::CliError;

pub const SCHEMA_VERSION: &str = "1";

pub const IDENTITY_TOL: f64 = 1e-8;
pub const HARNACK_TOL: f64 = 1e-6;
pub const LINEAR_ESTIMATE_TOL: f64 = 1e-5;
pub const SPHERE_STEP_TOL: f64 = 1e-6;
pub const SPHERE_HESSIAN_RATIO: f64 = 4.1;
pub const SPHERE_NORM_TOL: f64 = 1e-12;
pub const K_RESIDUAL_TOL: f64 = 1e-3;
pub const SOLITON_TOL: f64 = 1e-4;

/// What a subcommand produced.
pub struct Outcome {
    pub pass: bool,
    pub outputs: Vec<PathBuf>,
}

/// Shortest round-trip text, switching to exponent form for very small or large magnitudes.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e6).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(write_atomic(path, &bytes)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    Ok(write_atomic(path, text.as_bytes())?)
}

pub fn kernel_table(cfg: KernelTable) -> Result<Outcome, CliError> {
    let count = (cfg.eta_max / cfg.eta_step).round() as usize;
    let mut rows = Vec::new();
    for &n in &cfg.dims {
        let p = RadialProfile::new(n)?;
        for i in 0..=count {
            let eta = (i as f64 * cfg.eta_step).min(cfg.eta_max);
            rows.push(vec![n.to_string(), num(eta), num(p.value(eta)?), num(p.derivative(eta)?), num(p.eta_laplacian(eta)?)]);
        }
    }
    write_csv(&cfg.out, &["n", "eta", "f", "f_prime", "lap_eta_f"], &rows)?;
    Ok(Outcome { pass: true, outputs: vec![cfg.out] })
}

#[derive(Serialize)]
struct DimensionReport {
    n: usize,
    identity_residual: IdentityResidual,
    harnack_residual: HarnackResidual,
    bound_constants: BoundConstants,
    bound_windows: BoundWindows,
    decay_fit: DecayBound,
    pass: bool,
}

#[derive(Serialize)]
struct ZeroEntry {
    n: usize,
    first_zero: f64,
}

#[derive(Serialize)]
struct KernelReport {
    schema_version: &'static str,
    samples: usize,
    seed: u64,
    eta_max: f64,
    tolerances: [f64; 2],
    dimensions: Vec<DimensionReport>,
    zero_table: Vec<ZeroEntry>,
    zero_ordering_pass: bool,
    pass: bool,
}

pub fn verify_kernel(cfg: VerifyKernel) -> Result<Outcome, CliError> {
    let mut dimensions = Vec::new();
    for &n in &cfg.dims {
        let kernel = HeatKernel::new(n, vec![0.0; n], 1.0)?;
        let samples = kernel_samples(&kernel, cfg.samples, cfg.eta_max, (0.05, 1.0), cfg.seed.wrapping_add(n as u64));
        let identity = check_identity(&kernel, &samples, cfg.eta_max)?;
        let harnack = check_matrix_harnack(&kernel, &samples)?;
        let constants = bound_constants(n)?;
        let windows = check_bound_windows(n, 1e-2)?;
        let pass = identity.relative <= IDENTITY_TOL
            && harnack.matrix <= HARNACK_TOL
            && harnack.traced <= HARNACK_TOL
            && windows.holds()
            && constants.xi1 > eta1(n)? - 1e-3;
        dimensions.push(DimensionReport {
            n,
            identity_residual: identity,
            harnack_residual: harnack,
            bound_constants: constants,
            bound_windows: windows,
            decay_fit: fit_decay_bound(&RadialProfile::new(n)?, 12.0)?,
            pass,
        });
    }
    let zero_table = [1, 3, 5, 7]
        .iter()
        .map(|&n| Ok(ZeroEntry { n, first_zero: first_zero(n)? }))
        .collect::<Result<Vec<_>, CliError>>()?;
    let zero_ordering_pass = zero_table.windows(2).all(|w| w[1].first_zero - w[0].first_zero > 1e-3);
    let pass = zero_ordering_pass && dimensions.iter().all(|d| d.pass);
    let report = KernelReport {
        schema_version: SCHEMA_VERSION,
        samples: cfg.samples,
        seed: cfg.seed,
        eta_max: cfg.eta_max,
        tolerances: [IDENTITY_TOL, HARNACK_TOL],
        dimensions,
        zero_table,
        zero_ordering_pass,
        pass,
    };
    write_json(&cfg.out, &report)?;
    Ok(Outcome { pass, outputs: vec![cfg.out] })
}

#[derive(Serialize)]
struct FlowReport {
    schema_version: &'static str,
    dimension: usize,
    points_per_axis: usize,
    target: Target,
    components: usize,
    dt: f64,
    steps: usize,
    seed: u64,
    snapshots: usize,
    linear_estimates: Option<LinearEstimates>,
    sphere_apriori: Option<SphereApriori>,
    max_sphere_defect: f64,
    pass: bool,
}

pub fn flow_run(cfg: FlowRun) -> Result<Outcome, CliError> {
    let grid = Grid::new(cfg.dimension, cfg.points, cfg.half_width)?;
    let spectral = Spectral::new(&grid);
    let spec = InitSpec::BandLimited { seed: cfg.seed, max_mode: cfg.max_mode, amplitude: cfg.amplitude };
    let mut field = init_field(&grid, &spectral, &spec, cfg.components, cfg.target)?;
    let dt = cfg.dt.unwrap_or_else(|| sphere_step_limit(&field));
    let mut archive = SnapshotArchive::new(&grid, cfg.components, cfg.target, dt);
    let mut ledger = EnergyLedger::default();
    archive.push(&field)?;
    energy_ledger_update(&field, &spectral, &mut ledger)?;
    let mut max_defect = if cfg.target == Target::Sphere { field.sphere_defect() } else { 0.0 };
    for k in 1..=cfg.steps {
        field = step(&field, &spectral, dt)?;
        energy_ledger_update(&field, &spectral, &mut ledger)?;
        if cfg.target == Target::Sphere {
            max_defect = max_defect.max(field.sphere_defect());
        }
        if k % cfg.snapshot_stride == 0 || k == cfg.steps {
            archive.push(&field)?;
        }
    }
    archive.save(&cfg.out)?;

    let (linear, sphere, pass) = match cfg.target {
        Target::Euclidean => {
            let e = check_linear_estimates(&ledger);
            (Some(e), None, e.lap <= LINEAR_ESTIMATE_TOL && e.grad <= LINEAR_ESTIMATE_TOL && e.grad_lap <= LINEAR_ESTIMATE_TOL)
        }
        Target::Sphere => {
            let a = check_apriori_sphere(&ledger);
            let ok = a.max_step_increase <= SPHERE_STEP_TOL && a.hessian_ratio <= SPHERE_HESSIAN_RATIO && max_defect <= SPHERE_NORM_TOL;
            (None, Some(a), ok)
        }
    };
    let rows: Vec<Vec<String>> = (0..ledger.len())
        .map(|k| {
            vec![
                num(ledger.times[k]),
                num(ledger.grad_sq[k]),
                num(ledger.lap_sq[k]),
                num(ledger.grad_lap_sq[k]),
                num(ledger.dt_sq[k]),
                num(ledger.hessian_sq[k]),
                num(ledger.dissipation[k]),
                num(ledger.grad_lap_dissipation[k]),
            ]
        })
        .collect();
    let energy = cfg.out.join("energy.csv");
    write_csv(
        &energy,
        &["t", "grad_sq", "lap_sq", "grad_lap_sq", "dt_sq", "hessian_sq", "dissipation", "grad_lap_dissipation"],
        &rows,
    )?;
    let report_path = cfg.out.join("report.json");
    write_json(
        &report_path,
        &FlowReport {
            schema_version: SCHEMA_VERSION,
            dimension: cfg.dimension,
            points_per_axis: cfg.points,
            target: cfg.target,
            components: cfg.components,
            dt,
            steps: cfg.steps,
            seed: cfg.seed,
            snapshots: archive.snapshots.len(),
            linear_estimates: linear,
            sphere_apriori: sphere,
            max_sphere_defect: max_defect,
            pass,
        },
    )?;
    Ok(Outcome {
        pass,
        outputs: vec![cfg.out.join("manifest.json"), cfg.out.join("snapshots.bin"), energy, report_path],
    })
}

fn load_archive(dir: &Path) -> Result<ArchiveTrajectory, CliError> {
    Ok(ArchiveTrajectory::new(&SnapshotArchive::load(dir)?)?)
}

fn check_center(x0: &[f64], n: usize) -> Result<(), CliError> {
    if x0.len() == n {
        Ok(())
    } else {
        Err(CliError::Config(format!("x0 has {} entries but the trajectory lives in dimension {n}", x0.len())))
    }
}

pub fn entropy_scan(cfg: EntropyScan) -> Result<Outcome, CliError> {
    let traj = load_archive(&cfg.archive)?;
    let n = traj.dimension();
    check_center(&cfg.x0, n)?;
    let kernel = HeatKernel::tabulated(n, cfg.x0.clone(), cfg.t0)?;
    let cutoff = build_cutoff(n, cfg.x0.clone(), cfg.r0)?;
    let rule = cfg.rule.unwrap_or_else(|| SpatialRule::standard(n));
    let probe = Probe::new(kernel, cutoff, rule, cfg.snapshots, TimeRule::Fejer)?;
    let grid = cfg.r_grid.clone().unwrap_or_else(|| default_r_grid(cfg.r0, cfg.t0, cfg.r_count));
    let report = monotonicity_scan(&traj, &probe, &grid, cfg.variant)?;
    let pass = report.max_k_residual <= K_RESIDUAL_TOL && report.addends_nonnegative && report.k1_nonnegative;

    let csv_path = cfg.out.join("scan.csv");
    let mut header = vec!["R", "Psi", "Psi_first", "Psi_second", "Phi"];
    header.extend(["K1", "K2", "K3", "K4", "K5", "K6", "K7", "K8", "K9"]);
    header.extend(["sum_K", "dPsi_dR_fd", "k_residual", "sol_norm_sq"]);
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![num(r.r), num(r.psi), num(r.psi_first), num(r.psi_second), num(r.phi)];
            row.extend(r.k.iter().map(|&v| num(v)));
            row.extend([num(r.sum_k), num(r.dpsi_dr_fd), num(r.k_residual), num(r.sol_norm_sq)]);
            row
        })
        .collect();
    write_csv(&csv_path, &header, &rows)?;
    let json_path = cfg.out.join("report.json");
    write_json(&json_path, &ScanReport { report: &report, pass })?;
    let svg_path = cfg.out.join("psi.svg");
    let series = vec![
        Series { name: "Psi(R)".into(), points: report.rows.iter().map(|r| (r.r, r.psi)).collect() },
        Series { name: "K1(R)".into(), points: report.rows.iter().map(|r| (r.r, r.k[0])).collect() },
    ];
    write_atomic(&svg_path, line_plot(&format!("Psi and K1, variant {}", cfg.variant), "R", &series).as_bytes())?;
    Ok(Outcome { pass, outputs: vec![csv_path, json_path, svg_path] })
}

#[derive(Serialize)]
struct ScanReport<'a> {
    #[serde(flatten)]
    report: &'a EntropyReport,
    pass: bool,
}

#[derive(Serialize)]
struct SolitonSummary {
    schema_version: &'static str,
    source: &'static str,
    n: usize,
    x0: Vec<f64>,
    t0: f64,
    r0: f64,
    layer: SolitonReport,
    /// Only the shrinker source carries a pass/fail check.
    check_enabled: bool,
    pass: bool,
}

pub fn soliton_residual(cfg: Soliton) -> Result<Outcome, CliError> {
    let n = cfg.x0.len();
    let r4 = cfg.r.powi(4);
    let (traj, rule): (Box<dyn Trajectory>, SpatialRule) = match cfg.source {
        Source::Shrinker => (
            Box::new(ShrinkerTrajectory::new(cfg.x0.clone(), cfg.t0, cfg.t0 - 32.0 * r4)?),
            SpatialRule::Cartesian { points: cfg.points },
        ),
        Source::Archive => {
            let dir = cfg.archive.as_deref().expect("validated in config");
            let t = load_archive(dir)?;
            check_center(&cfg.x0, t.dimension())?;
            (Box::new(t), SpatialRule::standard(n))
        }
    };
    let kernel = HeatKernel::tabulated(n, cfg.x0.clone(), cfg.t0)?;
    let probe = Probe::new(kernel, build_cutoff(n, cfg.x0.clone(), cfg.r0)?, rule, cfg.snapshots, TimeRule::Fejer)?;
    let times: Vec<f64> = match cfg.source {
        Source::Shrinker => probe.layer(cfg.r)?.times,
        Source::Archive => {
            let archive = SnapshotArchive::load(cfg.archive.as_deref().expect("validated in config"))?;
            let (lo, hi) = (cfg.t0 - 16.0 * r4, cfg.t0 - r4);
            archive.manifest.times.into_iter().filter(|t| *t >= lo && *t <= hi).collect()
        }
    };
    if times.is_empty() {
        return Err(CliError::Config(format!("no snapshot times inside the layer [t0 - 16R^4, t0 - R^4] for R = {}", cfg.r)));
    }
    let mut rows = Vec::with_capacity(times.len());
    for &t in &times {
        let (sol, radial) = sol_norm_at(&probe, traj.as_ref(), t)?;
        let rel = if radial > 0.0 { (sol / radial).sqrt() } else { sol.sqrt() };
        rows.push(vec![num(t), num(sol), num(radial), num(rel)]);
    }
    let layer = soliton_check(&probe, traj.as_ref(), cfg.r)?;
    let check_enabled = cfg.source == Source::Shrinker;
    let pass = !check_enabled || (layer.sol_relative < SOLITON_TOL && layer.sol_terms_relative < SOLITON_TOL);
    let csv_path = cfg.out.join("sol_norm.csv");
    write_csv(&csv_path, &["t", "sol_norm_sq", "radial_norm_sq", "relative"], &rows)?;
    let json_path = cfg.out.join("report.json");
    write_json(
        &json_path,
        &SolitonSummary {
            schema_version: SCHEMA_VERSION,
            source: if check_enabled { "shrinker" } else { "archive" },
            n,
            x0: cfg.x0,
            t0: cfg.t0,
            r0: cfg.r0,
            layer,
            check_enabled,
            pass,
        },
    )?;
    Ok(Outcome { pass, outputs: vec![csv_path, json_path] })
}
