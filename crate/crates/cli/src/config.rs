//! TOML configuration with command-line overrides.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use bientropy::entropy::{r_window, SpatialRule, Variant};
use bientropy::flow::Target;
use clap::Args;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::CliError;

/// A list of dimensions written as "2", "1,3" or "1..4".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dims(pub Vec<usize>);

impl FromStr for Dims {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad dimension {t:?}"));
        let dims = if let Some((a, b)) = s.split_once("..") {
            let (a, b) = (parse(a)?, parse(b.trim_start_matches('='))?);
            if a > b {
                return Err(format!("empty dimension range {s:?}"));
            }
            (a..=b).collect()
        } else {
            s.split(',').map(parse).collect::<Result<Vec<_>, _>>()?
        };
        if dims.is_empty() || dims.iter().any(|&n| !(1..=10).contains(&n)) {
            return Err(format!("dimensions must lie in 1..=10, got {s:?}"));
        }
        Ok(Dims(dims))
    }
}

impl<'de> Deserialize<'de> for Dims {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            One(usize),
            Many(Vec<usize>),
            Text(String),
        }
        let text = match Raw::deserialize(d)? {
            Raw::One(n) => n.to_string(),
            Raw::Many(v) => v.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","),
            Raw::Text(s) => s,
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad number {t:?}"))).collect()
}

/// Comma-separated floats on the command line, an array in TOML.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(transparent)]
pub struct Floats(pub Vec<f64>);

impl FromStr for Floats {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        parse_list(s).map(Floats)
    }
}

/// Flag values win over file values, field by field.
pub trait Layered: Sized + DeserializeOwned {
    fn config_path(&self) -> Option<&Path>;
    fn overlay(self, file: Self) -> Self;
}

macro_rules! layered {
    ($ty:ident { $($field:ident),* $(,)? }) => {
        impl Layered for $ty {
            fn config_path(&self) -> Option<&Path> {
                self.config.as_deref()
            }

            fn overlay(self, file: Self) -> Self {
                Self { config: self.config, $($field: self.$field.or(file.$field)),* }
            }
        }
    };
}

/// Reads the TOML file named by `--config`, if any, and lays the flags over it.
pub fn layer<T: Layered>(flags: T) -> Result<T, CliError> {
    let Some(path) = flags.config_path() else {
        return Ok(flags);
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
    let file: T = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))?;
    Ok(flags.overlay(file))
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

fn required<T>(name: &str, v: Option<T>) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Config(format!("missing required key `{name}`")))
}

/// R₀ must satisfy 0 < R₀ < min(t₀^{1/4}/2, 1).
pub fn check_window(r0: f64, t0: f64) -> Result<(), CliError> {
    let window = r_window(t0);
    if r0 > 0.0 && r0 < window {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "R0 = {r0} violates the scale window 0 < R0 < min(t0^(1/4)/2, 1) = {window} for t0 = {t0}"
        )))
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelTableArgs {
    /// TOML file with the keys below
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Dimensions: "2", "1,3" or "1..4"
    #[arg(long)]
    pub n: Option<Dims>,
    #[arg(long)]
    pub eta_max: Option<f64>,
    #[arg(long)]
    pub eta_step: Option<f64>,
    /// Output CSV file
    #[arg(long)]
    pub out: Option<PathBuf>,
}
layered!(KernelTableArgs { n, eta_max, eta_step, out });

pub struct KernelTable {
    pub dims: Vec<usize>,
    pub eta_max: f64,
    pub eta_step: f64,
    pub out: PathBuf,
}

impl KernelTableArgs {
    pub fn resolve(self) -> Result<KernelTable, CliError> {
        Ok(KernelTable {
            dims: self.n.unwrap_or(Dims(vec![1, 2, 3, 4])).0,
            eta_max: positive("eta_max", self.eta_max.unwrap_or(10.0))?,
            eta_step: positive("eta_step", self.eta_step.unwrap_or(0.01))?,
            out: self.out.unwrap_or_else(|| "kernel_table.csv".into()),
        })
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyKernelArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<Dims>,
    /// Random (x, t) samples per dimension
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub eta_max: Option<f64>,
    /// Output JSON report
    #[arg(long)]
    pub out: Option<PathBuf>,
}
layered!(VerifyKernelArgs { n, samples, seed, eta_max, out });

pub struct VerifyKernel {
    pub dims: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    pub eta_max: f64,
    pub out: PathBuf,
}

impl VerifyKernelArgs {
    pub fn resolve(self) -> Result<VerifyKernel, CliError> {
        let samples = self.samples.unwrap_or(1000);
        if samples == 0 {
            return Err(CliError::Config("samples must be at least 1".into()));
        }
        Ok(VerifyKernel {
            dims: self.n.unwrap_or(Dims(vec![1, 2, 3, 4])).0,
            samples,
            seed: self.seed.unwrap_or(1),
            eta_max: positive("eta_max", self.eta_max.unwrap_or(10.0))?,
            out: self.out.unwrap_or_else(|| "verify_kernel.json".into()),
        })
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowRunArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dimension: Option<usize>,
    /// Grid points per axis
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub half_width: Option<f64>,
    /// euclidean or sphere
    #[arg(long)]
    pub target: Option<Target>,
    #[arg(long)]
    pub components: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Keep every k-th step in the archive
    #[arg(long)]
    pub snapshot_stride: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_mode: Option<usize>,
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}
layered!(FlowRunArgs { dimension, points, half_width, target, components, dt, steps, snapshot_stride, seed, max_mode, amplitude, out });

pub struct FlowRun {
    pub dimension: usize,
    pub points: usize,
    pub half_width: f64,
    pub target: Target,
    pub components: usize,
    /// None means the largest stable step.
    pub dt: Option<f64>,
    pub steps: usize,
    pub snapshot_stride: usize,
    pub seed: u64,
    pub max_mode: usize,
    pub amplitude: f64,
    pub out: PathBuf,
}

impl FlowRunArgs {
    pub fn resolve(self) -> Result<FlowRun, CliError> {
        let dimension = self.dimension.unwrap_or(1);
        if !(1..=3).contains(&dimension) {
            return Err(CliError::Config(format!("dimension must be 1, 2 or 3, got {dimension}")));
        }
        let target = self.target.unwrap_or(Target::Euclidean);
        let components = self.components.unwrap_or(if target == Target::Sphere { 3 } else { 1 });
        if components == 0 || (target == Target::Sphere && components < 2) {
            return Err(CliError::Config(format!("{components} components is too few for a {target} target")));
        }
        let points = self.points.unwrap_or(64);
        if points < 8 || points % 2 != 0 {
            return Err(CliError::Config(format!("points must be even and at least 8, got {points}")));
        }
        let stride = self.snapshot_stride.unwrap_or(10);
        if stride == 0 {
            return Err(CliError::Config("snapshot_stride must be at least 1".into()));
        }
        let dt = match self.dt {
            Some(v) => Some(positive("dt", v)?),
            None if target == Target::Euclidean => Some(2e-5),
            None => None,
        };
        Ok(FlowRun {
            dimension,
            points,
            half_width: positive("half_width", self.half_width.unwrap_or(std::f64::consts::PI))?,
            target,
            components,
            dt,
            steps: self.steps.unwrap_or(1000),
            snapshot_stride: stride,
            seed: self.seed.unwrap_or(0),
            max_mode: self.max_mode.unwrap_or(3),
            amplitude: self.amplitude.unwrap_or(if target == Target::Sphere { 0.3 } else { 1.0 }),
            out: self.out.unwrap_or_else(|| "flow_run".into()),
        })
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyScanArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Directory written by flow-run
    #[arg(long)]
    pub archive: Option<PathBuf>,
    /// Comma-separated center
    #[arg(long)]
    pub x0: Option<Floats>,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long = "r0")]
    #[serde(rename = "R0")]
    pub r0: Option<f64>,
    /// Explicit comma-separated R values
    #[arg(long = "r-grid")]
    #[serde(rename = "R_grid")]
    pub r_grid: Option<Floats>,
    /// Number of uniform R values when no explicit grid is given
    #[arg(long = "r-count")]
    #[serde(rename = "R_count")]
    pub r_count: Option<usize>,
    /// withoutSUP, withSUP or slice
    #[arg(long)]
    pub variant: Option<Variant>,
    /// Snapshot times per layer
    #[arg(long)]
    pub snapshots: Option<usize>,
    /// Override the spatial rule: "polar:RADIAL:ANGULAR" or "cartesian:POINTS"
    #[arg(long)]
    pub rule: Option<RuleSpec>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
layered!(EntropyScanArgs { archive, x0, t0, r0, r_grid, r_count, variant, snapshots, rule, out });

/// A spatial rule written as text.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleSpec(pub SpatialRule);

impl FromStr for RuleSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.parse::<usize>().map_err(|_| format!("bad count {t:?} in rule {s:?}"));
        match parts.as_slice() {
            ["polar", r, a] => Ok(RuleSpec(SpatialRule::Polar { radial: num(r)?, angular: num(a)? })),
            ["cartesian", p] => Ok(RuleSpec(SpatialRule::Cartesian { points: num(p)? })),
            _ => Err(format!("rule {s:?} is neither polar:RADIAL:ANGULAR nor cartesian:POINTS")),
        }
    }
}

impl<'de> Deserialize<'de> for RuleSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

pub struct EntropyScan {
    pub archive: PathBuf,
    pub x0: Vec<f64>,
    pub t0: f64,
    pub r0: f64,
    pub r_grid: Option<Vec<f64>>,
    pub r_count: usize,
    pub variant: Variant,
    pub snapshots: usize,
    pub rule: Option<SpatialRule>,
    pub out: PathBuf,
}

impl EntropyScanArgs {
    pub fn resolve(self) -> Result<EntropyScan, CliError> {
        let t0 = required("t0", self.t0)?;
        let r0 = required("R0", self.r0)?;
        check_window(r0, t0)?;
        let r_count = self.r_count.unwrap_or(8);
        if r_count == 0 {
            return Err(CliError::Config("R_count must be at least 1".into()));
        }
        Ok(EntropyScan {
            archive: required("archive", self.archive)?,
            x0: required("x0", self.x0)?.0,
            t0,
            r0,
            r_grid: self.r_grid.map(|g| g.0),
            r_count,
            variant: self.variant.unwrap_or(Variant::WithoutSup),
            snapshots: self.snapshots.unwrap_or(bientropy::numerics::DEFAULT_SNAPSHOTS),
            rule: self.rule.map(|r| r.0),
            out: self.out.unwrap_or_else(|| "entropy_scan".into()),
        })
    }
}

/// Where the soliton residual trajectory comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Shrinker,
    Archive,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub source: Option<Source>,
    #[arg(long)]
    pub archive: Option<PathBuf>,
    /// Dimension of the shrinker
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub x0: Option<Floats>,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long = "r0")]
    #[serde(rename = "R0")]
    pub r0: Option<f64>,
    /// Layer scale R
    #[arg(long = "r")]
    #[serde(rename = "R")]
    pub r: Option<f64>,
    /// Cartesian patch points per axis for the shrinker
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub snapshots: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
layered!(SolitonArgs { source, archive, n, x0, t0, r0, r, points, snapshots, out });

pub struct Soliton {
    pub source: Source,
    pub archive: Option<PathBuf>,
    pub x0: Vec<f64>,
    pub t0: f64,
    pub r0: f64,
    pub r: f64,
    pub points: usize,
    pub snapshots: usize,
    pub out: PathBuf,
}

impl SolitonArgs {
    pub fn resolve(self) -> Result<Soliton, CliError> {
        let source = self.source.unwrap_or(Source::Shrinker);
        let x0 = match (self.x0, self.n) {
            (Some(x), Some(n)) if x.0.len() != n => {
                return Err(CliError::Config(format!("x0 has {} entries but n = {n}", x.0.len())));
            }
            (Some(x), _) => x.0,
            (None, n) => vec![0.0; n.unwrap_or(2)],
        };
        if !(1..=3).contains(&x0.len()) {
            return Err(CliError::Config(format!("dimension must be 1, 2 or 3, got {}", x0.len())));
        }
        let t0 = self.t0.unwrap_or(1.0);
        let r0 = self.r0.unwrap_or(0.4);
        check_window(r0, t0)?;
        let r = self.r.unwrap_or(0.45);
        if !(r >= r0 && r < r_window(t0)) {
            return Err(CliError::Config(format!("R = {r} must lie in [R0, min(t0^(1/4)/2, 1)) = [{r0}, {})", r_window(t0))));
        }
        if source == Source::Archive && self.archive.is_none() {
            return Err(CliError::Config("missing required key `archive` for source = \"archive\"".into()));
        }
        Ok(Soliton {
            source,
            archive: self.archive,
            x0,
            t0,
            r0,
            r,
            points: self.points.unwrap_or(32),
            snapshots: self.snapshots.unwrap_or(8),
            out: self.out.unwrap_or_else(|| "soliton_residual".into()),
        })
    }
}
