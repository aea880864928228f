use std::path::Path;

use serde::{Deserialize, Serialize};

use super::field::{Field, Target};
use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::numerics::Grid;

pub const SCHEMA_VERSION: &str = "1";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const DATA_FILE: &str = "snapshots.bin";
pub const DTYPE: &str = "float64-le";

/// Sidecar describing the flat binary snapshot file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema_version: String,
    pub dtype: String,
    pub layout: String,
    pub data_file: String,
    pub dimension: usize,
    pub points_per_axis: usize,
    pub box_half_width: f64,
    pub components: usize,
    pub target: Target,
    pub dt: f64,
    pub times: Vec<f64>,
}

/// Snapshots of one flow run.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotArchive {
    pub manifest: Manifest,
    /// snapshots[s][component][node]
    pub snapshots: Vec<Vec<Vec<f64>>>,
}

impl SnapshotArchive {
    pub fn new(grid: &Grid, components: usize, target: Target, dt: f64) -> Self {
        Self {
            manifest: Manifest {
                schema_version: SCHEMA_VERSION.into(),
                dtype: DTYPE.into(),
                layout: "snapshot, component, node (axis 0 fastest)".into(),
                data_file: DATA_FILE.into(),
                dimension: grid.n,
                points_per_axis: grid.points,
                box_half_width: grid.half_width,
                components,
                target,
                dt,
                times: Vec::new(),
            },
            snapshots: Vec::new(),
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.manifest.dimension, self.manifest.points_per_axis, self.manifest.box_half_width)
    }

    pub fn push(&mut self, field: &Field) -> Result<()> {
        if field.components() != self.manifest.components || field.grid.len() != self.node_count() {
            return Err(Error::Domain("snapshot shape differs from the archive".into()));
        }
        if let Some(&last) = self.manifest.times.last() {
            if !(field.time > last) {
                return Err(Error::Domain("snapshot times must increase".into()));
            }
        }
        self.manifest.times.push(field.time);
        self.snapshots.push(field.values.clone());
        Ok(())
    }

    fn node_count(&self) -> usize {
        self.manifest.points_per_axis.pow(self.manifest.dimension as u32)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.snapshots.len() * self.manifest.components * self.node_count() * 8);
        for v in self.snapshots.iter().flatten().flatten() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        write_atomic(&dir.join(DATA_FILE), &self.to_bytes())?;
        let mut json = serde_json::to_string_pretty(&self.manifest)?;
        json.push('\n');
        write_atomic(&dir.join(MANIFEST_FILE), json.as_bytes())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(dir.join(MANIFEST_FILE))
            .map_err(|e| Error::Io(format!("reading {}: {e}", dir.join(MANIFEST_FILE).display())))?;
        let manifest: Manifest = serde_json::from_str(&text)?;
        if manifest.schema_version != SCHEMA_VERSION || manifest.dtype != DTYPE {
            return Err(Error::Format(format!(
                "unsupported archive (schema {}, dtype {})",
                manifest.schema_version, manifest.dtype
            )));
        }
        let bytes = std::fs::read(dir.join(&manifest.data_file))
            .map_err(|e| Error::Io(format!("reading {}: {e}", manifest.data_file)))?;
        let nodes = manifest.points_per_axis.pow(manifest.dimension as u32);
        let per_snapshot = nodes * manifest.components;
        let expected = manifest.times.len() * per_snapshot * 8;
        if bytes.len() != expected {
            return Err(Error::Format(format!("data file has {} bytes, manifest implies {expected}", bytes.len())));
        }
        let values: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        let snapshots = values
            .chunks_exact(per_snapshot)
            .map(|s| s.chunks_exact(nodes).map(|c| c.to_vec()).collect())
            .collect();
        let archive = Self { manifest, snapshots };
        archive.grid()?;
        Ok(archive)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::field::{init_field, InitSpec};
    use crate::numerics::Spectral;

    #[test]
    fn round_trip() {
        let g = Grid::new(1, 16, 2.0).unwrap();
        let s = Spectral::new(&g);
        let f = init_field(&g, &s, &InitSpec::BandLimited { seed: 2, max_mode: 3, amplitude: 1.0 }, 1, Target::Euclidean).unwrap();
        let mut a = SnapshotArchive::new(&g, 1, Target::Euclidean, 0.1);
        a.push(&f).unwrap();
        let mut later = f.clone();
        later.time = 0.5;
        a.push(&later).unwrap();
        assert!(a.push(&f).is_err());
        let dir = std::env::temp_dir().join(format!("bientropy-archive-{}", std::process::id()));
        a.save(&dir).unwrap();
        let b = SnapshotArchive::load(&dir).unwrap();
        assert_eq!(a, b);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
