//! Plain-text (TOML) run configurations consumed by the `raincast` binary.
//! Every field has a sensible default so a config file only needs the
//! entries that differ; command-line flags override file values.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{RaincastError, Result};
use crate::experiment::{default_city_aliases, default_dmd_triples, DmdTriple};
use crate::ingest::GridPoint;

fn read_toml<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            toml::from_str(&text).map_err(|e| {
                RaincastError::Structure(format!("bad config {}: {e}", path.display()))
            })
        }
    }
}

/// `ingest` subcommand: daily CSV in, monthly CSV out, optional region box.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestConfig {
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// [lat_min, lat_max, lon_min, lon_max]; omitted means no selection.
    pub bbox: Option<[f64; 4]>,
}

impl IngestConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        read_toml(path)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DmdRunEntry {
    pub start: i32,
    pub stop: i32,
    pub rank: usize,
}

/// `dmd` subcommand configuration.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DmdConfig {
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// Year/rank triples; defaults to the seven built-in runs.
    pub runs: Option<Vec<DmdRunEntry>>,
    pub clamp_negative: Option<bool>,
    pub seed: Option<u64>,
    /// Locations to emit plot CSVs for: `lat:lon` or alias names.
    pub plot_locations: Option<Vec<String>>,
    /// Extra or overriding city aliases: name -> [lat, lon].
    pub aliases: Option<BTreeMap<String, [f64; 2]>>,
}

impl DmdConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        read_toml(path)
    }

    pub fn triples(&self) -> Vec<DmdTriple> {
        match &self.runs {
            Some(runs) => runs
                .iter()
                .map(|r| DmdTriple {
                    start_year: r.start,
                    stop_year: r.stop,
                    rank: r.rank,
                })
                .collect(),
            None => default_dmd_triples(),
        }
    }
}

/// `dl` subcommand configuration.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DlConfig {
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// `lat:lon` or an alias name such as "Guwahati".
    pub location: Option<String>,
    pub optimizers: Option<Vec<String>>,
    pub windows: Option<Vec<usize>>,
    pub output_window: Option<usize>,
    pub dropouts: Option<Vec<f64>>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub hidden: Option<usize>,
    pub learning_rate: Option<f64>,
    pub weight_decay: Option<f64>,
    pub train_fraction: Option<f64>,
    pub seed: Option<u64>,
    pub aliases: Option<BTreeMap<String, [f64; 2]>>,
}

impl DlConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        read_toml(path)
    }
}

/// Merge the built-in alias table with config-supplied entries.
pub fn merged_aliases(extra: Option<&BTreeMap<String, [f64; 2]>>) -> Vec<(String, GridPoint)> {
    let mut aliases = default_city_aliases();
    if let Some(extra) = extra {
        for (name, &[lat, lon]) in extra {
            let point = GridPoint::new(lat, lon);
            match aliases.iter_mut().find(|(n, _)| n.eq_ignore_ascii_case(name)) {
                Some(entry) => entry.1 = point,
                None => aliases.push((name.clone(), point)),
            }
        }
    }
    aliases
}

/// `synth` subcommand configuration.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    /// "seasonal" (default) or "linear".
    pub kind: Option<String>,
    /// "monthly" (default) or "daily"; daily applies to seasonal output.
    pub format: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    // Seasonal parameters.
    pub amplitude: Option<f64>,
    pub phase: Option<f64>,
    pub noise_sigma: Option<f64>,
    pub trend: Option<f64>,
    pub length: Option<usize>,
    /// Grid points as [lat, lon]; defaults to a single synthetic point.
    pub points: Option<Vec<[f64; 2]>>,
    // Linear-system parameters.
    pub dim: Option<usize>,
    /// Eigenvalues as [re, im] pairs.
    pub eigenvalues: Option<Vec<[f64; 2]>>,
    pub snapshots: Option<usize>,
    pub initial_state: Option<Vec<f64>>,
}

impl SynthConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        read_toml(path)
    }
}
