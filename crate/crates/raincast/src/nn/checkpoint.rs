//! Weight checkpoints: flat CSV tensor dumps plus a manifest carrying the
//! shapes, the seed, and a hash of the training configuration.

use std::path::Path;

use ndarray::{Array1, Array2};
use sha2::{Digest, Sha256};

use crate::error::{RaincastError, Result};

use super::train::TrainConfig;
use super::{DenseParams, LstmParams, LstmRegressor};

fn config_hash(cfg: &TrainConfig) -> String {
    let digest = Sha256::digest(cfg.summary().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn write_tensor(path: &Path, values: impl Iterator<Item = f64>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for v in values {
        writer.write_record([v.to_string()])?;
    }
    writer.flush()?;
    Ok(())
}

fn read_tensor(path: &Path, expected_len: usize) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
    let mut out = Vec::with_capacity(expected_len);
    for record in reader.records() {
        let record = record?;
        let cell = record.get(0).unwrap_or_default();
        out.push(cell.parse::<f64>().map_err(|e| {
            RaincastError::Structure(format!("bad tensor value `{cell}`: {e}"))
        })?);
    }
    if out.len() != expected_len {
        return Err(RaincastError::Shape {
            expected: format!("{expected_len} values in {}", path.display()),
            got: format!("{} values", out.len()),
        });
    }
    Ok(out)
}

/// Write the model weights and manifest into `dir`.
pub fn save_checkpoint(model: &LstmRegressor, cfg: &TrainConfig, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let manifest = format!(
        "hidden = {}\ninput_dim = {}\ninput_window = {}\ndropout_rate = {}\nseed = {}\nconfig_hash = {}\n",
        model.lstm.hidden,
        model.lstm.input_dim,
        model.input_window,
        model.dropout_rate,
        cfg.seed,
        config_hash(cfg),
    );
    std::fs::write(dir.join("manifest.txt"), manifest)?;
    write_tensor(&dir.join("w_x.csv"), model.lstm.w_x.iter().copied())?;
    write_tensor(&dir.join("w_h.csv"), model.lstm.w_h.iter().copied())?;
    write_tensor(&dir.join("bias.csv"), model.lstm.bias.iter().copied())?;
    write_tensor(
        &dir.join("dense.csv"),
        model.dense.w.iter().copied().chain(std::iter::once(model.dense.b)),
    )?;
    Ok(())
}

/// Load a checkpoint written by [`save_checkpoint`]; when `cfg` is given,
/// its hash is verified against the manifest.
pub fn load_checkpoint(dir: impl AsRef<Path>, cfg: Option<&TrainConfig>) -> Result<LstmRegressor> {
    let dir = dir.as_ref();
    let manifest = std::fs::read_to_string(dir.join("manifest.txt"))?;
    let mut hidden = None;
    let mut input_dim = None;
    let mut input_window = None;
    let mut dropout_rate = None;
    let mut stored_hash = None;
    for line in manifest.lines() {
        let Some((key, value)) = line.split_once('=') else {
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "hidden" => hidden = value.parse::<usize>().ok(),
            "input_dim" => input_dim = value.parse::<usize>().ok(),
            "input_window" => input_window = value.parse::<usize>().ok(),
            "dropout_rate" => dropout_rate = value.parse::<f64>().ok(),
            "config_hash" => stored_hash = Some(value.to_string()),
            _ => {}
        }
    }
    let bad = |what: &str| RaincastError::Structure(format!("manifest missing {what}"));
    let hidden = hidden.ok_or_else(|| bad("hidden"))?;
    let input_dim = input_dim.ok_or_else(|| bad("input_dim"))?;
    let input_window = input_window.ok_or_else(|| bad("input_window"))?;
    let dropout_rate = dropout_rate.ok_or_else(|| bad("dropout_rate"))?;

    if let (Some(cfg), Some(stored)) = (cfg, stored_hash) {
        let expected = config_hash(cfg);
        if stored != expected {
            return Err(RaincastError::Structure(format!(
                "config hash mismatch: checkpoint {stored}, requested {expected}"
            )));
        }
    }

    let w_x = read_tensor(&dir.join("w_x.csv"), 4 * hidden * input_dim)?;
    let w_h = read_tensor(&dir.join("w_h.csv"), 4 * hidden * hidden)?;
    let bias = read_tensor(&dir.join("bias.csv"), 4 * hidden)?;
    let dense = read_tensor(&dir.join("dense.csv"), hidden + 1)?;

    Ok(LstmRegressor {
        lstm: LstmParams {
            w_x: Array2::from_shape_vec((4 * hidden, input_dim), w_x)
                .expect("length checked"),
            w_h: Array2::from_shape_vec((4 * hidden, hidden), w_h).expect("length checked"),
            bias: Array1::from_vec(bias),
            hidden,
            input_dim,
        },
        dense: DenseParams {
            w: Array1::from_vec(dense[..hidden].to_vec()),
            b: dense[hidden],
        },
        dropout_rate,
        input_window,
    })
}

/// Write the per-epoch loss history as `epoch,loss`.
pub fn write_loss_history(path: impl AsRef<Path>, history: &[f64]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    writer.write_record(["epoch", "loss"])?;
    for (epoch, loss) in history.iter().enumerate() {
        writer.write_record([epoch.to_string(), loss.to_string()])?;
    }
    writer.flush()?;
    Ok(())
}
