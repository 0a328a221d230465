//! Parameters on disk: `manifest.json` plus one raw little-endian `f64` file
//! per weight matrix and bias vector.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mlp::{Layer, MlpParams};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerFiles {
    pub rows: usize,
    pub cols: usize,
    pub weights: String,
    pub bias: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub sizes: Vec<usize>,
    pub seed: u64,
    /// Free-form training settings echoed for provenance.
    pub hyperparameters: serde_json::Value,
    pub layers: Vec<LayerFiles>,
}

fn write_f64s(path: &Path, values: &[f64]) -> Result<()> {
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read_f64s(path: &Path, expected: usize) -> Result<Vec<f64>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() != expected * 8 {
        return Err(Error::InvalidInput(format!(
            "{}: expected {} values, found {} bytes",
            path.display(),
            expected,
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

pub fn save_checkpoint(dir: &Path, params: &MlpParams, seed: u64, hyperparameters: serde_json::Value) -> Result<CheckpointManifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut layers = Vec::new();
    for (k, l) in params.layers().iter().enumerate() {
        let files = LayerFiles {
            rows: l.weights.rows(),
            cols: l.weights.cols(),
            weights: format!("layer{k}_weights.f64"),
            bias: format!("layer{k}_bias.f64"),
        };
        write_f64s(&dir.join(&files.weights), l.weights.as_slice())?;
        write_f64s(&dir.join(&files.bias), &l.bias)?;
        layers.push(files);
    }
    let manifest = CheckpointManifest {
        sizes: params.sizes().to_vec(),
        seed,
        hyperparameters,
        layers,
    };
    let path = dir.join(MANIFEST);
    fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

pub fn load_checkpoint(dir: &Path) -> Result<(MlpParams, CheckpointManifest)> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: CheckpointManifest = serde_json::from_str(&text)?;
    let mut layers = Vec::new();
    for f in &manifest.layers {
        let w = read_f64s(&dir.join(&f.weights), f.rows * f.cols)?;
        let bias = read_f64s(&dir.join(&f.bias), f.rows)?;
        layers.push(Layer {
            weights: Matrix::from_vec(f.rows, f.cols, w)?,
            bias,
        });
    }
    let params = MlpParams::new(layers)?;
    if params.sizes() != manifest.sizes.as_slice() {
        return Err(Error::InvalidInput("checkpoint layer files disagree with the manifest sizes".into()));
    }
    Ok((params, manifest))
}
