//! Self-describing model checkpoints.
//!
//! A checkpoint is a single JSON document holding the model configuration and
//! every parameter tensor with its name, shape, and row-major 64-bit values.
//! JSON float serialization here round-trips f64 exactly, so a save/load
//! cycle reproduces the model bit for bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FourierGnnModel, ModelConfig};

pub const CHECKPOINT_FORMAT: &str = "fouriergnn-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct TensorRecord {
    name: String,
    shape: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointFile {
    format: String,
    version: u32,
    config: ModelConfig,
    tensors: Vec<TensorRecord>,
}

fn tensor_shape(model: &FourierGnnModel, name: &str, len: usize) -> Vec<usize> {
    let cfg = &model.config;
    let d = cfg.embed_dim;
    match name {
        "embedding" => vec![d],
        n if n.starts_with("fgo.") && (n.ends_with(".s_re") || n.ends_with(".s_im")) => {
            vec![d, d]
        }
        n if n.starts_with("fgo.") => vec![d],
        "head.time_reduce" => vec![cfg.lookback, cfg.reduced_len],
        "head.w1" => vec![cfg.reduced_len * d, cfg.d_ffn1],
        "head.b1" => vec![cfg.d_ffn1],
        "head.w2" => vec![cfg.d_ffn1, cfg.d_ffn2],
        "head.b2" => vec![cfg.d_ffn2],
        "head.w3" => vec![cfg.d_ffn2, cfg.horizon],
        "head.b3" => vec![cfg.horizon],
        _ => vec![len],
    }
}

/// Serialize a model to a checkpoint file.
pub fn save(model: &FourierGnnModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let tensors = model
        .tensor_views()
        .into_iter()
        .map(|(name, data)| {
            let shape = tensor_shape(model, &name, data.len());
            TensorRecord {
                name,
                shape,
                data: data.to_vec(),
            }
        })
        .collect();
    let file = CheckpointFile {
        format: CHECKPOINT_FORMAT.to_string(),
        version: CHECKPOINT_VERSION,
        config: model.config.clone(),
        tensors,
    };
    let json = serde_json::to_string(&file).map_err(|e| Error::Checkpoint {
        message: e.to_string(),
    })?;
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(path.display().to_string(), &e))?;
        }
    }
    fs::write(path, json).map_err(|e| Error::io(path.display().to_string(), &e))
}

/// Load a checkpoint back into a model.
pub fn load(path: impl AsRef<Path>) -> Result<FourierGnnModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), &e))?;
    let file: CheckpointFile = serde_json::from_str(&text).map_err(|e| Error::Checkpoint {
        message: e.to_string(),
    })?;
    if file.format != CHECKPOINT_FORMAT {
        return Err(Error::Checkpoint {
            message: format!("unknown format '{}'", file.format),
        });
    }
    if file.version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint {
            message: format!("unsupported version {}", file.version),
        });
    }
    file.config.validate()?;

    // Start from a structurally-correct model and fill tensors by name.
    let mut model = FourierGnnModel::init(file.config.clone(), 0)?;
    let mut filled = 0usize;
    {
        let mut views = model.tensor_views_mut();
        for record in &file.tensors {
            let Some((_, slot)) = views.iter_mut().find(|(n, _)| *n == record.name) else {
                return Err(Error::Checkpoint {
                    message: format!("unexpected tensor '{}'", record.name),
                });
            };
            let expected: usize = record.shape.iter().product();
            if expected != slot.len() || record.data.len() != slot.len() {
                return Err(Error::Checkpoint {
                    message: format!(
                        "tensor '{}' has {} values, expected {}",
                        record.name,
                        record.data.len(),
                        slot.len()
                    ),
                });
            }
            if !record.data.iter().all(|v| v.is_finite()) {
                return Err(Error::non_finite(format!("tensor '{}'", record.name)));
            }
            slot.copy_from_slice(&record.data);
            filled += 1;
        }
        if filled != views.len() {
            return Err(Error::Checkpoint {
                message: format!("{} of {} tensors present", filled, views.len()),
            });
        }
    }
    Ok(model)
}
