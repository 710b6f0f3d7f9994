//! Run configuration: one TOML file with dataset, model, training, and output
//! sections. Every CLI flag is an override of a config key. Unknown keys are
//! rejected; missing keys fall back to documented defaults (or a named
//! dataset preset), and the effective configuration can be echoed back.

use std::fmt;
use std::path::Path;

use serde::Deserialize;

use crate::data::SplitSpec;
use crate::error::{Error, Result};
use crate::model::{Ablation, ModelConfig};
use crate::spectral::{ActivationKind, DftMode};
use crate::train::TrainConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSettings {
    pub path: String,
    pub transpose: bool,
    pub split: SplitSpec,
    pub stride: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSettings {
    pub lookback: usize,
    pub horizon: usize,
    pub embed_dim: usize,
    pub n_layers: usize,
    /// None means no time reduction (l = T).
    pub reduced_len: Option<usize>,
    pub d_ffn1: usize,
    pub d_ffn2: usize,
    pub dft_mode: DftMode,
    pub activation: ActivationKind,
    pub recursive_activation: bool,
    pub leaky_slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    pub dir: String,
    pub checkpoint_name: String,
}

/// Fully-resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dataset: DatasetSettings,
    pub model: ModelSettings,
    pub training: TrainConfig,
    pub output: OutputSettings,
}

impl RunConfig {
    /// Instantiate the architecture config once the variable count is known.
    pub fn to_model_config(&self, n_vars: usize) -> ModelConfig {
        ModelConfig {
            n_vars,
            lookback: self.model.lookback,
            horizon: self.model.horizon,
            embed_dim: self.model.embed_dim,
            n_layers: self.model.n_layers,
            reduced_len: self.model.reduced_len.unwrap_or(self.model.lookback),
            d_ffn1: self.model.d_ffn1,
            d_ffn2: self.model.d_ffn2,
            dft_mode: self.model.dft_mode,
            activation: self.model.activation,
            recursive_activation: self.model.recursive_activation,
            leaky_slope: self.model.leaky_slope,
            ablation: self.training.ablation,
        }
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[dataset]")?;
        writeln!(f, "path = {:?}", self.dataset.path)?;
        writeln!(f, "transpose = {}", self.dataset.transpose)?;
        writeln!(
            f,
            "split = [{}, {}, {}]",
            self.dataset.split.train, self.dataset.split.val, self.dataset.split.test
        )?;
        writeln!(f, "stride = {}", self.dataset.stride)?;
        writeln!(f, "[model]")?;
        writeln!(f, "lookback = {}", self.model.lookback)?;
        writeln!(f, "horizon = {}", self.model.horizon)?;
        writeln!(f, "embed_dim = {}", self.model.embed_dim)?;
        writeln!(f, "n_layers = {}", self.model.n_layers)?;
        match self.model.reduced_len {
            Some(l) => writeln!(f, "reduced_len = {l}")?,
            None => writeln!(f, "reduced_len = none (l = T)")?,
        }
        writeln!(f, "d_ffn1 = {}", self.model.d_ffn1)?;
        writeln!(f, "d_ffn2 = {}", self.model.d_ffn2)?;
        writeln!(
            f,
            "dft_mode = {}",
            match self.model.dft_mode {
                DftMode::Flat1d => "flat_1d",
                DftMode::Planar2d => "planar_2d",
            }
        )?;
        writeln!(
            f,
            "activation = {}",
            match self.model.activation {
                ActivationKind::Identity => "identity",
                ActivationKind::SplitRelu => "split_relu",
                ActivationKind::LeakyRelu(_) => "leaky_relu",
            }
        )?;
        writeln!(
            f,
            "recursive_activation = {}",
            self.model.recursive_activation
        )?;
        writeln!(f, "leaky_slope = {}", self.model.leaky_slope)?;
        writeln!(f, "[training]")?;
        writeln!(f, "learning_rate = {:e}", self.training.learning_rate)?;
        writeln!(f, "epochs = {}", self.training.epochs)?;
        writeln!(f, "batch_size = {}", self.training.batch_size)?;
        writeln!(f, "rmsprop_decay = {}", self.training.rmsprop_decay)?;
        writeln!(f, "rmsprop_eps = {:e}", self.training.rmsprop_eps)?;
        writeln!(f, "seed = {}", self.training.seed)?;
        writeln!(f, "ablation = {}", self.training.ablation.label())?;
        writeln!(f, "[output]")?;
        writeln!(f, "dir = {:?}", self.output.dir)?;
        write!(f, "checkpoint_name = {:?}", self.output.checkpoint_name)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dataset: Option<RawDataset>,
    model: Option<RawModel>,
    training: Option<RawTraining>,
    output: Option<RawOutput>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataset {
    path: Option<String>,
    transpose: Option<bool>,
    split: Option<Vec<f64>>,
    stride: Option<i64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    preset: Option<String>,
    lookback: Option<i64>,
    horizon: Option<i64>,
    embed_dim: Option<i64>,
    n_layers: Option<i64>,
    reduced_len: Option<i64>,
    d_ffn1: Option<i64>,
    d_ffn2: Option<i64>,
    dft_mode: Option<String>,
    activation: Option<String>,
    recursive_activation: Option<bool>,
    leaky_slope: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTraining {
    learning_rate: Option<f64>,
    epochs: Option<i64>,
    batch_size: Option<i64>,
    rmsprop_decay: Option<f64>,
    rmsprop_eps: Option<f64>,
    seed: Option<i64>,
    ablation: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
    checkpoint_name: Option<String>,
}

/// Published per-dataset hyperparameter presets.
struct Preset {
    embed_dim: usize,
    batch_size: usize,
    reduced_len: Option<usize>,
    d_ffn1: usize,
    d_ffn2: usize,
}

fn preset_for(name: &str) -> Result<Preset> {
    let preset = match name {
        "covid19" | "covid" => Preset {
            embed_dim: 256,
            batch_size: 4,
            reduced_len: Some(8),
            d_ffn1: 256,
            d_ffn2: 512,
        },
        "solar" => Preset {
            embed_dim: 128,
            batch_size: 2,
            reduced_len: Some(6),
            d_ffn1: 64,
            d_ffn2: 256,
        },
        "wiki" => Preset {
            embed_dim: 128,
            batch_size: 2,
            reduced_len: Some(2),
            d_ffn1: 64,
            d_ffn2: 256,
        },
        "traffic" => Preset {
            embed_dim: 128,
            batch_size: 2,
            reduced_len: Some(2),
            d_ffn1: 64,
            d_ffn2: 256,
        },
        "ecg" => Preset {
            embed_dim: 128,
            batch_size: 32,
            reduced_len: None,
            d_ffn1: 64,
            d_ffn2: 256,
        },
        "electricity" => Preset {
            embed_dim: 128,
            batch_size: 32,
            reduced_len: Some(4),
            d_ffn1: 64,
            d_ffn2: 256,
        },
        "metr-la" | "metr_la" => Preset {
            embed_dim: 128,
            batch_size: 32,
            reduced_len: Some(4),
            d_ffn1: 64,
            d_ffn2: 256,
        },
        other => {
            return Err(Error::config(
                "model.preset",
                format!("unknown preset '{other}'"),
            ))
        }
    };
    Ok(preset)
}

fn positive(key: &str, value: i64) -> Result<usize> {
    if value < 1 {
        return Err(Error::config(key, format!("must be >= 1, got {value}")));
    }
    Ok(value as usize)
}

fn non_negative(key: &str, value: i64) -> Result<u64> {
    if value < 0 {
        return Err(Error::config(key, format!("must be >= 0, got {value}")));
    }
    Ok(value as u64)
}

/// Parse and validate a config file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), &e))?;
    parse_config_str(&text)
}

/// Parse and validate config text.
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| Error::config("config", e.to_string()))?;

    let dataset = raw.dataset.unwrap_or_default();
    let model = raw.model.unwrap_or_default();
    let training = raw.training.unwrap_or_default();
    let output = raw.output.unwrap_or_default();

    let path = dataset
        .path
        .ok_or_else(|| Error::config("dataset.path", "required key is missing"))?;
    let split = match dataset.split {
        Some(ratios) => {
            if ratios.len() != 3 {
                return Err(Error::config(
                    "dataset.split",
                    "expected [train, val, test]",
                ));
            }
            SplitSpec::new(ratios[0], ratios[1], ratios[2])
                .map_err(|e| Error::config("dataset.split", e.to_string()))?
        }
        None => SplitSpec {
            train: 0.7,
            val: 0.2,
            test: 0.1,
        },
    };
    let dataset = DatasetSettings {
        path,
        transpose: dataset.transpose.unwrap_or(false),
        split,
        stride: dataset
            .stride
            .map(|v| positive("dataset.stride", v))
            .transpose()?
            .unwrap_or(1),
    };

    let preset = model.preset.as_deref().map(preset_for).transpose()?;
    let lookback = model
        .lookback
        .map(|v| positive("model.lookback", v))
        .transpose()?
        .unwrap_or(12);
    let horizon = model
        .horizon
        .map(|v| positive("model.horizon", v))
        .transpose()?
        .unwrap_or(12);
    let embed_dim = model
        .embed_dim
        .map(|v| positive("model.embed_dim", v))
        .transpose()?
        .or(preset.as_ref().map(|p| p.embed_dim))
        .unwrap_or(128);
    let n_layers = model
        .n_layers
        .map(|v| positive("model.n_layers", v))
        .transpose()?
        .unwrap_or(3);
    let reduced_len = match model.reduced_len {
        Some(v) => Some(positive("model.reduced_len", v)?),
        None => preset.as_ref().and_then(|p| p.reduced_len),
    };
    if let Some(l) = reduced_len {
        if l > lookback {
            return Err(Error::config(
                "model.reduced_len",
                format!("l = {l} exceeds lookback T = {lookback}"),
            ));
        }
    }
    let d_ffn1 = model
        .d_ffn1
        .map(|v| positive("model.d_ffn1", v))
        .transpose()?
        .or(preset.as_ref().map(|p| p.d_ffn1))
        .unwrap_or(64);
    let d_ffn2 = model
        .d_ffn2
        .map(|v| positive("model.d_ffn2", v))
        .transpose()?
        .or(preset.as_ref().map(|p| p.d_ffn2))
        .unwrap_or(256);
    let dft_mode = match model.dft_mode.as_deref() {
        None | Some("flat_1d") => DftMode::Flat1d,
        Some("planar_2d") => DftMode::Planar2d,
        Some(other) => {
            return Err(Error::config(
                "model.dft_mode",
                format!("expected flat_1d or planar_2d, got '{other}'"),
            ))
        }
    };
    let leaky_slope = model.leaky_slope.unwrap_or(0.01);
    if !(leaky_slope > 0.0 && leaky_slope < 1.0) {
        return Err(Error::config(
            "model.leaky_slope",
            format!("must be in (0, 1), got {leaky_slope}"),
        ));
    }
    let activation = match model.activation.as_deref() {
        None | Some("split_relu") => ActivationKind::SplitRelu,
        Some("identity") => ActivationKind::Identity,
        Some("leaky_relu") => ActivationKind::LeakyRelu(leaky_slope),
        Some(other) => {
            return Err(Error::config(
                "model.activation",
                format!("expected split_relu, identity, or leaky_relu, got '{other}'"),
            ))
        }
    };
    let model = ModelSettings {
        lookback,
        horizon,
        embed_dim,
        n_layers,
        reduced_len,
        d_ffn1,
        d_ffn2,
        dft_mode,
        activation,
        recursive_activation: model.recursive_activation.unwrap_or(false),
        leaky_slope,
    };

    let ablation = match training.ablation.as_deref() {
        None | Some("full") => Ablation::Full,
        Some("no_embedding") => Ablation::NoEmbedding,
        Some("no_dynamic_fgo") => Ablation::NoDynamicFgo,
        Some("no_residual") => Ablation::NoResidual,
        Some("no_summation") => Ablation::NoSummation,
        Some(other) => {
            return Err(Error::config(
                "training.ablation",
                format!("unknown ablation '{other}'"),
            ))
        }
    };
    let learning_rate = training.learning_rate.unwrap_or(1e-5);
    if learning_rate < 0.0 || !learning_rate.is_finite() {
        return Err(Error::config(
            "training.learning_rate",
            format!("must be finite and >= 0, got {learning_rate}"),
        ));
    }
    let rmsprop_decay = training.rmsprop_decay.unwrap_or(0.9);
    if !(rmsprop_decay > 0.0 && rmsprop_decay < 1.0) {
        return Err(Error::config(
            "training.rmsprop_decay",
            format!("must be in (0, 1), got {rmsprop_decay}"),
        ));
    }
    let rmsprop_eps = training.rmsprop_eps.unwrap_or(1e-8);
    if rmsprop_eps <= 0.0 {
        return Err(Error::config(
            "training.rmsprop_eps",
            format!("must be positive, got {rmsprop_eps}"),
        ));
    }
    let training = TrainConfig {
        learning_rate,
        epochs: training
            .epochs
            .map(|v| positive("training.epochs", v))
            .transpose()?
            .unwrap_or(100),
        batch_size: training
            .batch_size
            .map(|v| positive("training.batch_size", v))
            .transpose()?
            .or(preset.as_ref().map(|p| p.batch_size))
            .unwrap_or(4),
        rmsprop_decay,
        rmsprop_eps,
        seed: training
            .seed
            .map(|v| non_negative("training.seed", v))
            .transpose()?
            .unwrap_or(42),
        ablation,
    };

    let output = OutputSettings {
        dir: output.dir.unwrap_or_else(|| "runs/default".to_string()),
        checkpoint_name: output
            .checkpoint_name
            .unwrap_or_else(|| "model".to_string()),
    };

    Ok(RunConfig {
        dataset,
        model,
        training,
        output,
    })
}
