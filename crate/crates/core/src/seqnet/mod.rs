//! Small transformer encoder for per-point sequence regression:
//! `(x, y, z, u)` in, `(curvature, tangent)` out.

mod network;
mod params;
mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::DataError;

pub use network::{backward, encoder_forward, mse_loss, positional_encoding, ForwardCache, LayerCache, NormCache};
pub use params::{LayerParams, ModelParameters, NamedTensor};
pub use train::{
    predict_curve_properties, read_loss_csv, sequence_matrices, train, write_loss_csv, CurvePrediction, EpochLoss,
    TrainOutcome, TrainedModel,
};

#[derive(Debug, Error)]
pub enum SeqNetError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("training diverged at epoch {epoch}")]
    Divergence { epoch: usize },
    #[error("malformed model: {0}")]
    Format(String),
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub d_model: usize,
    pub n_heads: usize,
    pub n_layers: usize,
    pub d_ff: usize,
    pub in_channels: usize,
    pub out_channels: usize,
    pub seq_len: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { d_model: 32, n_heads: 2, n_layers: 2, d_ff: 64, in_channels: 4, out_channels: 4, seq_len: 21 }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), SeqNetError> {
        let dims = [self.d_model, self.n_heads, self.n_layers, self.d_ff, self.in_channels, self.out_channels, self.seq_len];
        if dims.iter().any(|&d| d == 0) {
            return Err(SeqNetError::Config("all dimensions must be at least 1".into()));
        }
        if self.d_model % self.n_heads != 0 {
            return Err(SeqNetError::Config(format!(
                "d_model {} is not divisible by n_heads {}",
                self.d_model, self.n_heads
            )));
        }
        if self.in_channels != 4 || self.out_channels != 4 {
            return Err(SeqNetError::Config("the model maps 4 channels to 4 channels".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    #[default]
    Adam,
    Sgd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub optimizer: Optimizer,
    /// Train once per held-out fold instead of only holding out the last.
    pub cross_validate: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 32,
            epochs: 100,
            learning_rate: 1e-3,
            seed: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            optimizer: Optimizer::Adam,
            cross_validate: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), SeqNetError> {
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(SeqNetError::Config("batch_size and epochs must be at least 1".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(SeqNetError::Config("learning_rate must be finite and non-negative".into()));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || self.epsilon <= 0.0 {
            return Err(SeqNetError::Config("moment decay rates must lie in [0, 1) and epsilon be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(ModelConfig::default().validate().is_ok());
        assert!(ModelConfig { n_heads: 3, ..ModelConfig::default() }.validate().is_err());
        assert!(ModelConfig { n_layers: 0, ..ModelConfig::default() }.validate().is_err());
        assert!(TrainConfig { batch_size: 0, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { epochs: 0, ..TrainConfig::default() }.validate().is_err());
    }
}
