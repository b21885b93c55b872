use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ModelConfig, SeqNetError};

/// Weights of one post-norm encoder layer. Row vectors hold biases and
/// normalization gains/offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub wq: DMatrix<f64>,
    pub wk: DMatrix<f64>,
    pub wv: DMatrix<f64>,
    pub wo: DMatrix<f64>,
    pub bo: DMatrix<f64>,
    pub ln1_gain: DMatrix<f64>,
    pub ln1_bias: DMatrix<f64>,
    pub w1: DMatrix<f64>,
    pub b1: DMatrix<f64>,
    pub w2: DMatrix<f64>,
    pub b2: DMatrix<f64>,
    pub ln2_gain: DMatrix<f64>,
    pub ln2_bias: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParameters {
    pub w_in: DMatrix<f64>,
    pub b_in: DMatrix<f64>,
    pub layers: Vec<LayerParams>,
    pub w_out: DMatrix<f64>,
    pub b_out: DMatrix<f64>,
}

fn glorot(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-limit..limit))
}

impl ModelParameters {
    /// Glorot-uniform weights, zero biases, unit gains.
    pub fn init(config: &ModelConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (d, f) = (config.d_model, config.d_ff);
        let w_in = glorot(&mut rng, config.in_channels, d);
        let layers = (0..config.n_layers)
            .map(|_| LayerParams {
                wq: glorot(&mut rng, d, d),
                wk: glorot(&mut rng, d, d),
                wv: glorot(&mut rng, d, d),
                wo: glorot(&mut rng, d, d),
                bo: DMatrix::zeros(1, d),
                ln1_gain: DMatrix::from_element(1, d, 1.0),
                ln1_bias: DMatrix::zeros(1, d),
                w1: glorot(&mut rng, d, f),
                b1: DMatrix::zeros(1, f),
                w2: glorot(&mut rng, f, d),
                b2: DMatrix::zeros(1, d),
                ln2_gain: DMatrix::from_element(1, d, 1.0),
                ln2_bias: DMatrix::zeros(1, d),
            })
            .collect();
        let w_out = glorot(&mut rng, d, config.out_channels);
        Self {
            w_in,
            b_in: DMatrix::zeros(1, d),
            layers,
            w_out,
            b_out: DMatrix::zeros(1, config.out_channels),
        }
    }

    /// Same shapes, all zeros.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for (_, t) in z.tensors_mut() {
            t.fill(0.0);
        }
        z
    }

    /// Named tensors in a fixed order.
    pub fn tensors(&self) -> Vec<(String, &DMatrix<f64>)> {
        let mut out = vec![("input.weight".to_string(), &self.w_in), ("input.bias".to_string(), &self.b_in)];
        for (i, l) in self.layers.iter().enumerate() {
            let p = |n: &str| format!("layers.{i}.{n}");
            out.extend([
                (p("attn.q"), &l.wq),
                (p("attn.k"), &l.wk),
                (p("attn.v"), &l.wv),
                (p("attn.out.weight"), &l.wo),
                (p("attn.out.bias"), &l.bo),
                (p("norm1.gain"), &l.ln1_gain),
                (p("norm1.bias"), &l.ln1_bias),
                (p("ff1.weight"), &l.w1),
                (p("ff1.bias"), &l.b1),
                (p("ff2.weight"), &l.w2),
                (p("ff2.bias"), &l.b2),
                (p("norm2.gain"), &l.ln2_gain),
                (p("norm2.bias"), &l.ln2_bias),
            ]);
        }
        out.push(("output.weight".to_string(), &self.w_out));
        out.push(("output.bias".to_string(), &self.b_out));
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(String, &mut DMatrix<f64>)> {
        let mut out = vec![
            ("input.weight".to_string(), &mut self.w_in),
            ("input.bias".to_string(), &mut self.b_in),
        ];
        for (i, l) in self.layers.iter_mut().enumerate() {
            let p = |n: &str| format!("layers.{i}.{n}");
            out.extend([
                (p("attn.q"), &mut l.wq),
                (p("attn.k"), &mut l.wk),
                (p("attn.v"), &mut l.wv),
                (p("attn.out.weight"), &mut l.wo),
                (p("attn.out.bias"), &mut l.bo),
                (p("norm1.gain"), &mut l.ln1_gain),
                (p("norm1.bias"), &mut l.ln1_bias),
                (p("ff1.weight"), &mut l.w1),
                (p("ff1.bias"), &mut l.b1),
                (p("ff2.weight"), &mut l.w2),
                (p("ff2.bias"), &mut l.b2),
                (p("norm2.gain"), &mut l.ln2_gain),
                (p("norm2.bias"), &mut l.ln2_bias),
            ]);
        }
        out.push(("output.weight".to_string(), &mut self.w_out));
        out.push(("output.bias".to_string(), &mut self.b_out));
        out
    }

    pub fn n_params(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.iter().all(|v| v.is_finite()))
    }

    /// Row-major flat arrays keyed by tensor name.
    pub fn to_named(&self) -> BTreeMap<String, NamedTensor> {
        self.tensors()
            .into_iter()
            .map(|(name, t)| {
                let data = (0..t.nrows()).flat_map(|r| (0..t.ncols()).map(move |c| t[(r, c)])).collect();
                (name, NamedTensor { rows: t.nrows(), cols: t.ncols(), data })
            })
            .collect()
    }

    pub fn from_named(config: &ModelConfig, named: &BTreeMap<String, NamedTensor>) -> Result<Self, SeqNetError> {
        let mut params = Self::init(config, 0);
        for (name, t) in params.tensors_mut() {
            let src = named
                .get(&name)
                .ok_or_else(|| SeqNetError::Format(format!("missing tensor {name}")))?;
            if src.rows != t.nrows() || src.cols != t.ncols() || src.data.len() != src.rows * src.cols {
                return Err(SeqNetError::Format(format!(
                    "tensor {name}: expected {}x{}, found {}x{} with {} values",
                    t.nrows(),
                    t.ncols(),
                    src.rows,
                    src.cols,
                    src.data.len()
                )));
            }
            *t = DMatrix::from_row_slice(src.rows, src.cols, &src.data);
        }
        if named.len() != params.tensors().len() {
            return Err(SeqNetError::Format("unexpected extra tensors".into()));
        }
        if !params.is_finite() {
            return Err(SeqNetError::Format("non-finite weight".into()));
        }
        Ok(params)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedTensor {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_follow_config() {
        let cfg = ModelConfig::default();
        let p = ModelParameters::init(&cfg, 1);
        assert_eq!(p.w_in.shape(), (4, 32));
        assert_eq!(p.layers.len(), 2);
        assert_eq!(p.layers[0].w1.shape(), (32, 64));
        assert_eq!(p.w_out.shape(), (32, 4));
        assert_eq!(p.tensors().len(), 2 + 2 * 13 + 2);
        let limit = (6.0f64 / 36.0).sqrt();
        assert!(p.w_in.iter().all(|v| v.abs() <= limit));
        assert!(p.b_out.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn named_round_trip() {
        let cfg = ModelConfig::default();
        let p = ModelParameters::init(&cfg, 3);
        let back = ModelParameters::from_named(&cfg, &p.to_named()).unwrap();
        assert_eq!(back, p);
        let mut named = p.to_named();
        named.remove("output.bias");
        assert!(ModelParameters::from_named(&cfg, &named).is_err());
    }
}
