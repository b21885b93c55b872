use std::collections::BTreeMap;
use std::io::{Read, Write};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::{batch_gradients, encoder_forward, mse_loss};
use super::params::{ModelParameters, NamedTensor};
use super::{ModelConfig, Optimizer, SeqNetError, TrainConfig};
use crate::data::{normalize, FoldSpec, NormStats, PointRecord, SequenceDataset};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train_loss: f64,
    /// `None` when the held-out fold is empty.
    pub val_loss: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the run that held out the last fold.
    pub params: ModelParameters,
    /// Statistics of that run's training curves.
    pub stats: NormStats,
    pub history: Vec<EpochLoss>,
    /// Final validation loss for each held-out fold that was trained.
    pub fold_validation: Vec<(usize, f64)>,
    pub test_fold: usize,
}

/// Feature and target matrices (`seq_len x 4` each) for one sequence.
pub fn sequence_matrices(seq: &[PointRecord]) -> (DMatrix<f64>, DMatrix<f64>) {
    let x = DMatrix::from_fn(seq.len(), 4, |r, c| seq[r].features()[c]);
    let y = DMatrix::from_fn(seq.len(), 4, |r, c| seq[r].targets()[c]);
    (x, y)
}

struct Adam {
    m: ModelParameters,
    v: ModelParameters,
    step: i32,
}

impl Adam {
    fn new(params: &ModelParameters) -> Self {
        Self { m: params.zeros_like(), v: params.zeros_like(), step: 0 }
    }

    fn update(&mut self, params: &mut ModelParameters, grads: &ModelParameters, cfg: &TrainConfig) {
        self.step += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.step);
        let c2 = 1.0 - cfg.beta2.powi(self.step);
        let tensors = params.tensors_mut().into_iter().zip(grads.tensors());
        let moments = self.m.tensors_mut().into_iter().zip(self.v.tensors_mut());
        for (((_, p), (_, g)), ((_, m), (_, v))) in tensors.zip(moments) {
            for i in 0..p.len() {
                m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
                v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
                p[i] -= cfg.learning_rate * (m[i] / c1) / ((v[i] / c2).sqrt() + cfg.epsilon);
            }
        }
    }
}

fn sgd_update(params: &mut ModelParameters, grads: &ModelParameters, lr: f64) {
    for ((_, p), (_, g)) in params.tensors_mut().into_iter().zip(grads.tensors()) {
        p.zip_apply(g, |pv, gv| *pv -= lr * gv);
    }
}

fn mean_loss(
    params: &ModelParameters,
    config: &ModelConfig,
    samples: &[(DMatrix<f64>, DMatrix<f64>)],
) -> Result<Option<f64>, SeqNetError> {
    if samples.is_empty() {
        return Ok(None);
    }
    let mut total = 0.0;
    for (x, y) in samples {
        total += mse_loss(&encoder_forward(params, config, x)?.0, y)?;
    }
    Ok(Some(total / samples.len() as f64))
}

struct FoldRun {
    params: ModelParameters,
    stats: NormStats,
    history: Vec<EpochLoss>,
}

fn train_fold(
    dataset: &SequenceDataset,
    folds: &FoldSpec,
    held_out: usize,
    config: &ModelConfig,
    cfg: &TrainConfig,
) -> Result<FoldRun, SeqNetError> {
    let train_ids = folds.training_ids(held_out);
    let (norm, stats) = normalize(dataset, &train_ids)?;
    let samples = |ids: &[usize]| -> Vec<(DMatrix<f64>, DMatrix<f64>)> {
        ids.iter().map(|&id| sequence_matrices(norm.sequence(id).expect("fold ids validated"))).collect()
    };
    let train_set = samples(&train_ids);
    let val_set = samples(&folds.folds[held_out]);

    let mut params = ModelParameters::init(config, cfg.seed);
    let mut adam = Adam::new(&params);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut seq_losses = vec![0.0; train_set.len()];
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<_> = chunk.iter().map(|&i| train_set[i].clone()).collect();
            let (losses, grads) = batch_gradients(&params, config, &batch)?;
            for (&i, l) in chunk.iter().zip(losses) {
                seq_losses[i] = l;
            }
            if !grads.is_finite() {
                return Err(SeqNetError::Divergence { epoch });
            }
            match cfg.optimizer {
                Optimizer::Adam => adam.update(&mut params, &grads, cfg),
                Optimizer::Sgd => sgd_update(&mut params, &grads, cfg.learning_rate),
            }
        }
        // Fixed summation order keeps the value independent of the shuffle.
        let train_loss = seq_losses.iter().sum::<f64>() / seq_losses.len() as f64;
        if !train_loss.is_finite() || !params.is_finite() {
            return Err(SeqNetError::Divergence { epoch });
        }
        let val_loss = mean_loss(&params, config, &val_set)?;
        if val_loss.is_some_and(|v| !v.is_finite()) {
            return Err(SeqNetError::Divergence { epoch });
        }
        history.push(EpochLoss { epoch, train_loss, val_loss });
    }
    Ok(FoldRun { params, stats, history })
}

/// Train on the curves outside the last fold, which is kept as the test
/// fold. With `cross_validate` every fold is held out in turn and its final
/// validation loss recorded. `dataset` may be raw or normalized; statistics
/// are always recomputed from the training curves of each run.
pub fn train(
    dataset: &SequenceDataset,
    folds: &FoldSpec,
    config: &ModelConfig,
    cfg: &TrainConfig,
) -> Result<TrainOutcome, SeqNetError> {
    config.validate()?;
    cfg.validate()?;
    folds.validate_against(dataset)?;
    if folds.folds.len() < 2 {
        return Err(SeqNetError::Config("at least two folds are required".into()));
    }
    if dataset.seq_len() != config.seq_len {
        return Err(SeqNetError::Shape(format!(
            "sequences have {} points, model expects {}",
            dataset.seq_len(),
            config.seq_len
        )));
    }
    let test_fold = folds.folds.len() - 1;
    let held_out: Vec<usize> = if cfg.cross_validate { (0..folds.folds.len()).collect() } else { vec![test_fold] };
    let mut fold_validation = Vec::new();
    let mut last = None;
    for k in held_out {
        let run = train_fold(dataset, folds, k, config, cfg)?;
        if let Some(v) = run.history.last().and_then(|e| e.val_loss) {
            fold_validation.push((k, v));
        }
        last = Some(run);
    }
    let run = last.expect("at least one run");
    Ok(TrainOutcome { params: run.params, stats: run.stats, history: run.history, fold_validation, test_fold })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePrediction {
    pub curvature: f64,
    pub tangent: [f64; 3],
}

/// Predict curvature and unit tangent at each `(x, y, z, u)` point.
pub fn predict_curve_properties(
    params: &ModelParameters,
    config: &ModelConfig,
    stats: &NormStats,
    points: &[[f64; 4]],
) -> Result<Vec<CurvePrediction>, SeqNetError> {
    if points.len() != config.seq_len {
        return Err(SeqNetError::Shape(format!("{} points, model expects {}", points.len(), config.seq_len)));
    }
    let x = DMatrix::from_fn(points.len(), 4, |r, c| stats.normalize_features(points[r])[c]);
    let (out, _) = encoder_forward(params, config, &x)?;
    out.row_iter()
        .map(|row| {
            let t = stats.denormalize_targets([row[0], row[1], row[2], row[3]]);
            let norm = (t[1] * t[1] + t[2] * t[2] + t[3] * t[3]).sqrt();
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(SeqNetError::Numeric("predicted tangent has zero length".into()));
            }
            Ok(CurvePrediction { curvature: t[0].max(0.0), tangent: [t[1] / norm, t[2] / norm, t[3] / norm] })
        })
        .collect()
}

/// Serialized model: configuration, normalization statistics and named
/// row-major weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainedModel {
    pub config: ModelConfig,
    pub stats: NormStats,
    pub weights: BTreeMap<String, NamedTensor>,
}

impl TrainedModel {
    pub fn new(config: ModelConfig, stats: NormStats, params: &ModelParameters) -> Self {
        Self { config, stats, weights: params.to_named() }
    }

    pub fn parameters(&self) -> Result<ModelParameters, SeqNetError> {
        self.config.validate()?;
        ModelParameters::from_named(&self.config, &self.weights)
    }
}

const LOSS_HEADER: [&str; 3] = ["epoch", "train_loss", "val_loss"];

pub fn write_loss_csv<W: Write>(history: &[EpochLoss], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LOSS_HEADER)?;
    for e in history {
        let val = e.val_loss.map(|v| format!("{v:.16e}")).unwrap_or_default();
        w.write_record([e.epoch.to_string(), format!("{:.16e}", e.train_loss), val])?;
    }
    w.flush()
}

pub fn read_loss_csv<R: Read>(input: R) -> Result<Vec<EpochLoss>, SeqNetError> {
    let mut rdr = csv::Reader::from_reader(input);
    let bad = |e: String| SeqNetError::Format(format!("loss history: {e}"));
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != LOSS_HEADER {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    rdr.records()
        .map(|row| {
            let row = row.map_err(|e| bad(e.to_string()))?;
            if row.len() != 3 {
                return Err(bad(format!("expected 3 fields, found {}", row.len())));
            }
            let val = if row[2].is_empty() { None } else { Some(row[2].parse().map_err(|e| bad(format!("{e}")))?) };
            Ok(EpochLoss {
                epoch: row[0].parse().map_err(|e| bad(format!("{e}")))?,
                train_loss: row[1].parse().map_err(|e| bad(format!("{e}")))?,
                val_loss: val,
            })
        })
        .collect()
}
