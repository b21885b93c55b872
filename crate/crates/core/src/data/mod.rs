//! Curves to sequence datasets: sampling, curve-level K-fold splits,
//! per-channel standardization, CSV persistence and a synthetic corpus.

mod csv_io;
mod synth;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{GeomError, NurbsCurve};

pub use csv_io::{read_dataset_csv, write_dataset_csv, CSV_HEADER};
pub use synth::{synth_corpus, synth_corpus_with, SynthConfig};

/// Floor applied to standard deviations during normalization.
pub const STD_FLOOR: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("curve {curve_id}: {source}")]
    Sampling {
        curve_id: usize,
        #[source]
        source: GeomError,
    },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub curve_id: usize,
    pub point_index: usize,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub u: f64,
    pub curvature: f64,
    pub tangent_x: f64,
    pub tangent_y: f64,
    pub tangent_z: f64,
}

impl PointRecord {
    /// `[x, y, z, u]`.
    pub fn features(&self) -> [f64; 4] {
        [self.x, self.y, self.z, self.u]
    }

    /// `[curvature, tangent_x, tangent_y, tangent_z]`.
    pub fn targets(&self) -> [f64; 4] {
        [self.curvature, self.tangent_x, self.tangent_y, self.tangent_z]
    }

    fn scalable(&self) -> [f64; 7] {
        [
            self.x,
            self.y,
            self.z,
            self.curvature,
            self.tangent_x,
            self.tangent_y,
            self.tangent_z,
        ]
    }

    fn with_scalable(&self, v: [f64; 7]) -> Self {
        Self {
            x: v[0],
            y: v[1],
            z: v[2],
            curvature: v[3],
            tangent_x: v[4],
            tangent_y: v[5],
            tangent_z: v[6],
            ..*self
        }
    }
}

/// Per-channel mean and standard deviation, features `x, y, z` and targets
/// `curvature, tangent_x, tangent_y, tangent_z`. `u` is never scaled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub feature_mean: [f64; 3],
    pub feature_std: [f64; 3],
    pub target_mean: [f64; 4],
    pub target_std: [f64; 4],
}

impl NormStats {
    fn split(mean: [f64; 7], std: [f64; 7]) -> Self {
        Self {
            feature_mean: [mean[0], mean[1], mean[2]],
            feature_std: [std[0], std[1], std[2]],
            target_mean: [mean[3], mean[4], mean[5], mean[6]],
            target_std: [std[3], std[4], std[5], std[6]],
        }
    }

    fn mean7(&self) -> [f64; 7] {
        let (f, t) = (self.feature_mean, self.target_mean);
        [f[0], f[1], f[2], t[0], t[1], t[2], t[3]]
    }

    fn std7(&self) -> [f64; 7] {
        let (f, t) = (self.feature_std, self.target_std);
        [f[0], f[1], f[2], t[0], t[1], t[2], t[3]]
    }

    /// Statistics over the records of `curve_ids` only.
    pub fn compute(dataset: &SequenceDataset, curve_ids: &[usize]) -> Result<Self, DataError> {
        let records: Vec<&PointRecord> = dataset
            .sequences
            .iter()
            .filter(|s| s.first().is_some_and(|r| curve_ids.contains(&r.curve_id)))
            .flatten()
            .collect();
        if records.is_empty() {
            return Err(DataError::Config("training folds contain no records".into()));
        }
        let n = records.len() as f64;
        let mut mean = [0.0; 7];
        for r in &records {
            for (m, v) in mean.iter_mut().zip(r.scalable()) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = [0.0; 7];
        for r in &records {
            for ((s, v), m) in var.iter_mut().zip(r.scalable()).zip(mean) {
                *s += (v - m).powi(2);
            }
        }
        let std = var.map(|s| (s / n).sqrt().max(STD_FLOOR));
        Ok(Self::split(mean, std))
    }

    pub fn normalize_record(&self, r: &PointRecord) -> PointRecord {
        let (m, s) = (self.mean7(), self.std7());
        let v = r.scalable();
        r.with_scalable(std::array::from_fn(|k| (v[k] - m[k]) / s[k]))
    }

    pub fn denormalize_record(&self, r: &PointRecord) -> PointRecord {
        let (m, s) = (self.mean7(), self.std7());
        let v = r.scalable();
        r.with_scalable(std::array::from_fn(|k| v[k] * s[k] + m[k]))
    }

    /// Scaled `[x, y, z, u]`.
    pub fn normalize_features(&self, f: [f64; 4]) -> [f64; 4] {
        let (m, s) = (self.feature_mean, self.feature_std);
        [(f[0] - m[0]) / s[0], (f[1] - m[1]) / s[1], (f[2] - m[2]) / s[2], f[3]]
    }

    pub fn normalize_targets(&self, t: [f64; 4]) -> [f64; 4] {
        std::array::from_fn(|k| (t[k] - self.target_mean[k]) / self.target_std[k])
    }

    pub fn denormalize_targets(&self, t: [f64; 4]) -> [f64; 4] {
        std::array::from_fn(|k| t[k] * self.target_std[k] + self.target_mean[k])
    }
}

/// One ordered record sequence per curve. `stats` is set once the values
/// have been standardized.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SequenceDataset {
    pub sequences: Vec<Vec<PointRecord>>,
    pub stats: Option<NormStats>,
}

impl SequenceDataset {
    pub fn new(sequences: Vec<Vec<PointRecord>>) -> Result<Self, DataError> {
        if let Some(first) = sequences.first() {
            let len = first.len();
            if let Some(bad) = sequences.iter().find(|s| s.len() != len) {
                return Err(DataError::Config(format!(
                    "sequence for curve {} has {} records, expected {len}",
                    bad.first().map_or(0, |r| r.curve_id),
                    bad.len()
                )));
            }
        }
        Ok(Self { sequences, stats: None })
    }

    pub fn n_records(&self) -> usize {
        self.sequences.iter().map(Vec::len).sum()
    }

    pub fn seq_len(&self) -> usize {
        self.sequences.first().map_or(0, Vec::len)
    }

    pub fn curve_ids(&self) -> Vec<usize> {
        self.sequences
            .iter()
            .filter_map(|s| s.first().map(|r| r.curve_id))
            .collect()
    }

    pub fn sequence(&self, curve_id: usize) -> Option<&[PointRecord]> {
        self.sequences
            .iter()
            .find(|s| s.first().is_some_and(|r| r.curve_id == curve_id))
            .map(Vec::as_slice)
    }

    pub fn records(&self) -> impl Iterator<Item = &PointRecord> {
        self.sequences.iter().flatten()
    }

    /// Undo standardization; identity on a raw dataset.
    pub fn denormalize(&self) -> SequenceDataset {
        match &self.stats {
            None => self.clone(),
            Some(stats) => SequenceDataset {
                sequences: self
                    .sequences
                    .iter()
                    .map(|s| s.iter().map(|r| stats.denormalize_record(r)).collect())
                    .collect(),
                stats: None,
            },
        }
    }
}

/// Sample each curve at `n_segments + 1` stations. Curve ids are list
/// positions; `u` is rescaled to `[0, 1]`.
pub fn curves_to_dataset(curves: &[NurbsCurve], n_segments: usize) -> Result<SequenceDataset, DataError> {
    if curves.is_empty() {
        return Err(DataError::Config("no curves to sample".into()));
    }
    let sequences = curves
        .iter()
        .enumerate()
        .map(|(curve_id, c)| {
            let (a, b) = c.domain();
            let samples = c
                .sample(n_segments)
                .map_err(|source| DataError::Sampling { curve_id, source })?;
            Ok(samples
                .iter()
                .enumerate()
                .map(|(point_index, s)| PointRecord {
                    curve_id,
                    point_index,
                    x: s.position.x,
                    y: s.position.y,
                    z: s.position.z,
                    u: if point_index == n_segments { 1.0 } else { (s.u - a) / (b - a) },
                    curvature: s.curvature,
                    tangent_x: s.tangent.x,
                    tangent_y: s.tangent.y,
                    tangent_z: s.tangent.z,
                })
                .collect())
        })
        .collect::<Result<Vec<_>, DataError>>()?;
    SequenceDataset::new(sequences)
}

/// Disjoint curve-id folds covering the dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSpec {
    pub seed: u64,
    pub folds: Vec<Vec<usize>>,
}

impl FoldSpec {
    /// All curve ids outside fold `k`.
    pub fn training_ids(&self, held_out: usize) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != held_out)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        ids.sort_unstable();
        ids
    }

    pub fn validate_against(&self, dataset: &SequenceDataset) -> Result<(), DataError> {
        let mut all: Vec<usize> = self.folds.iter().flatten().copied().collect();
        all.sort_unstable();
        let mut ids = dataset.curve_ids();
        ids.sort_unstable();
        if all != ids {
            return Err(DataError::Config("folds do not partition the dataset's curves".into()));
        }
        Ok(())
    }
}

/// Shuffle curve ids with `seed` and cut them into folds of `fold_sizes`.
pub fn kfold_split(dataset: &SequenceDataset, fold_sizes: &[usize], seed: u64) -> Result<FoldSpec, DataError> {
    let mut ids = dataset.curve_ids();
    let total: usize = fold_sizes.iter().sum();
    if total != ids.len() || fold_sizes.iter().any(|&s| s == 0) {
        return Err(DataError::Config(format!(
            "fold sizes {fold_sizes:?} must be positive and sum to {} curves",
            ids.len()
        )));
    }
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = Vec::with_capacity(fold_sizes.len());
    let mut rest = ids.as_slice();
    for &size in fold_sizes {
        let (head, tail) = rest.split_at(size);
        let mut fold = head.to_vec();
        fold.sort_unstable();
        folds.push(fold);
        rest = tail;
    }
    Ok(FoldSpec { seed, folds })
}

/// Standardize with statistics from `train_ids` only.
pub fn normalize(dataset: &SequenceDataset, train_ids: &[usize]) -> Result<(SequenceDataset, NormStats), DataError> {
    let raw = dataset.denormalize();
    let stats = NormStats::compute(&raw, train_ids)?;
    let sequences = raw
        .sequences
        .iter()
        .map(|s| s.iter().map(|r| stats.normalize_record(r)).collect())
        .collect();
    Ok((SequenceDataset { sequences, stats: Some(stats) }, stats))
}
