//! Staged file-based workflow behind the command line: extract, train,
//! predict, analyze, optimize and report. Every stage reads and writes
//! files under one output directory and never leaves partial outputs.

mod commands;
pub mod svg;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::SynthConfig;
use crate::evo::{EvoError, GAConfig};
use crate::frame::FrameError;
use crate::seqnet::{ModelConfig, SeqNetError, TrainConfig};

pub use commands::{
    best_compromise, cmd_analyze, cmd_extract, cmd_optimize, cmd_predict, cmd_report, cmd_train, OptimizeSummary,
    PREDICTIONS_HEADER,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("input error: {0}")]
    Input(String),
    #[error("training failed: {0}")]
    Training(String),
    #[error("analysis failed: {0}")]
    Analysis(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    /// 2 for input problems, 3 for training, 4 for analysis or optimization.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Input(_) | Self::Io { .. } => 2,
            Self::Training(_) => 3,
            Self::Analysis(_) => 4,
        }
    }
}

impl From<SeqNetError> for PipelineError {
    fn from(e: SeqNetError) -> Self {
        match e {
            SeqNetError::Divergence { .. } | SeqNetError::Numeric(_) => Self::Training(e.to_string()),
            _ => Self::Input(e.to_string()),
        }
    }
}

impl From<FrameError> for PipelineError {
    fn from(e: FrameError) -> Self {
        match e {
            FrameError::InvalidModel(_) | FrameError::Geometry(_) => Self::Input(e.to_string()),
            _ => Self::Analysis(e.to_string()),
        }
    }
}

impl From<EvoError> for PipelineError {
    fn from(e: EvoError) -> Self {
        match e {
            EvoError::Config(_) | EvoError::Length { .. } | EvoError::OutOfBounds { .. } | EvoError::Format(_) => {
                Self::Input(e.to_string())
            }
            _ => Self::Analysis(e.to_string()),
        }
    }
}

/// One JSON document configuring every stage. Missing fields take their
/// defaults; `seed` drives the corpus, the folds, training and the search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// JSON array of curves; a synthetic corpus is generated when absent.
    pub curves: Option<PathBuf>,
    pub n_curves: usize,
    pub synth: SynthConfig,
    pub n_segments: usize,
    pub fold_sizes: Vec<usize>,
    /// Dataset CSV read by training; defaults to the extract output.
    pub dataset: Option<PathBuf>,
    /// Trained model read by prediction; defaults to the train output.
    pub model_file: Option<PathBuf>,
    /// Frame model JSON for `analyze`; defaults to the problem's baseline.
    pub frame_model: Option<PathBuf>,
    /// Form-finding problem JSON; defaults to the reference problem.
    pub problem: Option<PathBuf>,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub ga: GAConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            curves: None,
            n_curves: 16,
            synth: SynthConfig::default(),
            n_segments: 20,
            fold_sizes: vec![3, 3, 3, 3, 4],
            dataset: None,
            model_file: None,
            frame_model: None,
            problem: None,
            model: ModelConfig::default(),
            train: TrainConfig::default(),
            ga: GAConfig::default(),
        }
    }
}

impl RunConfig {
    /// Read `path` (or take defaults), apply a seed override and check that
    /// every referenced file exists.
    pub fn load(path: Option<&Path>, seed: Option<u64>) -> Result<Self, PipelineError> {
        let mut cfg: RunConfig = match path {
            Some(p) => serde_json::from_str(&read_text(p)?)
                .map_err(|e| PipelineError::Input(format!("config {}: {e}", p.display())))?,
            None => RunConfig::default(),
        };
        if let Some(s) = seed {
            cfg.seed = s;
        }
        cfg.train.seed = cfg.seed;
        cfg.ga.seed = cfg.seed;
        for p in [&cfg.curves, &cfg.dataset, &cfg.model_file, &cfg.frame_model, &cfg.problem].into_iter().flatten() {
            if !p.exists() {
                return Err(PipelineError::Input(format!("{} does not exist", p.display())));
            }
        }
        Ok(cfg)
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String, PipelineError> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => PipelineError::Input(format!("{} not found", path.display())),
        _ => PipelineError::Io { path: path.to_path_buf(), source: e },
    })
}

/// Files produced by one command, committed together once all are built.
#[derive(Default)]
pub(crate) struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    pub(crate) fn add(&mut self, path: PathBuf, bytes: impl Into<Vec<u8>>) {
        self.files.push((path, bytes.into()));
    }

    pub(crate) fn json<T: Serialize>(&mut self, path: PathBuf, value: &T) -> Result<(), PipelineError> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| PipelineError::Analysis(format!("serializing {}: {e}", path.display())))?;
        text.push('\n');
        self.add(path, text);
        Ok(())
    }

    /// Write each file to a temporary sibling, then rename all of them.
    pub(crate) fn commit(self) -> Result<Vec<PathBuf>, PipelineError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| PipelineError::Io { path, source }
        };
        let mut staged = Vec::with_capacity(self.files.len());
        for (path, bytes) in &self.files {
            let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
            fs::create_dir_all(dir).map_err(io(dir))?;
            let mut builder = tempfile::Builder::new();
            #[cfg(unix)]
            {
                use std::os::unix::fs::PermissionsExt;
                builder.permissions(fs::Permissions::from_mode(0o644));
            }
            let mut tmp = builder.tempfile_in(dir).map_err(io(dir))?;
            std::io::Write::write_all(&mut tmp, bytes).map_err(io(path))?;
            staged.push((tmp, path.clone()));
        }
        let mut written = Vec::with_capacity(staged.len());
        for (tmp, path) in staged {
            tmp.persist(&path).map_err(|e| PipelineError::Io { path: path.clone(), source: e.error })?;
            written.push(path);
        }
        Ok(written)
    }
}
