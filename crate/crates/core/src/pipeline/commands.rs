use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::svg::{displacement_plan, line_panels, Panel, Series, PALETTE};
use super::{read_text, Outputs, PipelineError, RunConfig};
use crate::data::{
    curves_to_dataset, kfold_split, read_dataset_csv, synth_corpus_with, write_dataset_csv, FoldSpec,
    SequenceDataset,
};
use crate::evo::{
    convergence_report, read_history_csv, reference_problem, run, write_archive_json, write_generation_csv,
    write_history_csv, ArchiveEntry, FormFindingProblem, ObjectiveReport, ObjectiveVector,
};
use crate::frame::{analyze, Analysis, GridModel, ModelJson};
use crate::geom::NurbsCurve;
use crate::seqnet::{predict_curve_properties, read_loss_csv, train, write_loss_csv, EpochLoss, TrainedModel};

pub const PREDICTIONS_HEADER: &str =
    "u,actual_curvature,pred_curvature,actual_tx,pred_tx,actual_ty,pred_ty,actual_tz,pred_tz";

fn input(e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Input(e.to_string())
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, PipelineError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn load_dataset(cfg: &RunConfig, out: &Path) -> Result<SequenceDataset, PipelineError> {
    let path = cfg.dataset.clone().unwrap_or_else(|| out.join("dataset.csv"));
    let text = read_text(&path)?;
    read_dataset_csv(text.as_bytes()).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load_folds(cfg: &RunConfig, out: &Path, dataset: &SequenceDataset) -> Result<FoldSpec, PipelineError> {
    let path = out.join("folds.json");
    let folds = if path.exists() {
        parse_json(&path)?
    } else {
        kfold_split(dataset, &cfg.fold_sizes, cfg.seed).map_err(input)?
    };
    folds.validate_against(dataset).map_err(input)?;
    Ok(folds)
}

fn load_problem(cfg: &RunConfig) -> Result<FormFindingProblem, PipelineError> {
    let problem = match &cfg.problem {
        Some(p) => parse_json(p)?,
        None => reference_problem(),
    };
    problem.validate()?;
    Ok(problem)
}

/// Curves to `corpus.json`, `dataset.csv` and `folds.json`.
pub fn cmd_extract(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let curves: Vec<NurbsCurve> = match &cfg.curves {
        Some(p) => parse_json(p)?,
        None => synth_corpus_with(cfg.seed, cfg.n_curves, &cfg.synth),
    };
    let dataset = curves_to_dataset(&curves, cfg.n_segments).map_err(input)?;
    let folds = kfold_split(&dataset, &cfg.fold_sizes, cfg.seed).map_err(input)?;
    let mut csv = Vec::new();
    write_dataset_csv(&dataset, &mut csv).map_err(input)?;
    let mut o = Outputs::default();
    o.json(out.join("corpus.json"), &curves)?;
    o.add(out.join("dataset.csv"), csv);
    o.json(out.join("folds.json"), &folds)?;
    o.commit()
}

#[derive(Debug, Serialize)]
struct CvReport {
    test_fold: usize,
    fold_validation: Vec<FoldLoss>,
}

#[derive(Debug, Serialize)]
struct FoldLoss {
    fold: usize,
    val_loss: f64,
}

pub(crate) fn loss_figure(history: &[EpochLoss]) -> String {
    let series = |name: &str, color, pick: &dyn Fn(&EpochLoss) -> Option<f64>| Series {
        name: name.into(),
        points: history.iter().filter_map(|e| pick(e).map(|v| (e.epoch as f64, v))).collect(),
        color,
        dashed: false,
    };
    line_panels(
        &[Panel {
            title: "Training loss".into(),
            x_label: "epoch".into(),
            y_label: "mean squared error".into(),
            series: vec![
                series("train", PALETTE[0], &|e| Some(e.train_loss)),
                series("validation", PALETTE[1], &|e| e.val_loss),
            ],
        }],
        1,
    )
}

/// Train on the dataset, writing `model.json`, `loss.csv`, `loss.svg` and
/// `cv.json`.
pub fn cmd_train(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let dataset = load_dataset(cfg, out)?;
    let folds = load_folds(cfg, out, &dataset)?;
    let outcome = train(&dataset, &folds, &cfg.model, &cfg.train)?;
    let mut loss = Vec::new();
    write_loss_csv(&outcome.history, &mut loss).map_err(|e| PipelineError::Io { path: out.join("loss.csv"), source: e })?;
    let cv = CvReport {
        test_fold: outcome.test_fold,
        fold_validation: outcome.fold_validation.iter().map(|&(fold, val_loss)| FoldLoss { fold, val_loss }).collect(),
    };
    let mut o = Outputs::default();
    o.json(out.join("model.json"), &TrainedModel::new(cfg.model, outcome.stats, &outcome.params))?;
    o.add(out.join("loss.csv"), loss);
    o.add(out.join("loss.svg"), loss_figure(&outcome.history));
    o.json(out.join("cv.json"), &cv)?;
    o.commit()
}

/// One predictions table row: `u` then actual/predicted pairs.
type PredictionRow = [f64; 9];

pub(crate) fn predictions_figure(curves: &[Vec<PredictionRow>]) -> String {
    let names = ["curvature", "tangent x", "tangent y", "tangent z"];
    let panels = names
        .iter()
        .enumerate()
        .map(|(c, name)| {
            let mut series = Vec::new();
            for (k, rows) in curves.iter().enumerate() {
                let color = PALETTE[k % PALETTE.len()];
                let label = |s: &str| if k == 0 { s.to_string() } else { String::new() };
                series.push(Series {
                    name: label("actual"),
                    points: rows.iter().map(|r| (r[0], r[1 + 2 * c])).collect(),
                    color,
                    dashed: false,
                });
                series.push(Series {
                    name: label("predicted"),
                    points: rows.iter().map(|r| (r[0], r[2 + 2 * c])).collect(),
                    color,
                    dashed: true,
                });
            }
            Panel { title: format!("Test curves: {name}"), x_label: "u".into(), y_label: name.to_string(), series }
        })
        .collect::<Vec<_>>();
    line_panels(&panels, 2)
}

fn predictions_csv(curves: &[Vec<PredictionRow>]) -> Vec<u8> {
    let mut text = format!("{PREDICTIONS_HEADER}\n");
    for row in curves.iter().flatten() {
        text.push_str(&row.iter().map(|v| fmt(*v)).collect::<Vec<_>>().join(","));
        text.push('\n');
    }
    text.into_bytes()
}

/// Predict every curve of the last (test) fold: `predictions.csv` and
/// `predictions.svg`.
pub fn cmd_predict(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let model_path = cfg.model_file.clone().unwrap_or_else(|| out.join("model.json"));
    let model: TrainedModel = parse_json(&model_path)?;
    let params = model.parameters()?;
    let dataset = load_dataset(cfg, out)?;
    let folds = load_folds(cfg, out, &dataset)?;
    let test = folds.folds.last().filter(|f| !f.is_empty()).ok_or_else(|| input("the test fold is empty"))?;
    let mut curves = Vec::with_capacity(test.len());
    for &id in test {
        let seq = dataset.sequence(id).ok_or_else(|| input(format!("curve {id} missing from dataset")))?;
        let pts: Vec<[f64; 4]> = seq.iter().map(|r| r.features()).collect();
        let pred = predict_curve_properties(&params, &model.config, &model.stats, &pts)?;
        curves.push(
            seq.iter()
                .zip(&pred)
                .map(|(r, p)| {
                    [
                        r.u,
                        r.curvature,
                        p.curvature,
                        r.tangent_x,
                        p.tangent[0],
                        r.tangent_y,
                        p.tangent[1],
                        r.tangent_z,
                        p.tangent[2],
                    ]
                })
                .collect(),
        );
    }
    let mut o = Outputs::default();
    o.add(out.join("predictions.csv"), predictions_csv(&curves));
    o.add(out.join("predictions.svg"), predictions_figure(&curves));
    o.commit()
}

fn vertical_displacements(analysis: &Analysis) -> Vec<f64> {
    analysis.results.first().map(|r| r.displacements.iter().map(|d| d[2]).collect()).unwrap_or_default()
}

pub(crate) fn displacement_figure(model: &GridModel, analysis: &Analysis, title: &str) -> String {
    let dz = vertical_displacements(analysis);
    let dz = if dz.is_empty() { vec![0.0; model.nodes.len()] } else { dz };
    let case = analysis.results.first().map_or("no load", |r| r.case.label());
    displacement_plan(model, &dz, &format!("{title} ({case} load)"))
}

/// Analyze one frame: `analysis.json`, `frame_model.json` and
/// `displacement.svg`.
pub fn cmd_analyze(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let (model, loads) = match &cfg.frame_model {
        Some(p) => parse_json::<ModelJson>(p)?.into_model()?,
        None => {
            let problem = load_problem(cfg)?;
            (problem.model(&problem.baseline())?, problem.grid.loads.clone())
        }
    };
    let analysis = analyze(&model, &loads)?;
    let mut o = Outputs::default();
    o.json(out.join("frame_model.json"), &ModelJson::from_model(&model, &loads))?;
    o.json(out.join("analysis.json"), &analysis)?;
    o.add(out.join("displacement.svg"), displacement_figure(&model, &analysis, "Vertical displacement"));
    o.commit()
}

/// Archive member with the smallest sum of objectives rescaled to `[0, 1]`
/// across the archive.
pub fn best_compromise(archive: &[ArchiveEntry]) -> Option<&ArchiveEntry> {
    let m = archive.first()?.objectives.len();
    let range: Vec<(f64, f64)> = (0..m)
        .map(|k| {
            archive.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| {
                (lo.min(e.objectives[k]), hi.max(e.objectives[k]))
            })
        })
        .collect();
    let score = |e: &ArchiveEntry| -> f64 {
        e.objectives
            .iter()
            .zip(&range)
            .map(|(v, &(lo, hi))| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
            .sum()
    };
    archive.iter().fold(None, |best: Option<&ArchiveEntry>, e| match best {
        Some(b) if score(b) <= score(e) => Some(b),
        _ => Some(e),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeSummary {
    pub generations: usize,
    pub evaluations: usize,
    pub baseline_design: Vec<f64>,
    pub baseline: ObjectiveVector,
    pub best_compromise_design: Vec<f64>,
    pub best_compromise: ObjectiveVector,
    pub report: Vec<ObjectiveReport>,
}

pub(crate) fn convergence_figure(names: &[String], best: &[(usize, Vec<f64>)], per_gen: Option<&[(usize, Vec<f64>)]>) -> String {
    let panels: Vec<Panel> = names
        .iter()
        .enumerate()
        .map(|(k, column)| {
            let name = column.trim_start_matches("best_").to_string();
            let mut series = vec![Series {
                name: "best so far".into(),
                points: best.iter().map(|(g, v)| (*g as f64, v[k])).collect(),
                color: PALETTE[0],
                dashed: false,
            }];
            if let Some(rows) = per_gen {
                series.push(Series {
                    name: "generation best".into(),
                    points: rows.iter().map(|(g, v)| (*g as f64, v[k])).collect(),
                    color: PALETTE[3],
                    dashed: true,
                });
            }
            Panel { title: name.clone(), x_label: "generation".into(), y_label: name, series }
        })
        .collect();
    line_panels(&panels, 2)
}

/// Run the search: `history.csv`, `history_generation.csv`, `archive.json`,
/// `optimize_summary.json`, `convergence.svg` and displacement figures for
/// the baseline and the best-compromise design.
pub fn cmd_optimize(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let problem = load_problem(cfg)?;
    let baseline_design = problem.baseline();
    let (baseline, base_analysis, base_model) = problem.evaluate_design(&baseline_design)?;
    let history = run(&problem, &cfg.ga)?;
    let best = best_compromise(&history.archive)
        .ok_or_else(|| PipelineError::Analysis("no feasible design in the final population".into()))?;
    let (best_obj, best_analysis, best_model) = problem.evaluate_design(&best.design)?;

    let mut hist = Vec::new();
    write_history_csv(&history, &mut hist)?;
    let mut per_gen = Vec::new();
    write_generation_csv(&history, &mut per_gen)?;
    let mut archive = Vec::new();
    write_archive_json(&history, &mut archive)?;
    archive.push(b'\n');
    let (names, best_rows) = read_history_csv(hist.as_slice())?;
    let (_, gen_rows) = read_history_csv(per_gen.as_slice())?;
    let summary = OptimizeSummary {
        generations: history.generations.len(),
        evaluations: history.evaluations,
        baseline_design,
        baseline,
        best_compromise_design: best.design.clone(),
        best_compromise: best_obj,
        report: convergence_report(&history),
    };

    let mut o = Outputs::default();
    o.add(out.join("history.csv"), hist);
    o.add(out.join("history_generation.csv"), per_gen);
    o.add(out.join("archive.json"), archive);
    o.json(out.join("optimize_summary.json"), &summary)?;
    o.add(out.join("convergence.svg"), convergence_figure(&names, &best_rows, Some(&gen_rows)));
    o.add(out.join("displacement_initial.svg"), displacement_figure(&base_model, &base_analysis, "Vertical displacement"));
    o.add(
        out.join("displacement_final.svg"),
        displacement_figure(&best_model, &best_analysis, "Vertical displacement, best compromise"),
    );
    o.commit()
}

fn read_predictions(path: &Path) -> Result<Vec<Vec<PredictionRow>>, PipelineError> {
    let text = read_text(path)?;
    let mut lines = text.lines();
    if lines.next() != Some(PREDICTIONS_HEADER) {
        return Err(input(format!("{}: unexpected header", path.display())));
    }
    let mut curves: Vec<Vec<PredictionRow>> = Vec::new();
    for (k, line) in lines.enumerate() {
        let vals: Vec<f64> = line
            .split(',')
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| input(format!("{} line {}: {e}", path.display(), k + 2)))?;
        let row: PredictionRow =
            vals.try_into().map_err(|_| input(format!("{} line {}: expected 9 fields", path.display(), k + 2)))?;
        // A new curve starts whenever the position parameter stops increasing.
        match curves.last_mut() {
            Some(c) if c.last().is_some_and(|r| r[0] < row[0]) => c.push(row),
            _ => curves.push(vec![row]),
        }
    }
    Ok(curves)
}

/// Regenerate figures from the tables already present in `out`.
pub fn cmd_report(_cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let mut o = Outputs::default();
    let loss = out.join("loss.csv");
    if loss.exists() {
        let history = read_loss_csv(read_text(&loss)?.as_bytes())?;
        o.add(out.join("loss.svg"), loss_figure(&history));
    }
    let preds = out.join("predictions.csv");
    if preds.exists() {
        o.add(out.join("predictions.svg"), predictions_figure(&read_predictions(&preds)?));
    }
    let hist = out.join("history.csv");
    if hist.exists() {
        let (names, rows) = read_history_csv(read_text(&hist)?.as_bytes())?;
        let per_gen_path = out.join("history_generation.csv");
        let per_gen = if per_gen_path.exists() {
            Some(read_history_csv(read_text(&per_gen_path)?.as_bytes())?.1)
        } else {
            None
        };
        o.add(out.join("convergence.svg"), convergence_figure(&names, &rows, per_gen.as_deref()));
    }
    if o.files.is_empty() {
        return Err(input(format!("no loss, prediction or history tables in {}", out.display())));
    }
    o.commit()
}
