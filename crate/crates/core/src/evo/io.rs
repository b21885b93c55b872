use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{ArchiveEntry, EvoError, RunHistory};

/// Header of the best-so-far history for the form-finding objectives.
pub const HISTORY_HEADER: &str = "generation,best_U_gravity,best_U_mesh,best_mass,best_sigma";

fn write_series<W: Write>(
    history: &RunHistory,
    prefix: &str,
    pick: impl Fn(&super::GenerationRecord) -> &Vec<f64>,
    out: W,
) -> Result<(), EvoError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["generation".to_string()];
    header.extend(history.objective_names.iter().map(|n| format!("{prefix}_{n}")));
    w.write_record(&header).map_err(csv_err)?;
    for g in &history.generations {
        let mut row = vec![g.generation.to_string()];
        row.extend(pick(g).iter().map(|v| format!("{v:.16e}")));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Best-so-far value per objective, one row per generation.
pub fn write_history_csv<W: Write>(history: &RunHistory, out: W) -> Result<(), EvoError> {
    write_series(history, "best", |g| &g.best_so_far, out)
}

/// Best value per objective among each generation's new designs.
pub fn write_generation_csv<W: Write>(history: &RunHistory, out: W) -> Result<(), EvoError> {
    write_series(history, "generation_best", |g| &g.best, out)
}

/// Column names and `(generation, values)` rows of either history file.
pub fn read_history_csv<R: Read>(input: R) -> Result<(Vec<String>, Vec<(usize, Vec<f64>)>), EvoError> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if header.first().map(String::as_str) != Some("generation") || header.len() < 2 {
        return Err(EvoError::Format(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |m: String| EvoError::Format(format!("line {line}: {m}"));
        if rec.len() != header.len() {
            return Err(bad(format!("expected {} fields", header.len())));
        }
        let generation = rec[0].parse().map_err(|e| bad(format!("{e}")))?;
        let values = rec
            .iter()
            .skip(1)
            .map(|f| f.parse::<f64>().map_err(|e| bad(format!("{e}"))))
            .collect::<Result<_, _>>()?;
        rows.push((generation, values));
    }
    Ok((header[1..].to_vec(), rows))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveJson {
    pub objective_names: Vec<String>,
    pub entries: Vec<ArchiveEntry>,
}

pub fn write_archive_json<W: Write>(history: &RunHistory, out: W) -> Result<(), EvoError> {
    let doc = ArchiveJson { objective_names: history.objective_names.clone(), entries: history.archive.clone() };
    serde_json::to_writer_pretty(out, &doc).map_err(|e| EvoError::Format(e.to_string()))
}

fn csv_err(e: csv::Error) -> EvoError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => EvoError::Io(io),
        kind => EvoError::Format(format!("{kind:?}")),
    }
}
