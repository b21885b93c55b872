//! Every pipeline stage in order, writing into `pipeline_out/` (or the
//! directory given as the first argument).

use std::path::PathBuf;

use gridform::pipeline::{cmd_analyze, cmd_extract, cmd_optimize, cmd_predict, cmd_report, cmd_train, RunConfig};

fn main() -> Result<(), gridform::pipeline::PipelineError> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "pipeline_out".into()));
    let cfg = RunConfig::load(None, Some(7))?;
    let stages = [
        ("extract", cmd_extract as fn(&RunConfig, &std::path::Path) -> _),
        ("train", cmd_train),
        ("predict", cmd_predict),
        ("analyze", cmd_analyze),
        ("optimize", cmd_optimize),
        ("report", cmd_report),
    ];
    for (name, stage) in stages {
        let files = stage(&cfg, &out)?;
        println!("{name}: {} files", files.len());
        for f in files {
            println!("  {}", f.display());
        }
    }
    Ok(())
}
