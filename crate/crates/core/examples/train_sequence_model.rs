//! Train the encoder on a synthetic corpus and predict one held-out curve.
//!
//! `cargo run --release --example train_sequence_model -- 30` trains for 30
//! epochs (default 100).

use gridform::data::{curves_to_dataset, kfold_split, synth_corpus};
use gridform::seqnet::{predict_curve_properties, train, ModelConfig, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let epochs = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(100);
    let ds = curves_to_dataset(&synth_corpus(0, 16), 20)?;
    let folds = kfold_split(&ds, &[3, 3, 3, 3, 4], 0)?;
    let config = ModelConfig::default();
    let outcome = train(&ds, &folds, &config, &TrainConfig { epochs, ..TrainConfig::default() })?;
    for e in outcome.history.iter().step_by((epochs / 10).max(1)) {
        println!("epoch {:3}  train {:.5}  val {:.5}", e.epoch, e.train_loss, e.val_loss.unwrap_or(f64::NAN));
    }

    let id = folds.folds[outcome.test_fold][0];
    let seq = ds.sequence(id).unwrap();
    let pts: Vec<[f64; 4]> = seq.iter().map(|r| r.features()).collect();
    let pred = predict_curve_properties(&outcome.params, &config, &outcome.stats, &pts)?;
    println!("held-out curve {id}");
    for (r, p) in seq.iter().zip(&pred).step_by(4) {
        println!(
            "  u={:.2}  kappa {:.5} / {:.5}  tx {:+.3} / {:+.3}",
            r.u, r.curvature, p.curvature, r.tangent_x, p.tangent[0]
        );
    }
    Ok(())
}
