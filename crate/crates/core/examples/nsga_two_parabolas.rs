//! NSGA-II on min { x^2, (x - 2)^2 }, whose front is x in [0, 2].

use gridform::evo::{run, GAConfig, Problem};

struct TwoParabolas;

impl Problem for TwoParabolas {
    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(-3.0, 5.0)]
    }
    fn objective_names(&self) -> Vec<String> {
        vec!["f1".into(), "f2".into()]
    }
    fn evaluate(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![x[0] * x[0], (x[0] - 2.0).powi(2)])
    }
}

fn main() -> Result<(), gridform::evo::EvoError> {
    let history = run(&TwoParabolas, &GAConfig { seed: 1, ..GAConfig::default() })?;
    let mut front: Vec<_> = history.archive.iter().collect();
    front.sort_by(|a, b| a.design[0].total_cmp(&b.design[0]));
    println!("{} evaluations, {} archive members", history.evaluations, front.len());
    for e in front.iter().step_by(4) {
        println!("  x={:+.4}  f=({:.4}, {:.4})", e.design[0], e.objectives[0], e.objectives[1]);
    }
    let outside = front.iter().filter(|e| !(-1e-3..=2.0 + 1e-3).contains(&e.design[0])).count();
    println!("members outside [0, 2]: {outside}");
    Ok(())
}
