//! Reference grid-shell search: four objectives, 60 generations.

use gridform::evo::{convergence_report, reference_problem, run, GAConfig, ObjectiveVector};

fn main() -> Result<(), gridform::evo::EvoError> {
    let problem = reference_problem();
    let (baseline, _, model) = problem.evaluate_design(&problem.baseline())?;
    println!("baseline design {:?}", problem.baseline());
    println!("  {} nodes, {} members", model.nodes.len(), model.elements.len());
    for (name, v) in ObjectiveVector::NAMES.iter().zip(baseline.to_array()) {
        println!("  {name:10} {v:.6e}");
    }

    let history = run(&problem, &GAConfig::default())?;
    println!("{} generations, {} evaluations", history.generations.len(), history.evaluations);
    for r in convergence_report(&history) {
        let pct = r.reduction_percent.map_or("n/a".to_string(), |p| format!("{p:.2}%"));
        println!("  {:10} initial best {:.6e}  final best {:.6e}  reduction {pct}", r.name, r.initial, r.best);
    }
    println!("{} non-dominated designs", history.archive.len());
    Ok(())
}
