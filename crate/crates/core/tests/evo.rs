use gridform::evo::{
    convergence_report, crowding_distance, dominates, non_dominated_sort, reference_problem, run, variation, GAConfig,
    Problem,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Peel fronts by repeatedly taking the members no remaining member
/// dominates.
fn brute_force_fronts(objs: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let mut remaining: Vec<usize> = (0..objs.len()).collect();
    let mut fronts = Vec::new();
    while !remaining.is_empty() {
        let front: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&i| !remaining.iter().any(|&j| j != i && dominates(&objs[j], &objs[i])))
            .collect();
        remaining.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

fn sorted(mut fronts: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    for f in fronts.iter_mut() {
        f.sort_unstable();
    }
    fronts
}

#[test]
fn sort_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for trial in 0..100 {
        let n = rng.gen_range(1..=50);
        // Coarse integer values force ties and duplicates.
        let objs: Vec<Vec<f64>> = (0..n).map(|_| (0..4).map(|_| rng.gen_range(0..6) as f64).collect()).collect();
        assert_eq!(sorted(non_dominated_sort(&objs)), brute_force_fronts(&objs), "trial {trial}");
    }
}

#[test]
fn fronts_are_layered() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let objs: Vec<Vec<f64>> = (0..30).map(|_| (0..4).map(|_| rng.gen::<f64>()).collect()).collect();
    let fronts = non_dominated_sort(&objs);
    for (k, front) in fronts.iter().enumerate() {
        for &a in front {
            assert!(front.iter().all(|&b| !dominates(&objs[b], &objs[a])));
            if k > 0 {
                assert!(fronts[k - 1].iter().any(|&b| dominates(&objs[b], &objs[a])));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]
    #[test]
    fn crowding_ignores_order(pts in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 3..20), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        // Ties could move which member counts as the boundary.
        let distinct = pts.iter().enumerate().all(|(i, p)| pts[..i].iter().all(|q| q.0 != p.0 && q.1 != p.1));
        prop_assume!(distinct);
        let front: Vec<Vec<f64>> = pts.iter().map(|&(a, b)| vec![a, b]).collect();
        let d = crowding_distance(&front);
        let mut perm: Vec<usize> = (0..front.len()).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let shuffled: Vec<Vec<f64>> = perm.iter().map(|&i| front[i].clone()).collect();
        let ds = crowding_distance(&shuffled);
        for (k, &i) in perm.iter().enumerate() {
            prop_assert!(d[i] == ds[k] || (d[i] - ds[k]).abs() < 1e-12);
        }
    }
}

#[test]
fn offspring_respect_bounds() {
    let cfg = GAConfig { mutation_probability: Some(0.5), ..GAConfig::default() };
    let bounds = vec![(-1.0, 1.0), (0.2, 5.0), (10.0, 10.5)];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut count = 0;
    while count < 10_000 {
        let parents: Vec<Vec<f64>> =
            (0..4).map(|_| bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect()).collect();
        for child in variation(&parents, &bounds, &cfg, &mut rng) {
            for (v, &(lo, hi)) in child.iter().zip(&bounds) {
                assert!((lo..=hi).contains(v));
            }
            count += 1;
        }
    }
    let parents = vec![vec![0.0, 1.0, 10.1], vec![0.5, 4.0, 10.4]];
    let a = variation(&parents, &bounds, &cfg, &mut ChaCha8Rng::seed_from_u64(9));
    let b = variation(&parents, &bounds, &cfg, &mut ChaCha8Rng::seed_from_u64(9));
    assert_eq!(a, b);
}

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

/// Distance from an objective point to the curve `(s^2, (s-2)^2)`,
/// `s in [0, 2]`, by dense sampling.
fn distance_to_true_front(p: &[f64]) -> f64 {
    (0..=20_000)
        .map(|k| {
            let s = 2.0 * k as f64 / 20_000.0;
            ((p[0] - s * s).powi(2) + (p[1] - (s - 2.0).powi(2)).powi(2)).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn analytic_front_is_found() {
    let cfg = GAConfig { seed: 3, ..GAConfig::default() };
    let h = run(&TwoParabolas, &cfg).unwrap();
    assert_eq!(h.generations.len(), 60);
    for g in &h.generations {
        for front in non_dominated_sort(&g.objectives) {
            for &a in &front {
                assert!(front.iter().all(|&b| !dominates(&g.objectives[b], &g.objectives[a])));
            }
        }
        for (k, s) in g.best_so_far.iter().enumerate() {
            assert_eq!(*s, h.generations.iter().take(g.generation).map(|r| r.best[k]).fold(h.initial.best[k], f64::min));
        }
    }
    let gd = h.archive.iter().map(|e| distance_to_true_front(&e.objectives)).sum::<f64>() / h.archive.len() as f64;
    println!("generational distance {gd:e} over {} points", h.archive.len());
    assert!(gd < 0.05);
    let again = run(&TwoParabolas, &cfg).unwrap();
    assert_eq!(h, again);
}

#[test]
fn report_matches_history() {
    let h = run(&TwoParabolas, &GAConfig { generations: 10, ..GAConfig::default() }).unwrap();
    for (k, r) in convergence_report(&h).iter().enumerate() {
        assert_eq!(r.initial, h.initial.best.iter().copied().nth(k).unwrap());
        assert_eq!(r.best, h.generations[9].best_so_far[k]);
        assert_eq!(r.best_so_far.len(), 10);
        if let Some(p) = r.reduction_percent {
            assert!((p - (r.initial - r.best) / r.initial * 100.0).abs() < 1e-12);
        }
    }
}

#[test]
fn all_infeasible_start_is_an_error() {
    struct Never;
    impl Problem for Never {
        fn bounds(&self) -> Vec<(f64, f64)> {
            vec![(0.0, 1.0)]
        }
        fn objective_names(&self) -> Vec<String> {
            vec!["f".into()]
        }
        fn evaluate(&self, _: &[f64]) -> Option<Vec<f64>> {
            None
        }
    }
    assert!(run(&Never, &GAConfig::default()).is_err());
    assert!(run(&TwoParabolas, &GAConfig { population: 5, ..GAConfig::default() }).is_err());
}

#[test]
fn reference_design_sensitivity() {
    let p = reference_problem();
    let base = p.baseline();
    let (b, _, _) = p.evaluate_design(&base).unwrap();
    let unmodified = gridform::frame::analyze(&p.model(&base).unwrap(), &p.grid.loads).unwrap();
    assert_eq!(b.u_mesh, unmodified.objectives.u_mesh);
    let mut raised = base.clone();
    raised[0] += 0.1;
    let (r, _, _) = p.evaluate_design(&raised).unwrap();
    assert_ne!(r, b);
    assert_eq!(p.evaluate(&raised), p.evaluate(&raised));
}
