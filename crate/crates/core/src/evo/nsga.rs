use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EvoError, GAConfig, Problem};

/// `a` is no worse than `b` everywhere and strictly better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

/// Fronts of indices, front 0 non-dominated.
pub fn non_dominated_sort(objectives: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let n = objectives.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates(&objectives[i], &objectives[j]) {
                dominates_list[i].push(j);
                dominated_by_count[j] += 1;
            } else if dominates(&objectives[j], &objectives[i]) {
                dominates_list[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of each member of one front. Objectives whose range
/// is zero or not finite contribute nothing to interior members.
pub fn crowding_distance(front: &[Vec<f64>]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let m = front[0].len();
    let mut dist = vec![0.0; n];
    for k in 0..m {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| front[a][k].total_cmp(&front[b][k]).then(a.cmp(&b)));
        let (lo, hi) = (front[order[0]][k], front[order[n - 1]][k]);
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if !(range.is_finite() && range > 0.0) {
            continue;
        }
        for w in order.windows(3) {
            dist[w[1]] += (front[w[2]][k] - front[w[0]][k]) / range;
        }
    }
    dist
}

/// Simulated binary crossover of one pair with bounded spread.
pub fn sbx_crossover(
    a: &[f64],
    b: &[f64],
    bounds: &[(f64, f64)],
    cfg: &GAConfig,
    rng: &mut impl Rng,
) -> (Vec<f64>, Vec<f64>) {
    let (mut c1, mut c2) = (a.to_vec(), b.to_vec());
    if !rng.gen_bool(cfg.crossover_probability) {
        return (c1, c2);
    }
    let eta = cfg.crossover_index;
    for i in 0..a.len() {
        if !rng.gen_bool(0.5) || (a[i] - b[i]).abs() <= 1e-14 {
            continue;
        }
        let (lo, hi) = bounds[i];
        let (y1, y2) = if a[i] < b[i] { (a[i], b[i]) } else { (b[i], a[i]) };
        let r: f64 = rng.gen();
        let spread = |beta: f64| {
            let alpha = 2.0 - beta.powf(-(eta + 1.0));
            if r <= 1.0 / alpha {
                (r * alpha).powf(1.0 / (eta + 1.0))
            } else {
                (1.0 / (2.0 - r * alpha)).powf(1.0 / (eta + 1.0))
            }
        };
        let bq1 = spread(1.0 + 2.0 * (y1 - lo) / (y2 - y1));
        let bq2 = spread(1.0 + 2.0 * (hi - y2) / (y2 - y1));
        let mut v1 = (0.5 * ((y1 + y2) - bq1 * (y2 - y1))).clamp(lo, hi);
        let mut v2 = (0.5 * ((y1 + y2) + bq2 * (y2 - y1))).clamp(lo, hi);
        if rng.gen_bool(0.5) {
            std::mem::swap(&mut v1, &mut v2);
        }
        c1[i] = v1;
        c2[i] = v2;
    }
    (c1, c2)
}

/// Bounded polynomial mutation, in place.
pub fn polynomial_mutation(x: &mut [f64], bounds: &[(f64, f64)], cfg: &GAConfig, rng: &mut impl Rng) {
    let pm = cfg.mutation_rate(x.len());
    let eta = cfg.mutation_index;
    for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
        if !rng.gen_bool(pm) {
            continue;
        }
        let span = hi - lo;
        let (d1, d2) = ((*v - lo) / span, (hi - *v) / span);
        let r: f64 = rng.gen();
        let pow = 1.0 / (eta + 1.0);
        let dq = if r < 0.5 {
            let val = 2.0 * r + (1.0 - 2.0 * r) * (1.0 - d1).powf(eta + 1.0);
            val.powf(pow) - 1.0
        } else {
            let val = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * (1.0 - d2).powf(eta + 1.0);
            1.0 - val.powf(pow)
        };
        *v = (*v + dq * span).clamp(lo, hi);
    }
}

/// Offspring from consecutive parent pairs. An odd trailing parent is only
/// mutated.
pub fn variation(parents: &[Vec<f64>], bounds: &[(f64, f64)], cfg: &GAConfig, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(parents.len());
    for pair in parents.chunks(2) {
        match pair {
            [a, b] => {
                let (c1, c2) = sbx_crossover(a, b, bounds, cfg, rng);
                out.push(c1);
                out.push(c2);
            }
            [a] => out.push(a.clone()),
            _ => unreachable!(),
        }
    }
    for child in out.iter_mut() {
        polynomial_mutation(child, bounds, cfg, rng);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationRecord {
    pub generation: usize,
    /// Best value per objective among this generation's new designs;
    /// infinite when none was feasible.
    pub best: Vec<f64>,
    /// Best value per objective over every design evaluated so far.
    pub best_so_far: Vec<f64>,
    /// Surviving population after selection.
    pub designs: Vec<Vec<f64>>,
    pub objectives: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEntry {
    pub design: Vec<f64>,
    pub objectives: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunHistory {
    pub objective_names: Vec<String>,
    /// Evaluated initial population, generation 0.
    pub initial: GenerationRecord,
    pub generations: Vec<GenerationRecord>,
    /// Feasible non-dominated designs of the final population.
    pub archive: Vec<ArchiveEntry>,
    pub evaluations: usize,
}

fn column_min(objs: &[Vec<f64>], m: usize) -> Vec<f64> {
    (0..m).map(|k| objs.iter().map(|o| o[k]).fold(f64::INFINITY, f64::min)).collect()
}

struct Ranked {
    rank: Vec<usize>,
    crowd: Vec<f64>,
}

fn rank_population(objs: &[Vec<f64>]) -> (Vec<Vec<usize>>, Ranked) {
    let fronts = non_dominated_sort(objs);
    let mut rank = vec![0; objs.len()];
    let mut crowd = vec![0.0; objs.len()];
    for (r, front) in fronts.iter().enumerate() {
        let members: Vec<Vec<f64>> = front.iter().map(|&i| objs[i].clone()).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&members)) {
            rank[i] = r;
            crowd[i] = d;
        }
    }
    (fronts, Ranked { rank, crowd })
}

fn better(r: &Ranked, a: usize, b: usize) -> bool {
    match r.rank[a].cmp(&r.rank[b]) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => r.crowd[a] >= r.crowd[b],
    }
}

fn evaluate_all<P: Problem + ?Sized>(problem: &P, designs: &[Vec<f64>], m: usize) -> Vec<Vec<f64>> {
    designs
        .par_iter()
        .map(|d| match problem.evaluate(d) {
            Some(o) if o.len() == m && o.iter().all(|v| v.is_finite()) => o,
            _ => vec![f64::INFINITY; m],
        })
        .collect()
}

/// Elitist generational loop: tournament, variation, then the best
/// `population` of parents and offspring by front and crowding.
pub fn run<P: Problem + ?Sized>(problem: &P, cfg: &GAConfig) -> Result<RunHistory, EvoError> {
    cfg.validate()?;
    let bounds = problem.bounds();
    if bounds.is_empty() || bounds.iter().any(|&(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo < hi)) {
        return Err(EvoError::Config("bounds must be finite with lower < upper".into()));
    }
    let names = problem.objective_names();
    let m = names.len();
    let n = cfg.population;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut designs: Vec<Vec<f64>> = Vec::with_capacity(n);
    if let Some(seed) = problem.seed_design() {
        if seed.len() != bounds.len() {
            return Err(EvoError::Length { expected: bounds.len(), found: seed.len() });
        }
        designs.push(seed);
    }
    while designs.len() < n {
        designs.push(bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect());
    }
    let mut objs = evaluate_all(problem, &designs, m);
    let mut evaluations = n;
    if objs.iter().all(|o| o.iter().any(|v| !v.is_finite())) {
        return Err(EvoError::AllInfeasible);
    }
    let initial_best = column_min(&objs, m);
    let initial = GenerationRecord {
        generation: 0,
        best: initial_best.clone(),
        best_so_far: initial_best.clone(),
        designs: designs.clone(),
        objectives: objs.clone(),
    };
    let mut best_so_far = initial_best;
    let mut generations = Vec::with_capacity(cfg.generations);

    for generation in 1..=cfg.generations {
        let (_, ranked) = rank_population(&objs);
        let parents: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
                designs[if better(&ranked, a, b) { a } else { b }].clone()
            })
            .collect();
        let children = variation(&parents, &bounds, cfg, &mut rng);
        let child_objs = evaluate_all(problem, &children, m);
        evaluations += children.len();
        let best = column_min(&child_objs, m);
        for (s, b) in best_so_far.iter_mut().zip(&best) {
            *s = s.min(*b);
        }

        designs.extend(children);
        objs.extend(child_objs);
        let (fronts, ranked) = rank_population(&objs);
        let mut keep: Vec<usize> = Vec::with_capacity(n);
        for front in fronts {
            if keep.len() + front.len() <= n {
                keep.extend(front);
            } else {
                let mut rest = front;
                rest.sort_by(|&a, &b| ranked.crowd[b].total_cmp(&ranked.crowd[a]).then(a.cmp(&b)));
                keep.extend(rest.into_iter().take(n - keep.len()));
            }
            if keep.len() == n {
                break;
            }
        }
        designs = keep.iter().map(|&i| designs[i].clone()).collect();
        objs = keep.iter().map(|&i| objs[i].clone()).collect();
        generations.push(GenerationRecord {
            generation,
            best,
            best_so_far: best_so_far.clone(),
            designs: designs.clone(),
            objectives: objs.clone(),
        });
    }

    let fronts = non_dominated_sort(&objs);
    let mut archive: Vec<ArchiveEntry> = Vec::new();
    for &i in fronts.first().into_iter().flatten() {
        let feasible = objs[i].iter().all(|v| v.is_finite());
        if feasible && !archive.iter().any(|e| e.design == designs[i]) {
            archive.push(ArchiveEntry { design: designs[i].clone(), objectives: objs[i].clone() });
        }
    }
    Ok(RunHistory { objective_names: names, initial, generations, archive, evaluations })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveReport {
    pub name: String,
    /// Best value in the initial population.
    pub initial: f64,
    /// Final best-so-far value.
    pub best: f64,
    /// `(initial - best) / initial * 100`; `None` when `initial` is zero or
    /// not finite.
    pub reduction_percent: Option<f64>,
    pub per_generation: Vec<f64>,
    pub best_so_far: Vec<f64>,
}

pub fn convergence_report(history: &RunHistory) -> Vec<ObjectiveReport> {
    history
        .objective_names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let initial = history.initial.best_so_far[k];
            let best = history.generations.last().map_or(initial, |g| g.best_so_far[k]);
            let reduction_percent =
                (initial.is_finite() && initial != 0.0).then(|| (initial - best) / initial * 100.0);
            ObjectiveReport {
                name: name.clone(),
                initial,
                best,
                reduction_percent,
                per_generation: history.generations.iter().map(|g| g.best[k]).collect(),
                best_so_far: history.generations.iter().map(|g| g.best_so_far[k]).collect(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominance_cases() {
        assert!(dominates(&[1.0; 4], &[2.0; 4]));
        assert!(!dominates(&[1.0; 4], &[1.0; 4]));
        let (a, b) = ([1.0, 3.0, 1.0, 1.0], [2.0; 4]);
        assert!(!dominates(&a, &b) && !dominates(&b, &a));
    }

    #[test]
    fn small_sort_and_crowding() {
        let pts = vec![vec![1.0, 4.0], vec![2.0, 3.0], vec![3.0, 2.0], vec![2.0, 5.0]];
        assert_eq!(non_dominated_sort(&pts), vec![vec![0, 1, 2], vec![3]]);
        assert_eq!(non_dominated_sort(&vec![vec![1.0, 1.0]; 5]), vec![vec![0, 1, 2, 3, 4]]);
        let line = vec![vec![0.0, 2.0], vec![1.0, 1.0], vec![2.0, 0.0]];
        let d = crowding_distance(&line);
        assert!(d[0].is_infinite() && d[2].is_infinite());
        assert!((d[1] - 2.0).abs() < 1e-15);
        assert!(crowding_distance(&line[..2]).iter().all(|v| v.is_infinite()));
    }

    #[test]
    fn zero_probabilities_copy_parents() {
        let cfg = GAConfig { crossover_probability: 0.0, mutation_probability: Some(0.0), ..GAConfig::default() };
        let parents = vec![vec![0.1, 0.2], vec![0.7, 0.9], vec![0.3, 0.3]];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(variation(&parents, &[(0.0, 1.0); 2], &cfg, &mut rng), parents);
    }

    #[test]
    fn report_arithmetic() {
        let rec = |g, v: f64| GenerationRecord {
            generation: g,
            best: vec![v],
            best_so_far: vec![v],
            designs: vec![],
            objectives: vec![],
        };
        let h = RunHistory {
            objective_names: vec!["f".into()],
            initial: rec(0, 10.0),
            generations: vec![rec(1, 9.0), rec(2, 8.0)],
            archive: vec![],
            evaluations: 0,
        };
        let r = &convergence_report(&h)[0];
        assert_eq!((r.initial, r.best), (10.0, 8.0));
        assert!((r.reduction_percent.unwrap() - 20.0).abs() < 1e-12);
    }
}
