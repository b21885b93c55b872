use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::frame::Section;
use crate::geom::{KnotVector, NurbsCurve, Point3};

/// Parameters of the synthetic curved-member family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    /// Largest admissible curvature (1/m).
    pub curvature_cap: f64,
    pub control_points: usize,
    /// Stations used to check the cap.
    pub check_stations: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            curvature_cap: Section::default().default_curvature_cap(),
            control_points: 7,
            check_stations: 400,
        }
    }
}

/// Fraction of the cap enforced on the check stations, so that denser
/// sampling stays below the cap.
const CAP_MARGIN: f64 = 0.98;

pub fn synth_corpus(seed: u64, n_curves: usize) -> Vec<NurbsCurve> {
    synth_corpus_with(seed, n_curves, &SynthConfig::default())
}

/// Smooth clamped cubic members: a straight chord plus sinusoidal lateral
/// and vertical offsets, shrunk until the sampled curvature respects the cap.
pub fn synth_corpus_with(seed: u64, n_curves: usize, cfg: &SynthConfig) -> Vec<NurbsCurve> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cfg.control_points.max(4);
    let knots = KnotVector::clamped_uniform(n, 3).expect("at least four control points");
    (0..n_curves)
        .map(|_| {
            let length = rng.gen_range(8.0..16.0);
            let heading = rng.gen_range(0.0..TAU);
            let origin = Point3::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0), rng.gen_range(2.0..6.0));
            let slope = rng.gen_range(-0.08..0.08);
            let lateral_amp = rng.gen_range(-1.0..1.0) * length / 10.0;
            let lateral_waves = rng.gen_range(1..=2) as f64;
            let phase = rng.gen_range(0.0..PI);
            let rise = rng.gen_range(0.0..1.0) * length / 8.0;
            let sway = rng.gen_range(-1.0..1.0) * length / 24.0;
            let chord = Point3::new(heading.cos(), heading.sin(), slope).normalize();
            let side = Point3::new(-heading.sin(), heading.cos(), 0.0);
            let mut weights = vec![1.0; n];
            for w in weights.iter_mut().take(n - 1).skip(1) {
                *w = rng.gen_range(0.7..1.4);
            }

            let build = |scale: f64| {
                let pts = (0..n)
                    .map(|i| {
                        let t = i as f64 / (n - 1) as f64;
                        let lat = lateral_amp * (lateral_waves * PI * t + phase).sin() - lateral_amp * phase.sin() * (1.0 - t)
                            - lateral_amp * (lateral_waves * PI + phase).sin() * t;
                        let up = rise * (PI * t).sin() + sway * (2.0 * PI * t).sin();
                        origin + chord * (length * t) + (side * lat + Point3::z() * up) * scale
                    })
                    .collect();
                NurbsCurve::new(3, pts, weights.clone(), knots.clone()).expect("well-formed synthetic curve")
            };

            let mut scale = 1.0;
            loop {
                let curve = build(scale);
                match curve.max_sampled_curvature(cfg.check_stations) {
                    Ok(k) if k <= CAP_MARGIN * cfg.curvature_cap => break curve,
                    _ if scale < 1e-6 => break build(0.0),
                    _ => scale *= 0.8,
                }
            }
        })
        .collect()
}
