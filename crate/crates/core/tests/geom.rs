use gridform::geom::{
    basis_functions, extract_grid, loft_surface, GeomError, KnotVector, NurbsCurve, NurbsSurface, Point3,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_1_SQRT_2;

fn quarter_circle() -> NurbsCurve {
    NurbsCurve::new(
        2,
        vec![Point3::new(1.0, 0.0, 0.0), Point3::new(1.0, 1.0, 0.0), Point3::new(0.0, 1.0, 0.0)],
        vec![1.0, FRAC_1_SQRT_2, 1.0],
        KnotVector::new(vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap(),
    )
    .unwrap()
}

/// Textbook recursion evaluated directly, `0/0 = 0`.
fn naive_basis(i: usize, p: usize, u: f64, k: &[f64]) -> f64 {
    if p == 0 {
        return if k[i] <= u && u < k[i + 1] { 1.0 } else { 0.0 };
    }
    let left = if k[i + p] > k[i] { (u - k[i]) / (k[i + p] - k[i]) * naive_basis(i, p - 1, u, k) } else { 0.0 };
    let right = if k[i + p + 1] > k[i + 1] {
        (k[i + p + 1] - u) / (k[i + p + 1] - k[i + 1]) * naive_basis(i + 1, p - 1, u, k)
    } else {
        0.0
    };
    left + right
}

fn random_knots(rng: &mut ChaCha8Rng, p: usize, n_ctrl: usize) -> KnotVector {
    let mut interior: Vec<f64> = (0..n_ctrl - p - 1).map(|_| rng.gen_range(0.05..0.95)).collect();
    interior.sort_by(f64::total_cmp);
    let mut k = vec![0.0; p + 1];
    k.extend(interior);
    k.extend(vec![1.0; p + 1]);
    KnotVector::new(k).unwrap()
}

fn random_curve(rng: &mut ChaCha8Rng, unit_weights: bool) -> NurbsCurve {
    let p = rng.gen_range(1..=5);
    let n = rng.gen_range(p + 1..=p + 7);
    let pts: Vec<Point3> = (0..n)
        .map(|_| Point3::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)))
        .collect();
    let w = (0..n).map(|_| if unit_weights { 1.0 } else { rng.gen_range(0.3..3.0) }).collect();
    let knots = random_knots(rng, p, n);
    NurbsCurve::new(p, pts, w, knots).unwrap()
}

fn near_knot(u: f64, c: &NurbsCurve, gap: f64) -> bool {
    c.knots().as_slice().iter().any(|k| (k - u).abs() < gap)
}

#[test]
fn quarter_circle_is_exact() {
    let c = quarter_circle();
    for k in 0..=1000 {
        let u = k as f64 / 1000.0;
        let p = c.point(u).unwrap();
        assert!((p.norm() - 1.0).abs() < 1e-12, "u = {u}: radius {}", p.norm());
        let (kappa, t) = c.curvature_and_tangent(u).unwrap();
        assert!((kappa - 1.0).abs() < 1e-9, "u = {u}: curvature {kappa}");
        assert!(t.dot(&p).abs() < 1e-9 && (t.norm() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn basis_matches_naive_recursion() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let p = rng.gen_range(1..=5);
        let n = rng.gen_range(p + 1..=p + 8);
        let knots = random_knots(&mut rng, p, n);
        let u: f64 = rng.gen_range(0.0..1.0);
        let nz = basis_functions(u, p, &knots).unwrap();
        let sum: f64 = nz.iter().map(|(_, v)| v).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        for i in 0..n {
            let expected = naive_basis(i, p, u, knots.as_slice());
            let got = nz.iter().find(|(j, _)| *j == i).map_or(0.0, |(_, v)| *v);
            assert!((got - expected).abs() < 1e-12, "p={p} i={i} u={u}: {got} vs {expected}");
        }
    }
}

#[test]
fn clamped_ends_interpolate() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let c = random_curve(&mut rng, false);
        let pts = c.control_points();
        assert!((c.point(0.0).unwrap() - pts[0]).norm() < 1e-12);
        assert!((c.point(1.0).unwrap() - pts[pts.len() - 1]).norm() < 1e-12);
    }
}

#[test]
fn unit_weight_points_stay_in_hull() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let dirs: Vec<Point3> = (0..200)
        .map(|_| Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)).normalize())
        .collect();
    for _ in 0..100 {
        let c = random_curve(&mut rng, true);
        for k in 0..=50 {
            let x = c.point(k as f64 / 50.0).unwrap();
            for d in &dirs {
                let support = c.control_points().iter().map(|q| q.dot(d)).fold(f64::NEG_INFINITY, f64::max);
                assert!(x.dot(d) <= support + 1e-9);
            }
        }
    }
}

#[test]
fn raising_a_weight_pulls_the_curve() {
    let base = NurbsCurve::clamped_uniform(
        3,
        vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 2.0, 0.0),
            Point3::new(2.0, 2.0, 1.0),
            Point3::new(3.0, 0.0, 0.0),
            Point3::new(4.0, 1.0, 0.0),
        ],
    )
    .unwrap();
    let target = base.control_points()[2];
    let mut pulled = base.clone();
    pulled.set_weight(2, 4.0).unwrap();
    for k in 1..50 {
        let u = k as f64 / 50.0;
        let d0 = (base.point(u).unwrap() - target).norm();
        let d1 = (pulled.point(u).unwrap() - target).norm();
        assert!(d1 <= d0 + 1e-12, "u = {u}");
    }
}

#[test]
fn derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let h = 1e-6;
    let mut checked = 0;
    while checked < 1000 {
        let c = random_curve(&mut rng, false);
        let u = rng.gen_range(0.01..0.99);
        if near_knot(u, &c, 1e-3) {
            continue;
        }
        let d = c.derivatives(u, 2).unwrap();
        let (dp, dm) = (c.derivatives(u + h, 1).unwrap(), c.derivatives(u - h, 1).unwrap());
        let fd1 = (c.point(u + h).unwrap() - c.point(u - h).unwrap()) / (2.0 * h);
        let fd2 = (dp[0] - dm[0]) / (2.0 * h);
        assert!((d[0] - fd1).norm() <= 1e-5 * d[0].norm().max(1.0), "first derivative at {u}");
        assert!((d[1] - fd2).norm() <= 1e-5 * d[1].norm().max(1.0), "second derivative at {u}");
        checked += 1;
    }
}

#[test]
fn singular_speed_is_an_error() {
    let p = Point3::new(1.0, 1.0, 0.0);
    let c = NurbsCurve::clamped_uniform(3, vec![p, p, p, Point3::new(2.0, 0.0, 0.0)]).unwrap();
    assert!(matches!(c.curvature_and_tangent(0.0), Err(GeomError::SingularParametrization { .. })));
}

fn random_surface(rng: &mut ChaCha8Rng) -> NurbsSurface {
    let (p, q) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
    let (n, m) = (rng.gen_range(p + 1..=p + 4), rng.gen_range(q + 1..=q + 4));
    let net = (0..n)
        .map(|i| (0..m).map(|j| Point3::new(i as f64, j as f64, rng.gen_range(-1.0..1.0))).collect())
        .collect();
    let w = (0..n).map(|_| (0..m).map(|_| rng.gen_range(0.3..3.0)).collect()).collect();
    let (ku, kv) = (random_knots(rng, p, n), random_knots(rng, q, m));
    NurbsSurface::new(p, q, net, w, ku, kv).unwrap()
}

#[test]
fn surface_boundary_is_first_row_curve() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..100 {
        let s = random_surface(&mut rng);
        let row = NurbsCurve::new(
            s.degrees().0,
            s.control_net().iter().map(|r| r[0]).collect(),
            s.weights().iter().map(|r| r[0]).collect(),
            s.knots_u().clone(),
        )
        .unwrap();
        for k in 0..=20 {
            let u = k as f64 / 20.0;
            assert!((s.point(u, 0.0).unwrap() - row.point(u).unwrap()).norm() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn weight_scaling_leaves_geometry(seed in any::<u64>(), lambda in 0.01f64..100.0, u in 0.0f64..=1.0, v in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_curve(&mut rng, false);
        let cs = c.with_scaled_weights(lambda).unwrap();
        prop_assert!((c.point(u).unwrap() - cs.point(u).unwrap()).norm() < 1e-12);
        let (d, ds) = (c.derivatives(u, 2).unwrap(), cs.derivatives(u, 2).unwrap());
        for (a, b) in d.iter().zip(&ds) {
            prop_assert!((a - b).norm() <= 1e-9 * a.norm().max(1.0));
        }
        let s = random_surface(&mut rng);
        let ss = s.with_scaled_weights(lambda).unwrap();
        prop_assert!((s.point(u, v).unwrap() - ss.point(u, v).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn sampled_tangents_are_unit(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_curve(&mut rng, false);
        if let Ok(samples) = c.sample(20) {
            prop_assert_eq!(samples.len(), 21);
            for s in samples {
                prop_assert!((s.tangent.norm() - 1.0).abs() < 1e-9);
                prop_assert!(s.curvature >= 0.0);
            }
        }
    }
}

fn sections(rng: &mut ChaCha8Rng, count: usize) -> Vec<NurbsCurve> {
    let knots = random_knots(rng, 3, 7);
    (0..count)
        .map(|k| {
            let pts = (0..7).map(|i| Point3::new(i as f64, 2.0 * k as f64, rng.gen_range(0.0..2.0))).collect();
            // Rough weight jumps between sections can skin to negative weights.
            let w = (0..7).map(|_| rng.gen_range(0.8..1.25)).collect();
            NurbsCurve::new(3, pts, w, knots.clone()).unwrap()
        })
        .collect()
}

#[test]
fn loft_passes_through_sections() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for count in [3, 4, 6] {
        let secs = sections(&mut rng, count);
        let s = loft_surface(&secs, 2).unwrap();
        let (_, (v0, v1)) = s.domain();
        for (k, sec) in secs.iter().enumerate() {
            let v = v0 + (v1 - v0) * k as f64 / (count - 1) as f64;
            for i in 0..=200 {
                let u = i as f64 / 200.0;
                assert!((s.point(u, v).unwrap() - sec.point(u).unwrap()).norm() < 1e-9, "section {k} u {u}");
            }
        }
    }
    let mut bad = sections(&mut rng, 3);
    bad[1] = NurbsCurve::clamped_uniform(2, bad[1].control_points().to_vec()).unwrap();
    assert!(matches!(loft_surface(&bad, 2), Err(GeomError::Incompatible(_))));
}

#[test]
fn grid_nodes_sit_on_the_surface() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let s = loft_surface(&sections(&mut rng, 4), 3).unwrap();
    let (nu, nv) = (10, 6);
    let g = extract_grid(&s, nu, nv).unwrap();
    assert_eq!(g.nodes.len(), (nu + 1) * (nv + 1));
    assert_eq!(g.edges.len(), nu * (nv + 1) + nv * (nu + 1));
    assert_eq!(g.boundary.iter().filter(|&&b| b).count(), 2 * (nu + nv));
    for (p, &(u, v)) in g.nodes.iter().zip(&g.params) {
        assert!((p - s.point(u, v).unwrap()).norm() < 1e-12);
    }
    for &(a, b) in &g.edges {
        assert!((g.nodes[a] - g.nodes[b]).norm() > 1e-9);
    }
}

#[test]
fn collapsed_surface_is_degenerate() {
    let p = Point3::new(1.0, 1.0, 1.0);
    let s = NurbsSurface::new(
        1,
        1,
        vec![vec![p, p], vec![p, p]],
        vec![vec![1.0; 2]; 2],
        KnotVector::new(vec![0.0, 0.0, 1.0, 1.0]).unwrap(),
        KnotVector::new(vec![0.0, 0.0, 1.0, 1.0]).unwrap(),
    )
    .unwrap();
    assert!(matches!(extract_grid(&s, 4, 4), Err(GeomError::Degenerate(_))));
}
