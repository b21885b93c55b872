use gridform::evo::reference_problem;
use gridform::frame::{
    analyze, assemble_stiffness, build_load_vector, element_strain_energies, max_stress, solve_displacements,
    strain_energy, total_mass, Element, FrameError, GridModel, LoadCase, Material, Section, FIXED, FREE, PINNED,
};
use nalgebra::{Rotation3, Vector3};
use proptest::prelude::*;

/// Straight member along x from a fixed base, `n_el` equal elements.
fn cantilever(length: f64, n_el: usize) -> GridModel {
    let nodes = (0..=n_el).map(|i| Vector3::new(length * i as f64 / n_el as f64, 0.0, 0.0)).collect();
    let elements = (0..n_el)
        .map(|i| Element {
            nodes: [i, i + 1],
            material: Material::default(),
            section: Section::default(),
            orientation: [0.0, 0.0, 1.0],
        })
        .collect();
    let mut supports = vec![FREE; n_el + 1];
    supports[0] = FIXED;
    GridModel {
        nodes,
        elements,
        supports,
        boundary: vec![false; n_el + 1],
        member_lines: vec![(0..=n_el).collect()],
    }
}

fn tip_load(model: &GridModel, dof: usize, p: f64) -> Vec<f64> {
    let mut f = vec![0.0; model.n_dofs()];
    f[model.n_dofs() - 6 + dof] = p;
    f
}

fn solve(model: &GridModel, f: &[f64]) -> Vec<f64> {
    solve_displacements(&assemble_stiffness(model).unwrap(), f, &model.supports).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn axial_bar_closed_forms() {
    let (l, p) = (3.0, 5.0e4);
    let m = cantilever(l, 4);
    let s = Section::default();
    let ea = Material::default().elastic_modulus * s.area();
    let f = tip_load(&m, 0, p);
    let d = solve(&m, &f);
    assert!(rel(d[m.n_dofs() - 6], p * l / ea) < 1e-10);
    assert!(rel(strain_energy(&f, &d), p * p * l / (2.0 * ea)) < 1e-10);
    assert!(rel(max_stress(&m, &d).unwrap(), p / s.area()) < 1e-10);
}

#[test]
fn axial_stiffness_block() {
    let m = cantilever(2.0, 1);
    let k = assemble_stiffness(&m).unwrap();
    let ea_l = Material::default().elastic_modulus * Section::default().area() / 2.0;
    assert!(rel(k.get(0, 0), ea_l) < 1e-12);
    assert!(rel(k.get(6, 6), ea_l) < 1e-12);
    assert!(rel(k.get(0, 6), -ea_l) < 1e-12);
}

#[test]
fn cantilever_tip_deflection_and_root_stress() {
    let (l, p) = (4.0, 2.0e3);
    let m = cantilever(l, 10);
    let s = Section::default();
    let e = Material::default().elastic_modulus;
    let d = solve(&m, &tip_load(&m, 2, -p));
    let expected = p * l.powi(3) / (3.0 * e * s.i_y());
    let tip = -d[m.n_dofs() - 4];
    assert!(rel(tip, expected) < 5e-3, "tip {tip} vs {expected}");
    let sigma = p * l * (0.5 * s.height) / s.i_y();
    let got = max_stress(&m, &d).unwrap();
    assert!(rel(got, sigma) < 1e-2, "stress {got} vs {sigma}");
}

#[test]
fn zero_load_gives_zero_response() {
    let m = cantilever(2.0, 3);
    let d = solve(&m, &vec![0.0; m.n_dofs()]);
    assert!(d.iter().all(|&v| v == 0.0));
    let a = analyze(&m, &[LoadCase::mesh(0.0)]).unwrap();
    let o = a.objectives;
    assert_eq!((o.u_mesh, o.u_gravity, o.sigma_max, o.max_z_displacement), (0.0, 0.0, 0.0, 0.0));
    assert!(o.mass > 0.0);
}

#[test]
fn load_vectors_and_mass() {
    let m = cantilever(2.0, 1);
    let elem = Element { section: Section { width: 0.1, height: 0.2 }, ..m.elements[0] };
    let m = GridModel { elements: vec![elem], ..m };
    let g = build_load_vector(&m, &LoadCase::gravity());
    assert!((g[2] + 82.404).abs() < 1e-9 && (g[8] + 82.404).abs() < 1e-9);
    assert!((total_mass(&m) - 16.8).abs() < 1e-12);

    let chain = cantilever(8.0, 8);
    let f = build_load_vector(&chain, &LoadCase::mesh(0.02));
    assert!((f.iter().sum::<f64>() + 0.18).abs() < 1e-15);
    assert!(build_load_vector(&chain, &LoadCase::mesh(0.0)).iter().all(|&v| v == 0.0));

    let mut doubled = chain.clone();
    for e in doubled.elements.iter_mut() {
        e.section.width *= 2.0;
    }
    assert_eq!(total_mass(&doubled), 2.0 * total_mass(&chain));
    assert_eq!(total_mass(&GridModel { elements: vec![], ..chain }), 0.0);
}

#[test]
fn single_element_energy_is_total() {
    let m = cantilever(2.5, 1);
    let f = tip_load(&m, 2, -1.0e3);
    let d = solve(&m, &f);
    let u = strain_energy(&f, &d);
    assert!(rel(element_strain_energies(&m, &d).unwrap()[0], u) < 1e-12);
}

fn reference_model() -> GridModel {
    let p = reference_problem();
    p.model(&p.baseline()).unwrap()
}

#[test]
fn reference_stiffness_symmetry_and_rigid_modes() {
    let m = reference_model();
    let k = assemble_stiffness(&m).unwrap();
    let dense = k.to_dense();
    let kmax = k.max_abs();
    for i in 0..dense.len() {
        for j in 0..i {
            assert!((dense[i][j] - dense[j][i]).abs() < 1e-9 * kmax);
        }
    }
    let shift: Vec<f64> = (0..m.n_dofs()).map(|d| if d % 6 == 0 { 1.0 } else { 0.0 }).collect();
    let kd = k.mul_vec(&shift);
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(norm(&kd) < 1e-6 * kmax * norm(&shift));
}

#[test]
fn energy_identity_on_reference_grid() {
    let m = reference_model();
    for case in [LoadCase::gravity(), LoadCase::mesh(0.02)] {
        let f = build_load_vector(&m, &case);
        let d = solve(&m, &f);
        let u = strain_energy(&f, &d);
        let sum: f64 = element_strain_energies(&m, &d).unwrap().iter().sum();
        assert!((u - sum).abs() <= 1e-9 * u.max(1.0), "{u} vs {sum}");
    }
}

#[test]
fn superposition_and_stiffening() {
    let m = reference_model();
    let f1 = build_load_vector(&m, &LoadCase::gravity());
    let f2 = build_load_vector(&m, &LoadCase::mesh(3.5));
    let both: Vec<f64> = f1.iter().zip(&f2).map(|(a, b)| a + b).collect();
    let (d1, d2, d12) = (solve(&m, &f1), solve(&m, &f2), solve(&m, &both));
    let scale = d12.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    for k in 0..d12.len() {
        assert!((d12[k] - d1[k] - d2[k]).abs() <= 1e-9 * scale);
    }
    let mut stiff = m.clone();
    for e in stiff.elements.iter_mut() {
        e.material.elastic_modulus *= 2.0;
    }
    assert!(strain_energy(&f1, &solve(&stiff, &f1)) < strain_energy(&f1, &d1));
}

#[test]
fn mesh_load_scaling_is_linear() {
    let m = reference_model();
    let lambda = 3.0;
    let a = analyze(&m, &[LoadCase::mesh(0.02)]).unwrap().objectives;
    let b = analyze(&m, &[LoadCase::mesh(0.02 * lambda)]).unwrap().objectives;
    assert!(rel(b.u_mesh, lambda * lambda * a.u_mesh) < 1e-9);
    assert!(rel(b.max_z_displacement, lambda * a.max_z_displacement) < 1e-9);
    let again = analyze(&m, &[LoadCase::mesh(0.02)]).unwrap().objectives;
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&again).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn rigid_rotation_keeps_energy(ax in -1.0f64..1.0, ay in -1.0f64..1.0, az in 0.1f64..1.0, angle in 0.0f64..6.28) {
        let m = reference_model();
        prop_assert!(m.supports.iter().all(|s| *s == PINNED || *s == FREE));
        let rot = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(Vector3::new(ax, ay, az)), angle);
        let f = build_load_vector(&m, &LoadCase::gravity());
        let u = strain_energy(&f, &solve(&m, &f));
        let r = m.rotated(&rot);
        let mut fr = vec![0.0; f.len()];
        for (n, chunk) in f.chunks_exact(6).enumerate() {
            let force = rot * Vector3::new(chunk[0], chunk[1], chunk[2]);
            let moment = rot * Vector3::new(chunk[3], chunk[4], chunk[5]);
            fr[6 * n..6 * n + 3].copy_from_slice(force.as_slice());
            fr[6 * n + 3..6 * n + 6].copy_from_slice(moment.as_slice());
        }
        let ur = strain_energy(&fr, &solve(&r, &fr));
        prop_assert!(rel(ur, u) < 1e-9, "{} vs {}", ur, u);
    }
}

#[test]
fn curvature_cap_rejects_tight_members() {
    let m = reference_model();
    let cap = Section::default().default_curvature_cap();
    assert!(m.check_curvature_cap(cap).is_ok());
    assert!(matches!(m.check_curvature_cap(0.5 * m.max_member_curvature()), Err(FrameError::CurvatureCap { .. })));
}

#[test]
fn unsupported_model_is_an_error() {
    let mut m = cantilever(2.0, 2);
    m.supports[0] = FREE;
    let k = assemble_stiffness(&m).unwrap();
    assert!(solve_displacements(&k, &tip_load(&m, 2, -1.0), &m.supports).is_err());
}
