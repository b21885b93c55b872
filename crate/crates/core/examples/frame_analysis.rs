//! Cantilever check against beam theory, then the reference grid shell
//! under self weight and a nodal mesh load.

use gridform::evo::reference_problem;
use gridform::frame::{
    analyze, assemble_stiffness, max_stress, solve_displacements, Element, GridModel, LoadCase, Material, Section,
    FIXED, FREE,
};
use nalgebra::Vector3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (n, l, p) = (10, 4.0, 2.0e3);
    let mut supports = vec![FREE; n + 1];
    supports[0] = FIXED;
    let beam = GridModel {
        nodes: (0..=n).map(|i| Vector3::new(l * i as f64 / n as f64, 0.0, 0.0)).collect(),
        elements: (0..n)
            .map(|i| Element {
                nodes: [i, i + 1],
                material: Material::default(),
                section: Section::default(),
                orientation: [0.0, 0.0, 1.0],
            })
            .collect(),
        supports,
        boundary: vec![false; n + 1],
        member_lines: vec![(0..=n).collect()],
    };
    let mut f = vec![0.0; beam.n_dofs()];
    f[6 * n + 2] = -p;
    let d = solve_displacements(&assemble_stiffness(&beam)?, &f, &beam.supports)?;
    let (e, s) = (Material::default().elastic_modulus, Section::default());
    println!("cantilever tip deflection {:.6e} m (PL^3/3EI = {:.6e})", -d[6 * n + 2], p * l.powi(3) / (3.0 * e * s.i_y()));
    println!("root stress {:.6e} Pa (Mc/I = {:.6e})", max_stress(&beam, &d)?, p * l * 0.1 / s.i_y());

    let problem = reference_problem();
    let grid = problem.model(&problem.baseline())?;
    let a = analyze(&grid, &[LoadCase::gravity(), LoadCase::mesh(0.02)])?;
    println!("reference grid: {} nodes, {} elements", grid.nodes.len(), grid.elements.len());
    for r in &a.results {
        println!(
            "  {:7}  U={:.6e}  max|dz|={:.4e} m  sigma_max={:.4e} Pa",
            r.case.label(),
            r.strain_energy,
            r.max_z_displacement,
            r.sigma_max
        );
    }
    println!("  mass {:.1} kg, max member curvature {:.5} 1/m", a.objectives.mass, grid.max_member_curvature());
    Ok(())
}
