use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::element::{global_stiffness, local_axes, local_stiffness, transformation, Vector12};
use super::skyline::{CholeskyFactor, SkylineMatrix};
use super::{Element, FrameError, GridModel, LoadCase, LoadKind, Restraint, DOF_PER_NODE};

/// Relative residual accepted after a solve.
const RESIDUAL_TOL: f64 = 1e-8;

fn element_frame(model: &GridModel, e: &Element) -> Result<(nalgebra::Matrix3<f64>, f64), FrameError> {
    let [i, j] = e.nodes;
    local_axes(&model.nodes[i], &model.nodes[j], &Vector3::from(e.orientation))
}

fn element_dofs(e: &Element) -> [usize; 12] {
    let mut d = [0; 12];
    for (a, &n) in e.nodes.iter().enumerate() {
        for k in 0..DOF_PER_NODE {
            d[DOF_PER_NODE * a + k] = DOF_PER_NODE * n + k;
        }
    }
    d
}

fn gather(e: &Element, delta: &[f64]) -> Vector12 {
    Vector12::from_iterator(element_dofs(e).iter().map(|&d| delta[d]))
}

/// Global stiffness in skyline storage, `6 n` square.
pub fn assemble_stiffness(model: &GridModel) -> Result<SkylineMatrix, FrameError> {
    model.validate()?;
    let n_nodes = model.nodes.len();
    let mut lowest: Vec<usize> = (0..n_nodes).collect();
    for e in &model.elements {
        let m = e.nodes[0].min(e.nodes[1]);
        for &n in &e.nodes {
            lowest[n] = lowest[n].min(m);
        }
    }
    let first_row = (0..model.n_dofs())
        .map(|d| DOF_PER_NODE * lowest[d / DOF_PER_NODE])
        .collect();
    let mut k = SkylineMatrix::from_profile(first_row);
    for e in &model.elements {
        let (axes, length) = element_frame(model, e)?;
        let ke = global_stiffness(&e.material, &e.section, &axes, length);
        let dofs = element_dofs(e);
        for a in 0..12 {
            for b in a..12 {
                if dofs[a] <= dofs[b] {
                    k.add(dofs[a], dofs[b], ke[(a, b)]);
                } else {
                    k.add(dofs[b], dofs[a], ke[(a, b)]);
                }
            }
        }
    }
    Ok(k)
}

pub fn build_load_vector(model: &GridModel, case: &LoadCase) -> Vec<f64> {
    let mut f = vec![0.0; model.n_dofs()];
    match case.kind {
        LoadKind::Mesh => {
            for n in 0..model.nodes.len() {
                f[DOF_PER_NODE * n + 2] -= case.magnitude;
            }
        }
        LoadKind::Gravity => {
            for e in &model.elements {
                let [i, j] = e.nodes;
                let length = (model.nodes[j] - model.nodes[i]).norm();
                let half = 0.5 * e.material.density * e.section.area() * length * case.magnitude;
                f[DOF_PER_NODE * i + 2] -= half;
                f[DOF_PER_NODE * j + 2] -= half;
            }
        }
    }
    f
}

/// Cholesky factor of the stiffness restricted to unconstrained DOFs.
#[derive(Debug, Clone)]
pub struct FactoredSystem {
    n: usize,
    free: Vec<usize>,
    reduced: SkylineMatrix,
    factor: CholeskyFactor,
}

impl FactoredSystem {
    pub fn new(k: &SkylineMatrix, supports: &[Restraint]) -> Result<Self, FrameError> {
        let n = k.dim();
        if supports.len() * DOF_PER_NODE != n {
            return Err(FrameError::InvalidModel(format!(
                "{} support entries for {} DOFs",
                supports.len(),
                n
            )));
        }
        let free: Vec<usize> = (0..n)
            .filter(|&d| !supports[d / DOF_PER_NODE][d % DOF_PER_NODE])
            .collect();
        let reduced = k.submatrix(&free);
        let factor = reduced.clone().cholesky()?;
        Ok(Self { n, free, reduced, factor })
    }

    pub fn solve(&self, f: &[f64]) -> Result<Vec<f64>, FrameError> {
        let fr: Vec<f64> = self.free.iter().map(|&d| f[d]).collect();
        let dr = self.factor.solve(&fr);
        let kd = self.reduced.mul_vec(&dr);
        let residual = kd.iter().zip(&fr).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let bound = RESIDUAL_TOL * fr.iter().map(|v| v * v).sum::<f64>().sqrt();
        if residual > bound {
            return Err(FrameError::Residual { residual, bound });
        }
        let mut delta = vec![0.0; self.n];
        for (&d, v) in self.free.iter().zip(dr) {
            delta[d] = v;
        }
        Ok(delta)
    }
}

pub fn solve_displacements(
    k: &SkylineMatrix,
    f: &[f64],
    supports: &[Restraint],
) -> Result<Vec<f64>, FrameError> {
    FactoredSystem::new(k, supports)?.solve(f)
}

/// `½ Fᵀ δ`.
pub fn strain_energy(f: &[f64], delta: &[f64]) -> f64 {
    0.5 * f.iter().zip(delta).map(|(a, b)| a * b).sum::<f64>()
}

/// Local end forces `k_local · T · d` of one element.
fn end_forces(model: &GridModel, e: &Element, delta: &[f64]) -> Result<(Vector12, Vector12), FrameError> {
    let (axes, length) = element_frame(model, e)?;
    let d_local = transformation(&axes) * gather(e, delta);
    Ok((local_stiffness(&e.material, &e.section, length) * d_local, d_local))
}

/// `½ dᵀ k d` per element in local coordinates.
pub fn element_strain_energies(model: &GridModel, delta: &[f64]) -> Result<Vec<f64>, FrameError> {
    model
        .elements
        .iter()
        .map(|e| {
            let (f, d) = end_forces(model, e, delta)?;
            Ok(0.5 * d.dot(&f))
        })
        .collect()
}

pub fn total_mass(model: &GridModel) -> f64 {
    model
        .elements
        .iter()
        .map(|e| {
            let [i, j] = e.nodes;
            e.material.density * e.section.area() * (model.nodes[j] - model.nodes[i]).norm()
        })
        .sum()
}

/// Largest `|N|/A + |M_y| (h/2) / I_y + |M_z| (b/2) / I_z` over element ends.
pub fn max_stress(model: &GridModel, delta: &[f64]) -> Result<f64, FrameError> {
    let mut smax: f64 = 0.0;
    for e in &model.elements {
        let (f, _) = end_forces(model, e, delta)?;
        let s = &e.section;
        for end in 0..2 {
            let o = 6 * end;
            let sigma = f[o].abs() / s.area()
                + f[o + 4].abs() * (0.5 * s.height) / s.i_y()
                + f[o + 5].abs() * (0.5 * s.width) / s.i_z();
            smax = smax.max(sigma);
        }
    }
    Ok(smax)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisResult {
    pub case: LoadCase,
    pub forces: Vec<f64>,
    pub displacements: Vec<[f64; 6]>,
    pub strain_energy: f64,
    pub element_energies: Vec<f64>,
    pub mass: f64,
    pub sigma_max: f64,
    pub max_z_displacement: f64,
}

impl AnalysisResult {
    pub fn flat_displacements(&self) -> Vec<f64> {
        self.displacements.iter().flatten().copied().collect()
    }
}

/// Objective inputs combined over load cases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructuralObjectives {
    pub u_gravity: f64,
    pub u_mesh: f64,
    pub mass: f64,
    pub sigma_max: f64,
    pub max_z_displacement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub results: Vec<AnalysisResult>,
    pub objectives: StructuralObjectives,
}

/// Assemble and factor once, then solve each load case.
pub fn analyze(model: &GridModel, cases: &[LoadCase]) -> Result<Analysis, FrameError> {
    let k = assemble_stiffness(model)?;
    let label = |c: Option<&LoadCase>| c.map_or("none", LoadCase::label).to_string();
    let system = FactoredSystem::new(&k, &model.supports)
        .map_err(|e| FrameError::Case { case: label(cases.first()), source: Box::new(e) })?;
    let mass = total_mass(model);
    let mut results = Vec::with_capacity(cases.len());
    for case in cases {
        let wrap = |e| FrameError::Case { case: case.label().to_string(), source: Box::new(e) };
        let forces = build_load_vector(model, case);
        let delta = system.solve(&forces).map_err(wrap)?;
        let element_energies = element_strain_energies(model, &delta).map_err(wrap)?;
        let sigma_max = max_stress(model, &delta).map_err(wrap)?;
        let max_z_displacement = delta
            .iter()
            .skip(2)
            .step_by(DOF_PER_NODE)
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        results.push(AnalysisResult {
            case: *case,
            strain_energy: strain_energy(&forces, &delta),
            displacements: delta
                .chunks_exact(DOF_PER_NODE)
                .map(|c| [c[0], c[1], c[2], c[3], c[4], c[5]])
                .collect(),
            forces,
            element_energies,
            mass,
            sigma_max,
            max_z_displacement,
        });
    }
    let sum_energy = |kind| {
        results
            .iter()
            .filter(|r| r.case.kind == kind)
            .map(|r| r.strain_energy)
            .sum::<f64>()
    };
    let objectives = StructuralObjectives {
        u_gravity: sum_energy(LoadKind::Gravity),
        u_mesh: sum_energy(LoadKind::Mesh),
        mass,
        sigma_max: results.iter().fold(0.0, |m, r| m.max(r.sigma_max)),
        max_z_displacement: results.iter().fold(0.0, |m, r| m.max(r.max_z_displacement)),
    };
    Ok(Analysis { results, objectives })
}
