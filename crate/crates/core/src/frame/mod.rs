//! Linear-elastic space-frame analysis for grid shells.
//!
//! Six DOF per node, Euler–Bernoulli members, a skyline Cholesky solve of
//! the supported system, and the quantities used as form-finding
//! objectives: strain energy per load case, mass and extreme-fiber stress.

mod analysis;
pub mod element;
mod io;
pub mod skyline;

use nalgebra::{Rotation3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::GridSkeleton;

pub use analysis::{
    analyze, assemble_stiffness, build_load_vector, element_strain_energies, max_stress,
    solve_displacements, strain_energy, total_mass, Analysis, AnalysisResult, FactoredSystem,
    StructuralObjectives,
};
pub use io::ModelJson;
pub use skyline::SkylineMatrix;

/// Standard gravity, m/s².
pub const GRAVITY: f64 = 9.81;

pub const DOF_PER_NODE: usize = 6;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("stiffness singular at reduced DOF {dof}: structure is a mechanism or under-constrained")]
    Mechanism { dof: usize },
    #[error("solver residual {residual:e} exceeds bound {bound:e}")]
    Residual { residual: f64, bound: f64 },
    #[error("member curvature {kappa:e} exceeds cap {cap:e}")]
    CurvatureCap { kappa: f64, cap: f64 },
    #[error("load case {case}: {source}")]
    Case {
        case: String,
        #[source]
        source: Box<FrameError>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    /// Pa
    pub elastic_modulus: f64,
    /// Pa
    pub shear_modulus: f64,
    /// kg/m³
    pub density: f64,
}

impl Default for Material {
    /// Glued laminated timber defaults.
    fn default() -> Self {
        Self { elastic_modulus: 11.5e9, shear_modulus: 0.72e9, density: 420.0 }
    }
}

impl Material {
    fn validate(&self) -> Result<(), FrameError> {
        let ok = [self.elastic_modulus, self.shear_modulus, self.density]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        ok.then_some(())
            .ok_or_else(|| FrameError::InvalidModel(format!("material constants must be positive: {self:?}")))
    }
}

/// Solid rectangular section; `height` lies along the member's local z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub width: f64,
    pub height: f64,
}

impl Default for Section {
    fn default() -> Self {
        Self { width: 0.1, height: 0.2 }
    }
}

impl Section {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn i_y(&self) -> f64 {
        self.width * self.height.powi(3) / 12.0
    }

    pub fn i_z(&self) -> f64 {
        self.height * self.width.powi(3) / 12.0
    }

    /// Saint-Venant torsion constant of a solid rectangle (series
    /// approximation).
    pub fn torsion_constant(&self) -> f64 {
        let a = self.width.max(self.height);
        let b = self.width.min(self.height);
        a * b.powi(3) * (1.0 / 3.0 - 0.21 * (b / a) * (1.0 - b.powi(4) / (12.0 * a.powi(4))))
    }

    /// Curvature cap `1 / (150 h)` for bent laminated members.
    pub fn default_curvature_cap(&self) -> f64 {
        1.0 / (150.0 * self.height)
    }

    fn validate(&self) -> Result<(), FrameError> {
        (self.width.is_finite() && self.width > 0.0 && self.height.is_finite() && self.height > 0.0)
            .then_some(())
            .ok_or_else(|| FrameError::InvalidModel(format!("section dimensions must be positive: {self:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub nodes: [usize; 2],
    pub material: Material,
    pub section: Section,
    /// Reference direction for the local z axis.
    pub orientation: [f64; 3],
}

/// Constrained DOFs `[ux, uy, uz, rx, ry, rz]`.
pub type Restraint = [bool; 6];

pub const PINNED: Restraint = [true, true, true, false, false, false];
pub const FIXED: Restraint = [true; 6];
pub const FREE: Restraint = [false; 6];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportPolicy {
    /// Boundary translations fixed, rotations free.
    #[default]
    Pinned,
    Fixed,
}

impl SupportPolicy {
    pub fn restraint(self) -> Restraint {
        match self {
            SupportPolicy::Pinned => PINNED,
            SupportPolicy::Fixed => FIXED,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridModel {
    pub nodes: Vec<Vector3<f64>>,
    pub elements: Vec<Element>,
    /// One entry per node.
    pub supports: Vec<Restraint>,
    pub boundary: Vec<bool>,
    /// Node chains forming continuous members, used for the curvature cap.
    pub member_lines: Vec<Vec<usize>>,
}

impl GridModel {
    pub fn from_skeleton(
        skeleton: &GridSkeleton,
        material: Material,
        section: Section,
        policy: SupportPolicy,
    ) -> Result<Self, FrameError> {
        let elements = skeleton
            .edges
            .iter()
            .map(|&(i, j)| Element {
                nodes: [i, j],
                material,
                section,
                orientation: element::default_orientation(&skeleton.nodes[i], &skeleton.nodes[j]).into(),
            })
            .collect();
        let supports = skeleton
            .boundary
            .iter()
            .map(|&b| if b { policy.restraint() } else { FREE })
            .collect();
        let model = Self {
            nodes: skeleton.nodes.clone(),
            elements,
            supports,
            boundary: skeleton.boundary.clone(),
            member_lines: skeleton.member_lines(),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn n_dofs(&self) -> usize {
        DOF_PER_NODE * self.nodes.len()
    }

    pub fn validate(&self) -> Result<(), FrameError> {
        let n = self.nodes.len();
        if self.supports.len() != n || self.boundary.len() != n {
            return Err(FrameError::InvalidModel(format!(
                "{} nodes but {} support entries and {} boundary flags",
                n,
                self.supports.len(),
                self.boundary.len()
            )));
        }
        if self.nodes.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(FrameError::InvalidModel("non-finite node coordinate".into()));
        }
        for (k, e) in self.elements.iter().enumerate() {
            let [i, j] = e.nodes;
            if i >= n || j >= n {
                return Err(FrameError::InvalidModel(format!("element {k} references missing node")));
            }
            if i == j {
                return Err(FrameError::Geometry(format!("element {k} connects node {i} to itself")));
            }
            e.material.validate()?;
            e.section.validate()?;
            let o = Vector3::from(e.orientation);
            element::local_axes(&self.nodes[i], &self.nodes[j], &o)
                .map_err(|err| FrameError::Geometry(format!("element {k}: {err}")))?;
        }
        for line in &self.member_lines {
            if line.iter().any(|&i| i >= n) {
                return Err(FrameError::InvalidModel("member line references missing node".into()));
            }
        }
        Ok(())
    }

    /// Rigidly rotated copy; orientation vectors rotate with the members.
    pub fn rotated(&self, rotation: &Rotation3<f64>) -> Self {
        let mut out = self.clone();
        for p in out.nodes.iter_mut() {
            *p = rotation * *p;
        }
        for e in out.elements.iter_mut() {
            e.orientation = (rotation * Vector3::from(e.orientation)).into();
        }
        out
    }

    /// Largest discrete curvature along any member line, from the circle
    /// through each three consecutive nodes.
    pub fn max_member_curvature(&self) -> f64 {
        let mut kmax: f64 = 0.0;
        for line in &self.member_lines {
            for w in line.windows(3) {
                let (a, b, c) = (self.nodes[w[0]], self.nodes[w[1]], self.nodes[w[2]]);
                let (ab, bc, ca) = ((b - a).norm(), (c - b).norm(), (a - c).norm());
                let denom = ab * bc * ca;
                if denom > 0.0 {
                    kmax = kmax.max(2.0 * (b - a).cross(&(c - a)).norm() / denom);
                }
            }
        }
        kmax
    }

    pub fn check_curvature_cap(&self, cap: f64) -> Result<(), FrameError> {
        let kappa = self.max_member_curvature();
        if kappa > cap {
            Err(FrameError::CurvatureCap { kappa, cap })
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadKind {
    /// Self weight, magnitude is the gravitational acceleration.
    Gravity,
    /// Equal downward force at every node.
    Mesh,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadCase {
    pub kind: LoadKind,
    pub magnitude: f64,
}

impl LoadCase {
    pub fn gravity() -> Self {
        Self { kind: LoadKind::Gravity, magnitude: GRAVITY }
    }

    pub fn mesh(load: f64) -> Self {
        Self { kind: LoadKind::Mesh, magnitude: load }
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            LoadKind::Gravity => "gravity",
            LoadKind::Mesh => "mesh",
        }
    }
}

/// The two cases used as objectives: self weight and a 0.02 node load.
pub fn default_cases() -> Vec<LoadCase> {
    vec![LoadCase::gravity(), LoadCase::mesh(0.02)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn section_properties() {
        let s = Section { width: 0.1, height: 0.2 };
        assert!((s.area() - 0.02).abs() < 1e-15);
        assert!((s.i_y() - 0.1 * 0.008 / 12.0).abs() < 1e-18);
        assert!(s.i_y() > s.i_z());
        // J of a square: 0.1406 a^4
        let sq = Section { width: 1.0, height: 1.0 };
        assert!((sq.torsion_constant() - 0.1406).abs() < 2e-3);
        assert!((s.default_curvature_cap() - 1.0 / 30.0).abs() < 1e-15);
    }

    #[test]
    fn straight_line_has_no_member_curvature_and_circle_has_one() {
        let nodes: Vec<_> = (0..5).map(|i| Vector3::new(i as f64, 0.0, 0.0)).collect();
        let mut m = GridModel {
            nodes,
            elements: vec![],
            supports: vec![FREE; 5],
            boundary: vec![false; 5],
            member_lines: vec![(0..5).collect()],
        };
        assert_eq!(m.max_member_curvature(), 0.0);
        m.nodes = (0..5)
            .map(|i| {
                let t = i as f64 * 0.3;
                Vector3::new(2.0 * t.cos(), 2.0 * t.sin(), 0.0)
            })
            .collect();
        assert!((m.max_member_curvature() - 0.5).abs() < 1e-12);
        assert!(m.check_curvature_cap(0.4).is_err());
        assert!(m.check_curvature_cap(0.6).is_ok());
    }
}
