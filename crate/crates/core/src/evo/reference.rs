use serde::{Deserialize, Serialize};

use super::{EvoError, ObjectiveVector, Problem};
use crate::frame::{analyze, default_cases, Analysis, GridModel, LoadCase, Material, Section, SupportPolicy};
use crate::geom::basis::find_span;
use crate::geom::{extract_grid, loft_surface, GeomError, KnotVector, NurbsCurve, NurbsSurface, Point3};

/// One design variable acting on a section curve's control point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DesignVariable {
    ControlPointZ { curve: usize, index: usize, lower: f64, upper: f64 },
    Weight { curve: usize, index: usize, lower: f64, upper: f64 },
}

impl DesignVariable {
    fn target(&self) -> (usize, usize) {
        match *self {
            Self::ControlPointZ { curve, index, .. } | Self::Weight { curve, index, .. } => (curve, index),
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            Self::ControlPointZ { lower, upper, .. } | Self::Weight { lower, upper, .. } => (lower, upper),
        }
    }

    fn read(&self, curves: &[NurbsCurve]) -> f64 {
        let (c, i) = self.target();
        match self {
            Self::ControlPointZ { .. } => curves[c].control_points()[i].z,
            Self::Weight { .. } => curves[c].weights()[i],
        }
    }

    fn write(&self, curves: &mut [NurbsCurve], value: f64) -> Result<(), GeomError> {
        let (c, i) = self.target();
        match self {
            Self::ControlPointZ { .. } => {
                let mut p = curves[c].control_points()[i];
                p.z = value;
                curves[c].set_control_point(i, p)
            }
            Self::Weight { .. } => curves[c].set_weight(i, value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignVariableSpec {
    pub variables: Vec<DesignVariable>,
}

impl DesignVariableSpec {
    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.variables.iter().map(DesignVariable::bounds).collect()
    }

    pub fn validate(&self, curves: &[NurbsCurve]) -> Result<(), EvoError> {
        if self.variables.is_empty() {
            return Err(EvoError::Config("no design variables".into()));
        }
        for (k, v) in self.variables.iter().enumerate() {
            let (lo, hi) = v.bounds();
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(EvoError::Config(format!("variable {k}: bounds must be finite with lower < upper")));
            }
            if matches!(v, DesignVariable::Weight { .. }) && lo <= 0.0 {
                return Err(EvoError::Config(format!("variable {k}: weight lower bound must be positive")));
            }
            let (c, i) = v.target();
            if c >= curves.len() || i >= curves[c].control_points().len() {
                return Err(EvoError::Config(format!("variable {k}: no control point {i} on curve {c}")));
            }
        }
        Ok(())
    }

    /// Current values of the variables on `curves`.
    pub fn read(&self, curves: &[NurbsCurve]) -> Vec<f64> {
        self.variables.iter().map(|v| v.read(curves)).collect()
    }

    /// Copy of `curves` with `design` applied.
    pub fn apply(&self, curves: &[NurbsCurve], design: &[f64]) -> Result<Vec<NurbsCurve>, EvoError> {
        if design.len() != self.len() {
            return Err(EvoError::Length { expected: self.len(), found: design.len() });
        }
        let mut out = curves.to_vec();
        for (index, (v, &value)) in self.variables.iter().zip(design).enumerate() {
            let (lower, upper) = v.bounds();
            if !(lower..=upper).contains(&value) {
                return Err(EvoError::OutOfBounds { index, value, lower, upper });
            }
            v.write(&mut out, value)?;
        }
        Ok(out)
    }
}

/// Loft and grid settings shared by every evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSettings {
    pub loft_degree: usize,
    pub nu: usize,
    pub nv: usize,
    pub material: Material,
    pub section: Section,
    pub support: SupportPolicy,
    pub loads: Vec<LoadCase>,
    /// Defaults to the section's own limit when absent.
    pub curvature_cap: Option<f64>,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self {
            loft_degree: 2,
            nu: 16,
            nv: 8,
            material: Material::default(),
            section: Section::default(),
            support: SupportPolicy::default(),
            loads: default_cases(),
            curvature_cap: None,
        }
    }
}

impl GridSettings {
    pub fn cap(&self) -> f64 {
        self.curvature_cap.unwrap_or_else(|| self.section.default_curvature_cap())
    }
}

/// Section curves, the variables acting on them and the analysis settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormFindingProblem {
    pub curves: Vec<NurbsCurve>,
    pub variables: DesignVariableSpec,
    #[serde(default)]
    pub grid: GridSettings,
}

/// Insert `u` once, in homogeneous coordinates so the curve is unchanged.
fn insert_knot(curve: &NurbsCurve, u: f64) -> Result<NurbsCurve, GeomError> {
    let p = curve.degree();
    let knots = curve.knots().as_slice();
    let k = find_span(curve.knots(), p, u)?;
    let hom: Vec<(Point3, f64)> =
        curve.control_points().iter().zip(curve.weights()).map(|(pt, &w)| (pt * w, w)).collect();
    let mut out = Vec::with_capacity(hom.len() + 1);
    for i in 0..=hom.len() {
        let q = if i + p <= k {
            hom[i]
        } else if i > k {
            hom[i - 1]
        } else {
            let a = (u - knots[i]) / (knots[i + p] - knots[i]);
            (hom[i].0 * a + hom[i - 1].0 * (1.0 - a), a * hom[i].1 + (1.0 - a) * hom[i - 1].1)
        };
        out.push(q);
    }
    let mut new_knots = knots.to_vec();
    new_knots.insert(k + 1, u);
    let (pts, weights): (Vec<Point3>, Vec<f64>) = out.into_iter().map(|(pw, w)| (pw / w, w)).unzip();
    NurbsCurve::new(p, pts, weights, KnotVector::new(new_knots)?)
}

/// Refine `curve` until its knots equal `target`, which must contain them.
fn refine_to(curve: &NurbsCurve, target: &KnotVector) -> Result<NurbsCurve, GeomError> {
    let have = curve.knots().as_slice();
    let mut missing = Vec::new();
    let mut i = 0;
    for &t in target.as_slice() {
        if i < have.len() && (have[i] - t).abs() <= 1e-12 {
            i += 1;
        } else {
            missing.push(t);
        }
    }
    if i != have.len() {
        return Err(GeomError::Incompatible("section knots are not contained in the finest section".into()));
    }
    let mut out = curve.clone();
    for u in missing {
        out = insert_knot(&out, u)?;
    }
    Ok(out)
}

/// Bring every section onto the knot vector of the one with the most
/// control points.
fn compatible_sections(curves: &[NurbsCurve]) -> Result<Vec<NurbsCurve>, GeomError> {
    let finest = curves
        .iter()
        .max_by_key(|c| c.control_points().len())
        .ok_or_else(|| GeomError::Incompatible("no sections".into()))?;
    if curves.iter().any(|c| c.degree() != finest.degree()) {
        return Err(GeomError::Incompatible("sections differ in degree".into()));
    }
    curves.iter().map(|c| refine_to(c, finest.knots())).collect()
}

impl FormFindingProblem {
    pub fn validate(&self) -> Result<(), EvoError> {
        self.variables.validate(&self.curves)?;
        let g = &self.grid;
        if g.nu == 0 || g.nv == 0 || g.loft_degree == 0 || g.loft_degree >= self.curves.len() {
            return Err(EvoError::Config("grid needs nu, nv >= 1 and 1 <= loft degree < number of sections".into()));
        }
        if !(g.cap() > 0.0) {
            return Err(EvoError::Config("curvature cap must be positive".into()));
        }
        Ok(())
    }

    pub fn baseline(&self) -> Vec<f64> {
        self.variables.read(&self.curves)
    }

    pub fn surface(&self, design: &[f64]) -> Result<NurbsSurface, EvoError> {
        let curves = compatible_sections(&self.variables.apply(&self.curves, design)?)?;
        Ok(loft_surface(&curves, self.grid.loft_degree)?)
    }

    pub fn model(&self, design: &[f64]) -> Result<GridModel, EvoError> {
        let surface = self.surface(design)?;
        let skeleton = extract_grid(&surface, self.grid.nu, self.grid.nv)?;
        Ok(GridModel::from_skeleton(&skeleton, self.grid.material, self.grid.section, self.grid.support)?)
    }

    /// Full evaluation: curvature cap check, then analysis of every load case.
    pub fn evaluate_design(&self, design: &[f64]) -> Result<(ObjectiveVector, Analysis, GridModel), EvoError> {
        let model = self.model(design)?;
        model.check_curvature_cap(self.grid.cap())?;
        let analysis = analyze(&model, &self.grid.loads)?;
        let o = analysis.objectives;
        let objectives = ObjectiveVector { u_gravity: o.u_gravity, u_mesh: o.u_mesh, mass: o.mass, sigma_max: o.sigma_max };
        Ok((objectives, analysis, model))
    }
}

impl Problem for FormFindingProblem {
    fn bounds(&self) -> Vec<(f64, f64)> {
        self.variables.bounds()
    }

    fn objective_names(&self) -> Vec<String> {
        ObjectiveVector::NAMES.iter().map(|s| s.to_string()).collect()
    }

    fn evaluate(&self, design: &[f64]) -> Option<Vec<f64>> {
        self.evaluate_design(design).ok().map(|(o, _, _)| o.to_array().to_vec())
    }

    fn seed_design(&self) -> Option<Vec<f64>> {
        Some(self.baseline())
    }
}

const SPAN: f64 = 24.0;
const WIDTH: f64 = 12.0;
const RISE: f64 = 1.6;
const EDGE_APEX: f64 = 1.2;
const MIDDLE_POINTS: usize = 22;

/// Three cubic sections across a 24 m by 12 m plan: Bezier edges with four
/// control points and a 22-point middle curve.
pub fn reference_curves() -> Vec<NurbsCurve> {
    let edge = |y: f64| {
        // The Bezier apex sits at 3/4 of the inner control height.
        let h = EDGE_APEX / 0.75;
        let pts = (0..4).map(|i| Point3::new(SPAN * i as f64 / 3.0, y, if i == 0 || i == 3 { 0.0 } else { h })).collect();
        NurbsCurve::clamped_uniform(3, pts).expect("valid edge curve")
    };
    let knots = KnotVector::clamped_uniform(MIDDLE_POINTS, 3).expect("valid knots");
    let k = knots.as_slice();
    let middle_pts = (0..MIDDLE_POINTS)
        .map(|i| {
            let greville = (k[i + 1] + k[i + 2] + k[i + 3]) / 3.0;
            Point3::new(SPAN * greville, WIDTH / 2.0, RISE * (std::f64::consts::PI * greville).sin())
        })
        .collect();
    let middle = NurbsCurve::new(3, middle_pts, vec![1.0; MIDDLE_POINTS], knots).expect("valid middle curve");
    vec![edge(0.0), middle, edge(WIDTH)]
}

/// Reference problem: the inner z of one control point on each edge curve
/// (within 25% of the rise) and the weights of the middle curve's 11th and
/// 12th control points (within [0.2, 5]).
pub fn reference_problem() -> FormFindingProblem {
    let curves = reference_curves();
    let dz = 0.25 * RISE;
    let z = |curve: usize| {
        let base = curves[curve].control_points()[1].z;
        DesignVariable::ControlPointZ { curve, index: 1, lower: base - dz, upper: base + dz }
    };
    let w = |index| DesignVariable::Weight { curve: 1, index, lower: 0.2, upper: 5.0 };
    FormFindingProblem {
        variables: DesignVariableSpec { variables: vec![z(0), z(2), w(10), w(11)] },
        curves,
        grid: GridSettings::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn knot_insertion_keeps_the_curve() {
        let mut c = reference_curves().remove(0);
        c.set_weight(1, 2.5).unwrap();
        let target = KnotVector::clamped_uniform(MIDDLE_POINTS, 3).unwrap();
        let r = refine_to(&c, &target).unwrap();
        assert_eq!(r.control_points().len(), MIDDLE_POINTS);
        for s in 0..=200 {
            let u = s as f64 / 200.0;
            assert!((r.point(u).unwrap() - c.point(u).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn baseline_is_feasible_and_deterministic() {
        let p = reference_problem();
        p.validate().unwrap();
        let base = p.baseline();
        let (a, _, model) = p.evaluate_design(&base).unwrap();
        let (b, _, _) = p.evaluate_design(&base).unwrap();
        assert_eq!(a, b);
        assert_eq!(model.nodes.len(), 17 * 9);
        assert!(a.to_array().iter().all(|v| v.is_finite() && *v > 0.0));
    }

    #[test]
    fn out_of_bounds_is_rejected() {
        let p = reference_problem();
        let mut d = p.baseline();
        d[2] = 10.0;
        assert!(matches!(p.evaluate_design(&d), Err(EvoError::OutOfBounds { index: 2, .. })));
    }
}
