use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::element::default_orientation;
use super::{Element, FrameError, GridModel, LoadCase, Material, Restraint, Section, FREE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementJson {
    pub nodes: [usize; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<Material>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section: Option<Section>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportJson {
    pub node: usize,
    /// `[ux, uy, uz, rx, ry, rz]`, true = constrained.
    pub dofs: Restraint,
}

/// Model file: nodes, elements, supports, shared material and section
/// (overridable per element) and the load cases to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelJson {
    pub nodes: Vec<[f64; 3]>,
    pub elements: Vec<ElementJson>,
    pub supports: Vec<SupportJson>,
    #[serde(default)]
    pub material: Material,
    #[serde(default)]
    pub section: Section,
    pub loads: Vec<LoadCase>,
    #[serde(default)]
    pub boundary: Vec<usize>,
    #[serde(default)]
    pub member_lines: Vec<Vec<usize>>,
}

impl ModelJson {
    pub fn from_model(model: &GridModel, loads: &[LoadCase]) -> Self {
        let (material, section) = model
            .elements
            .first()
            .map_or((Material::default(), Section::default()), |e| (e.material, e.section));
        Self {
            nodes: model.nodes.iter().map(|p| [p.x, p.y, p.z]).collect(),
            elements: model
                .elements
                .iter()
                .map(|e| ElementJson {
                    nodes: e.nodes,
                    orientation: Some(e.orientation),
                    material: (e.material != material).then_some(e.material),
                    section: (e.section != section).then_some(e.section),
                })
                .collect(),
            supports: model
                .supports
                .iter()
                .enumerate()
                .filter(|(_, r)| r.iter().any(|b| *b))
                .map(|(node, r)| SupportJson { node, dofs: *r })
                .collect(),
            material,
            section,
            loads: loads.to_vec(),
            boundary: model
                .boundary
                .iter()
                .enumerate()
                .filter_map(|(i, b)| b.then_some(i))
                .collect(),
            member_lines: model.member_lines.clone(),
        }
    }

    pub fn into_model(self) -> Result<(GridModel, Vec<LoadCase>), FrameError> {
        let nodes: Vec<Vector3<f64>> = self.nodes.iter().map(|p| Vector3::new(p[0], p[1], p[2])).collect();
        let n = nodes.len();
        let mut elements = Vec::with_capacity(self.elements.len());
        for (k, e) in self.elements.into_iter().enumerate() {
            let [i, j] = e.nodes;
            if i >= n || j >= n {
                return Err(FrameError::InvalidModel(format!("element {k} references missing node")));
            }
            elements.push(Element {
                nodes: e.nodes,
                material: e.material.unwrap_or(self.material),
                section: e.section.unwrap_or(self.section),
                orientation: e
                    .orientation
                    .unwrap_or_else(|| default_orientation(&nodes[i], &nodes[j]).into()),
            });
        }
        let mut supports = vec![FREE; n];
        for s in &self.supports {
            *supports
                .get_mut(s.node)
                .ok_or_else(|| FrameError::InvalidModel(format!("support on missing node {}", s.node)))? = s.dofs;
        }
        let mut boundary = vec![false; n];
        for &b in &self.boundary {
            *boundary
                .get_mut(b)
                .ok_or_else(|| FrameError::InvalidModel(format!("boundary flag on missing node {b}")))? = true;
        }
        if self.loads.iter().any(|l| !(l.magnitude >= 0.0 && l.magnitude.is_finite())) {
            return Err(FrameError::InvalidModel("load magnitudes must be finite and non-negative".into()));
        }
        let model = GridModel { nodes, elements, supports, boundary, member_lines: self.member_lines };
        model.validate()?;
        Ok((model, self.loads))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_parses_with_defaults() {
        let text = r#"{
            "nodes": [[0,0,0],[2,0,0]],
            "elements": [{"nodes":[0,1]}],
            "supports": [{"node":0,"dofs":[true,true,true,true,true,true]}],
            "loads": [{"kind":"mesh","magnitude":0.02}]
        }"#;
        let doc: ModelJson = serde_json::from_str(text).unwrap();
        let (model, loads) = doc.into_model().unwrap();
        assert_eq!(model.elements[0].material, Material::default());
        assert_eq!(model.elements[0].orientation, [0.0, 0.0, 1.0]);
        assert_eq!(loads, vec![LoadCase::mesh(0.02)]);
    }

    #[test]
    fn bad_references_are_rejected() {
        let text = r#"{"nodes": [[0,0,0]], "elements": [{"nodes":[0,3]}], "supports": [], "loads": []}"#;
        let doc: ModelJson = serde_json::from_str(text).unwrap();
        assert!(doc.into_model().is_err());
        let text = r#"{"nodes": [[0,0,0],[1,0,0]], "elements": [{"nodes":[0,1]}], "supports": [],
                       "loads": [{"kind":"gravity","magnitude":-1}]}"#;
        let doc: ModelJson = serde_json::from_str(text).unwrap();
        assert!(doc.into_model().is_err());
    }
}
