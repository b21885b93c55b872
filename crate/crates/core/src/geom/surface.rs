use serde::{Deserialize, Serialize};

use super::basis::{basis_in_span, find_span};
use super::io::SurfaceJson;
use super::{check_weights, GeomError, KnotVector, Point3};

/// Tensor-product rational surface. `control_net[i][j]` has `i` running
/// along u (degree `p`) and `j` along v (degree `q`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SurfaceJson", into = "SurfaceJson")]
pub struct NurbsSurface {
    degree_u: usize,
    degree_v: usize,
    control_net: Vec<Vec<Point3>>,
    weights: Vec<Vec<f64>>,
    knots_u: KnotVector,
    knots_v: KnotVector,
}

impl NurbsSurface {
    pub fn new(
        degree_u: usize,
        degree_v: usize,
        control_net: Vec<Vec<Point3>>,
        weights: Vec<Vec<f64>>,
        knots_u: KnotVector,
        knots_v: KnotVector,
    ) -> Result<Self, GeomError> {
        knots_u.check_degree(degree_u)?;
        knots_v.check_degree(degree_v)?;
        let rows = control_net.len();
        let cols = control_net.first().map_or(0, Vec::len);
        if control_net.iter().any(|r| r.len() != cols) {
            return Err(GeomError::Invalid("control net is not rectangular".into()));
        }
        if weights.len() != rows || weights.iter().any(|r| r.len() != cols) {
            return Err(GeomError::Invalid("weight grid does not match control net".into()));
        }
        if knots_u.len() != rows + degree_u + 1 {
            return Err(GeomError::Invalid(format!(
                "{} u-knots for {rows} rows of degree {degree_u}",
                knots_u.len()
            )));
        }
        if knots_v.len() != cols + degree_v + 1 {
            return Err(GeomError::Invalid(format!(
                "{} v-knots for {cols} columns of degree {degree_v}",
                knots_v.len()
            )));
        }
        if control_net.iter().flatten().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(GeomError::Invalid("non-finite control point".into()));
        }
        check_weights(weights.iter().flatten())?;
        Ok(Self { degree_u, degree_v, control_net, weights, knots_u, knots_v })
    }

    pub fn degrees(&self) -> (usize, usize) {
        (self.degree_u, self.degree_v)
    }

    pub fn control_net(&self) -> &[Vec<Point3>] {
        &self.control_net
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn knots_u(&self) -> &KnotVector {
        &self.knots_u
    }

    pub fn knots_v(&self) -> &KnotVector {
        &self.knots_v
    }

    /// `([a, b], [c, d])`.
    pub fn domain(&self) -> ((f64, f64), (f64, f64)) {
        (self.knots_u.domain(self.degree_u), self.knots_v.domain(self.degree_v))
    }

    pub fn with_scaled_weights(&self, factor: f64) -> Result<Self, GeomError> {
        let weights = self
            .weights
            .iter()
            .map(|r| r.iter().map(|w| w * factor).collect())
            .collect();
        Self::new(
            self.degree_u,
            self.degree_v,
            self.control_net.clone(),
            weights,
            self.knots_u.clone(),
            self.knots_v.clone(),
        )
    }

    pub fn point(&self, u: f64, v: f64) -> Result<Point3, GeomError> {
        let su = find_span(&self.knots_u, self.degree_u, u)?;
        let sv = find_span(&self.knots_v, self.degree_v, v)?;
        let nu = basis_in_span(&self.knots_u, su, self.degree_u, u);
        let nv = basis_in_span(&self.knots_v, sv, self.degree_v, v);
        let mut num = Point3::zeros();
        let mut den = 0.0;
        for (a, bu) in nu.iter().enumerate() {
            let i = su - self.degree_u + a;
            for (b, bv) in nv.iter().enumerate() {
                let j = sv - self.degree_v + b;
                let nw = bu * bv * self.weights[i][j];
                num += self.control_net[i][j] * nw;
                den += nw;
            }
        }
        Ok(num / den)
    }
}

impl TryFrom<SurfaceJson> for NurbsSurface {
    type Error = GeomError;
    fn try_from(j: SurfaceJson) -> Result<Self, Self::Error> {
        let net = j
            .points
            .iter()
            .map(|row| row.iter().map(|p| Point3::new(p[0], p[1], p[2])).collect())
            .collect();
        Self::new(
            j.degree,
            j.degree_v,
            net,
            j.weights,
            KnotVector::new(j.knots)?,
            KnotVector::new(j.knots_v)?,
        )
    }
}

impl From<NurbsSurface> for SurfaceJson {
    fn from(s: NurbsSurface) -> Self {
        SurfaceJson {
            degree: s.degree_u,
            degree_v: s.degree_v,
            knots: s.knots_u.into(),
            knots_v: s.knots_v.into(),
            points: s
                .control_net
                .iter()
                .map(|r| r.iter().map(|p| [p.x, p.y, p.z]).collect())
                .collect(),
            weights: s.weights,
        }
    }
}
