//! NURBS kernel: basis functions, rational curves and surfaces, curvature and
//! tangent extraction, lofting and grid extraction.
//!
//! Everything here is a pure function of immutable inputs.

pub mod basis;
mod curve;
mod grid;
mod io;
mod loft;
mod surface;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use basis::basis_functions;
pub use curve::{CurveSample, NurbsCurve};
pub use grid::{extract_grid, GridSkeleton};
pub use io::{CurveJson, SurfaceJson};
pub use loft::loft_surface;
pub use surface::NurbsSurface;

pub type Point3 = nalgebra::Vector3<f64>;

/// Smallest first-derivative norm accepted when extracting curvature.
pub const SINGULAR_SPEED: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("parameter {u} outside domain [{lo}, {hi}]")]
    Domain { u: f64, lo: f64, hi: f64 },
    #[error("invalid knot vector: {0}")]
    InvalidKnots(String),
    #[error("invalid NURBS definition: {0}")]
    Invalid(String),
    #[error("derivative order {0} not supported (max 2)")]
    UnsupportedOrder(usize),
    #[error("singular parametrization at u = {u} (|C'| < {SINGULAR_SPEED:e})")]
    SingularParametrization { u: f64 },
    #[error("incompatible sections: {0}")]
    Incompatible(String),
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
}

/// Non-decreasing sequence of parameter values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct KnotVector(Vec<f64>);

impl KnotVector {
    pub fn new(values: Vec<f64>) -> Result<Self, GeomError> {
        if values.len() < 2 {
            return Err(GeomError::InvalidKnots("fewer than two knots".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(GeomError::InvalidKnots("non-finite knot".into()));
        }
        if let Some(i) = values.windows(2).position(|w| w[0] > w[1]) {
            return Err(GeomError::InvalidKnots(format!(
                "decreasing at index {}: {} > {}",
                i,
                values[i],
                values[i + 1]
            )));
        }
        Ok(Self(values))
    }

    /// Clamped knots with uniformly spaced interior knots on `[0, 1]` for
    /// `n_ctrl` control points.
    pub fn clamped_uniform(n_ctrl: usize, degree: usize) -> Result<Self, GeomError> {
        if n_ctrl < degree + 1 {
            return Err(GeomError::InvalidKnots(format!(
                "{n_ctrl} control points cannot carry degree {degree}"
            )));
        }
        let n_spans = n_ctrl - degree;
        let mut v = vec![0.0; degree + 1];
        v.extend((1..n_spans).map(|i| i as f64 / n_spans as f64));
        v.extend(std::iter::repeat(1.0).take(degree + 1));
        Self::new(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parameter domain `[knots[p], knots[len - p - 1]]`.
    pub fn domain(&self, degree: usize) -> (f64, f64) {
        (self.0[degree], self.0[self.0.len() - degree - 1])
    }

    pub fn is_clamped(&self, degree: usize) -> bool {
        let n = self.0.len();
        n >= 2 * (degree + 1)
            && self.0[..=degree].iter().all(|&k| k == self.0[0])
            && self.0[n - degree - 1..].iter().all(|&k| k == self.0[n - 1])
    }

    pub(crate) fn check_degree(&self, degree: usize) -> Result<(), GeomError> {
        if degree == 0 {
            return Err(GeomError::Invalid("degree must be at least 1".into()));
        }
        if self.0.len() < 2 * (degree + 1) {
            return Err(GeomError::InvalidKnots(format!(
                "{} knots too few for degree {degree}",
                self.0.len()
            )));
        }
        let (a, b) = self.domain(degree);
        if a >= b {
            return Err(GeomError::InvalidKnots("empty parameter domain".into()));
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for KnotVector {
    type Error = GeomError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<KnotVector> for Vec<f64> {
    fn from(k: KnotVector) -> Self {
        k.0
    }
}

pub(crate) fn check_weights<'a>(weights: impl IntoIterator<Item = &'a f64>) -> Result<(), GeomError> {
    for (i, w) in weights.into_iter().enumerate() {
        if !(w.is_finite() && *w > 0.0) {
            return Err(GeomError::Invalid(format!("weight {i} = {w} is not positive")));
        }
    }
    Ok(())
}
