use serde::{Deserialize, Serialize};

use super::basis::{basis_derivatives_in_span, basis_in_span, find_span};
use super::io::CurveJson;
use super::{check_weights, GeomError, KnotVector, Point3, SINGULAR_SPEED};

/// Rational B-spline curve of degree `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveJson", into = "CurveJson")]
pub struct NurbsCurve {
    degree: usize,
    control_points: Vec<Point3>,
    weights: Vec<f64>,
    knots: KnotVector,
}

/// One station of a sampled curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub position: Point3,
    pub u: f64,
    pub curvature: f64,
    pub tangent: Point3,
}

impl NurbsCurve {
    pub fn new(
        degree: usize,
        control_points: Vec<Point3>,
        weights: Vec<f64>,
        knots: KnotVector,
    ) -> Result<Self, GeomError> {
        knots.check_degree(degree)?;
        if knots.len() != control_points.len() + degree + 1 {
            return Err(GeomError::Invalid(format!(
                "{} knots for {} control points of degree {degree}",
                knots.len(),
                control_points.len()
            )));
        }
        if weights.len() != control_points.len() {
            return Err(GeomError::Invalid(format!(
                "{} weights for {} control points",
                weights.len(),
                control_points.len()
            )));
        }
        if control_points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(GeomError::Invalid("non-finite control point".into()));
        }
        check_weights(&weights)?;
        Ok(Self { degree, control_points, weights, knots })
    }

    /// Non-rational clamped curve with uniform interior knots.
    pub fn clamped_uniform(degree: usize, control_points: Vec<Point3>) -> Result<Self, GeomError> {
        let knots = KnotVector::clamped_uniform(control_points.len(), degree)?;
        let weights = vec![1.0; control_points.len()];
        Self::new(degree, control_points, weights, knots)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn control_points(&self) -> &[Point3] {
        &self.control_points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn knots(&self) -> &KnotVector {
        &self.knots
    }

    /// `[a, b]`.
    pub fn domain(&self) -> (f64, f64) {
        self.knots.domain(self.degree)
    }

    pub fn set_control_point(&mut self, i: usize, p: Point3) -> Result<(), GeomError> {
        if !p.iter().all(|c| c.is_finite()) {
            return Err(GeomError::Invalid("non-finite control point".into()));
        }
        *self
            .control_points
            .get_mut(i)
            .ok_or_else(|| GeomError::Invalid(format!("control point {i} out of range")))? = p;
        Ok(())
    }

    pub fn set_weight(&mut self, i: usize, w: f64) -> Result<(), GeomError> {
        check_weights([w].iter())?;
        *self
            .weights
            .get_mut(i)
            .ok_or_else(|| GeomError::Invalid(format!("weight {i} out of range")))? = w;
        Ok(())
    }

    /// Copy with every weight multiplied by `factor`.
    pub fn with_scaled_weights(&self, factor: f64) -> Result<Self, GeomError> {
        let weights = self.weights.iter().map(|w| w * factor).collect();
        Self::new(self.degree, self.control_points.clone(), weights, self.knots.clone())
    }

    pub fn point(&self, u: f64) -> Result<Point3, GeomError> {
        let span = find_span(&self.knots, self.degree, u)?;
        let n = basis_in_span(&self.knots, span, self.degree, u);
        let mut num = Point3::zeros();
        let mut den = 0.0;
        for (r, nv) in n.iter().enumerate() {
            let i = span - self.degree + r;
            let nw = nv * self.weights[i];
            num += self.control_points[i] * nw;
            den += nw;
        }
        Ok(num / den)
    }

    /// `[C, C', C'', ...]` up to `order` by the rational quotient rule.
    fn point_and_derivatives(&self, u: f64, order: usize) -> Result<Vec<Point3>, GeomError> {
        let span = find_span(&self.knots, self.degree, u)?;
        let ders = basis_derivatives_in_span(&self.knots, span, self.degree, u, order);
        // weighted numerator A^(k) and denominator W^(k)
        let mut a = vec![Point3::zeros(); order + 1];
        let mut w = vec![0.0; order + 1];
        for k in 0..=order {
            for (r, dv) in ders[k].iter().enumerate() {
                let i = span - self.degree + r;
                let dw = dv * self.weights[i];
                a[k] += self.control_points[i] * dw;
                w[k] += dw;
            }
        }
        let mut c: Vec<Point3> = Vec::with_capacity(order + 1);
        for k in 0..=order {
            let mut v = a[k];
            for i in 1..=k {
                v -= c[k - i] * (binomial(k, i) * w[i]);
            }
            c.push(v / w[0]);
        }
        Ok(c)
    }

    /// First (and optionally second) derivative vectors, `C'` then `C''`.
    pub fn derivatives(&self, u: f64, order: usize) -> Result<Vec<Point3>, GeomError> {
        if order == 0 || order > 2 {
            return Err(GeomError::UnsupportedOrder(order));
        }
        let mut d = self.point_and_derivatives(u, order)?;
        d.remove(0);
        Ok(d)
    }

    /// Curvature `|C' x C''| / |C'|^3` and unit tangent `C' / |C'|`.
    pub fn curvature_and_tangent(&self, u: f64) -> Result<(f64, Point3), GeomError> {
        let d = self.point_and_derivatives(u, 2)?;
        curvature_from(&d[1], &d[2], u)
    }

    /// `n_segments + 1` samples at uniform parameter stations, endpoints
    /// included.
    pub fn sample(&self, n_segments: usize) -> Result<Vec<CurveSample>, GeomError> {
        if n_segments == 0 {
            return Err(GeomError::Invalid("n_segments must be at least 1".into()));
        }
        let (a, b) = self.domain();
        (0..=n_segments)
            .map(|i| {
                let u = if i == n_segments {
                    b
                } else {
                    a + (b - a) * i as f64 / n_segments as f64
                };
                let d = self.point_and_derivatives(u, 2)?;
                let (curvature, tangent) = curvature_from(&d[1], &d[2], u)?;
                Ok(CurveSample { position: d[0], u, curvature, tangent })
            })
            .collect()
    }

    /// Largest curvature over `n` uniform parameter stations.
    pub fn max_sampled_curvature(&self, n: usize) -> Result<f64, GeomError> {
        Ok(self
            .sample(n)?
            .iter()
            .map(|s| s.curvature)
            .fold(0.0, f64::max))
    }
}

fn curvature_from(d1: &Point3, d2: &Point3, u: f64) -> Result<(f64, Point3), GeomError> {
    let speed = d1.norm();
    if !(speed >= SINGULAR_SPEED) {
        return Err(GeomError::SingularParametrization { u });
    }
    let kappa = d1.cross(d2).norm() / speed.powi(3);
    Ok((kappa, d1 / speed))
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl TryFrom<CurveJson> for NurbsCurve {
    type Error = GeomError;
    fn try_from(j: CurveJson) -> Result<Self, Self::Error> {
        let points = j.points.iter().map(|p| Point3::new(p[0], p[1], p[2])).collect();
        Self::new(j.degree, points, j.weights, KnotVector::new(j.knots)?)
    }
}

impl From<NurbsCurve> for CurveJson {
    fn from(c: NurbsCurve) -> Self {
        CurveJson {
            degree: c.degree,
            knots: c.knots.into(),
            points: c.control_points.iter().map(|p| [p.x, p.y, p.z]).collect(),
            weights: c.weights,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn segment(to: Point3) -> NurbsCurve {
        NurbsCurve::clamped_uniform(1, vec![Point3::zeros(), to]).unwrap()
    }

    pub(crate) fn quarter_circle() -> NurbsCurve {
        NurbsCurve::new(
            2,
            vec![Point3::new(1.0, 0.0, 0.0), Point3::new(1.0, 1.0, 0.0), Point3::new(0.0, 1.0, 0.0)],
            vec![1.0, FRAC_1_SQRT_2, 1.0],
            KnotVector::clamped_uniform(3, 2).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn segment_midpoint() {
        let c = segment(Point3::new(1.0, 0.0, 0.0));
        assert_eq!(c.point(0.5).unwrap(), Point3::new(0.5, 0.0, 0.0));
    }

    #[test]
    fn constant_speed_line() {
        let c = segment(Point3::new(2.0, 0.0, 0.0));
        for u in [0.0, 0.3, 1.0] {
            let d = c.derivatives(u, 2).unwrap();
            assert!((d[0] - Point3::new(2.0, 0.0, 0.0)).norm() < 1e-14);
            let (k, t) = c.curvature_and_tangent(u).unwrap();
            assert_eq!(k, 0.0);
            assert!((t - Point3::x()).norm() < 1e-15);
        }
        assert!(matches!(c.derivatives(0.5, 3), Err(GeomError::UnsupportedOrder(3))));
    }

    #[test]
    fn quarter_circle_lies_on_unit_circle() {
        let c = quarter_circle();
        let p = c.point(0.5).unwrap();
        assert!((p.norm() - 1.0).abs() < 1e-14);
        for i in 0..=10 {
            let (k, t) = c.curvature_and_tangent(i as f64 / 10.0).unwrap();
            assert!((k - 1.0).abs() < 1e-9, "kappa = {k}");
            assert!((t.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hand_differentiated_quadratic() {
        let c = NurbsCurve::clamped_uniform(
            2,
            vec![Point3::zeros(), Point3::new(1.0, 1.0, 0.0), Point3::new(2.0, 0.0, 0.0)],
        )
        .unwrap();
        let d = c.derivatives(0.5, 2).unwrap();
        assert!((d[0] - Point3::new(2.0, 0.0, 0.0)).norm() < 1e-12);
        assert!((d[1] - Point3::new(0.0, -4.0, 0.0)).norm() < 1e-12);
        let (k, _) = c.curvature_and_tangent(0.5).unwrap();
        assert!((k - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coincident_control_points_are_singular() {
        let c = NurbsCurve::clamped_uniform(1, vec![Point3::zeros(), Point3::zeros()]).unwrap();
        assert!(matches!(
            c.curvature_and_tangent(0.5),
            Err(GeomError::SingularParametrization { .. })
        ));
        assert!(matches!(c.sample(4), Err(GeomError::SingularParametrization { u }) if u == 0.0));
    }

    #[test]
    fn sampling_counts_and_endpoints() {
        let c = segment(Point3::new(3.0, 0.0, 0.0));
        let s = c.sample(20).unwrap();
        assert_eq!(s.len(), 21);
        let s1 = c.sample(1).unwrap();
        assert_eq!((s1[0].u, s1[1].u), (0.0, 1.0));
        assert!(s.iter().all(|x| x.curvature == 0.0 && x.tangent == s[0].tangent));
        assert!(c.sample(0).is_err());
    }

    #[test]
    fn construction_validates_counts_and_weights() {
        let k = KnotVector::clamped_uniform(2, 1).unwrap();
        let pts = vec![Point3::zeros(), Point3::x()];
        assert!(NurbsCurve::new(1, pts.clone(), vec![1.0], k.clone()).is_err());
        assert!(NurbsCurve::new(1, pts.clone(), vec![1.0, 0.0], k.clone()).is_err());
        assert!(NurbsCurve::new(2, pts, vec![1.0, 1.0], k).is_err());
    }
}
