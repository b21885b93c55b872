use nalgebra::DMatrix;

use super::basis::{basis_in_span, find_span};
use super::{GeomError, KnotVector, NurbsCurve, NurbsSurface, Point3};

/// Skin compatible section curves into a surface.
///
/// The u-direction reuses the sections' degree and knots. Along v, every
/// column of homogeneous section control points `(w P, w)` is interpolated
/// by a clamped degree-`q` curve at uniformly spaced parameters, so the
/// surface passes through every section.
pub fn loft_surface(sections: &[NurbsCurve], q: usize) -> Result<NurbsSurface, GeomError> {
    if q == 0 {
        return Err(GeomError::Invalid("v-degree must be at least 1".into()));
    }
    if sections.len() < q + 1 {
        return Err(GeomError::Incompatible(format!(
            "{} sections cannot carry v-degree {q}",
            sections.len()
        )));
    }
    let first = &sections[0];
    for (k, s) in sections.iter().enumerate().skip(1) {
        if s.degree() != first.degree() {
            return Err(GeomError::Incompatible(format!(
                "section {k} has degree {} (expected {})",
                s.degree(),
                first.degree()
            )));
        }
        if s.control_points().len() != first.control_points().len() {
            return Err(GeomError::Incompatible(format!(
                "section {k} has {} control points (expected {})",
                s.control_points().len(),
                first.control_points().len()
            )));
        }
        if s.knots() != first.knots() {
            return Err(GeomError::Incompatible(format!("section {k} has a different knot vector")));
        }
    }

    let n_sec = sections.len();
    let params: Vec<f64> = (0..n_sec).map(|k| k as f64 / (n_sec - 1) as f64).collect();
    let knots_v = averaged_knots(&params, q)?;

    // collocation matrix, shared by every column
    let mut a = DMatrix::<f64>::zeros(n_sec, n_sec);
    for (row, &t) in params.iter().enumerate() {
        let span = find_span(&knots_v, q, t)?;
        for (r, v) in basis_in_span(&knots_v, span, q, t).into_iter().enumerate() {
            a[(row, span - q + r)] = v;
        }
    }
    let lu = a.lu();

    let n_u = first.control_points().len();
    let mut net = vec![vec![Point3::zeros(); n_sec]; n_u];
    let mut weights = vec![vec![0.0; n_sec]; n_u];
    for i in 0..n_u {
        let mut rhs = DMatrix::<f64>::zeros(n_sec, 4);
        for (k, s) in sections.iter().enumerate() {
            let w = s.weights()[i];
            let p = s.control_points()[i] * w;
            rhs[(k, 0)] = p.x;
            rhs[(k, 1)] = p.y;
            rhs[(k, 2)] = p.z;
            rhs[(k, 3)] = w;
        }
        let sol = lu
            .solve(&rhs)
            .ok_or_else(|| GeomError::Degenerate("singular skinning system".into()))?;
        for j in 0..n_sec {
            let w = sol[(j, 3)];
            if !(w > 0.0) {
                return Err(GeomError::Degenerate(format!(
                    "skinned weight {w} at ({i}, {j}) is not positive"
                )));
            }
            net[i][j] = Point3::new(sol[(j, 0)], sol[(j, 1)], sol[(j, 2)]) / w;
            weights[i][j] = w;
        }
    }
    NurbsSurface::new(first.degree(), q, net, weights, first.knots().clone(), knots_v)
}

/// Clamped knots by parameter averaging over `[0, 1]`.
fn averaged_knots(params: &[f64], q: usize) -> Result<KnotVector, GeomError> {
    let n = params.len();
    let mut k = vec![0.0; q + 1];
    for j in 1..n - q {
        k.push(params[j..j + q].iter().sum::<f64>() / q as f64);
    }
    k.extend(std::iter::repeat(1.0).take(q + 1));
    KnotVector::new(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_at(z: f64) -> NurbsCurve {
        NurbsCurve::clamped_uniform(1, vec![Point3::new(0.0, 0.0, z), Point3::new(4.0, 1.0, z)]).unwrap()
    }

    #[test]
    fn stacked_lines_give_planar_surface() {
        let s = loft_surface(&[line_at(0.0), line_at(1.0), line_at(2.0)], 2).unwrap();
        let mut last_z = f64::NEG_INFINITY;
        for j in 0..=10 {
            let v = j as f64 / 10.0;
            let p = s.point(0.25, v).unwrap();
            assert!((p.x - 1.0).abs() < 1e-12 && (p.y - 0.25).abs() < 1e-12);
            assert!(p.z > last_z);
            last_z = p.z;
        }
    }

    #[test]
    fn two_sections_are_ruled() {
        let s = loft_surface(&[line_at(0.0), line_at(2.0)], 1).unwrap();
        let p = s.point(0.5, 0.5).unwrap();
        assert!((p - Point3::new(2.0, 0.5, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn incompatible_sections_are_rejected() {
        let cubic = NurbsCurve::clamped_uniform(
            3,
            (0..4).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect(),
        )
        .unwrap();
        let err = loft_surface(&[line_at(0.0), cubic], 1).unwrap_err();
        assert!(matches!(err, GeomError::Incompatible(_)));
        assert!(loft_surface(&[line_at(0.0), line_at(1.0)], 2).is_err());
    }
}
