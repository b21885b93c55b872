//! 12-DOF Euler–Bernoulli space-frame element.
//!
//! DOF order per node: `ux, uy, uz, rx, ry, rz`. Local `x` runs from the
//! first to the second node; local `z` is the element's orientation vector
//! projected normal to `x`; local `y = z × x`. Section height `h` lies along
//! local `z`, so `I_y = b h³ / 12` governs bending in the local x–z plane.

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};

use super::{FrameError, Material, Section};

pub type Matrix12 = SMatrix<f64, 12, 12>;
pub type Vector12 = SVector<f64, 12>;

/// Element length below which geometry is rejected.
pub const MIN_LENGTH: f64 = 1e-9;

/// Rows are the local axes expressed in global coordinates.
pub fn local_axes(
    xi: &Vector3<f64>,
    xj: &Vector3<f64>,
    orientation: &Vector3<f64>,
) -> Result<(Matrix3<f64>, f64), FrameError> {
    let d = xj - xi;
    let length = d.norm();
    if !(length >= MIN_LENGTH) {
        return Err(FrameError::Geometry(format!("element length {length:e} below {MIN_LENGTH:e}")));
    }
    let ex = d / length;
    let proj = orientation - ex * orientation.dot(&ex);
    let pn = proj.norm();
    if pn < 1e-6 * orientation.norm().max(f64::MIN_POSITIVE) {
        return Err(FrameError::Geometry("orientation vector parallel to element axis".into()));
    }
    let ez = proj / pn;
    let ey = ez.cross(&ex);
    Ok((Matrix3::from_rows(&[ex.transpose(), ey.transpose(), ez.transpose()]), length))
}

/// Default orientation: global z, or global y for near-vertical members.
pub fn default_orientation(xi: &Vector3<f64>, xj: &Vector3<f64>) -> Vector3<f64> {
    let d = xj - xi;
    let n = d.norm();
    if n > 0.0 && (d.z / n).abs() > 1.0 - 1e-6 {
        Vector3::y()
    } else {
        Vector3::z()
    }
}

pub fn local_stiffness(material: &Material, section: &Section, length: f64) -> Matrix12 {
    let l = length;
    let (l2, l3) = (l * l, l * l * l);
    let e = material.elastic_modulus;
    let ea = e * section.area() / l;
    let gj = material.shear_modulus * section.torsion_constant() / l;
    let (iy, iz) = (section.i_y(), section.i_z());

    let mut k = Matrix12::zeros();
    let mut set = |i: usize, j: usize, v: f64| {
        k[(i, j)] = v;
        k[(j, i)] = v;
    };
    set(0, 0, ea);
    set(0, 6, -ea);
    set(6, 6, ea);
    set(3, 3, gj);
    set(3, 9, -gj);
    set(9, 9, gj);
    // bending in local x-y (about z)
    let (a, b, c, d) = (12.0 * e * iz / l3, 6.0 * e * iz / l2, 4.0 * e * iz / l, 2.0 * e * iz / l);
    set(1, 1, a);
    set(1, 5, b);
    set(1, 7, -a);
    set(1, 11, b);
    set(5, 5, c);
    set(5, 7, -b);
    set(5, 11, d);
    set(7, 7, a);
    set(7, 11, -b);
    set(11, 11, c);
    // bending in local x-z (about y)
    let (a, b, c, d) = (12.0 * e * iy / l3, 6.0 * e * iy / l2, 4.0 * e * iy / l, 2.0 * e * iy / l);
    set(2, 2, a);
    set(2, 4, -b);
    set(2, 8, -a);
    set(2, 10, -b);
    set(4, 4, c);
    set(4, 8, b);
    set(4, 10, d);
    set(8, 8, a);
    set(8, 10, b);
    set(10, 10, c);
    k
}

/// Block-diagonal global-to-local transformation.
pub fn transformation(axes: &Matrix3<f64>) -> Matrix12 {
    let mut t = Matrix12::zeros();
    for b in 0..4 {
        t.fixed_view_mut::<3, 3>(3 * b, 3 * b).copy_from(axes);
    }
    t
}

pub fn global_stiffness(material: &Material, section: &Section, axes: &Matrix3<f64>, length: f64) -> Matrix12 {
    let t = transformation(axes);
    t.transpose() * local_stiffness(material, section, length) * t
}
