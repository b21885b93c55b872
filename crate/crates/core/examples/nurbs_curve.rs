//! Evaluate a rational quarter circle and a sampled cubic member.

use std::f64::consts::FRAC_1_SQRT_2;

use gridform::geom::{GeomError, KnotVector, NurbsCurve, Point3};

fn main() -> Result<(), GeomError> {
    let arc = NurbsCurve::new(
        2,
        vec![Point3::new(1.0, 0.0, 0.0), Point3::new(1.0, 1.0, 0.0), Point3::new(0.0, 1.0, 0.0)],
        vec![1.0, FRAC_1_SQRT_2, 1.0],
        KnotVector::new(vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0])?,
    )?;
    println!("quarter circle");
    for k in 0..=4 {
        let u = k as f64 / 4.0;
        let p = arc.point(u)?;
        let (kappa, t) = arc.curvature_and_tangent(u)?;
        println!("  u={u:.2}  |C|={:.15}  kappa={kappa:.12}  t=({:+.4}, {:+.4}, {:+.4})", p.norm(), t.x, t.y, t.z);
    }

    let member = NurbsCurve::clamped_uniform(
        3,
        vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(3.0, 0.5, 1.0),
            Point3::new(6.0, -0.5, 1.5),
            Point3::new(9.0, 0.0, 1.0),
            Point3::new(12.0, 0.0, 0.0),
        ],
    )?;
    println!("cubic member, 10 segments");
    for s in member.sample(10)? {
        println!(
            "  u={:.2}  x=({:6.3}, {:6.3}, {:6.3})  kappa={:.5}",
            s.u, s.position.x, s.position.y, s.position.z, s.curvature
        );
    }
    Ok(())
}
