//! Skin three arched sections into a surface and cut a quad grid from it.

use gridform::geom::{extract_grid, loft_surface, GeomError, NurbsCurve, Point3};

fn arch(y: f64, rise: f64) -> Result<NurbsCurve, GeomError> {
    let pts = (0..5).map(|i| {
        let x = 4.0 * i as f64;
        Point3::new(x, y, rise * (std::f64::consts::PI * x / 16.0).sin())
    });
    NurbsCurve::clamped_uniform(3, pts.collect())
}

fn main() -> Result<(), GeomError> {
    let sections = vec![arch(0.0, 1.0)?, arch(5.0, 2.0)?, arch(10.0, 1.0)?];
    let surface = loft_surface(&sections, 2)?;
    let (du, dv) = surface.degrees();
    println!("surface degrees ({du}, {dv}), {} x {} control points", surface.control_net().len(), surface.control_net()[0].len());
    println!("S(0.5, 0.5) = {:?}", surface.point(0.5, 0.5)?.as_slice());

    let grid = extract_grid(&surface, 8, 4)?;
    println!(
        "grid: {} nodes, {} members, {} boundary nodes, {} member lines",
        grid.nodes.len(),
        grid.edges.len(),
        grid.boundary.iter().filter(|&&b| b).count(),
        grid.member_lines().len()
    );
    let apex = grid.nodes.iter().map(|p| p.z).fold(f64::NEG_INFINITY, f64::max);
    println!("highest node z = {apex:.4}");
    Ok(())
}
