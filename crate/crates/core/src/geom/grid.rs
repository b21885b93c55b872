use super::{GeomError, NurbsSurface, Point3};

/// Minimum distance between two grid nodes.
const COINCIDENT_TOL: f64 = 1e-9;

/// Quad grid sampled on a surface: nodes at uniform parameter stations,
/// edges along both iso-directions.
///
/// Node `(i, j)` (i along u, j along v) has index `i * (nv + 1) + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSkeleton {
    pub nu: usize,
    pub nv: usize,
    pub nodes: Vec<Point3>,
    pub params: Vec<(f64, f64)>,
    pub edges: Vec<(usize, usize)>,
    pub boundary: Vec<bool>,
}

impl GridSkeleton {
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        i * (self.nv + 1) + j
    }

    /// Continuous members as node chains: one per u iso-line, then one per
    /// v iso-line.
    pub fn member_lines(&self) -> Vec<Vec<usize>> {
        let mut lines = Vec::with_capacity(self.nu + self.nv + 2);
        for j in 0..=self.nv {
            lines.push((0..=self.nu).map(|i| self.node_index(i, j)).collect());
        }
        for i in 0..=self.nu {
            lines.push((0..=self.nv).map(|j| self.node_index(i, j)).collect());
        }
        lines
    }
}

pub fn extract_grid(surface: &NurbsSurface, nu: usize, nv: usize) -> Result<GridSkeleton, GeomError> {
    if nu == 0 || nv == 0 {
        return Err(GeomError::Invalid("grid needs at least one division per direction".into()));
    }
    let ((a, b), (c, d)) = surface.domain();
    let station = |lo: f64, hi: f64, k: usize, n: usize| {
        if k == n {
            hi
        } else {
            lo + (hi - lo) * k as f64 / n as f64
        }
    };
    let mut nodes = Vec::with_capacity((nu + 1) * (nv + 1));
    let mut params = Vec::with_capacity(nodes.capacity());
    let mut boundary = Vec::with_capacity(nodes.capacity());
    for i in 0..=nu {
        let u = station(a, b, i, nu);
        for j in 0..=nv {
            let v = station(c, d, j, nv);
            nodes.push(surface.point(u, v)?);
            params.push((u, v));
            boundary.push(i == 0 || i == nu || j == 0 || j == nv);
        }
    }
    for p in 0..nodes.len() {
        for q in p + 1..nodes.len() {
            if (nodes[p] - nodes[q]).norm() < COINCIDENT_TOL {
                return Err(GeomError::Degenerate(format!(
                    "grid nodes {p} and {q} coincide at {:?}",
                    nodes[p].as_slice()
                )));
            }
        }
    }
    let idx = |i: usize, j: usize| i * (nv + 1) + j;
    let mut edges = Vec::with_capacity(nu * (nv + 1) + nv * (nu + 1));
    for i in 0..=nu {
        for j in 0..=nv {
            if i < nu {
                edges.push((idx(i, j), idx(i + 1, j)));
            }
            if j < nv {
                edges.push((idx(i, j), idx(i, j + 1)));
            }
        }
    }
    Ok(GridSkeleton { nu, nv, nodes, params, edges, boundary })
}
