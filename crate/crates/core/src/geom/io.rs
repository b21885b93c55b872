use serde::{Deserialize, Serialize};

/// Wire form of a curve: `{"degree", "knots", "points", "weights"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveJson {
    pub degree: usize,
    pub knots: Vec<f64>,
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

/// Wire form of a surface. Point and weight grids are indexed `[i][j]`
/// with `i` along u and `j` along v.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceJson {
    pub degree: usize,
    pub degree_v: usize,
    pub knots: Vec<f64>,
    pub knots_v: Vec<f64>,
    pub points: Vec<Vec<[f64; 3]>>,
    pub weights: Vec<Vec<f64>>,
}
