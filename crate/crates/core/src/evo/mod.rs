//! Multi-objective evolutionary search (non-dominated sorting genetic
//! algorithm) and the grid-shell form-finding problem it is applied to.

mod io;
mod nsga;
mod reference;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::FrameError;
use crate::geom::GeomError;

pub use io::{read_history_csv, write_archive_json, write_generation_csv, write_history_csv, ArchiveJson, HISTORY_HEADER};
pub use nsga::{
    convergence_report, crowding_distance, dominates, non_dominated_sort, polynomial_mutation, run, sbx_crossover,
    variation, ArchiveEntry, GenerationRecord, ObjectiveReport, RunHistory,
};
pub use reference::{
    reference_curves, reference_problem, DesignVariable, DesignVariableSpec, FormFindingProblem, GridSettings,
};

#[derive(Debug, Error)]
pub enum EvoError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("every design in the initial population is infeasible")]
    AllInfeasible,
    #[error("variable {index} = {value} lies outside [{lower}, {upper}]")]
    OutOfBounds { index: usize, value: f64, lower: f64, upper: f64 },
    #[error("design has {found} values, expected {expected}")]
    Length { expected: usize, found: usize },
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("malformed history: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A minimization problem over a box-bounded real vector.
pub trait Problem: Sync {
    fn bounds(&self) -> Vec<(f64, f64)>;
    fn objective_names(&self) -> Vec<String>;
    /// `None` marks the design infeasible.
    fn evaluate(&self, design: &[f64]) -> Option<Vec<f64>>;
    /// A design to place in the initial population.
    fn seed_design(&self) -> Option<Vec<f64>> {
        None
    }
}

/// Objectives of the form-finding problem, all minimized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub u_gravity: f64,
    pub u_mesh: f64,
    pub mass: f64,
    pub sigma_max: f64,
}

impl ObjectiveVector {
    pub const NAMES: [&'static str; 4] = ["U_gravity", "U_mesh", "mass", "sigma"];

    pub fn to_array(self) -> [f64; 4] {
        [self.u_gravity, self.u_mesh, self.mass, self.sigma_max]
    }

    pub fn from_slice(v: &[f64]) -> Option<Self> {
        match *v {
            [u_gravity, u_mesh, mass, sigma_max] => Some(Self { u_gravity, u_mesh, mass, sigma_max }),
            _ => None,
        }
    }

    pub fn dominates(&self, other: &Self) -> bool {
        dominates(&self.to_array(), &other.to_array())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GAConfig {
    pub population: usize,
    pub generations: usize,
    pub crossover_probability: f64,
    pub crossover_index: f64,
    /// Per-variable probability; `None` means `1 / n_vars`.
    pub mutation_probability: Option<f64>,
    pub mutation_index: f64,
    pub seed: u64,
}

impl Default for GAConfig {
    fn default() -> Self {
        Self {
            population: 40,
            generations: 60,
            crossover_probability: 0.9,
            crossover_index: 15.0,
            mutation_probability: None,
            mutation_index: 20.0,
            seed: 0,
        }
    }
}

impl GAConfig {
    pub fn validate(&self) -> Result<(), EvoError> {
        if self.population < 4 || self.population % 2 != 0 {
            return Err(EvoError::Config(format!("population {} must be even and at least 4", self.population)));
        }
        let prob_ok = |p: f64| (0.0..=1.0).contains(&p);
        if !prob_ok(self.crossover_probability) || !self.mutation_probability.map_or(true, prob_ok) {
            return Err(EvoError::Config("probabilities must lie in [0, 1]".into()));
        }
        if !(self.crossover_index >= 0.0 && self.mutation_index >= 0.0) {
            return Err(EvoError::Config("distribution indices must be non-negative".into()));
        }
        Ok(())
    }

    pub(crate) fn mutation_rate(&self, n_vars: usize) -> f64 {
        self.mutation_probability.unwrap_or(1.0 / n_vars.max(1) as f64)
    }
}
