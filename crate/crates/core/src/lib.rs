//! Form finding for free-form timber grid shells.
//!
//! The crate covers the full workflow: NURBS curves and surfaces
//! ([`geom`]), conversion of curves into sequence datasets ([`data`]), a
//! small transformer encoder that regresses curvature and tangents along a
//! curve ([`seqnet`]), linear 3D frame analysis of the resulting grid
//! ([`frame`]), NSGA-II over control-point heights and weights ([`evo`]),
//! and file-based pipeline stages that tie them together ([`pipeline`]).

pub mod geom;
pub mod frame;
pub mod data;
pub mod seqnet;
pub mod evo;
pub mod pipeline;
