//! Graphical mean curvature flow in warped products `(I × N, dr² + h(r)² g_N)`.
//!
//! The height `u: N → I` of a graph is discretized on a flat torus or on an
//! axisymmetric sphere. [`geometry`] evaluates the induced geometry of a
//! graph, [`flow`] evolves it, and [`barrier`] integrates the slice and angle
//! comparison ODEs that bound the evolution.

pub mod barrier;
pub mod base;
pub mod flow;
pub mod geometry;
pub mod warp;

use thiserror::Error;

pub use barrier::{solve_barrier, BarrierError, BarrierSolution};
pub use base::{BaseError, BaseManifold, BaseVariant, ScalarField};
pub use flow::{run_flow, FlowConfig, FlowError, FlowOutcome, FlowRun, FlowSummary, InitialData};
pub use geometry::{GeometryError, GraphState};
pub use warp::{make_builtin_warp, BuiltinFamily, WarpError, WarpingFunction};

/// Any error raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Warp(#[from] WarpError),
    #[error(transparent)]
    Base(#[from] BaseError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Barrier(#[from] BarrierError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}
