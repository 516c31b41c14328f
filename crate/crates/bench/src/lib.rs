//! Benchmark fixtures shared by the criterion targets.

use warpflow::base::{BaseManifold, ScalarField};
use warpflow::flow::InitialData;
use warpflow::warp::{make_builtin_warp, BuiltinFamily, WarpingFunction};

pub fn cosh() -> WarpingFunction {
    make_builtin_warp(BuiltinFamily::Cosh, &[], f64::INFINITY).expect("cosh warp")
}

/// Torus of `points`² nodes with the standard sine-product graph.
pub fn torus_graph(points: usize) -> (BaseManifold, ScalarField) {
    let base = BaseManifold::unit_torus(2, points).expect("torus");
    let u = InitialData::SineProduct {
        offset: 0.3,
        amplitude: 0.1,
        kx: 1,
        ky: 1,
    }
    .sample(&base, &cosh())
    .expect("initial data");
    (base, u)
}
