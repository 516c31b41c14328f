//! Static identities of the graph evaluated as residual fields.

use crate::base::ScalarField;
use crate::flow::{normal_speed, residual_fields, FlowError};

use super::{GeometryError, GraphState, SurfaceOperator};

/// Residual fields of the static identities, and of the evolution
/// identities under the graph's own curvature-flow rate.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityResiduals {
    /// `Δ_S u − (h'/h)(n−2+Θ²) + HΘ`.
    pub prop_delta_u: ScalarField,
    /// `Ric_M(n, n) = −(n−1) h''/h` along the graph.
    pub ricci_nn: ScalarField,
    pub height_evolution: ScalarField,
    pub theta_sq_evolution: ScalarField,
    pub inequality_slack: ScalarField,
}

pub fn prop_delta_u_residual(state: &GraphState) -> Result<ScalarField, GeometryError> {
    let lap = SurfaceOperator::new(state)?.apply(state.u().values());
    let nm2 = state.n() as f64 - 2.0;
    let mut out = vec![0.0; lap.len()];
    state.for_each_point(|i, _, g| {
        out[i] = lap[i] - g.warp.slice_curvature() * (nm2 + g.theta * g.theta)
            + g.mean_curvature * g.theta;
    });
    Ok(ScalarField::from_values(state.base().shape(), out))
}

/// `|∇_S u|² + Θ² − 1`, with `|∇_S u|²` contracted against the induced inverse metric.
pub fn angle_duality_residual(state: &GraphState) -> ScalarField {
    let mut out = vec![0.0; state.base().len()];
    state.for_each_point(|i, _, g| {
        let h2 = g.warp.h * g.warp.h;
        let grad_s = (g.grad_sq - g.grad_sq * g.grad_sq / g.w2()) / h2;
        out[i] = grad_s + g.theta * g.theta - 1.0;
    });
    ScalarField::from_values(state.base().shape(), out)
}

pub fn identity_residuals(state: &GraphState) -> Result<IdentityResiduals, GeometryError> {
    let prop_delta_u = prop_delta_u_residual(state)?;
    let nm1 = state.n() as f64 - 1.0;
    let mut ricci = vec![0.0; state.base().len()];
    state.for_each_point(|i, _, g| ricci[i] = -nm1 * g.warp.h_double_prime / g.warp.h);
    let rate = normal_speed(state);
    let evo = residual_fields(
        state.base(),
        state.warp(),
        state.u().values(),
        rate.values(),
        0.0,
    )
    .map_err(|e| match e {
        FlowError::Geometry(g) => g,
        other => unreachable!("residuals without a floor only fail in geometry: {other}"),
    })?;
    let shape = state.base().shape();
    Ok(IdentityResiduals {
        prop_delta_u,
        ricci_nn: ScalarField::from_values(shape, ricci),
        height_evolution: ScalarField::from_values(shape, evo.cor26),
        theta_sq_evolution: ScalarField::from_values(shape, evo.thm31_eq),
        inequality_slack: ScalarField::from_values(shape, evo.ineq_slack),
    })
}
