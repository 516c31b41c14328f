//! Evolution-equation residuals along the flow.
//!
//! Time derivatives are material: `D_t w = ∂_t w|_x + HΘ h⁻² ⟨∇_N u, ∇_N w⟩`,
//! where `∂_t u|_x` is the supplied height rate. The rate of `f = Θ²` follows
//! from the chain rule through `f = h²/(h² + |∇_N u|²)`.

use crate::base::{BaseManifold, ScalarField};
use crate::geometry::{for_each_point, GeometryError, GraphState, SurfaceOperator};
use crate::warp::WarpingFunction;

use super::FlowError;

/// Pointwise residual fields at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualFields {
    /// `D_t u − Δ_S u + (h'/h)(n−2+Θ²)`.
    pub cor26: Vec<f64>,
    /// `D_t f − Δ_S f − RHS` for `f = Θ²`, equality form.
    pub thm31_eq: Vec<f64>,
    /// `(D_t f − Δ_S f) − ⟨(2h'/h) n − ∇f/2f, ∇f⟩ − G(f, u)`.
    pub ineq_slack: Vec<f64>,
}

/// `Θ²`-evolution residual and inequality slack.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSqResiduals {
    pub equality: ScalarField,
    pub slack: ScalarField,
}

pub(crate) fn residual_fields(
    base: &BaseManifold,
    warp: &WarpingFunction,
    u: &[f64],
    u_rate: &[f64],
    theta_floor: f64,
) -> Result<ResidualFields, FlowError> {
    let len = u.len();
    let n = base.ambient_dim() as f64;
    let ric = base.ric_vv();
    let c = base.rho().max(0.0);
    let op = SurfaceOperator::from_parts(base, warp, u)?;
    let lap_u = op.apply(u);
    let rate_grad = base.gradients(u_rate);

    let mut f = vec![0.0; len];
    let mut geo = Vec::with_capacity(len);
    let mut min_theta = f64::INFINITY;
    for_each_point(base, warp, u, |i, jet, g| {
        f[i] = g.theta * g.theta;
        min_theta = min_theta.min(g.theta);
        geo.push((jet.grad, *g));
    });
    if min_theta < theta_floor {
        return Err(FlowError::Geometry(GeometryError::ThetaBelowMinimum {
            min_theta,
            threshold: theta_floor,
        }));
    }
    let lap_f = op.apply(&f);
    let f_grad = base.gradients(&f);

    let mut out = ResidualFields {
        cor26: vec![0.0; len],
        thm31_eq: vec![0.0; len],
        ineq_slack: vec![0.0; len],
    };
    for i in 0..len {
        let (p, g) = geo[i];
        let (h, hp, hpp) = (g.warp.h, g.warp.h_prime, g.warp.h_double_prime);
        let h2 = h * h;
        let k = hp / h;
        let (pp, w2) = (g.grad_sq, g.w2());
        let (theta, fi) = (g.theta, f[i]);
        let s = u_rate[i];
        let ds = rate_grad[i];
        let df = f_grad[i];
        let drift = g.mean_curvature * theta / h2;
        let p_ds = p[0] * ds[0] + p[1] * ds[1];
        let p_df = p[0] * df[0] + p[1] * df[1];

        out.cor26[i] = s + drift * pp - lap_u[i] + k * (n - 2.0 + fi);

        let f_rate = (2.0 * h * hp * pp * s - 2.0 * h2 * p_ds) / (w2 * w2);
        let dt_f = f_rate + drift * p_df;
        let heat = dt_f - lap_f[i];
        let n_grad_f = fi * p_df / h2;
        let grad_f_sq = (df[0] * df[0] + df[1] * df[1] - p_df * p_df / w2) / h2;
        let gradient_terms = 2.0 * k * n_grad_f - grad_f_sq / (2.0 * fi);
        let rhs = 2.0 * g.a_sq * fi + gradient_terms - 4.0 * k * fi.sqrt() * g.mean_curvature
            + 2.0 * (n - 1.0) * k * k * fi
            + 2.0 * fi * (1.0 - fi) / h2 * ((n - 1.0) * (h * hpp - hp * hp) + ric);
        out.thm31_eq[i] = heat - rhs;
        let g_term = 2.0 * (n - 1.0) * (1.0 - fi) / h2 * (c * fi - hp * hp);
        out.ineq_slack[i] = heat - gradient_terms - g_term;
    }
    Ok(out)
}

fn rate_values<'s>(state: &GraphState, u_rate: &'s ScalarField) -> Result<&'s [f64], FlowError> {
    state.base().check(u_rate).map_err(GeometryError::from)?;
    Ok(u_rate.values())
}

/// Height-equation residual for the given rate `∂_t u|_x`.
pub fn residual_cor26(state: &GraphState, u_rate: &ScalarField) -> Result<ScalarField, FlowError> {
    let r = residual_fields(
        state.base(),
        state.warp(),
        state.u().values(),
        rate_values(state, u_rate)?,
        0.0,
    )?;
    Ok(ScalarField::new(state.base(), r.cor26).map_err(GeometryError::from)?)
}

/// Equality and inequality residuals of the `Θ²` evolution for the given rate `∂_t u|_x`.
pub fn residual_thm31(
    state: &GraphState,
    u_rate: &ScalarField,
    theta_floor: f64,
) -> Result<ThetaSqResiduals, FlowError> {
    let r = residual_fields(
        state.base(),
        state.warp(),
        state.u().values(),
        rate_values(state, u_rate)?,
        theta_floor,
    )?;
    Ok(ThetaSqResiduals {
        equality: ScalarField::new(state.base(), r.thm31_eq).map_err(GeometryError::from)?,
        slack: ScalarField::new(state.base(), r.ineq_slack).map_err(GeometryError::from)?,
    })
}
