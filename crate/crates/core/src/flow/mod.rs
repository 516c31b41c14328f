//! Explicit time stepping of the graphical flow with barrier monitors.
//!
//! At fixed base points the height obeys `∂_t u = −H/Θ`. Steps use Heun's
//! method with `dt = safety · dx² · min Θ² / (2 m · sup h⁻²)` recomputed from
//! the current state.

mod initial;
mod residuals;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::barrier::{solve_barrier, BarrierError, BarrierSolution};
use crate::base::{BaseManifold, ScalarField};
use crate::geometry::{check_heights, for_each_point, GeometryError, GraphState};
use crate::warp::{angle_threshold, WarpError, WarpingFunction};

pub use initial::InitialData;
pub(crate) use residuals::residual_fields;
pub use residuals::{residual_cor26, residual_thm31, ResidualFields, ThetaSqResiduals};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Barrier(#[from] BarrierError),
    #[error(transparent)]
    Warp(#[from] WarpError),
    #[error("invalid flow configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid initial data: {0}")]
    InvalidInitialData(String),
    #[error(
        "graph lost graphicality at t = {t}: min angle {min_theta:.3e} below floor {floor:.3e}"
    )]
    GraphicalityLost { t: f64, min_theta: f64, floor: f64 },
    #[error("height {r} at node {index} left the warp domain at t = {t}")]
    DomainExit { t: f64, index: usize, r: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualCheck {
    Cor26,
    Thm31,
    Ineq32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    /// CFL factor in `(0, 1]`.
    pub dt_safety: f64,
    pub t_end: f64,
    /// Diagnostics are recorded every this many steps.
    pub output_stride: usize,
    /// Abort threshold for `min Θ`.
    pub theta_floor: f64,
    /// Stop once `sup |u|` drops below this.
    pub convergence_eps: f64,
    pub residual_checks: BTreeSet<ResidualCheck>,
    pub tol_avoid: f64,
    pub tol_angle: f64,
    /// Time step of the barrier ODE solve.
    pub barrier_dt: f64,
    /// Barrier height; `max(a0, sup |u₀|)` is used.
    pub a0: Option<f64>,
    /// Keep a copy of `u` every this many steps, in addition to the first and last state.
    pub snapshot_stride: Option<usize>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            dt_safety: 0.25,
            t_end: 5.0,
            output_stride: 100,
            theta_floor: 1e-3,
            convergence_eps: 1e-4,
            residual_checks: [
                ResidualCheck::Cor26,
                ResidualCheck::Thm31,
                ResidualCheck::Ineq32,
            ]
            .into(),
            tol_avoid: 1e-3,
            tol_angle: 1e-3,
            barrier_dt: 1e-3,
            a0: None,
            snapshot_stride: None,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<(), FlowError> {
        let positive = [
            ("t_end", self.t_end),
            ("theta_floor", self.theta_floor),
            ("convergence_eps", self.convergence_eps),
            ("tol_avoid", self.tol_avoid),
            ("tol_angle", self.tol_angle),
            ("barrier_dt", self.barrier_dt),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(FlowError::InvalidConfig(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !(self.dt_safety > 0.0 && self.dt_safety <= 1.0) {
            return Err(FlowError::InvalidConfig(format!(
                "dt_safety must lie in (0, 1], got {}",
                self.dt_safety
            )));
        }
        if self.theta_floor >= 1.0 {
            return Err(FlowError::InvalidConfig(format!(
                "theta_floor must be < 1, got {}",
                self.theta_floor
            )));
        }
        if self.output_stride == 0 {
            return Err(FlowError::InvalidConfig(
                "output_stride must be >= 1".into(),
            ));
        }
        if self.snapshot_stride == Some(0) {
            return Err(FlowError::InvalidConfig(
                "snapshot_stride must be >= 1".into(),
            ));
        }
        if let Some(a0) = self.a0 {
            if !(a0 >= 0.0 && a0.is_finite()) {
                return Err(FlowError::InvalidConfig(format!(
                    "a0 must be finite and >= 0, got {a0}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowOutcome {
    Converged,
    TEndReached,
    GraphicalityLost,
    DomainExit,
}

impl FlowOutcome {
    pub fn is_abort(&self) -> bool {
        matches!(
            self,
            FlowOutcome::GraphicalityLost | FlowOutcome::DomainExit
        )
    }
}

/// Which side of the initial-angle threshold the run starts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdSide {
    Above,
    /// Within `1e−12` of the threshold; not classified against the theorem.
    At,
    Below,
}

/// Monitors at one recorded time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub step: u64,
    pub t: f64,
    /// Step size about to be taken (0 for the final record).
    pub dt: f64,
    pub min_theta: f64,
    pub sup_u: f64,
    #[serde(rename = "max_H")]
    pub max_h: f64,
    #[serde(rename = "max_Asq")]
    pub max_a_sq: f64,
    pub res_cor26: Option<f64>,
    pub res_thm31_eq: Option<f64>,
    pub ineq_slack_min: Option<f64>,
    #[serde(rename = "R_of_t")]
    pub r_of_t: f64,
    pub f_bar_of_t: f64,
}

/// A stored height field.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: u64,
    pub t: f64,
    pub u: ScalarField,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowSummary {
    pub outcome: FlowOutcome,
    pub steps: u64,
    pub t_final: f64,
    pub initial_min_theta: f64,
    pub initial_sup_u: f64,
    /// Height used for the barrier and the threshold.
    pub a0: f64,
    pub threshold: f64,
    pub threshold_side: ThresholdSide,
    pub threshold_satisfied: bool,
    /// `lim f̄ = 1 − (1 − min Θ₀²) h²(a₀)/h₀²`.
    pub f_limit: f64,
    pub final_sup_u: f64,
    pub final_min_theta: f64,
    /// `min_t (min Θ²(t) − f̄(t))` over all steps.
    pub min_angle_margin: f64,
    /// `max_t` of how far `u` sticks out of the barrier envelope (≤ 0 when contained).
    pub max_containment_excess: f64,
    pub containment_ok: bool,
    pub angle_bound_ok: bool,
    pub max_res_cor26: Option<f64>,
    pub max_res_thm31_eq: Option<f64>,
    pub min_ineq_slack: Option<f64>,
    /// Abort message when the run stopped early.
    pub abort_reason: Option<String>,
}

#[derive(Debug, Clone)]
pub struct FlowRun {
    pub config: FlowConfig,
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<DiagnosticsRecord>,
    pub barrier: BarrierSolution,
    pub summary: FlowSummary,
}

impl FlowRun {
    pub fn outcome(&self) -> FlowOutcome {
        self.summary.outcome
    }

    pub fn final_state(&self) -> &Snapshot {
        self.snapshots
            .last()
            .expect("initial state is always stored")
    }
}

/// Statistics gathered while evaluating the speed.
#[derive(Debug, Clone, Copy)]
struct RateStats {
    min_theta: f64,
    max_inv_h2: f64,
    max_abs_h: f64,
    max_a_sq: f64,
}

fn rate_into(base: &BaseManifold, warp: &WarpingFunction, u: &[f64], out: &mut [f64]) -> RateStats {
    let mut st = RateStats {
        min_theta: f64::INFINITY,
        max_inv_h2: 0.0,
        max_abs_h: 0.0,
        max_a_sq: 0.0,
    };
    for_each_point(base, warp, u, |i, _, g| {
        out[i] = -g.mean_curvature / g.theta;
        st.min_theta = st.min_theta.min(g.theta);
        st.max_inv_h2 = st.max_inv_h2.max(1.0 / (g.warp.h * g.warp.h));
        st.max_abs_h = st.max_abs_h.max(g.mean_curvature.abs());
        st.max_a_sq = st.max_a_sq.max(g.a_sq);
    });
    st
}

/// Non-parametric speed `∂_t u = −H/Θ` of the graph.
pub fn normal_speed(state: &GraphState) -> ScalarField {
    let mut out = vec![0.0; state.base().len()];
    rate_into(state.base(), state.warp(), state.u().values(), &mut out);
    ScalarField::new(state.base(), out).expect("speed of a valid state is finite")
}

fn domain_exit(warp: &WarpingFunction, u: &[f64], t: f64) -> Result<(), FlowError> {
    match check_heights(warp, u) {
        Err(GeometryError::OutsideDomain { index, r }) => {
            Err(FlowError::DomainExit { t, index, r })
        }
        Err(e) => Err(e.into()),
        Ok(()) => Ok(()),
    }
}

/// Reusable buffers for Heun steps.
struct Stepper<'a> {
    base: &'a BaseManifold,
    warp: &'a WarpingFunction,
    rate: Vec<f64>,
    rate2: Vec<f64>,
    trial: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(base: &'a BaseManifold, warp: &'a WarpingFunction) -> Self {
        let n = base.len();
        Stepper {
            base,
            warp,
            rate: vec![0.0; n],
            rate2: vec![0.0; n],
            trial: vec![0.0; n],
        }
    }

    /// Fills `self.rate` for `u`.
    fn evaluate(&mut self, u: &[f64]) -> RateStats {
        rate_into(self.base, self.warp, u, &mut self.rate)
    }

    fn stable_dt(&self, st: &RateStats, safety: f64) -> f64 {
        let dx = self.base.min_spacing();
        let m = self.base.dim() as f64;
        safety * dx * dx * st.min_theta * st.min_theta / (2.0 * m * st.max_inv_h2)
    }

    /// Heun step from `u` with the rate already evaluated by [`Self::evaluate`].
    fn advance(&mut self, u: &mut [f64], t: f64, dt: f64, floor: f64) -> Result<(), FlowError> {
        for ((p, &x), &s) in self.trial.iter_mut().zip(u.iter()).zip(&self.rate) {
            *p = x + dt * s;
        }
        domain_exit(self.warp, &self.trial, t + dt)?;
        let st = rate_into(self.base, self.warp, &self.trial, &mut self.rate2);
        if !(st.min_theta >= floor) {
            return Err(FlowError::GraphicalityLost {
                t: t + dt,
                min_theta: st.min_theta,
                floor,
            });
        }
        for ((x, &s1), &s2) in u.iter_mut().zip(&self.rate).zip(&self.rate2) {
            *x += 0.5 * dt * (s1 + s2);
        }
        domain_exit(self.warp, u, t + dt)
    }
}

/// One Heun step of size `dt`.
pub fn step<'a>(
    state: &GraphState<'a>,
    dt: f64,
    theta_floor: f64,
) -> Result<GraphState<'a>, FlowError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(FlowError::InvalidConfig(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let mut stepper = Stepper::new(state.base(), state.warp());
    let mut u = state.u().values().to_vec();
    let st = stepper.evaluate(&u);
    if !(st.min_theta >= theta_floor) {
        return Err(FlowError::GraphicalityLost {
            t: state.t(),
            min_theta: st.min_theta,
            floor: theta_floor,
        });
    }
    stepper.advance(&mut u, state.t(), dt, theta_floor)?;
    let field = ScalarField::new(state.base(), u).map_err(GeometryError::from)?;
    Ok(GraphState::new(
        field,
        state.t() + dt,
        state.warp(),
        state.base(),
    )?)
}

/// Stable step size for `state` under `safety`.
pub fn stable_dt(state: &GraphState, safety: f64) -> f64 {
    let mut stepper = Stepper::new(state.base(), state.warp());
    let st = stepper.evaluate(state.u().values());
    stepper.stable_dt(&st, safety)
}

fn sup_abs(u: &[f64]) -> f64 {
    u.iter().fold(0.0, |m, &x| m.max(x.abs()))
}

fn min_max(u: &[f64]) -> (f64, f64) {
    u.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}

fn fmin(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) | (None, x) => x,
    }
}

fn fmax(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) | (None, x) => x,
    }
}

/// Runs the flow from `u0` until convergence, `t_end`, or an abort.
pub fn run_flow(
    u0: ScalarField,
    warp: &WarpingFunction,
    base: &BaseManifold,
    cfg: &FlowConfig,
) -> Result<FlowRun, FlowError> {
    cfg.validate()?;
    let initial = GraphState::new(u0, 0.0, warp, base)?;
    let mut u = initial.into_field().into_values();

    let mut stepper = Stepper::new(base, warp);
    let mut stats = stepper.evaluate(&u);
    let initial_min_theta = stats.min_theta;
    let initial_sup_u = sup_abs(&u);
    let a0 = cfg.a0.unwrap_or(0.0).max(initial_sup_u);
    let threshold = angle_threshold(warp, a0)?;
    let f0_bar = (initial_min_theta * initial_min_theta).min(1.0);
    let barrier = solve_barrier(
        warp,
        base.ambient_dim(),
        a0,
        f0_bar,
        cfg.t_end,
        cfg.barrier_dt,
    )?;
    let threshold_side = if (initial_min_theta - threshold).abs() <= 1e-12 {
        ThresholdSide::At
    } else if initial_min_theta > threshold {
        ThresholdSide::Above
    } else {
        ThresholdSide::Below
    };

    let shape_field =
        |values: Vec<f64>| ScalarField::new(base, values).map_err(GeometryError::from);
    let mut snapshots = vec![Snapshot {
        step: 0,
        t: 0.0,
        u: shape_field(u.clone())?,
    }];
    let mut diagnostics = Vec::new();
    let mut t: f64 = 0.0;
    let mut steps: u64 = 0;
    let mut min_angle_margin = f64::INFINITY;
    let mut max_excess = f64::NEG_INFINITY;
    let (mut max_cor, mut max_thm, mut min_slack) = (None, None, None);
    let mut abort: Option<FlowError> = None;

    let outcome = loop {
        let (r_t, f_t) = barrier.sample(t.min(barrier.t_end()))?;
        let (lo_env, hi_env) = (if barrier.half_open { 0.0 } else { -r_t }, r_t);
        let (lo, hi) = min_max(&u);
        max_excess = max_excess.max((hi - hi_env).max(lo_env - lo));
        min_angle_margin = min_angle_margin.min(stats.min_theta * stats.min_theta - f_t);
        let sup_u = sup_abs(&u);

        let lost = !(stats.min_theta >= cfg.theta_floor);
        let converged = !lost && sup_u < cfg.convergence_eps;
        let finished = lost || converged || t >= cfg.t_end;
        let dt = if finished {
            0.0
        } else {
            stepper.stable_dt(&stats, cfg.dt_safety).min(cfg.t_end - t)
        };

        if finished || steps % cfg.output_stride as u64 == 0 {
            let mut rec = DiagnosticsRecord {
                step: steps,
                t,
                dt,
                min_theta: stats.min_theta,
                sup_u,
                max_h: stats.max_abs_h,
                max_a_sq: stats.max_a_sq,
                res_cor26: None,
                res_thm31_eq: None,
                ineq_slack_min: None,
                r_of_t: r_t,
                f_bar_of_t: f_t,
            };
            if !lost && !cfg.residual_checks.is_empty() {
                let res =
                    residuals::residual_fields(base, warp, &u, &stepper.rate, cfg.theta_floor)?;
                let sup = |v: &[f64]| sup_abs(v);
                let checks = &cfg.residual_checks;
                if checks.contains(&ResidualCheck::Cor26) {
                    rec.res_cor26 = Some(sup(&res.cor26));
                }
                if checks.contains(&ResidualCheck::Thm31) {
                    rec.res_thm31_eq = Some(sup(&res.thm31_eq));
                }
                if checks.contains(&ResidualCheck::Ineq32) {
                    rec.ineq_slack_min =
                        Some(res.ineq_slack.iter().cloned().fold(f64::INFINITY, f64::min));
                }
                max_cor = fmax(max_cor, rec.res_cor26);
                max_thm = fmax(max_thm, rec.res_thm31_eq);
                min_slack = fmin(min_slack, rec.ineq_slack_min);
            }
            diagnostics.push(rec);
        }
        if lost {
            abort = Some(FlowError::GraphicalityLost {
                t,
                min_theta: stats.min_theta,
                floor: cfg.theta_floor,
            });
            break FlowOutcome::GraphicalityLost;
        }
        if finished {
            break if converged {
                FlowOutcome::Converged
            } else {
                FlowOutcome::TEndReached
            };
        }

        if let Err(e) = stepper.advance(&mut u, t, dt, cfg.theta_floor) {
            let outcome = match e {
                FlowError::GraphicalityLost { .. } => FlowOutcome::GraphicalityLost,
                FlowError::DomainExit { .. } => FlowOutcome::DomainExit,
                other => return Err(other),
            };
            abort = Some(e);
            break outcome;
        }
        steps += 1;
        t = if cfg.t_end - (t + dt) <= 1e-12 * cfg.t_end {
            cfg.t_end
        } else {
            t + dt
        };
        stats = stepper.evaluate(&u);
        if let Some(k) = cfg.snapshot_stride {
            if steps % k as u64 == 0 {
                snapshots.push(Snapshot {
                    step: steps,
                    t,
                    u: shape_field(u.clone())?,
                });
            }
        }
    };

    if snapshots.last().map(|s| s.step) != Some(steps) {
        snapshots.push(Snapshot {
            step: steps,
            t,
            u: shape_field(u.clone())?,
        });
    }
    let final_sup_u = sup_abs(&u);
    let summary = FlowSummary {
        outcome,
        steps,
        t_final: t,
        initial_min_theta,
        initial_sup_u,
        a0,
        threshold,
        threshold_side,
        threshold_satisfied: threshold_side == ThresholdSide::Above,
        f_limit: barrier.f_limit,
        final_sup_u,
        final_min_theta: stats.min_theta,
        min_angle_margin,
        max_containment_excess: max_excess,
        containment_ok: max_excess <= cfg.tol_avoid,
        angle_bound_ok: min_angle_margin >= -cfg.tol_angle,
        max_res_cor26: max_cor,
        max_res_thm31_eq: max_thm,
        min_ineq_slack: min_slack,
        abort_reason: abort.map(|e| e.to_string()),
    };
    Ok(FlowRun {
        config: cfg.clone(),
        snapshots,
        diagnostics,
        barrier,
        summary,
    })
}
