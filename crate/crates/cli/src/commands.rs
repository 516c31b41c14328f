//! Subcommand implementations.

use std::path::Path;

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;
use warpflow::barrier::solve_barrier;
use warpflow::base::synth::SmoothField;
use warpflow::base::BaseManifold;
use warpflow::flow::{run_flow, FlowError, FlowSummary};
use warpflow::geometry::{
    angle_duality_residual, compute_geometry, identity_residuals, mean_curvature_route_b,
    GeometryError, GraphState,
};
use warpflow::warp::{check_conditions, probe_grid, WarpingFunction};

use crate::config::WarpConfig;
use crate::output::{
    write_barrier, write_diagnostics, write_field, write_json, write_manifest, write_warp_table,
};
use crate::{CliError, Command, ExperimentConfig};

pub fn dispatch(command: Command, cfg: &ExperimentConfig) -> Result<(), CliError> {
    let dir = cfg.output_dir.as_path();
    info!("{} -> {}", command.name(), dir.display());
    match command {
        Command::CheckConditions => check(cfg, dir),
        Command::DssBuild => dss_build(cfg, dir),
        Command::RunBarrier => barrier(cfg, dir),
        Command::RunFlow => {
            let summary = flow(cfg, dir)?;
            if summary.outcome.is_abort() {
                return Err(CliError::Numerical(
                    summary.abort_reason.unwrap_or_default(),
                ));
            }
            Ok(())
        }
        Command::ValidateIdentities => validate(cfg, dir),
        Command::Sweep => sweep(cfg, dir),
    }
}

fn setup(cfg: &ExperimentConfig) -> Result<(BaseManifold, WarpingFunction), CliError> {
    let base = cfg.base.build()?;
    let (warp, _) = cfg.warp.build(base.ambient_dim())?;
    Ok((base, warp))
}

fn check(cfg: &ExperimentConfig, dir: &Path) -> Result<(), CliError> {
    let (base, warp) = setup(cfg)?;
    let c = &cfg.conditions;
    let domain = warp.domain();
    let hi = c.r_max.unwrap_or_else(|| 3f64.min(0.999 * domain.r_bar()));
    let lo = c
        .r_min
        .unwrap_or(if domain.is_half_open() { 0.0 } else { -hi });
    let rho = c.rho.unwrap_or_else(|| base.rho());
    let report = check_conditions(&warp, rho, &probe_grid(lo, hi, c.points))
        .map_err(|e| CliError::Config(format!("[conditions] {e}")))?;
    info!(
        "C1 {} C2 {} C3 {} (margin {:.3e})",
        report.c1_pass, report.c2_pass, report.c3_pass, report.c3_margin
    );
    write_json(&dir.join("conditions.json"), &report)?;
    write_manifest(dir, Command::CheckConditions.name(), cfg)
}

fn dss_build(cfg: &ExperimentConfig, dir: &Path) -> Result<(), CliError> {
    if !matches!(cfg.warp, WarpConfig::Dss { .. }) {
        return Err(CliError::Config(
            "dss-build needs [warp] family = \"dss\"".into(),
        ));
    }
    let (warp, report) = cfg.warp.build(cfg.ambient_dim())?;
    let report = report.ok_or_else(|| CliError::Internal("missing dss report".into()))?;
    info!(
        "s_lower {} s_star {} r_cap {} identity error {:.2e}",
        report.params.s_lower, report.params.s_star, report.r_cap, report.max_identity_error
    );
    write_warp_table(&dir.join("dss_warp.csv"), &warp)?;
    write_json(&dir.join("dss_report.json"), &report)?;
    write_manifest(dir, Command::DssBuild.name(), cfg)
}

#[derive(Debug, Serialize)]
struct BarrierSummary {
    n: usize,
    a: f64,
    f0_bar: f64,
    t_end: f64,
    lambda0: f64,
    f_limit: f64,
    #[serde(rename = "final_R")]
    final_radius: f64,
    final_f_bar: f64,
    max_lambda_drift: f64,
}

fn barrier(cfg: &ExperimentConfig, dir: &Path) -> Result<(), CliError> {
    let b = cfg.barrier_section()?;
    let (warp, _) = cfg.warp.build(cfg.ambient_dim())?;
    let n = cfg.ambient_dim();
    let sol = solve_barrier(&warp, n, b.a, b.f0_bar, b.t_end, b.dt)
        .map_err(|e| CliError::Config(format!("[barrier] {e}")))?;
    let summary = BarrierSummary {
        n,
        a: b.a,
        f0_bar: b.f0_bar,
        t_end: sol.t_end(),
        lambda0: sol.lambda0,
        f_limit: sol.f_limit,
        final_radius: sol.final_radius(),
        final_f_bar: *sol.f_bar.last().expect("solution has samples"),
        max_lambda_drift: sol.lambda_drift(&warp).into_iter().fold(0.0, f64::max),
    };
    info!(
        "final R {:.6e}, f_limit {:.6}",
        summary.final_radius, summary.f_limit
    );
    write_barrier(&dir.join("barrier.csv"), &sol, &warp)?;
    write_json(&dir.join("barrier_summary.json"), &summary)?;
    write_manifest(dir, Command::RunBarrier.name(), cfg)
}

fn flow_error(e: FlowError) -> CliError {
    match e {
        FlowError::Geometry(
            GeometryError::ThetaBelowMinimum { .. } | GeometryError::DegenerateMetric(_),
        )
        | FlowError::GraphicalityLost { .. }
        | FlowError::DomainExit { .. } => CliError::Numerical(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

/// Runs the flow and writes its artifacts; aborts are reported in the summary.
pub fn flow(cfg: &ExperimentConfig, dir: &Path) -> Result<FlowSummary, CliError> {
    let (base, warp) = setup(cfg)?;
    let u0 = cfg
        .initial_section()?
        .sample(&base, &warp)
        .map_err(|e| CliError::Config(format!("[initial_data] {e}")))?;
    let run = run_flow(u0, &warp, &base, &cfg.flow).map_err(flow_error)?;
    let s = &run.summary;
    info!(
        "{:?} after {} steps at t = {}, sup|u| = {:.3e}",
        s.outcome, s.steps, s.t_final, s.final_sup_u
    );
    if !s.threshold_satisfied {
        warn!(
            "initial min angle {:.6} does not exceed the threshold {:.6}",
            s.initial_min_theta, s.threshold
        );
    }
    write_diagnostics(&dir.join("diagnostics.csv"), &run.diagnostics)?;
    write_field(&dir.join("initial_state.csv"), &base, &run.snapshots[0].u)?;
    write_field(&dir.join("final_state.csv"), &base, &run.final_state().u)?;
    if cfg.flow.snapshot_stride.is_some() {
        for snap in &run.snapshots {
            write_field(
                &dir.join(format!("snapshots/u_{:08}.csv", snap.step)),
                &base,
                &snap.u,
            )?;
        }
    }
    write_barrier(&dir.join("barrier.csv"), &run.barrier, &warp)?;
    write_json(&dir.join("summary.json"), s)?;
    write_manifest(dir, Command::RunFlow.name(), cfg)?;
    Ok(run.summary)
}

#[derive(Debug, Serialize)]
struct IdentityLevel {
    points: usize,
    spacing: f64,
    min_theta: f64,
    prop_delta_u: f64,
    angle_duality: f64,
    route_gap: f64,
    height_evolution: f64,
    theta_sq_evolution: f64,
    inequality_slack_min: f64,
}

#[derive(Debug, Serialize)]
struct IdentityOrders {
    prop_delta_u: f64,
    route_gap: f64,
    height_evolution: f64,
    theta_sq_evolution: f64,
}

#[derive(Debug, Serialize)]
struct IdentityReport {
    seed: u64,
    levels: Vec<IdentityLevel>,
    /// `log2` of the coarse to fine max-norm ratio.
    orders: IdentityOrders,
}

fn identity_level(
    cfg: &ExperimentConfig,
    warp: &WarpingFunction,
    field: &SmoothField,
    points: usize,
) -> Result<IdentityLevel, CliError> {
    let base = cfg.base.build_with_points(points)?;
    let state = GraphState::new(field.sample(&base), 0.0, warp, &base)
        .map_err(|e| CliError::Config(format!("[validate] {e}")))?;
    let numerical = |e: GeometryError| CliError::Numerical(e.to_string());
    let geo = compute_geometry(&state).map_err(numerical)?;
    let route_b = mean_curvature_route_b(&state, cfg.validate.theta_min).map_err(numerical)?;
    let res = identity_residuals(&state).map_err(numerical)?;
    let route_gap = geo
        .mean_curvature
        .values()
        .iter()
        .zip(route_b.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(IdentityLevel {
        points,
        spacing: base.min_spacing(),
        min_theta: geo.theta.min(),
        prop_delta_u: res.prop_delta_u.sup_norm(),
        angle_duality: angle_duality_residual(&state).sup_norm(),
        route_gap,
        height_evolution: res.height_evolution.sup_norm(),
        theta_sq_evolution: res.theta_sq_evolution.sup_norm(),
        inequality_slack_min: res.inequality_slack.min(),
    })
}

fn validate(cfg: &ExperimentConfig, dir: &Path) -> Result<(), CliError> {
    let (base, warp) = setup(cfg)?;
    let v = &cfg.validate;
    let field = SmoothField::random(
        base.variant(),
        base.dim(),
        cfg.seed,
        v.max_mode,
        v.offset,
        v.amplitude,
    );
    let coarse = identity_level(cfg, &warp, &field, cfg.base.points)?;
    let fine = identity_level(cfg, &warp, &field, cfg.base.refined_points())?;
    let order = |a: f64, b: f64| (a / b).log2();
    let orders = IdentityOrders {
        prop_delta_u: order(coarse.prop_delta_u, fine.prop_delta_u),
        route_gap: order(coarse.route_gap, fine.route_gap),
        height_evolution: order(coarse.height_evolution, fine.height_evolution),
        theta_sq_evolution: order(coarse.theta_sq_evolution, fine.theta_sq_evolution),
    };
    info!(
        "orders: prop {:.3}, routes {:.3}, height {:.3}, angle {:.3}",
        orders.prop_delta_u, orders.route_gap, orders.height_evolution, orders.theta_sq_evolution
    );
    let report = IdentityReport {
        seed: cfg.seed,
        levels: vec![coarse, fine],
        orders,
    };
    write_json(&dir.join("identities.json"), &report)?;
    write_manifest(dir, Command::ValidateIdentities.name(), cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub value: String,
    pub result: Result<FlowSummary, String>,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn sweep(cfg: &ExperimentConfig, dir: &Path) -> Result<(), CliError> {
    let axis = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [sweep] section".into()))?;
    let rows: Vec<SweepRow> = axis
        .values
        .par_iter()
        .enumerate()
        .map(|(index, value)| {
            let run_dir = dir.join(format!("run_{index:03}"));
            let result = cfg
                .with_override(&axis.parameter, value)
                .and_then(|mut sub| {
                    sub.sweep = None;
                    sub.output_dir = run_dir.clone();
                    flow(&sub, &run_dir)
                })
                .map_err(|e| e.to_string());
            if let Err(e) = &result {
                warn!("{} = {value}: {e}", axis.parameter);
            }
            SweepRow {
                index,
                value: value.to_string(),
                result,
            }
        })
        .collect();

    let mut text = String::from(
        "index,parameter,value,outcome,initial_min_theta,threshold,threshold_satisfied,min_angle_margin,final_sup_u,t_final,error\n",
    );
    for row in &rows {
        let cells = match &row.result {
            Ok(s) => format!(
                "{},{},{},{},{},{},{},",
                serde_json::to_value(s.outcome)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_owned))
                    .unwrap_or_default(),
                s.initial_min_theta,
                s.threshold,
                s.threshold_satisfied,
                s.min_angle_margin,
                s.final_sup_u,
                s.t_final
            ),
            Err(e) => format!("error,,,,,,,{}", csv_field(e)),
        };
        text.push_str(&format!(
            "{},{},{},{cells}\n",
            row.index,
            csv_field(&axis.parameter),
            csv_field(&row.value)
        ));
    }
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("sweep_summary.csv"), text)?;
    write_manifest(dir, Command::Sweep.name(), cfg)?;
    let failed = rows.iter().filter(|r| r.result.is_err()).count();
    info!("{} runs, {failed} failed", rows.len());
    Ok(())
}
