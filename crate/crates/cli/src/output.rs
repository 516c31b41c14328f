//! CSV and JSON writers for run artifacts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use warpflow::barrier::BarrierSolution;
use warpflow::base::{BaseManifold, ScalarField};
use warpflow::flow::DiagnosticsRecord;
use warpflow::warp::WarpingFunction;

use crate::{CliError, ExperimentConfig};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    artifact: &'static str,
    version: &'static str,
    subcommand: &'a str,
    config: &'a ExperimentConfig,
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Internal(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Writes `manifest.json` echoing the resolved config.
pub fn write_manifest(
    dir: &Path,
    subcommand: &str,
    cfg: &ExperimentConfig,
) -> Result<(), CliError> {
    write_json(
        &dir.join(MANIFEST),
        &Manifest {
            artifact: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            config: cfg,
        },
    )
}

pub fn write_field(path: &Path, base: &BaseManifold, u: &ScalarField) -> Result<(), CliError> {
    let mut w = create(path)?;
    u.write_csv(base, &mut w)?;
    w.flush()?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_diagnostics(path: &Path, rows: &[DiagnosticsRecord]) -> Result<(), CliError> {
    let mut w = create(path)?;
    writeln!(
        w,
        "t,min_theta,sup_u,max_H,max_Asq,res_cor26,res_thm31_eq,ineq_slack_min,R_of_t,f_bar_of_t"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.t,
            r.min_theta,
            r.sup_u,
            r.max_h,
            r.max_a_sq,
            opt(r.res_cor26),
            opt(r.res_thm31_eq),
            opt(r.ineq_slack_min),
            r.r_of_t,
            r.f_bar_of_t
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_barrier(
    path: &Path,
    sol: &BarrierSolution,
    warp: &WarpingFunction,
) -> Result<(), CliError> {
    let drift = sol.lambda_drift(warp);
    let mut w = create(path)?;
    writeln!(w, "t,R,f_bar,lambda_drift")?;
    for i in 0..sol.times.len() {
        writeln!(
            w,
            "{},{},{},{}",
            sol.times[i], sol.radius[i], sol.f_bar[i], drift[i]
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_warp_table(path: &Path, warp: &WarpingFunction) -> Result<(), CliError> {
    let table = warp
        .table()
        .ok_or_else(|| CliError::Internal("warp is not tabulated".into()))?;
    let mut w = create(path)?;
    writeln!(w, "r,h,h_prime,h_double_prime")?;
    for k in 0..table.len() {
        let (r, v) = table.node(k);
        writeln!(w, "{r},{},{},{}", v.h, v.h_prime, v.h_double_prime)?;
    }
    w.flush()?;
    Ok(())
}
