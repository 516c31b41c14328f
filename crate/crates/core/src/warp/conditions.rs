use serde::Serialize;

use super::{WarpError, WarpingFunction, NORMALIZATION_TOL};

/// One probe row of a [`ConditionsReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionRow {
    pub r: f64,
    pub h: f64,
    pub h_prime: f64,
    pub h_double_prime: f64,
    /// `h h'' − h'² + ρ − c`.
    pub c3_value: f64,
}

/// Sample-based certificate of conditions (C1)–(C3) for a warp and a Ricci
/// lower bound `ρ` of the base.
///
/// C1 is tested against the normalization `h₀ = h(0)` rather than `h(0) = 1`,
/// so warps such as the de Sitter–Schwarzschild profile (where `h(0)` is the
/// horizon radius) are certified too. The unit normalization is reported in
/// `unit_normalized`.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionsReport {
    pub rho: f64,
    /// `max{0, ρ}`.
    pub c: f64,
    pub h0: f64,
    pub unit_normalized: bool,
    pub c1_pass: bool,
    pub c2_pass: bool,
    pub c3_pass: bool,
    /// Minimum of `c3_value` over the probe rows.
    pub c3_margin: f64,
    pub tolerance: f64,
    pub samples: Vec<ConditionRow>,
}

impl ConditionsReport {
    pub fn all_pass(&self) -> bool {
        self.c1_pass && self.c2_pass && self.c3_pass
    }

    /// `√(max{0, 1 − h₀²/h²(a₀)})` for this report's warp.
    pub fn angle_threshold(&self, w: &WarpingFunction, a0: f64) -> Result<f64, WarpError> {
        angle_threshold(w, a0)
    }
}

/// Uniform probe grid of `points` radii on `[lo, hi]`, with `0` inserted when
/// it lies inside and is not already a node.
pub fn probe_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 0 {
        return Vec::new();
    }
    if points == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points).map(|i| lo + step * i as f64).collect();
    if let Some(last) = grid.last_mut() {
        *last = hi;
    }
    if lo < 0.0 && hi > 0.0 && !grid.contains(&0.0) {
        let at = grid.partition_point(|&r| r < 0.0);
        grid.insert(at, 0.0);
    }
    grid
}

/// Checks (C1)–(C3) on the probe radii `r_probe`, which must lie in the
/// domain and contain `0`.
pub fn check_conditions(
    w: &WarpingFunction,
    rho: f64,
    r_probe: &[f64],
) -> Result<ConditionsReport, WarpError> {
    if r_probe.is_empty() {
        return Err(WarpError::EmptyProbeGrid);
    }
    if !rho.is_finite() {
        return Err(WarpError::InvalidParameter(format!(
            "rho must be finite, got {rho}"
        )));
    }
    let c = rho.max(0.0);
    let mut samples = Vec::with_capacity(r_probe.len());
    for &r in r_probe {
        let v = w.eval(r)?;
        samples.push(ConditionRow {
            r,
            h: v.h,
            h_prime: v.h_prime,
            h_double_prime: v.h_double_prime,
            c3_value: v.log_convexity() + rho - c,
        });
    }
    if !r_probe.contains(&0.0) {
        return Err(WarpError::InvalidParameter(
            "probe grid must contain r = 0".into(),
        ));
    }

    let origin = w.eval(0.0)?;
    let h0 = origin.h;
    let c1_pass = h0 > 0.0 && origin.h_prime.abs() <= NORMALIZATION_TOL;
    let c2_pass = samples.iter().all(|row| {
        if row.r > 0.0 {
            row.h_prime > 0.0
        } else if row.r < 0.0 {
            row.h_prime < 0.0
        } else {
            true
        }
    });
    let c3_margin = samples
        .iter()
        .map(|row| row.c3_value)
        .fold(f64::INFINITY, f64::min);

    Ok(ConditionsReport {
        rho,
        c,
        h0,
        unit_normalized: (h0 - 1.0).abs() <= NORMALIZATION_TOL,
        c1_pass,
        c2_pass,
        c3_pass: c3_margin >= -NORMALIZATION_TOL,
        c3_margin,
        tolerance: NORMALIZATION_TOL,
        samples,
    })
}

/// Initial-angle threshold `√(1 − h₀²/h²(a₀))`, clamped at zero.
///
/// With `h₀ = 1` this is the usual `√(1 − 1/h²(a₀))`.
pub fn angle_threshold(w: &WarpingFunction, a0: f64) -> Result<f64, WarpError> {
    let h = w.eval(a0)?.h;
    let h0 = w.h0();
    let ratio = h0 / h;
    Ok((1.0 - ratio * ratio).max(0.0).sqrt())
}
