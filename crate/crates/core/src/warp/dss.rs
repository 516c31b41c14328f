//! The de Sitter–Schwarzschild warp.
//!
//! The metric `ds²/ω(s) + s² g_{S^{n−1}}` with `ω(s) = 1 − m s^{2−n} − κ s²`
//! becomes `dr² + h(r)² g` under `dr/ds = ω(s)^{−1/2}`, `r(s̲) = 0`, and then
//! `h(r) = s`, `h' = √ω(s)`, `h'' = ω'(s)/2`.
//!
//! The map `s ↦ r` has an inverse-square-root singularity at the horizon
//! `s̲`. Writing `s = s̲ + τ²` and `ω(s) = τ² q(τ)` (with `q` evaluated from
//! a factored form, so there is no cancellation near the horizon) turns the
//! integrand into the smooth `dr/dτ = 2/√q(τ)`. The profile is tabulated on a
//! uniform `τ` grid with cubic Hermite interpolation (exact slopes) and
//! inverted cell-wise by safeguarded Newton iteration.

use serde::Serialize;

use super::{WarpError, WarpValue, WarpingFunction};

const GAUSS5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GAUSS5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Validated de Sitter–Schwarzschild parameters with their horizon radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DssParameters {
    pub n: usize,
    pub mass: f64,
    pub kappa: f64,
    /// Smallest positive root `s̲` of `ω`.
    pub s_lower: f64,
    /// Second root `s̄` of `ω`; infinite when `κ ≤ 0`.
    pub s_upper: f64,
    /// `(m n / 2)^{1/(n−2)}`, the largest `s` with `h h'' − h'² ≥ 0`.
    pub s_star: f64,
}

impl DssParameters {
    pub fn new(n: usize, mass: f64, kappa: f64) -> Result<Self, WarpError> {
        if n < 3 {
            return Err(WarpError::InvalidParameter(format!(
                "ambient dimension must be >= 3, got {n}"
            )));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(WarpError::InvalidParameter(format!(
                "mass must be positive, got {mass}"
            )));
        }
        if !kappa.is_finite() {
            return Err(WarpError::InvalidParameter(format!(
                "kappa must be finite, got {kappa}"
            )));
        }
        let (lhs, rhs) = admissibility(n, mass, kappa);
        if kappa > 0.0 && lhs >= rhs {
            return Err(WarpError::Inadmissible(format!(
                "n^n m^2 kappa^(n-2) = {lhs} is not below 4 (n-2)^(n-2) = {rhs}"
            )));
        }
        let k = (n - 2) as f64;
        let mut p = DssParameters {
            n,
            mass,
            kappa,
            s_lower: f64::NAN,
            s_upper: f64::INFINITY,
            s_star: (mass * n as f64 / 2.0).powf(1.0 / k),
        };
        let probe = p;
        let omega = move |s: f64| probe.omega(s);
        let s0 = mass.powf(1.0 / k);

        let mut lo = s0;
        while omega(lo) >= 0.0 {
            lo *= 0.5;
            if lo < 1e-300 {
                return Err(WarpError::RootFinding(
                    "no sign change of omega near s = 0".into(),
                ));
            }
        }
        if kappa > 0.0 {
            // ω increases up to its maximum at S with S^n = m (n−2) / (2κ)
            let peak = (mass * k / (2.0 * kappa)).powf(1.0 / n as f64);
            if omega(peak) <= 0.0 {
                return Err(WarpError::Inadmissible(format!(
                    "omega has no positive region (max {} at s = {peak})",
                    omega(peak)
                )));
            }
            let lo = lo.min(peak);
            p.s_lower = bisect(omega, lo, peak)?;
            let mut hi = 2.0 * peak;
            while omega(hi) >= 0.0 {
                hi *= 2.0;
                if !hi.is_finite() {
                    return Err(WarpError::RootFinding(
                        "omega never returns below zero".into(),
                    ));
                }
            }
            p.s_upper = bisect(omega, peak, hi)?;
        } else {
            let mut hi = s0.max(lo);
            while omega(hi) <= 0.0 {
                hi *= 2.0;
                if !hi.is_finite() {
                    return Err(WarpError::RootFinding(
                        "omega never becomes positive".into(),
                    ));
                }
            }
            p.s_lower = bisect(omega, lo, hi)?;
        }
        Ok(p)
    }

    /// `ω(s) = 1 − m s^{2−n} − κ s²`.
    pub fn omega(&self, s: f64) -> f64 {
        1.0 - self.mass * s.powi(2 - self.n as i32) - self.kappa * s * s
    }

    /// `ω'(s) = m (n−2) s^{1−n} − 2κ s`.
    pub fn omega_prime(&self, s: f64) -> f64 {
        self.mass * (self.n as f64 - 2.0) * s.powi(1 - self.n as i32) - 2.0 * self.kappa * s
    }

    /// `h h'' − h'²` in closed form, `½ m n s^{2−n} − 1`.
    pub fn log_convexity_closed_form(&self, s: f64) -> f64 {
        0.5 * self.mass * self.n as f64 * s.powi(2 - self.n as i32) - 1.0
    }

    /// `ω(s̲ + τ²) / τ²`, evaluated from the factored difference so it stays
    /// accurate as `τ → 0`.
    fn q(&self, tau: f64) -> f64 {
        let sl = self.s_lower;
        let s = sl + tau * tau;
        let k = self.n - 2;
        // (s̲^k − s^k) / (s − s̲) = −Σ s^j s̲^{k−1−j}
        let mut sum = 0.0;
        let mut sj = 1.0;
        for j in 0..k {
            sum += sj * sl.powi((k - 1 - j) as i32);
            sj *= s;
        }
        let sk = s.powi(k as i32);
        let slk = sl.powi(k as i32);
        self.mass * sum / (sk * slk) - self.kappa * (s + sl)
    }
}

/// `(nⁿ m² κ^{n−2}, 4 (n−2)^{n−2})`; admissible for `κ > 0` iff lhs < rhs.
pub fn admissibility(n: usize, mass: f64, kappa: f64) -> (f64, f64) {
    let nf = n as f64;
    let k = (n - 2) as i32;
    (
        nf.powi(n as i32) * mass * mass * kappa.powi(k),
        4.0 * (nf - 2.0).powi(k),
    )
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64, WarpError> {
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(WarpError::RootFinding(format!(
            "no sign change on [{lo}, {hi}]"
        )));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Tabulated `τ ↦ r` with exact slopes.
#[derive(Debug, Clone)]
pub struct DssTable {
    params: DssParameters,
    s_cap: f64,
    tau_step: f64,
    r: Vec<f64>,
    slope: Vec<f64>,
}

impl DssTable {
    fn build(params: DssParameters, grid_size: usize, s_cap: f64) -> Self {
        let tau_cap = (s_cap - params.s_lower).sqrt();
        let cells = grid_size - 1;
        let tau_step = tau_cap / cells as f64;
        let integrand = |tau: f64| 2.0 / params.q(tau).sqrt();
        let mut r = Vec::with_capacity(grid_size);
        let mut slope = Vec::with_capacity(grid_size);
        let mut acc = 0.0;
        r.push(0.0);
        slope.push(integrand(0.0));
        for cell in 0..cells {
            let a = cell as f64 * tau_step;
            acc += gauss5(&integrand, a, a + tau_step);
            r.push(acc);
            slope.push(integrand(a + tau_step));
        }
        DssTable {
            params,
            s_cap,
            tau_step,
            r,
            slope,
        }
    }

    pub fn params(&self) -> &DssParameters {
        &self.params
    }

    pub fn s_cap(&self) -> f64 {
        self.s_cap
    }

    /// `F(s_cap)`, the right end of the tabulated range.
    pub fn r_cap(&self) -> f64 {
        *self.r.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Radius grid of the table, strictly increasing from 0.
    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    fn tau_node(&self, k: usize) -> f64 {
        k as f64 * self.tau_step
    }

    fn value_at_tau(&self, tau: f64) -> WarpValue {
        let p = &self.params;
        let s = p.s_lower + tau * tau;
        WarpValue {
            h: s,
            h_prime: tau * p.q(tau).sqrt(),
            h_double_prime: 0.5 * p.omega_prime(s),
        }
    }

    /// Values at the `k`-th node, exact in `τ`.
    pub fn node(&self, k: usize) -> (f64, WarpValue) {
        (self.r[k], self.value_at_tau(self.tau_node(k)))
    }

    /// Interpolated `r(τ)` on the table.
    pub fn radius_at_tau(&self, tau: f64) -> f64 {
        let cells = self.r.len() - 1;
        let k = ((tau / self.tau_step).floor() as usize).min(cells - 1);
        let t = (tau - self.tau_node(k)) / self.tau_step;
        self.hermite(k, t).0
    }

    /// `F(s)`; `s` must lie in `[s̲, s_cap]`.
    pub fn radius_of(&self, s: f64) -> f64 {
        self.radius_at_tau((s - self.params.s_lower).max(0.0).sqrt())
    }

    fn hermite(&self, k: usize, t: f64) -> (f64, f64) {
        let d = self.tau_step;
        let (r0, r1) = (self.r[k], self.r[k + 1]);
        let (m0, m1) = (self.slope[k] * d, self.slope[k + 1] * d);
        let t2 = t * t;
        let t3 = t2 * t;
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * r0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * r1
            + (t3 - t2) * m1;
        let deriv = (6.0 * t2 - 6.0 * t) * r0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * r1
            + (3.0 * t2 - 2.0 * t) * m1;
        (value, deriv)
    }

    /// Inverts the interpolant: the `τ` with `r(τ) = r`.
    pub fn tau_of(&self, r: f64) -> f64 {
        let cells = self.r.len() - 1;
        let k = self
            .r
            .partition_point(|&x| x <= r)
            .saturating_sub(1)
            .min(cells - 1);
        let (r0, r1) = (self.r[k], self.r[k + 1]);
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut t = ((r - r0) / (r1 - r0)).clamp(0.0, 1.0);
        for _ in 0..60 {
            let (v, dv) = self.hermite(k, t);
            let resid = v - r;
            if resid > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let mut next = t - resid / dv;
            if !(next > lo && next < hi) || dv <= 0.0 {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-16 {
                t = next;
                break;
            }
            t = next;
        }
        self.tau_node(k) + t * self.tau_step
    }

    pub(crate) fn eval(&self, r: f64) -> WarpValue {
        self.value_at_tau(self.tau_of(r))
    }
}

pub(crate) fn gauss5(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GAUSS5_NODES
        .iter()
        .zip(GAUSS5_WEIGHTS.iter())
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// One verification row of the constructed warp.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DssRow {
    pub r: f64,
    pub s: f64,
    pub h_prime: f64,
    pub h_double_prime: f64,
    /// `h h'' − h'²` from the tabulated values.
    pub log_convexity: f64,
    /// `½ m n s^{2−n} − 1`.
    pub closed_form: f64,
    /// `h'² − ω(s)`.
    pub omega_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DssReport {
    pub params: DssParameters,
    pub admissibility_lhs: f64,
    pub admissibility_rhs: f64,
    /// `None` when `s̄ = ∞`.
    pub s_upper: Option<f64>,
    pub omega_at_s_lower: f64,
    pub s_cap: f64,
    pub r_cap: f64,
    /// `F(s_star)` when `s_star` lies in the tabulated range.
    pub r_star: Option<f64>,
    pub grid_size: usize,
    pub max_identity_error: f64,
    pub max_omega_error: f64,
    pub table: Vec<DssRow>,
}

const REPORT_ROWS: usize = 257;

/// Builds the tabulated de Sitter–Schwarzschild warp on `[0, F(s_cap))`.
///
/// `s_cap` defaults to the midpoint of `[s_star, s̄]` when `s̄` is finite and
/// to `2 s_star` otherwise.
pub fn build_dss_warp(
    p: &DssParameters,
    grid_size: usize,
    s_cap: Option<f64>,
) -> Result<(WarpingFunction, DssReport), WarpError> {
    if grid_size < 64 {
        return Err(WarpError::InvalidParameter(format!(
            "grid_size must be at least 64, got {grid_size}"
        )));
    }
    let s_cap = s_cap.unwrap_or(if p.s_upper.is_finite() {
        p.s_star + 0.5 * (p.s_upper - p.s_star)
    } else {
        2.0 * p.s_star
    });
    if !(s_cap > p.s_lower) {
        return Err(WarpError::InvalidParameter(format!(
            "s_cap = {s_cap} must exceed the horizon s_lower = {}",
            p.s_lower
        )));
    }
    if s_cap >= p.s_upper {
        return Err(WarpError::InvalidParameter(format!(
            "s_cap = {s_cap} must stay below s_upper = {}",
            p.s_upper
        )));
    }

    let table = DssTable::build(*p, grid_size, s_cap);
    let r_cap = table.r_cap();
    let r_star = (p.s_star <= s_cap).then(|| table.radius_of(p.s_star));

    let row = |r: f64, v: WarpValue| DssRow {
        r,
        s: v.h,
        h_prime: v.h_prime,
        h_double_prime: v.h_double_prime,
        log_convexity: v.log_convexity(),
        closed_form: p.log_convexity_closed_form(v.h),
        omega_residual: v.h_prime * v.h_prime - p.omega(v.h),
    };
    let mut max_identity_error: f64 = 0.0;
    let mut max_omega_error: f64 = 0.0;
    let mut track = |row: &DssRow| {
        max_identity_error = max_identity_error.max((row.log_convexity - row.closed_form).abs());
        max_omega_error = max_omega_error.max(row.omega_residual.abs());
    };
    // nodes, then the interpolation/inversion path at cell midpoints
    for k in 0..table.len() {
        let (r, v) = table.node(k);
        track(&row(r, v));
    }
    for w in table.radii().windows(2) {
        let r = 0.5 * (w[0] + w[1]);
        track(&row(r, table.eval(r)));
    }
    let rows: Vec<DssRow> = (0..REPORT_ROWS)
        .map(|i| {
            let r = r_cap * i as f64 / REPORT_ROWS as f64;
            row(r, table.eval(r))
        })
        .collect();

    let (lhs, rhs) = admissibility(p.n, p.mass, p.kappa);
    let report = DssReport {
        params: *p,
        admissibility_lhs: lhs,
        admissibility_rhs: rhs,
        s_upper: p.s_upper.is_finite().then_some(p.s_upper),
        omega_at_s_lower: p.omega(p.s_lower),
        s_cap,
        r_cap,
        r_star,
        grid_size,
        max_identity_error,
        max_omega_error,
        table: rows,
    };
    Ok((WarpingFunction::tabulated(table), report))
}
