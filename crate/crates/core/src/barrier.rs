//! Comparison ODEs for shrinking parallel slices and the angle lower bound.
//!
//! `R' = −(n−1) h'(R)/h(R)` and `f̄' = −2(n−1)(1−f̄) (h'(R)/h(R))²`, which
//! conserve `Λ = (1−f̄) h²(R)`.

use serde::Serialize;
use thiserror::Error;

use crate::warp::{WarpError, WarpingFunction};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BarrierError {
    #[error(transparent)]
    Warp(#[from] WarpError),
    #[error("invalid barrier input: {0}")]
    InvalidInput(String),
    #[error("time {t} lies outside the solved range [0, {t_end}]")]
    OutOfRange { t: f64, t_end: f64 },
    #[error("integration produced a non-finite state at t = {0}")]
    NonFinite(f64),
}

/// Sampled barrier trajectories `R(t)` and `f̄(t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarrierSolution {
    pub n: usize,
    pub a: f64,
    pub f0_bar: f64,
    pub times: Vec<f64>,
    #[serde(rename = "R")]
    pub radius: Vec<f64>,
    pub f_bar: Vec<f64>,
    /// `Λ(0) = (1−f̄₀) h²(a)`.
    pub lambda0: f64,
    /// `lim f̄ = 1 − Λ(0)/h₀²`.
    pub f_limit: f64,
    /// Whether the warp domain is `[0, r̄)`, making `N` itself the lower barrier.
    pub half_open: bool,
    #[serde(skip)]
    radius_rate: Vec<f64>,
    #[serde(skip)]
    f_bar_rate: Vec<f64>,
}

fn rates(warp: &WarpingFunction, nm1: f64, r: f64, f: f64) -> (f64, f64) {
    let v = warp.eval_unchecked(r);
    let k = v.h_prime / v.h;
    (-nm1 * k, -2.0 * nm1 * (1.0 - f) * k * k)
}

/// Integrates both ODEs with classical RK4 on a uniform grid ending exactly at `t_end`.
pub fn solve_barrier(
    warp: &WarpingFunction,
    n: usize,
    a: f64,
    f0_bar: f64,
    t_end: f64,
    dt: f64,
) -> Result<BarrierSolution, BarrierError> {
    if n < 2 {
        return Err(BarrierError::InvalidInput(format!(
            "ambient dimension must be >= 2, got {n}"
        )));
    }
    if !(a >= 0.0) {
        return Err(BarrierError::InvalidInput(format!(
            "initial height must be >= 0, got {a}"
        )));
    }
    let h_a = warp.eval(a)?.h;
    if !(0.0..=1.0).contains(&f0_bar) {
        return Err(BarrierError::InvalidInput(format!(
            "f0_bar must lie in [0, 1], got {f0_bar}"
        )));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(BarrierError::InvalidInput(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(BarrierError::InvalidInput(format!(
            "t_end must be finite and >= 0, got {t_end}"
        )));
    }
    let steps = (t_end / dt).ceil().max(1.0) as usize;
    let step = t_end / steps as f64;
    let nm1 = n as f64 - 1.0;
    let mut times = Vec::with_capacity(steps + 1);
    let mut radius = Vec::with_capacity(steps + 1);
    let mut f_bar = Vec::with_capacity(steps + 1);
    let mut radius_rate = Vec::with_capacity(steps + 1);
    let mut f_bar_rate = Vec::with_capacity(steps + 1);
    let (mut r, mut f) = (a, f0_bar);
    for k in 0..=steps {
        let t = k as f64 * step;
        let (dr, df) = rates(warp, nm1, r, f);
        times.push(t);
        radius.push(r);
        f_bar.push(f);
        radius_rate.push(dr);
        f_bar_rate.push(df);
        if k == steps {
            break;
        }
        let (k1r, k1f) = (dr, df);
        let (k2r, k2f) = rates(warp, nm1, r + 0.5 * step * k1r, f + 0.5 * step * k1f);
        let (k3r, k3f) = rates(warp, nm1, r + 0.5 * step * k2r, f + 0.5 * step * k2f);
        let (k4r, k4f) = rates(warp, nm1, r + step * k3r, f + step * k3f);
        r += step / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
        f += step / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
        if !(r.is_finite() && f.is_finite()) || !warp.domain().contains(r) {
            return Err(BarrierError::NonFinite(t + step));
        }
    }
    let lambda0 = (1.0 - f0_bar) * h_a * h_a;
    let h0 = warp.h0();
    Ok(BarrierSolution {
        n,
        a,
        f0_bar,
        times,
        radius,
        f_bar,
        lambda0,
        f_limit: 1.0 - lambda0 / (h0 * h0),
        half_open: warp.domain().is_half_open(),
        radius_rate,
        f_bar_rate,
    })
}

impl BarrierSolution {
    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("at least one sample")
    }

    pub fn final_radius(&self) -> f64 {
        *self.radius.last().expect("at least one sample")
    }

    /// `(R(t), f̄(t))` by cubic Hermite interpolation with the ODE slopes.
    pub fn sample(&self, t: f64) -> Result<(f64, f64), BarrierError> {
        let t_end = self.t_end();
        if !(0.0..=t_end).contains(&t) {
            return Err(BarrierError::OutOfRange { t, t_end });
        }
        if self.times.len() == 1 || t_end == 0.0 {
            return Ok((self.radius[0], self.f_bar[0]));
        }
        let step = self.times[1] - self.times[0];
        let k = ((t / step) as usize).min(self.times.len() - 2);
        let s = ((t - self.times[k]) / step).clamp(0.0, 1.0);
        let herm = |y: &[f64], dy: &[f64]| {
            let (s2, s3) = (s * s, s * s * s);
            (2.0 * s3 - 3.0 * s2 + 1.0) * y[k]
                + (s3 - 2.0 * s2 + s) * step * dy[k]
                + (-2.0 * s3 + 3.0 * s2) * y[k + 1]
                + (s3 - s2) * step * dy[k + 1]
        };
        Ok((
            herm(&self.radius, &self.radius_rate),
            herm(&self.f_bar, &self.f_bar_rate),
        ))
    }

    /// Containment interval for heights at time `t`: `[−R, R]`, or `[0, R]` on half-open domains.
    pub fn envelope(&self, t: f64) -> Result<(f64, f64), BarrierError> {
        let (r, _) = self.sample(t)?;
        Ok((if self.half_open { 0.0 } else { -r }, r))
    }

    /// `|(1−f̄) h²(R) − Λ₀| / Λ₀` per sample; zeros when `Λ₀ = 0`.
    pub fn lambda_drift(&self, warp: &WarpingFunction) -> Vec<f64> {
        self.radius
            .iter()
            .zip(&self.f_bar)
            .map(|(&r, &f)| {
                if self.lambda0 > 0.0 {
                    let h = warp.eval_unchecked(r).h;
                    ((1.0 - f) * h * h - self.lambda0).abs() / self.lambda0
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// `f̄(t)` from the conservation law, `1 − Λ₀/h²(R(t))`.
pub fn f_bar_closed_form(
    warp: &WarpingFunction,
    sol: &BarrierSolution,
    t: f64,
) -> Result<f64, BarrierError> {
    let (r, _) = sol.sample(t)?;
    let h = warp.eval(r)?.h;
    Ok(1.0 - sol.lambda0 / (h * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warp::{
        angle_threshold, build_dss_warp, make_builtin_warp, BuiltinFamily, DssParameters,
    };
    use proptest::prelude::*;

    fn cosh() -> WarpingFunction {
        make_builtin_warp(BuiltinFamily::Cosh, &[], f64::INFINITY).unwrap()
    }

    fn dss() -> WarpingFunction {
        build_dss_warp(&DssParameters::new(3, 1.0, 0.05).unwrap(), 2048, None)
            .unwrap()
            .0
    }

    #[test]
    fn cosh_closed_form() {
        // d(ln sinh R)/dt = −(n−1) gives sinh R(t) = sinh(a) e^{−2t} for n = 3
        let sol = solve_barrier(&cosh(), 3, 1.0, 0.3, 10.0, 1e-3).unwrap();
        let worst = sol
            .times
            .iter()
            .zip(&sol.radius)
            .map(|(&t, &r)| (r - (1f64.sinh() * (-2.0 * t).exp()).asinh()).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-6, "{worst}");
        // interpolation between samples
        for t in [0.0005, 0.1234567, 3.3333, 9.9999] {
            let (r, _) = sol.sample(t).unwrap();
            assert!((r - (1f64.sinh() * (-2.0 * t).exp()).asinh()).abs() <= 1e-6);
        }
    }

    #[test]
    fn equilibria() {
        let sol = solve_barrier(&cosh(), 3, 0.0, 0.4, 2.0, 1e-2).unwrap();
        assert!(sol.radius.iter().all(|&r| r == 0.0));
        assert!(sol.f_bar.iter().all(|&f| f == 0.4));
        let sol = solve_barrier(&cosh(), 4, 1.5, 1.0, 2.0, 1e-2).unwrap();
        assert!(sol.f_bar.iter().all(|&f| f == 1.0));
        assert_eq!(sol.lambda0, 0.0);
        assert_eq!(sol.f_limit, 1.0);
    }

    #[test]
    fn conservation_and_closed_form_f_bar() {
        for (w, a) in [(cosh(), 1.0), (cosh(), 2.0), (dss(), 0.8)] {
            let sol = solve_barrier(&w, 3, a, 0.5, 10.0, 1e-3).unwrap();
            let drift = sol.lambda_drift(&w).into_iter().fold(0.0, f64::max);
            assert!(drift <= 1e-6, "{drift}");
            for (k, &t) in sol.times.iter().enumerate().step_by(97) {
                let f = f_bar_closed_form(&w, &sol, t).unwrap();
                assert!((f - sol.f_bar[k]).abs() <= 1e-6);
            }
            assert_eq!(
                f_bar_closed_form(&w, &sol, 0.0).unwrap(),
                1.0 - sol.lambda0 / w.h(a).unwrap().powi(2)
            );
        }
    }

    #[test]
    fn long_time_limit() {
        let w = cosh();
        let sol = solve_barrier(&w, 3, 0.5, 0.6, 20.0, 1e-3).unwrap();
        assert!((sol.f_bar.last().unwrap() - sol.f_limit).abs() < 1e-9);
        assert!((f_bar_closed_form(&w, &sol, 20.0).unwrap() - sol.f_limit).abs() < 1e-9);
        // at the threshold f̄₀ = tanh²(0.5) the limit vanishes
        let f0 = 0.5f64.tanh().powi(2);
        assert!((f0 - 0.21355).abs() < 1e-5);
        let sol = solve_barrier(&w, 3, 0.5, f0, 1.0, 1e-3).unwrap();
        assert!(sol.f_limit.abs() < 1e-15);
    }

    #[test]
    fn radius_converges() {
        for a in [0.25, 1.0, 2.0] {
            let sol = solve_barrier(&cosh(), 3, a, 0.5, 20.0, 1e-3).unwrap();
            assert!(sol.final_radius() <= 1e-6);
            assert!(sol.radius.windows(2).all(|p| p[1] < p[0] && p[1] > 0.0));
            assert!(sol.f_bar.windows(2).all(|p| p[1] <= p[0]));
            assert!(sol.f_bar.iter().all(|&f| f >= sol.f_limit - 1e-12));
        }
    }

    #[test]
    fn half_open_envelope() {
        let w = dss();
        let sol = solve_barrier(&w, 3, 0.5, 0.9, 1.0, 1e-3).unwrap();
        let (lo, hi) = sol.envelope(0.5).unwrap();
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.5);
        let sol = solve_barrier(&cosh(), 3, 0.5, 0.9, 1.0, 1e-3).unwrap();
        let (lo, hi) = sol.envelope(0.5).unwrap();
        assert_eq!(lo, -hi);
    }

    #[test]
    fn rejects_bad_input() {
        let w = make_builtin_warp(BuiltinFamily::Quadratic, &[0.5], 1.0).unwrap();
        assert!(matches!(
            solve_barrier(&w, 3, 1.0, 0.5, 1.0, 1e-3),
            Err(BarrierError::Warp(_))
        ));
        assert!(solve_barrier(&w, 3, -0.1, 0.5, 1.0, 1e-3).is_err());
        assert!(solve_barrier(&w, 3, 0.5, 1.5, 1.0, 1e-3).is_err());
        assert!(solve_barrier(&w, 3, 0.5, 0.5, 1.0, 0.0).is_err());
        let sol = solve_barrier(&w, 3, 0.5, 0.5, 1.0, 1e-2).unwrap();
        assert!(matches!(
            sol.sample(1.5),
            Err(BarrierError::OutOfRange { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn comparison_is_monotone(a in 0.05f64..2.0, f1 in 0.0f64..1.0, f2 in 0.0f64..1.0) {
            let w = cosh();
            let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
            let s1 = solve_barrier(&w, 3, a, lo, 3.0, 1e-2).unwrap();
            let s2 = solve_barrier(&w, 3, a, hi, 3.0, 1e-2).unwrap();
            prop_assert!(s1.f_bar.iter().zip(&s2.f_bar).all(|(x, y)| x <= y));
        }

        #[test]
        fn threshold_is_critical(a in 0.05f64..2.0, delta in 1e-4f64..0.2) {
            let w = cosh();
            let theta = angle_threshold(&w, a).unwrap();
            let f_star = theta * theta;
            let above = solve_barrier(&w, 3, a, (f_star + delta).min(1.0), 0.1, 1e-2).unwrap();
            let below = solve_barrier(&w, 3, a, (f_star - delta).max(0.0), 0.1, 1e-2).unwrap();
            prop_assert!(above.f_limit > 0.0);
            prop_assert!(below.f_limit <= 0.0);
        }
    }
}
