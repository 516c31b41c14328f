//! Catalog of initial height fields.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::base::{BaseManifold, ScalarField};
use crate::geometry::for_each_point;
use crate::warp::{angle_threshold, WarpingFunction};

use super::FlowError;

/// Initial data `u₀`. Torus coordinates are `(x, y)`; on the sphere the
/// fields depend on the polar angle `θ` only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    Constant {
        value: f64,
    },
    /// `offset + amplitude · sin(2π k_x x/L_x) cos(2π k_y y/L_y)` on the torus,
    /// `offset + amplitude · cos(k_x θ)` on the sphere.
    SineProduct {
        offset: f64,
        amplitude: f64,
        #[serde(default = "one")]
        kx: u32,
        #[serde(default = "one")]
        ky: u32,
    },
    /// `offset + amplitude · exp(−d²/(2 width²))` with a periodic chordal
    /// distance on the torus and `d² = 2(1 − cos θ)` on the sphere.
    GaussianBump {
        offset: f64,
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    /// `(a₀ − b) + b · sin(2π k x/L_x) cos(2π k y/L_y)` with `sup u = a₀`, where
    /// `b` is solved so that the discrete initial `min Θ` equals
    /// `factor · √(1 − h₀²/h²(a₀))`. The mode `k` is the smallest one that
    /// reaches the target unless given. Torus only.
    ThresholdSine {
        a0: f64,
        factor: f64,
        #[serde(default)]
        mode: Option<u32>,
    },
}

fn one() -> u32 {
    1
}

const MAX_THRESHOLD_MODE: u32 = 16;

impl InitialData {
    pub fn sample(
        &self,
        base: &BaseManifold,
        warp: &WarpingFunction,
    ) -> Result<ScalarField, FlowError> {
        let field = match *self {
            InitialData::Constant { value } => base.constant(value),
            InitialData::SineProduct {
                offset,
                amplitude,
                kx,
                ky,
            } => match base {
                BaseManifold::FlatTorus(t) => {
                    let [lx, ly] = t.periods;
                    base.sample(|[x, y]| {
                        offset
                            + amplitude
                                * (TAU * kx as f64 * x / lx).sin()
                                * (TAU * ky as f64 * y / ly).cos()
                    })
                }
                BaseManifold::SphereAxisym(_) => {
                    base.sample(|[theta, _]| offset + amplitude * (kx as f64 * theta).cos())
                }
            },
            InitialData::GaussianBump {
                offset,
                amplitude,
                width,
                center,
            } => {
                if !(width > 0.0) {
                    return Err(FlowError::InvalidInitialData(format!(
                        "width must be positive, got {width}"
                    )));
                }
                let s2 = 2.0 * width * width;
                match base {
                    BaseManifold::FlatTorus(t) => base.sample(|[x, y]| {
                        let chord = |d: f64, l: f64| l / PI * (PI * d / l).sin();
                        let dx = chord(x - center[0], t.periods[0]);
                        let dy = if t.dim == 2 {
                            chord(y - center[1], t.periods[1])
                        } else {
                            0.0
                        };
                        offset + amplitude * (-(dx * dx + dy * dy) / s2).exp()
                    }),
                    BaseManifold::SphereAxisym(_) => base.sample(|[theta, _]| {
                        offset + amplitude * (-2.0 * (1.0 - theta.cos()) / s2).exp()
                    }),
                }
            }
            InitialData::ThresholdSine { a0, factor, mode } => {
                threshold_sine(base, warp, a0, factor, mode)?
            }
        };
        if let Some(i) = field.values().iter().position(|v| !v.is_finite()) {
            return Err(FlowError::InvalidInitialData(format!(
                "non-finite initial height at node {i}"
            )));
        }
        Ok(field)
    }
}

fn min_theta(base: &BaseManifold, warp: &WarpingFunction, u: &[f64]) -> f64 {
    let mut m = f64::INFINITY;
    for_each_point(base, warp, u, |_, _, g| m = m.min(g.theta));
    m
}

fn threshold_sine(
    base: &BaseManifold,
    warp: &WarpingFunction,
    a0: f64,
    factor: f64,
    mode: Option<u32>,
) -> Result<ScalarField, FlowError> {
    let BaseManifold::FlatTorus(t) = base else {
        return Err(FlowError::InvalidInitialData(
            "threshold_sine needs a flat torus base".into(),
        ));
    };
    if !(a0 > 0.0) || !(factor > 0.0) {
        return Err(FlowError::InvalidInitialData(format!(
            "threshold_sine needs a0 > 0 and factor > 0, got a0 = {a0}, factor = {factor}"
        )));
    }
    if !warp.domain().contains(a0) || !warp.domain().contains(-a0) {
        return Err(FlowError::InvalidInitialData(format!(
            "threshold_sine needs ±a0 inside the warp domain {}",
            warp.domain()
        )));
    }
    let target = factor * angle_threshold(warp, a0)?;
    if !(target > 0.0 && target < 1.0) {
        return Err(FlowError::InvalidInitialData(format!(
            "target initial angle {target} must lie in (0, 1)"
        )));
    }
    let [lx, ly] = t.periods;
    let profile = |k: u32, b: f64| {
        let k = k as f64;
        base.sample(|[x, y]| (a0 - b) + b * (TAU * k * x / lx).sin() * (TAU * k * y / ly).cos())
    };
    let modes: Vec<u32> = match mode {
        Some(k) => vec![k],
        None => (1..=MAX_THRESHOLD_MODE).collect(),
    };
    let k = modes
        .into_iter()
        .find(|&k| min_theta(base, warp, profile(k, a0).values()) < target)
        .ok_or_else(|| {
            FlowError::InvalidInitialData(format!(
                "no sine mode reaches the initial angle {target} on this grid"
            ))
        })?;
    // min Θ decreases from 1 at b = 0 to below the target at b = a0
    let (mut lo, mut hi) = (0.0, a0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if min_theta(base, warp, profile(k, mid).values()) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * a0 {
            break;
        }
    }
    Ok(profile(k, 0.5 * (lo + hi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warp::{make_builtin_warp, BuiltinFamily};

    fn cosh() -> WarpingFunction {
        make_builtin_warp(BuiltinFamily::Cosh, &[], f64::INFINITY).unwrap()
    }

    #[test]
    fn catalog_values() {
        let w = cosh();
        let base = BaseManifold::unit_torus(2, 8).unwrap();
        let c = InitialData::Constant { value: 0.5 }
            .sample(&base, &w)
            .unwrap();
        assert!(c.values().iter().all(|&v| v == 0.5));
        let s = InitialData::SineProduct {
            offset: 0.3,
            amplitude: 0.1,
            kx: 1,
            ky: 1,
        }
        .sample(&base, &w)
        .unwrap();
        // node (2, 0) is x = 1/4, y = 0
        assert!((s.values()[2 * 8] - 0.4).abs() < 1e-15);
        let g = InitialData::GaussianBump {
            offset: 0.0,
            amplitude: 1.0,
            width: 0.1,
            center: [0.25, 0.5],
        }
        .sample(&base, &w)
        .unwrap();
        assert_eq!(g.values()[2 * 8 + 4], 1.0);
        assert!(g.values().iter().all(|&v| v > 0.0 && v <= 1.0));
        let sphere = BaseManifold::sphere_axisym(2, 9).unwrap();
        let g = InitialData::GaussianBump {
            offset: 0.0,
            amplitude: 1.0,
            width: 0.5,
            center: [0.0, 0.0],
        }
        .sample(&sphere, &w)
        .unwrap();
        assert_eq!(g.values()[0], 1.0);
    }

    #[test]
    fn threshold_sine_hits_target() {
        let w = cosh();
        let base = BaseManifold::unit_torus(2, 32).unwrap();
        for (a0, factor) in [(0.25, 0.9), (0.5, 1.05), (1.0, 0.9), (1.0, 1.05)] {
            let u = InitialData::ThresholdSine {
                a0,
                factor,
                mode: None,
            }
            .sample(&base, &w)
            .unwrap();
            let target = factor * a0.tanh();
            let m = min_theta(&base, &w, u.values());
            assert!((m - target).abs() < 1e-9, "{a0} {factor}: {m} vs {target}");
            assert!(u.max() <= a0 + 1e-15 && u.min() >= -a0);
        }
    }

    #[test]
    fn rejects_bad_data() {
        let w = cosh();
        let sphere = BaseManifold::sphere_axisym(2, 9).unwrap();
        assert!(InitialData::ThresholdSine {
            a0: 0.5,
            factor: 1.0,
            mode: None
        }
        .sample(&sphere, &w)
        .is_err());
        let base = BaseManifold::unit_torus(2, 8).unwrap();
        assert!(InitialData::GaussianBump {
            offset: 0.0,
            amplitude: 1.0,
            width: 0.0,
            center: [0.0; 2]
        }
        .sample(&base, &w)
        .is_err());
        assert!(InitialData::ThresholdSine {
            a0: 0.5,
            factor: 0.01,
            mode: Some(1)
        }
        .sample(&base, &w)
        .is_err());
    }
}
