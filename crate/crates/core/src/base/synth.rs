//! Seeded random smooth fields, resolution independent.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BaseManifold, BaseVariant, ScalarField};

#[derive(Debug, Clone, Copy)]
struct Mode {
    k: [f64; 2],
    cos: f64,
    sin: f64,
}

/// A low-frequency trigonometric field `offset + Σ_k (a_k cos + b_k sin)`.
///
/// On the torus the modes are `2π (k_x x / L_x + k_y y / L_y)`; on the
/// axisymmetric sphere they are `cos(k θ)`, which are polynomials in `cos θ`
/// and therefore smooth at the poles. Coefficients are scaled so that the sup
/// norm of the oscillating part never exceeds `amplitude`, independently of the
/// grid it is sampled on.
#[derive(Debug, Clone)]
pub struct SmoothField {
    variant: BaseVariant,
    offset: f64,
    modes: Vec<Mode>,
}

impl SmoothField {
    pub fn random(
        variant: BaseVariant,
        dim: usize,
        seed: u64,
        max_mode: i32,
        offset: f64,
        amplitude: f64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut modes = Vec::new();
        match variant {
            BaseVariant::FlatTorus => {
                let ky_range = if dim == 2 {
                    -max_mode..=max_mode
                } else {
                    0..=0
                };
                for kx in 0..=max_mode {
                    for ky in ky_range.clone() {
                        if kx == 0 && ky <= 0 {
                            continue;
                        }
                        modes.push(Mode {
                            k: [kx as f64, ky as f64],
                            cos: rng.random_range(-1.0..1.0),
                            sin: rng.random_range(-1.0..1.0),
                        });
                    }
                }
            }
            BaseVariant::SphereAxisym => {
                for k in 1..=max_mode {
                    modes.push(Mode {
                        k: [k as f64, 0.0],
                        cos: rng.random_range(-1.0..1.0),
                        sin: 0.0,
                    });
                }
            }
        }
        let total: f64 = modes.iter().map(|m| m.cos.abs() + m.sin.abs()).sum();
        let scale = if total > 0.0 { amplitude / total } else { 0.0 };
        for m in &mut modes {
            m.cos *= scale;
            m.sin *= scale;
        }
        SmoothField {
            variant,
            offset,
            modes,
        }
    }

    pub fn eval(&self, base: &BaseManifold, [x, y]: [f64; 2]) -> f64 {
        let phase = |m: &Mode| match base {
            BaseManifold::FlatTorus(t) => {
                TAU * (m.k[0] * x / t.periods[0] + m.k[1] * y / t.periods[1])
            }
            BaseManifold::SphereAxisym(_) => m.k[0] * x,
        };
        self.offset
            + self
                .modes
                .iter()
                .map(|m| {
                    let p = phase(m);
                    m.cos * p.cos() + m.sin * p.sin()
                })
                .sum::<f64>()
    }

    pub fn sample(&self, base: &BaseManifold) -> ScalarField {
        assert_eq!(base.variant(), self.variant);
        base.sample(|c| self.eval(base, c))
    }
}
