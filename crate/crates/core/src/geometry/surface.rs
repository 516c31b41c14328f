//! Laplace–Beltrami operator of the induced metric in divergence form.

use crate::base::{BaseManifold, ScalarField};
use crate::warp::dss::gauss5;
use crate::warp::WarpingFunction;

use super::{GeometryError, GraphState};

#[derive(Debug, Clone)]
enum Coefficients {
    /// `T¹`: flux coefficient `K = 1/√W²` and `√γ = √W²`.
    Line { k: Vec<f64>, sqrt_g: Vec<f64> },
    /// `T²`: `K = √γ γ⁻¹` per node.
    Plane {
        kxx: Vec<f64>,
        kxy: Vec<f64>,
        kyy: Vec<f64>,
        sqrt_g: Vec<f64>,
    },
    /// Sphere: `K = h^{m−1}/√W²` at nodes; `sin^{m−1}` is applied exactly at half nodes
    /// and averaged over each cell in `√γ`.
    Polar {
        c: Vec<f64>,
        sqrt_g: Vec<f64>,
        pole_h2: [f64; 2],
    },
}

/// `Δ_S w = (1/√γ) ∂_i(√γ γ^{ij} ∂_j w)` for a fixed graph, reusable across fields.
#[derive(Debug, Clone)]
pub struct SurfaceOperator<'a> {
    base: &'a BaseManifold,
    coeff: Coefficients,
}

impl<'a> SurfaceOperator<'a> {
    pub fn new(state: &GraphState<'a>) -> Result<Self, GeometryError> {
        Self::from_parts(state.base(), state.warp(), state.u().values())
    }

    /// Builds the operator for heights already checked against the warp domain.
    pub(crate) fn from_parts(
        base: &'a BaseManifold,
        warp: &WarpingFunction,
        u: &[f64],
    ) -> Result<Self, GeometryError> {
        let m = base.dim() as i32;
        let grads = base.gradients(u);
        let len = u.len();
        let mut hs = Vec::with_capacity(len);
        let mut w2s = Vec::with_capacity(len);
        for (i, (&r, p)) in u.iter().zip(&grads).enumerate() {
            let h = warp.eval_unchecked(r).h;
            let w2 = h * h + p[0] * p[0] + p[1] * p[1];
            if !(w2.is_finite() && w2 > 0.0 && h > 0.0) {
                return Err(GeometryError::DegenerateMetric(i));
            }
            hs.push(h);
            w2s.push(w2);
        }
        let coeff = match base {
            BaseManifold::FlatTorus(t) if t.dim == 1 => Coefficients::Line {
                k: w2s.iter().map(|w| 1.0 / w.sqrt()).collect(),
                sqrt_g: w2s.iter().map(|w| w.sqrt()).collect(),
            },
            BaseManifold::FlatTorus(_) => {
                let mut kxx = Vec::with_capacity(len);
                let mut kxy = Vec::with_capacity(len);
                let mut kyy = Vec::with_capacity(len);
                let mut sqrt_g = Vec::with_capacity(len);
                for i in 0..len {
                    let (h, w2, p) = (hs[i], w2s[i], grads[i]);
                    let sw = w2.sqrt();
                    // h^{m−3} √W² (I − p pᵀ/W²) with m = 2
                    let s = sw / h;
                    kxx.push(s * (1.0 - p[0] * p[0] / w2));
                    kxy.push(-s * p[0] * p[1] / w2);
                    kyy.push(s * (1.0 - p[1] * p[1] / w2));
                    sqrt_g.push(h * sw);
                }
                Coefficients::Plane {
                    kxx,
                    kxy,
                    kyy,
                    sqrt_g,
                }
            }
            BaseManifold::SphereAxisym(_) => {
                let d = base.spacing()[0];
                let c = (0..len)
                    .map(|i| hs[i].powi(m - 1) / w2s[i].sqrt())
                    .collect();
                // cell average of sin^{m−1} keeps the scheme second order next to the poles
                let sin_pow = |t: f64| t.sin().powi(m - 1);
                let sqrt_g = (0..len)
                    .map(|i| {
                        let lo = (i as f64 - 0.5) * d;
                        let cell = gauss5(&sin_pow, lo, lo + d) / d;
                        hs[i].powi(m - 1) * cell * w2s[i].sqrt()
                    })
                    .collect();
                Coefficients::Polar {
                    c,
                    sqrt_g,
                    pole_h2: [hs[0] * hs[0], hs[len - 1] * hs[len - 1]],
                }
            }
        };
        Ok(SurfaceOperator { base, coeff })
    }

    pub fn apply(&self, w: &[f64]) -> Vec<f64> {
        debug_assert_eq!(w.len(), self.base.len());
        let mut out = vec![0.0; w.len()];
        match (&self.coeff, self.base) {
            (Coefficients::Line { k, sqrt_g }, _) => {
                let n = w.len();
                let dx = self.base.spacing()[0];
                let idx2 = 1.0 / (dx * dx);
                for i in 0..n {
                    let l = if i == 0 { n - 1 } else { i - 1 };
                    let r = if i + 1 == n { 0 } else { i + 1 };
                    let fr = 0.5 * (k[i] + k[r]) * (w[r] - w[i]);
                    let fl = 0.5 * (k[l] + k[i]) * (w[i] - w[l]);
                    out[i] = (fr - fl) * idx2 / sqrt_g[i];
                }
            }
            (
                Coefficients::Plane {
                    kxx,
                    kxy,
                    kyy,
                    sqrt_g,
                },
                BaseManifold::FlatTorus(t),
            ) => {
                let [nx, ny] = t.points;
                let [dx, dy] = self.base.spacing();
                let grads = self.base.gradients(w);
                for i in 0..nx {
                    let im = if i == 0 { nx - 1 } else { i - 1 } * ny;
                    let ip = if i + 1 == nx { 0 } else { i + 1 } * ny;
                    let ic = i * ny;
                    for j in 0..ny {
                        let jm = if j == 0 { ny - 1 } else { j - 1 };
                        let jp = if j + 1 == ny { 0 } else { j + 1 };
                        let c = ic + j;
                        let x_flux = |a: usize, b: usize| {
                            0.5 * (kxx[a] + kxx[b]) * (w[b] - w[a]) / dx
                                + 0.25 * (kxy[a] + kxy[b]) * (grads[a][1] + grads[b][1])
                        };
                        let y_flux = |a: usize, b: usize| {
                            0.5 * (kyy[a] + kyy[b]) * (w[b] - w[a]) / dy
                                + 0.25 * (kxy[a] + kxy[b]) * (grads[a][0] + grads[b][0])
                        };
                        let div = (x_flux(c, ip + j) - x_flux(im + j, c)) / dx
                            + (y_flux(c, ic + jp) - y_flux(ic + jm, c)) / dy;
                        out[c] = div / sqrt_g[c];
                    }
                }
            }
            (Coefficients::Polar { c, sqrt_g, pole_h2 }, BaseManifold::SphereAxisym(s)) => {
                let n = s.nodes;
                let m = s.dim;
                let d = self.base.spacing()[0];
                let idd = 1.0 / (d * d);
                let half = |k: usize| {
                    let theta = (k as f64 + 0.5) * d;
                    0.5 * (c[k] + c[k + 1]) * theta.sin().powi(m as i32 - 1)
                };
                for k in 1..n - 1 {
                    let fr = half(k) * (w[k + 1] - w[k]);
                    let fl = half(k - 1) * (w[k] - w[k - 1]);
                    out[k] = (fr - fl) * idd / sqrt_g[k];
                }
                let mf = m as f64;
                out[0] = mf * 2.0 * (w[1] - w[0]) * idd / pole_h2[0];
                out[n - 1] = mf * 2.0 * (w[n - 2] - w[n - 1]) * idd / pole_h2[1];
            }
            _ => unreachable!("coefficients always match the base variant"),
        }
        out
    }
}

/// `Δ_S w` on the graph of `state`.
pub fn surface_laplacian(
    state: &GraphState,
    w: &ScalarField,
) -> Result<ScalarField, GeometryError> {
    state.base().check(w)?;
    let op = SurfaceOperator::new(state)?;
    Ok(ScalarField::from_values(
        state.base().shape(),
        op.apply(w.values()),
    ))
}
