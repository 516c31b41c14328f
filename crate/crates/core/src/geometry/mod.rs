//! Geometry of a geodesic graph `{(x, u(x))}` in the warped product.
//!
//! All pointwise quantities come from the jet of `u` (see
//! [`crate::base::Jet`]) and the warp triple at `r = u(x)`. In a
//! `g_N`-orthonormal frame the induced metric is `γ = h² I + p pᵀ` with
//! `p = ∇_N u`, the upward unit normal is `ν = Θ (∂_r − h⁻² p)` and the second
//! fundamental form is
//!
//! `a = Θ (h h' I + 2 (h'/h) p pᵀ − ∇²_N u)`,
//!
//! oriented so that the slice `u ≡ a` has `H = (n−1) h'(a)/h(a)`.

mod identities;
mod surface;

use thiserror::Error;

use crate::base::{BaseError, BaseManifold, Jet, ScalarField};
use crate::warp::{WarpError, WarpValue, WarpingFunction};

pub use identities::{
    angle_duality_residual, identity_residuals, prop_delta_u_residual, IdentityResiduals,
};
pub use surface::{surface_laplacian, SurfaceOperator};

/// Default lower bound on `Θ` below which the second mean curvature route refuses to divide.
pub const DEFAULT_THETA_MIN: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error(transparent)]
    Warp(#[from] WarpError),
    #[error(transparent)]
    Base(#[from] BaseError),
    #[error("warp is built for ambient dimension {warp}, base gives {base}")]
    DimensionMismatch { warp: usize, base: usize },
    #[error("height {r} at node {index} lies outside the warp domain")]
    OutsideDomain { index: usize, r: f64 },
    #[error("minimum angle {min_theta:.3e} is below the guard {threshold:.3e}")]
    ThetaBelowMinimum { min_theta: f64, threshold: f64 },
    #[error("degenerate induced metric at node {0}")]
    DegenerateMetric(usize),
}

/// Height field over the base at a flow time.
#[derive(Debug, Clone)]
pub struct GraphState<'a> {
    u: ScalarField,
    t: f64,
    warp: &'a WarpingFunction,
    base: &'a BaseManifold,
}

impl<'a> GraphState<'a> {
    /// Validates shape, dimensions and that every height lies in the warp domain.
    pub fn new(
        u: ScalarField,
        t: f64,
        warp: &'a WarpingFunction,
        base: &'a BaseManifold,
    ) -> Result<Self, GeometryError> {
        base.check(&u)?;
        if let Some(n) = warp.ambient_dim() {
            if n != base.ambient_dim() {
                return Err(GeometryError::DimensionMismatch {
                    warp: n,
                    base: base.ambient_dim(),
                });
            }
        }
        check_heights(warp, u.values())?;
        Ok(GraphState { u, t, warp, base })
    }

    pub fn u(&self) -> &ScalarField {
        &self.u
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn warp(&self) -> &'a WarpingFunction {
        self.warp
    }

    pub fn base(&self) -> &'a BaseManifold {
        self.base
    }

    /// Ambient dimension `n`.
    pub fn n(&self) -> usize {
        self.base.ambient_dim()
    }

    pub fn into_field(self) -> ScalarField {
        self.u
    }

    /// Calls `f(idx, jet, geometry)` on every node.
    pub fn for_each_point(&self, f: impl FnMut(usize, &Jet, &PointGeometry)) {
        for_each_point(self.base, self.warp, self.u.values(), f);
    }
}

pub(crate) fn check_heights(warp: &WarpingFunction, u: &[f64]) -> Result<(), GeometryError> {
    let domain = warp.domain();
    match u.iter().position(|&r| !domain.contains(r)) {
        Some(index) => Err(GeometryError::OutsideDomain { index, r: u[index] }),
        None => Ok(()),
    }
}

/// Pointwise geometry of the graph at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointGeometry {
    pub warp: WarpValue,
    /// `|∇_N u|²`.
    pub grad_sq: f64,
    pub theta: f64,
    pub mean_curvature: f64,
    pub a_sq: f64,
}

impl PointGeometry {
    /// `h² + |∇_N u|²`.
    pub fn w2(&self) -> f64 {
        self.warp.h * self.warp.h + self.grad_sq
    }
}

/// Closed-form geometry from a jet and the warp at `r = jet.value`.
#[inline]
pub fn point_geometry(jet: &Jet, w: WarpValue) -> PointGeometry {
    let (h, hp) = (w.h, w.h_prime);
    let p = jet.grad;
    let pp = jet.grad_sq();
    let w2 = h * h + pp;
    let theta = h / w2.sqrt();
    let slice = h * hp;
    let bend = 2.0 * hp / h;
    let b = &jet.hess;
    let (mut mean, mut a_sq) = if jet.block == 1 {
        // γ⁻¹ = 1 / W² on the gradient direction
        let k = theta * (slice + bend * p[0] * p[0] - b[0][0]) / w2;
        (k, k * k)
    } else {
        let ih2 = 1.0 / (h * h);
        let g00 = ih2 * (1.0 - p[0] * p[0] / w2);
        let g01 = -ih2 * p[0] * p[1] / w2;
        let g11 = ih2 * (1.0 - p[1] * p[1] / w2);
        let a00 = theta * (slice + bend * p[0] * p[0] - b[0][0]);
        let a01 = theta * (bend * p[0] * p[1] - b[0][1]);
        let a11 = theta * (slice + bend * p[1] * p[1] - b[1][1]);
        let m00 = g00 * a00 + g01 * a01;
        let m01 = g00 * a01 + g01 * a11;
        let m10 = g01 * a00 + g11 * a01;
        let m11 = g01 * a01 + g11 * a11;
        (m00 + m11, m00 * m00 + 2.0 * m01 * m10 + m11 * m11)
    };
    if jet.iso_count > 0 {
        let k = theta * (slice - jet.iso_hess) / (h * h);
        let c = jet.iso_count as f64;
        mean += c * k;
        a_sq += c * k * k;
    }
    PointGeometry {
        warp: w,
        grad_sq: pp,
        theta,
        mean_curvature: mean,
        a_sq,
    }
}

/// Pointwise loop without domain checks; callers validate heights first.
pub(crate) fn for_each_point(
    base: &BaseManifold,
    warp: &WarpingFunction,
    u: &[f64],
    mut f: impl FnMut(usize, &Jet, &PointGeometry),
) {
    base.for_each_jet(u, |i, jet| {
        let g = point_geometry(&jet, warp.eval_unchecked(jet.value));
        f(i, &jet, &g);
    });
}

/// Angle, mean curvature, `|A|²` and `Δ_S u` on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphGeometry {
    pub theta: ScalarField,
    pub mean_curvature: ScalarField,
    pub a_sq: ScalarField,
    pub surf_lap_u: ScalarField,
}

pub fn compute_geometry(state: &GraphState) -> Result<GraphGeometry, GeometryError> {
    let n = state.base.len();
    let (mut theta, mut mean, mut a_sq) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    state.for_each_point(|i, _, g| {
        theta[i] = g.theta;
        mean[i] = g.mean_curvature;
        a_sq[i] = g.a_sq;
    });
    let op = SurfaceOperator::new(state)?;
    let lap = op.apply(state.u.values());
    let shape = state.base.shape();
    Ok(GraphGeometry {
        theta: ScalarField::from_values(shape, theta),
        mean_curvature: ScalarField::from_values(shape, mean),
        a_sq: ScalarField::from_values(shape, a_sq),
        surf_lap_u: ScalarField::from_values(shape, lap),
    })
}

/// `Θ = (1 + h⁻² |∇_N u|²)^{-1/2}`.
pub fn compute_theta(state: &GraphState) -> ScalarField {
    let mut out = vec![0.0; state.base.len()];
    state.for_each_point(|i, _, g| out[i] = g.theta);
    ScalarField::from_values(state.base.shape(), out)
}

/// `(|A|², H)` from the closed-form second fundamental form.
pub fn compute_second_fundamental_form(state: &GraphState) -> (ScalarField, ScalarField) {
    let n = state.base.len();
    let (mut a_sq, mut mean) = (vec![0.0; n], vec![0.0; n]);
    state.for_each_point(|i, _, g| {
        a_sq[i] = g.a_sq;
        mean[i] = g.mean_curvature;
    });
    let shape = state.base.shape();
    (
        ScalarField::from_values(shape, a_sq),
        ScalarField::from_values(shape, mean),
    )
}

/// `H = [(h'/h)(n−2+Θ²) − Δ_S u] / Θ`, independent of the second fundamental form.
pub fn mean_curvature_route_b(
    state: &GraphState,
    theta_min: f64,
) -> Result<ScalarField, GeometryError> {
    let lap = SurfaceOperator::new(state)?.apply(state.u.values());
    let nm2 = state.n() as f64 - 2.0;
    let mut out = vec![0.0; state.base.len()];
    let mut min_theta = f64::INFINITY;
    state.for_each_point(|i, _, g| {
        min_theta = min_theta.min(g.theta);
        let t2 = g.theta * g.theta;
        out[i] = (g.warp.slice_curvature() * (nm2 + t2) - lap[i]) / g.theta;
    });
    if min_theta < theta_min {
        return Err(GeometryError::ThetaBelowMinimum {
            min_theta,
            threshold: theta_min,
        });
    }
    Ok(ScalarField::from_values(state.base.shape(), out))
}

/// `Ric_M(n, n) = −(n−1) h''/h` for the radial unit field.
pub fn ricci_ambient_nn(warp: &WarpingFunction, n: usize, r: f64) -> Result<f64, WarpError> {
    let v = warp.eval(r)?;
    Ok(-(n as f64 - 1.0) * v.h_double_prime / v.h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::synth::SmoothField;
    use crate::base::BaseVariant;
    use crate::warp::{build_dss_warp, make_builtin_warp, BuiltinFamily, DssParameters};
    use approx::assert_relative_eq;
    use std::f64::consts::{PI, TAU};

    fn cosh() -> WarpingFunction {
        make_builtin_warp(BuiltinFamily::Cosh, &[], f64::INFINITY).unwrap()
    }

    fn state<'a>(
        base: &'a BaseManifold,
        warp: &'a WarpingFunction,
        u: ScalarField,
    ) -> GraphState<'a> {
        GraphState::new(u, 0.0, warp, base).unwrap()
    }

    #[test]
    fn slices_are_umbilic() {
        let w = cosh();
        let (p, _) = build_dss_warp(&DssParameters::new(3, 1.0, 0.0).unwrap(), 512, None).unwrap();
        let cases: Vec<(BaseManifold, &WarpingFunction)> = vec![
            (BaseManifold::unit_torus(2, 8).unwrap(), &w),
            (BaseManifold::unit_torus(1, 8).unwrap(), &w),
            (BaseManifold::sphere_axisym(2, 9).unwrap(), &w),
            (BaseManifold::sphere_axisym(4, 9).unwrap(), &w),
            (BaseManifold::sphere_axisym(2, 9).unwrap(), &p),
        ];
        for (base, warp) in &cases {
            let m = base.dim() as f64;
            for a in [0.1, 0.5, 1.0] {
                let s = state(base, warp, base.constant(a));
                let v = warp.eval(a).unwrap();
                let k = v.h_prime / v.h;
                let g = compute_geometry(&s).unwrap();
                for i in 0..base.len() {
                    assert_eq!(g.theta.values()[i], 1.0);
                    assert!((g.mean_curvature.values()[i] - m * k).abs() <= 1e-10);
                    assert!((g.a_sq.values()[i] - m * k * k).abs() <= 1e-10);
                    assert!(g.surf_lap_u.values()[i].abs() <= 1e-10);
                }
                let hb = mean_curvature_route_b(&s, DEFAULT_THETA_MIN).unwrap();
                assert!(hb.values().iter().all(|x| (x - m * k).abs() <= 1e-10));
            }
        }
    }

    #[test]
    fn totally_geodesic_slice() {
        let base = BaseManifold::unit_torus(2, 8).unwrap();
        let w = cosh();
        let s = state(&base, &w, base.constant(0.0));
        let (a_sq, h) = compute_second_fundamental_form(&s);
        assert!(a_sq.values().iter().chain(h.values()).all(|&x| x == 0.0));
    }

    #[test]
    fn theta_example_against_normal_vector() {
        // u = 0.1 sin 2πx at x = 0: u = 0, u' = 0.2π, cosh(0) = 1
        let jet = Jet {
            grad: [0.2 * PI, 0.0],
            block: 1,
            ..Jet::default()
        };
        let g = point_geometry(&jet, cosh().eval(0.0).unwrap());
        assert_relative_eq!(g.theta, 0.8467330159648304, max_relative = 1e-14);

        // normal N = ∂_r + N_x ∂_x orthogonal to (1, u') in diag(h², 1)
        let (h, du) = (1.0f64, 0.2 * PI);
        let nx = -du / (h * h);
        let norm = (h * h * nx * nx + 1.0).sqrt();
        assert_relative_eq!(g.theta, 1.0 / norm, max_relative = 1e-14);

        let base = BaseManifold::unit_torus(1, 1024).unwrap();
        let w = cosh();
        let s = state(&base, &w, base.sample(|[x, _]| 0.1 * (TAU * x).sin()));
        let th = compute_theta(&s).values()[0];
        assert!((th - 0.8467330159648304).abs() < 1e-4);
    }

    /// Brute force second fundamental form on `T²` in coordinates `(x, y, r)`.
    fn christoffel_oracle(jet: &Jet, v: WarpValue) -> (f64, f64, f64) {
        let (h, hp) = (v.h, v.h_prime);
        let metric = [[h * h, 0.0, 0.0], [0.0, h * h, 0.0], [0.0, 0.0, 1.0]];
        // gamma[a][b][c] = Γ^a_{bc}
        let mut gamma = [[[0.0; 3]; 3]; 3];
        for i in 0..2 {
            gamma[2][i][i] = -h * hp;
            gamma[i][2][i] = hp / h;
            gamma[i][i][2] = hp / h;
        }
        let p = jet.grad;
        let tangent = |i: usize| {
            let mut e = [0.0; 3];
            e[i] = 1.0;
            e[2] = p[i];
            e
        };
        let dot = |a: [f64; 3], b: [f64; 3]| {
            let mut s = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    s += metric[i][j] * a[i] * b[j];
                }
            }
            s
        };
        // normal: solve ⟨N, e_i⟩ = 0 with N_r = 1
        let mut nu = [-p[0] / (h * h), -p[1] / (h * h), 1.0];
        let len = dot(nu, nu).sqrt();
        nu.iter_mut().for_each(|c| *c /= len);
        let mut a = [[0.0; 2]; 2];
        let mut gam = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let (ei, ej) = (tangent(i), tangent(j));
                gam[i][j] = dot(ei, ej);
                // ∇̄_{e_i} e_j = ∂_i(e_j) + Γ(e_i, e_j)
                let mut d = [0.0; 3];
                d[2] = jet.hess[i][j];
                for c in 0..3 {
                    for b in 0..3 {
                        for k in 0..3 {
                            d[c] += gamma[c][b][k] * ei[b] * ej[k];
                        }
                    }
                }
                a[i][j] = -dot(d, nu);
            }
        }
        let det = gam[0][0] * gam[1][1] - gam[0][1] * gam[1][0];
        let inv = [
            [gam[1][1] / det, -gam[0][1] / det],
            [-gam[1][0] / det, gam[0][0] / det],
        ];
        let mut mean = 0.0;
        let mut a_sq = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                mean += inv[i][j] * a[i][j];
                for k in 0..2 {
                    for l in 0..2 {
                        a_sq += inv[i][k] * inv[j][l] * a[i][j] * a[k][l];
                    }
                }
            }
        }
        let grad_s = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| inv[i][j] * p[i] * p[j])
            .sum::<f64>();
        (mean, a_sq, grad_s)
    }

    #[test]
    fn closed_form_matches_christoffel_construction() {
        let w = cosh();
        let jets = [
            ([0.3, -0.7], [[1.2, -0.4], [-0.4, 0.5]], 0.4),
            ([0.0, 0.0], [[0.0, 0.0], [0.0, 0.0]], -1.1),
            ([2.0, 1.5], [[-3.0, 0.9], [0.9, 2.2]], 1.7),
        ];
        for (grad, hess, value) in jets {
            let jet = Jet {
                value,
                grad,
                hess,
                block: 2,
                ..Jet::default()
            };
            let v = w.eval(value).unwrap();
            let g = point_geometry(&jet, v);
            let (mean, a_sq, grad_s) = christoffel_oracle(&jet, v);
            assert_relative_eq!(
                g.mean_curvature,
                mean,
                epsilon = 1e-12,
                max_relative = 1e-12
            );
            assert_relative_eq!(g.a_sq, a_sq, epsilon = 1e-12, max_relative = 1e-12);
            assert_relative_eq!(grad_s, 1.0 - g.theta * g.theta, epsilon = 1e-14);
        }
    }

    /// `H = h^{-m} δA/δu`, with `δA/δu` differentiated from a midpoint-rule
    /// discrete area on `T¹`. Returns the max deviation from the closed form.
    fn area_gradient_gap_t1(w: &WarpingFunction, n: usize) -> f64 {
        let base = BaseManifold::unit_torus(1, n).unwrap();
        let dx = base.spacing()[0];
        let u = base.sample(|[x, _]| 0.2 + 0.15 * (TAU * x).sin() + 0.05 * (2.0 * TAU * x).cos());
        let cell = |v: &[f64], i: usize| {
            let (a, b) = (v[i % n], v[(i + 1) % n]);
            let h = w.eval(0.5 * (a + b)).unwrap().h;
            let d = (b - a) / dx;
            (h * h + d * d).sqrt() * dx
        };
        let s = state(&base, w, u.clone());
        let (_, mean) = compute_second_fundamental_form(&s);
        let eps = 1e-6;
        (0..n)
            .map(|k| {
                let local = |v: &[f64]| cell(v, k + n - 1) + cell(v, k);
                let mut up = u.values().to_vec();
                let mut dn = up.clone();
                up[k] += eps;
                dn[k] -= eps;
                let grad = (local(&up) - local(&dn)) / (2.0 * eps) / dx;
                (grad / w.eval(u.values()[k]).unwrap().h - mean.values()[k]).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn mean_curvature_is_area_gradient_t1() {
        let w = make_builtin_warp(BuiltinFamily::Quadratic, &[0.3], 4.0).unwrap();
        let (e1, e2) = (area_gradient_gap_t1(&w, 128), area_gradient_gap_t1(&w, 256));
        assert!(e2 < 1e-2, "{e2}");
        assert!((3.5..=4.5).contains(&(e1 / e2)), "{}", e1 / e2);
    }

    /// Same oracle on `T²` with a cell-centred midpoint rule, probed at nodes
    /// shared by both grids.
    fn area_gradient_gap_t2(w: &WarpingFunction, field: &SmoothField, n: usize) -> f64 {
        let base = BaseManifold::unit_torus(2, n).unwrap();
        let dx = base.spacing()[0];
        let u = field.sample(&base);
        let at = |i: usize, j: usize| (i % n) * n + j % n;
        let cell = |v: &[f64], i: usize, j: usize| {
            let (a, b, c, d) = (
                v[at(i, j)],
                v[at(i + 1, j)],
                v[at(i, j + 1)],
                v[at(i + 1, j + 1)],
            );
            let h = w.eval(0.25 * (a + b + c + d)).unwrap().h;
            let ux = 0.5 * ((b - a) + (d - c)) / dx;
            let uy = 0.5 * ((c - a) + (d - b)) / dx;
            h * (h * h + ux * ux + uy * uy).sqrt() * dx * dx
        };
        let s = state(&base, w, u.clone());
        let (_, mean) = compute_second_fundamental_form(&s);
        let eps = 1e-6;
        let scale = n / 16;
        let mut worst: f64 = 0.0;
        for i in (0..16).map(|i| i * scale) {
            for j in (0..16).map(|j| j * scale) {
                let local = |v: &[f64]| {
                    let mut s = 0.0;
                    for di in [n - 1, 0] {
                        for dj in [n - 1, 0] {
                            s += cell(v, i + di, j + dj);
                        }
                    }
                    s
                };
                let k = at(i, j);
                let mut up = u.values().to_vec();
                let mut dn = up.clone();
                up[k] += eps;
                dn[k] -= eps;
                let grad = (local(&up) - local(&dn)) / (2.0 * eps) / (dx * dx);
                let h = w.eval(u.values()[k]).unwrap().h;
                worst = worst.max((grad / (h * h) - mean.values()[k]).abs());
            }
        }
        worst
    }

    #[test]
    fn mean_curvature_is_area_gradient_t2() {
        let w = cosh();
        let field = SmoothField::random(BaseVariant::FlatTorus, 2, 11, 2, 0.1, 0.2);
        let (e1, e2) = (
            area_gradient_gap_t2(&w, &field, 64),
            area_gradient_gap_t2(&w, &field, 128),
        );
        assert!(e2 < 0.1, "{e2}");
        assert!((3.5..=4.5).contains(&(e1 / e2)), "{}", e1 / e2);
    }

    #[test]
    fn euclidean_limit_is_minus_second_derivative() {
        let w = make_builtin_warp(BuiltinFamily::Quadratic, &[1e-9], 1.0).unwrap();
        let base = BaseManifold::unit_torus(1, 256).unwrap();
        let eps = 1e-3;
        let u = base.sample(|[x, _]| eps * (TAU * x).sin());
        let s = state(&base, &w, u);
        let (_, mean) = compute_second_fundamental_form(&s);
        for i in 0..256 {
            let x = base.coords(i)[0];
            let expected = eps * TAU * TAU * (TAU * x).sin();
            assert!((mean.values()[i] - expected).abs() < 1e-3 * eps * TAU * TAU);
        }
    }

    #[test]
    fn routes_agree_at_second_order() {
        let w = cosh();
        for seed in [1, 2, 3] {
            let field = SmoothField::random(BaseVariant::FlatTorus, 2, seed, 2, 0.1, 0.3);
            let err = |n: usize| {
                let base = BaseManifold::unit_torus(2, n).unwrap();
                let s = state(&base, &w, field.sample(&base));
                let (_, a) = compute_second_fundamental_form(&s);
                let b = mean_curvature_route_b(&s, DEFAULT_THETA_MIN).unwrap();
                a.values()
                    .iter()
                    .zip(b.values())
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max)
            };
            let ratio = err(64) / err(128);
            assert!((3.5..=4.5).contains(&ratio), "seed {seed}: {ratio}");
        }
    }

    #[test]
    fn routes_agree_on_sphere() {
        let w = cosh();
        let field = SmoothField::random(BaseVariant::SphereAxisym, 2, 5, 3, 0.2, 0.3);
        let err = |n: usize| {
            let base = BaseManifold::sphere_axisym(2, n).unwrap();
            let s = state(&base, &w, field.sample(&base));
            let (_, a) = compute_second_fundamental_form(&s);
            let b = mean_curvature_route_b(&s, DEFAULT_THETA_MIN).unwrap();
            a.values()
                .iter()
                .zip(b.values())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(65), err(129));
        assert!(e1 < 0.05, "{e1}");
        assert!(e1 / e2 > 3.0, "{}", e1 / e2);
    }

    #[test]
    fn route_b_guards_small_angle() {
        let w = cosh();
        let base = BaseManifold::unit_torus(1, 64).unwrap();
        let s = state(&base, &w, base.sample(|[x, _]| 0.5 * (TAU * x).sin()));
        let err = mean_curvature_route_b(&s, 0.99).unwrap_err();
        assert!(matches!(err, GeometryError::ThetaBelowMinimum { .. }));
    }

    #[test]
    fn theta_is_translation_invariant() {
        let w = cosh();
        let base = BaseManifold::unit_torus(2, 32).unwrap();
        let f = SmoothField::random(BaseVariant::FlatTorus, 2, 9, 2, 0.0, 0.4);
        let u = f.sample(&base);
        let shifted: Vec<f64> = (0..32 * 32)
            .map(|k| {
                let (i, j) = (k / 32, k % 32);
                u.values()[((i + 5) % 32) * 32 + (j + 11) % 32]
            })
            .collect();
        let t1 = compute_theta(&state(&base, &w, u.clone()));
        let t2 = compute_theta(&state(&base, &w, ScalarField::new(&base, shifted).unwrap()));
        for k in 0..32 * 32 {
            let (i, j) = (k / 32, k % 32);
            assert_eq!(
                t2.values()[k],
                t1.values()[((i + 5) % 32) * 32 + (j + 11) % 32]
            );
        }
    }

    #[test]
    fn ricci_values() {
        let w = cosh();
        assert_eq!(ricci_ambient_nn(&w, 3, 0.0).unwrap(), -2.0);
        let q = make_builtin_warp(BuiltinFamily::Quadratic, &[0.5], 1.0).unwrap();
        assert!(ricci_ambient_nn(&q, 3, 2.0).is_err());
        let params = DssParameters::new(3, 1.0, 0.05).unwrap();
        let (d, _) = build_dss_warp(&params, 512, None).unwrap();
        for r in [0.0, 0.1, 0.5, 1.0] {
            let s = d.eval(r).unwrap().h;
            let expected = -2.0 * params.omega_prime(s) / (2.0 * s);
            assert_relative_eq!(
                ricci_ambient_nn(&d, 3, r).unwrap(),
                expected,
                max_relative = 1e-9,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn state_validation() {
        let w = make_builtin_warp(BuiltinFamily::Quadratic, &[0.5], 1.0).unwrap();
        let base = BaseManifold::unit_torus(1, 8).unwrap();
        assert!(matches!(
            GraphState::new(base.constant(1.5), 0.0, &w, &base),
            Err(GeometryError::OutsideDomain { index: 0, .. })
        ));
        let other = BaseManifold::unit_torus(1, 9).unwrap();
        assert!(GraphState::new(other.constant(0.0), 0.0, &w, &base).is_err());
        let (d, _) = build_dss_warp(&DssParameters::new(3, 1.0, 0.0).unwrap(), 128, None).unwrap();
        let s3 = BaseManifold::sphere_axisym(3, 9).unwrap();
        assert!(matches!(
            GraphState::new(s3.constant(0.1), 0.0, &d, &s3),
            Err(GeometryError::DimensionMismatch { warp: 3, base: 4 })
        ));
    }
}
