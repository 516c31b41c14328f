//! Discretized closed base manifolds `N` and their intrinsic operators.
//!
//! Two discretizations are provided: a flat periodic torus `T¹`/`T²` on a
//! uniform grid, and the unit sphere `S^m` restricted to axisymmetric fields
//! `u(θ)`, sampled on a uniform `θ` grid that includes both poles.
//!
//! Every operator works on a pointwise [`Jet`]: the value, gradient and
//! Hessian of a field expressed in a `g_N`-orthonormal frame. On the sphere
//! the Hessian is `diag(u'', cot θ u', …, cot θ u')`, stored as one explicit
//! `θθ` entry plus `m − 1` isotropic copies of `cot θ u'`. At the poles the
//! ghost node `u₋₁ = u₁` enforces `u' = 0`, and `cot θ u'` is replaced by its
//! limit `u''`.

mod field;
pub mod synth;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use field::ScalarField;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaseError {
    #[error("field of shape {found} does not match base grid {expected}")]
    ShapeMismatch {
        expected: GridShape,
        found: GridShape,
    },
    #[error("invalid base grid: {0}")]
    InvalidGrid(String),
    #[error("field contains a non-finite value at index {0}")]
    NonFinite(usize),
    #[error("malformed field file: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseVariant {
    FlatTorus,
    SphereAxisym,
}

/// Grid identity used to match fields with bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridShape {
    pub variant: BaseVariant,
    pub dim: usize,
    /// Points per axis; the second entry is 1 for `T¹` and the sphere.
    pub points: [usize; 2],
}

impl GridShape {
    pub fn len(&self) -> usize {
        self.points[0] * self.points[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl std::fmt::Display for GridShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self.variant {
            BaseVariant::FlatTorus => "flat_torus",
            BaseVariant::SphereAxisym => "sphere_axisym",
        };
        if self.variant == BaseVariant::FlatTorus && self.dim == 2 {
            write!(
                f,
                "{name}(dim={}, {}x{})",
                self.dim, self.points[0], self.points[1]
            )
        } else {
            write!(f, "{name}(dim={}, {})", self.dim, self.points[0])
        }
    }
}

/// Second-order jet of a field at one node, in a `g_N`-orthonormal frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [[f64; 2]; 2],
    /// Number of explicit frame directions (1 or 2).
    pub block: usize,
    /// Directions orthogonal to the gradient carrying the Hessian entry `iso_hess`.
    pub iso_count: usize,
    pub iso_hess: f64,
}

impl Jet {
    pub fn grad_sq(&self) -> f64 {
        self.grad[0] * self.grad[0] + self.grad[1] * self.grad[1]
    }

    /// Trace of the Hessian, i.e. `Δ_N` at the node.
    pub fn laplacian(&self) -> f64 {
        self.hess[0][0] + self.hess[1][1] + self.iso_count as f64 * self.iso_hess
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatTorus {
    pub dim: usize,
    pub points: [usize; 2],
    pub periods: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereAxisym {
    pub dim: usize,
    /// Node count including both poles.
    pub nodes: usize,
}

/// A discretized closed base manifold. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum BaseManifold {
    FlatTorus(FlatTorus),
    SphereAxisym(SphereAxisym),
}

impl BaseManifold {
    /// Flat torus of dimension `points.len()` (1 or 2).
    pub fn flat_torus(points: &[usize], periods: &[f64]) -> Result<Self, BaseError> {
        let dim = points.len();
        if !(1..=2).contains(&dim) || periods.len() != dim {
            return Err(BaseError::InvalidGrid(format!(
                "flat torus needs 1 or 2 axes with matching periods, got {} points and {} periods",
                points.len(),
                periods.len()
            )));
        }
        if points.iter().any(|&p| p < 4) {
            return Err(BaseError::InvalidGrid(
                "need at least 4 points per axis".into(),
            ));
        }
        if periods.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(BaseError::InvalidGrid("periods must be positive".into()));
        }
        let mut p = [points[0], 1];
        let mut l = [periods[0], 1.0];
        if dim == 2 {
            p[1] = points[1];
            l[1] = periods[1];
        }
        Ok(BaseManifold::FlatTorus(FlatTorus {
            dim,
            points: p,
            periods: l,
        }))
    }

    /// Unit torus with `points` per axis in each of `dim` directions.
    pub fn unit_torus(dim: usize, points: usize) -> Result<Self, BaseError> {
        Self::flat_torus(&vec![points; dim], &vec![1.0; dim])
    }

    /// Unit sphere `S^dim` with axisymmetric fields on `nodes` polar nodes.
    pub fn sphere_axisym(dim: usize, nodes: usize) -> Result<Self, BaseError> {
        if dim < 2 {
            return Err(BaseError::InvalidGrid(format!(
                "sphere dimension must be >= 2, got {dim}"
            )));
        }
        if nodes < 5 {
            return Err(BaseError::InvalidGrid("need at least 5 polar nodes".into()));
        }
        Ok(BaseManifold::SphereAxisym(SphereAxisym { dim, nodes }))
    }

    pub fn variant(&self) -> BaseVariant {
        match self {
            BaseManifold::FlatTorus(_) => BaseVariant::FlatTorus,
            BaseManifold::SphereAxisym(_) => BaseVariant::SphereAxisym,
        }
    }

    /// Dimension `m = n − 1` of the base.
    pub fn dim(&self) -> usize {
        match self {
            BaseManifold::FlatTorus(t) => t.dim,
            BaseManifold::SphereAxisym(s) => s.dim,
        }
    }

    /// Dimension `n` of the ambient warped product.
    pub fn ambient_dim(&self) -> usize {
        self.dim() + 1
    }

    pub fn shape(&self) -> GridShape {
        match self {
            BaseManifold::FlatTorus(t) => GridShape {
                variant: BaseVariant::FlatTorus,
                dim: t.dim,
                points: t.points,
            },
            BaseManifold::SphereAxisym(s) => GridShape {
                variant: BaseVariant::SphereAxisym,
                dim: s.dim,
                points: [s.nodes, 1],
            },
        }
    }

    pub fn len(&self) -> usize {
        self.shape().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid spacing per axis (`dθ` for the sphere).
    pub fn spacing(&self) -> [f64; 2] {
        match self {
            BaseManifold::FlatTorus(t) => [
                t.periods[0] / t.points[0] as f64,
                t.periods[1] / t.points[1] as f64,
            ],
            BaseManifold::SphereAxisym(s) => {
                let d = PI / (s.nodes - 1) as f64;
                [d, d]
            }
        }
    }

    /// Smallest grid spacing over the active axes.
    pub fn min_spacing(&self) -> f64 {
        let s = self.spacing();
        if self.variant() == BaseVariant::FlatTorus && self.dim() == 2 {
            s[0].min(s[1])
        } else {
            s[0]
        }
    }

    /// Ricci lower bound `ρ` with `Ric_N ≥ (n−1) ρ g_N`.
    pub fn rho(&self) -> f64 {
        match self {
            BaseManifold::FlatTorus(_) => 0.0,
            BaseManifold::SphereAxisym(s) => (s.dim as f64 - 1.0) / s.dim as f64,
        }
    }

    /// `Ric_N(v, v)` for a unit horizontal vector `v`.
    pub fn ric_vv(&self) -> f64 {
        match self {
            BaseManifold::FlatTorus(_) => 0.0,
            BaseManifold::SphereAxisym(s) => s.dim as f64 - 1.0,
        }
    }

    /// Coordinates of node `idx`: `(x, y)` on the torus, `(θ, 0)` on the sphere.
    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let d = self.spacing();
        match self {
            BaseManifold::FlatTorus(t) => {
                let i = idx / t.points[1];
                let j = idx % t.points[1];
                [
                    i as f64 * d[0],
                    if t.dim == 2 { j as f64 * d[1] } else { 0.0 },
                ]
            }
            BaseManifold::SphereAxisym(_) => [idx as f64 * d[0], 0.0],
        }
    }

    /// Samples `f(coords)` on every node.
    pub fn sample(&self, f: impl Fn([f64; 2]) -> f64) -> ScalarField {
        let values = (0..self.len()).map(|i| f(self.coords(i))).collect();
        ScalarField::from_values(self.shape(), values)
    }

    pub fn constant(&self, value: f64) -> ScalarField {
        ScalarField::from_values(self.shape(), vec![value; self.len()])
    }

    pub fn check(&self, field: &ScalarField) -> Result<(), BaseError> {
        if field.shape() != self.shape() {
            return Err(BaseError::ShapeMismatch {
                expected: self.shape(),
                found: field.shape(),
            });
        }
        Ok(())
    }

    /// Quadrature weights: `dx^m` on the torus, `|S^{m−1}| sin^{m−1}θ dθ` on
    /// the sphere (zero at the poles).
    pub fn volume_weights(&self) -> Vec<f64> {
        match self {
            BaseManifold::FlatTorus(t) => {
                let d = self.spacing();
                let w = if t.dim == 2 { d[0] * d[1] } else { d[0] };
                vec![w; self.len()]
            }
            BaseManifold::SphereAxisym(s) => {
                let d = self.spacing()[0];
                let area = unit_sphere_area(s.dim - 1);
                (0..s.nodes)
                    .map(|k| {
                        if k == 0 || k == s.nodes - 1 {
                            0.0
                        } else {
                            area * (k as f64 * d).sin().powi(s.dim as i32 - 1) * d
                        }
                    })
                    .collect()
            }
        }
    }

    /// Calls `f(idx, jet)` for every node, with derivatives from centered
    /// second-order stencils.
    pub fn for_each_jet(&self, u: &[f64], mut f: impl FnMut(usize, Jet)) {
        debug_assert_eq!(u.len(), self.len());
        match self {
            BaseManifold::FlatTorus(t) if t.dim == 1 => {
                let nx = t.points[0];
                let dx = self.spacing()[0];
                let (i2, idx2) = (0.5 / dx, 1.0 / (dx * dx));
                for i in 0..nx {
                    let c = u[i];
                    let l = u[if i == 0 { nx - 1 } else { i - 1 }];
                    let r = u[if i + 1 == nx { 0 } else { i + 1 }];
                    f(
                        i,
                        Jet {
                            value: c,
                            grad: [(r - l) * i2, 0.0],
                            hess: [[((r - c) - (c - l)) * idx2, 0.0], [0.0, 0.0]],
                            block: 1,
                            iso_count: 0,
                            iso_hess: 0.0,
                        },
                    );
                }
            }
            BaseManifold::FlatTorus(t) => {
                let [nx, ny] = t.points;
                let [dx, dy] = self.spacing();
                let (ix2, iy2) = (0.5 / dx, 0.5 / dy);
                let (ixx, iyy, ixy) = (1.0 / (dx * dx), 1.0 / (dy * dy), 0.25 / (dx * dy));
                for i in 0..nx {
                    let im = if i == 0 { nx - 1 } else { i - 1 } * ny;
                    let ip = if i + 1 == nx { 0 } else { i + 1 } * ny;
                    let ic = i * ny;
                    for j in 0..ny {
                        let jm = if j == 0 { ny - 1 } else { j - 1 };
                        let jp = if j + 1 == ny { 0 } else { j + 1 };
                        let c = u[ic + j];
                        let (xl, xr) = (u[im + j], u[ip + j]);
                        let (yl, yr) = (u[ic + jm], u[ic + jp]);
                        let uxx = ((xr - c) - (c - xl)) * ixx;
                        let uyy = ((yr - c) - (c - yl)) * iyy;
                        let uxy = ((u[ip + jp] - u[ip + jm]) - (u[im + jp] - u[im + jm])) * ixy;
                        f(
                            ic + j,
                            Jet {
                                value: c,
                                grad: [(xr - xl) * ix2, (yr - yl) * iy2],
                                hess: [[uxx, uxy], [uxy, uyy]],
                                block: 2,
                                iso_count: 0,
                                iso_hess: 0.0,
                            },
                        );
                    }
                }
            }
            BaseManifold::SphereAxisym(s) => {
                let n = s.nodes;
                let d = self.spacing()[0];
                let (i2, idd) = (0.5 / d, 1.0 / (d * d));
                for k in 0..n {
                    let c = u[k];
                    let (grad, uxx, iso) = if k == 0 || k == n - 1 {
                        let nb = if k == 0 { u[1] } else { u[n - 2] };
                        let second = 2.0 * (nb - c) * idd;
                        (0.0, second, second)
                    } else {
                        let (l, r) = (u[k - 1], u[k + 1]);
                        let g = (r - l) * i2;
                        let theta = k as f64 * d;
                        (g, ((r - c) - (c - l)) * idd, g * theta.cos() / theta.sin())
                    };
                    f(
                        k,
                        Jet {
                            value: c,
                            grad: [grad, 0.0],
                            hess: [[uxx, 0.0], [0.0, 0.0]],
                            block: 1,
                            iso_count: s.dim - 1,
                            iso_hess: iso,
                        },
                    );
                }
            }
        }
    }

    /// Centered first derivatives in the orthonormal frame, per node.
    pub fn gradients(&self, u: &[f64]) -> Vec<[f64; 2]> {
        let mut out = vec![[0.0; 2]; self.len()];
        self.for_each_jet(u, |i, jet| out[i] = jet.grad);
        out
    }
}

/// `|S^k|`, the area of the unit `k`-sphere.
fn unit_sphere_area(k: usize) -> f64 {
    // |S^k| = 2 π^{(k+1)/2} / Γ((k+1)/2); |S^0| = 2, |S^1| = 2π, |S^{k+2}| = 2π/(k+1) |S^k|
    let mut area = if k % 2 == 0 { 2.0 } else { 2.0 * PI };
    let mut j = k % 2;
    while j < k {
        area *= 2.0 * PI / (j as f64 + 1.0);
        j += 2;
    }
    area
}

/// Intrinsic Laplace–Beltrami operator `Δ_N u`.
pub fn laplace_beltrami_n(base: &BaseManifold, u: &ScalarField) -> Result<ScalarField, BaseError> {
    base.check(u)?;
    let mut out = vec![0.0; base.len()];
    base.for_each_jet(u.values(), |i, jet| out[i] = jet.laplacian());
    Ok(ScalarField::from_values(base.shape(), out))
}

/// Pointwise `|∇_N u|²_{g_N}`.
pub fn gradient_sq_n(base: &BaseManifold, u: &ScalarField) -> Result<ScalarField, BaseError> {
    base.check(u)?;
    let mut out = vec![0.0; base.len()];
    base.for_each_jet(u.values(), |i, jet| out[i] = jet.grad_sq());
    Ok(ScalarField::from_values(base.shape(), out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(unit_sphere_area(1), TAU);
        assert_relative_eq!(unit_sphere_area(2), 4.0 * PI);
        assert_relative_eq!(unit_sphere_area(3), 2.0 * PI * PI);
        assert_relative_eq!(unit_sphere_area(4), 8.0 * PI * PI / 3.0);
    }

    #[test]
    fn constants_are_harmonic() {
        for base in [
            BaseManifold::unit_torus(2, 16).unwrap(),
            BaseManifold::unit_torus(1, 16).unwrap(),
            BaseManifold::sphere_axisym(3, 33).unwrap(),
        ] {
            let u = base.constant(3.0);
            assert!(laplace_beltrami_n(&base, &u)
                .unwrap()
                .values()
                .iter()
                .all(|&v| v == 0.0));
            assert!(gradient_sq_n(&base, &u)
                .unwrap()
                .values()
                .iter()
                .all(|&v| v == 0.0));
        }
    }

    #[test]
    fn torus_eigenfunction_within_taylor_bound() {
        let n = 256;
        let base = BaseManifold::unit_torus(1, n).unwrap();
        let u = base.sample(|[x, _]| (TAU * x).sin());
        let lap = laplace_beltrami_n(&base, &u).unwrap();
        let exact = base.sample(|[x, _]| -TAU * TAU * (TAU * x).sin());
        let dx = 1.0 / n as f64;
        let bound = TAU.powi(4) * dx * dx / 12.0;
        assert!(max_abs_diff(lap.values(), exact.values()) <= bound);
    }

    #[test]
    fn torus_gradient_of_sine() {
        let base = BaseManifold::unit_torus(1, 256).unwrap();
        let u = base.sample(|[x, _]| (TAU * x).sin());
        let g = gradient_sq_n(&base, &u).unwrap();
        let exact = base.sample(|[x, _]| TAU * TAU * (TAU * x).cos().powi(2));
        let dx: f64 = 1.0 / 256.0;
        assert!(max_abs_diff(g.values(), exact.values()) <= TAU.powi(4) * dx * dx / 3.0);
    }

    #[test]
    fn sphere_first_harmonic() {
        for nodes in [65, 129] {
            let base = BaseManifold::sphere_axisym(2, nodes).unwrap();
            let u = base.sample(|[t, _]| t.cos());
            let lap = laplace_beltrami_n(&base, &u).unwrap();
            let exact = base.sample(|[t, _]| -2.0 * t.cos());
            let d = base.spacing()[0];
            assert!(max_abs_diff(lap.values(), exact.values()) <= 2.0 * d * d);
            let g = gradient_sq_n(&base, &u).unwrap();
            let exact = base.sample(|[t, _]| t.sin().powi(2));
            assert!(max_abs_diff(g.values(), exact.values()) <= d * d);
        }
    }

    #[test]
    fn higher_sphere_harmonic() {
        // on S^3, cos θ has eigenvalue −3
        let base = BaseManifold::sphere_axisym(3, 257).unwrap();
        let lap = laplace_beltrami_n(&base, &base.sample(|[t, _]| t.cos())).unwrap();
        let exact = base.sample(|[t, _]| -3.0 * t.cos());
        assert!(max_abs_diff(lap.values(), exact.values()) <= 1e-3);
    }

    fn refinement_ratio(coarse: usize) -> (f64, f64) {
        let err = |n: usize| {
            let base = BaseManifold::flat_torus(&[n, n], &[1.0, 2.0]).unwrap();
            let f = |[x, y]: [f64; 2]| {
                (TAU * x).sin() * (PI * y).cos() + 0.3 * (TAU * (x + 0.5 * y)).cos()
            };
            let u = base.sample(f);
            let lap = laplace_beltrami_n(&base, &u).unwrap();
            let exact = base.sample(|[x, y]| {
                -(TAU * TAU + PI * PI) * (TAU * x).sin() * (PI * y).cos()
                    - 0.3 * (TAU * TAU + PI * PI) * (TAU * (x + 0.5 * y)).cos()
            });
            let g = gradient_sq_n(&base, &u).unwrap();
            let gx = |x: f64, y: f64| {
                TAU * (TAU * x).cos() * (PI * y).cos() - 0.3 * TAU * (TAU * (x + 0.5 * y)).sin()
            };
            let gy = |x: f64, y: f64| {
                -PI * (TAU * x).sin() * (PI * y).sin() - 0.3 * PI * (TAU * (x + 0.5 * y)).sin()
            };
            let gexact = base.sample(|[x, y]| gx(x, y).powi(2) + gy(x, y).powi(2));
            (
                max_abs_diff(lap.values(), exact.values()),
                max_abs_diff(g.values(), gexact.values()),
            )
        };
        let (a, b) = (err(coarse), err(2 * coarse));
        (a.0 / b.0, a.1 / b.1)
    }

    #[test]
    fn torus_operators_are_second_order() {
        let (lap, grad) = refinement_ratio(32);
        assert!((3.5..=4.5).contains(&lap), "laplacian ratio {lap}");
        assert!((3.5..=4.5).contains(&grad), "gradient ratio {grad}");
    }

    #[test]
    fn sphere_operators_are_second_order() {
        let err = |nodes: usize| {
            let base = BaseManifold::sphere_axisym(2, nodes).unwrap();
            // P2(cos θ) has eigenvalue −6
            let u = base.sample(|[t, _]| 1.5 * t.cos().powi(2) - 0.5);
            let lap = laplace_beltrami_n(&base, &u).unwrap();
            let exact = base.sample(|[t, _]| -6.0 * (1.5 * t.cos().powi(2) - 0.5));
            let g = gradient_sq_n(&base, &u).unwrap();
            let gexact = base.sample(|[t, _]| (3.0 * t.cos() * t.sin()).powi(2));
            (
                max_abs_diff(lap.values(), exact.values()),
                max_abs_diff(g.values(), gexact.values()),
            )
        };
        let (a, b) = (err(65), err(129));
        assert!((3.5..=4.5).contains(&(a.0 / b.0)), "{}", a.0 / b.0);
        assert!((3.5..=4.5).contains(&(a.1 / b.1)), "{}", a.1 / b.1);
    }

    #[test]
    fn summation_by_parts_is_exact_with_forward_differences() {
        let base = BaseManifold::flat_torus(&[24, 20], &[1.0, 1.3]).unwrap();
        let u = base.sample(|[x, y]| (TAU * x).sin() + (x * y).cos());
        let w = base.sample(|[x, y]| (TAU * y / 1.3).cos() * (1.0 + x));
        let lap = laplace_beltrami_n(&base, &w).unwrap();
        let weights = base.volume_weights();
        let lhs: f64 = (0..base.len())
            .map(|i| u.values()[i] * lap.values()[i] * weights[i])
            .sum();
        let [nx, ny] = [24, 20];
        let [dx, dy] = base.spacing();
        let (uv, wv) = (u.values(), w.values());
        let mut rhs = 0.0;
        for i in 0..nx {
            for j in 0..ny {
                let c = i * ny + j;
                let xp = ((i + 1) % nx) * ny + j;
                let yp = i * ny + (j + 1) % ny;
                rhs -= ((uv[xp] - uv[c]) / dx * (wv[xp] - wv[c]) / dx
                    + (uv[yp] - uv[c]) / dy * (wv[yp] - wv[c]) / dy)
                    * weights[c];
            }
        }
        assert_relative_eq!(lhs, rhs, epsilon = 1e-10, max_relative = 1e-12);
    }

    #[test]
    fn summation_by_parts_with_centered_gradient_is_second_order() {
        let err = |n: usize| {
            let base = BaseManifold::unit_torus(2, n).unwrap();
            let u = base.sample(|[x, y]| (TAU * x).sin() * (TAU * y).cos());
            let w = base.sample(|[x, y]| (TAU * x).sin() * (TAU * y).cos() + (TAU * (x + y)).cos());
            let lap = laplace_beltrami_n(&base, &w).unwrap();
            let wts = base.volume_weights();
            let gu = base.gradients(u.values());
            let gw = base.gradients(w.values());
            let lhs: f64 = (0..base.len())
                .map(|i| u.values()[i] * lap.values()[i] * wts[i])
                .sum();
            let rhs: f64 = -(0..base.len())
                .map(|i| (gu[i][0] * gw[i][0] + gu[i][1] * gw[i][1]) * wts[i])
                .sum::<f64>();
            (lhs - rhs).abs()
        };
        let (a, b) = (err(32), err(64));
        assert!(a / b > 3.5, "{}", a / b);
    }

    #[test]
    fn sphere_weights_integrate_area() {
        let base = BaseManifold::sphere_axisym(2, 201).unwrap();
        let total: f64 = base.volume_weights().iter().sum();
        assert_relative_eq!(total, 4.0 * PI, max_relative = 1e-4);
        assert_eq!(base.volume_weights()[0], 0.0);
    }

    #[test]
    fn ricci_data() {
        assert_eq!(BaseManifold::unit_torus(2, 8).unwrap().rho(), 0.0);
        let s = BaseManifold::sphere_axisym(2, 9).unwrap();
        assert_eq!(s.rho(), 0.5);
        assert_eq!(s.ric_vv(), 1.0);
        assert_eq!(s.ambient_dim(), 3);
    }

    #[test]
    fn invalid_grids_and_mismatch() {
        assert!(BaseManifold::flat_torus(&[8, 8, 8], &[1.0; 3]).is_err());
        assert!(BaseManifold::flat_torus(&[8], &[0.0]).is_err());
        assert!(BaseManifold::sphere_axisym(1, 9).is_err());
        let a = BaseManifold::unit_torus(2, 8).unwrap();
        let b = BaseManifold::unit_torus(2, 16).unwrap();
        assert!(matches!(
            laplace_beltrami_n(&a, &b.constant(1.0)),
            Err(BaseError::ShapeMismatch { .. })
        ));
        assert!(gradient_sq_n(&a, &b.constant(1.0)).is_err());
    }
}
