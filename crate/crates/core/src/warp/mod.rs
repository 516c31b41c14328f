//! Warping functions `h(r)` of the product metric `dr² + h(r)² g_N`.
//!
//! A [`WarpingFunction`] is either one of the closed-form builtin families
//! (`cosh`, `1 + αr²`) or a tabulated profile produced by the
//! de Sitter–Schwarzschild builder in [`dss`].

mod conditions;
pub mod dss;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use conditions::{
    angle_threshold, check_conditions, probe_grid, ConditionRow, ConditionsReport,
};
pub use dss::{build_dss_warp, DssParameters, DssReport, DssTable};

/// Tolerance used when certifying `h(0) = h₀`, `h'(0) = 0` and the sign tests.
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WarpError {
    #[error("radius {r} lies outside the warp domain {domain}")]
    OutsideDomain { r: f64, domain: Domain },
    #[error("invalid warp parameter: {0}")]
    InvalidParameter(String),
    #[error("probe grid is empty")]
    EmptyProbeGrid,
    #[error("de Sitter-Schwarzschild parameters are not admissible: {0}")]
    Inadmissible(String),
    #[error("root finding failed: {0}")]
    RootFinding(String),
}

/// `h`, `h'` and `h''` at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpValue {
    pub h: f64,
    pub h_prime: f64,
    pub h_double_prime: f64,
}

impl WarpValue {
    /// `h h'' − h'²`, the quantity bounded below by condition (C3).
    pub fn log_convexity(&self) -> f64 {
        self.h * self.h_double_prime - self.h_prime * self.h_prime
    }

    /// Principal curvature `h'/h` of the slice through this radius.
    pub fn slice_curvature(&self) -> f64 {
        self.h_prime / self.h
    }
}

/// Interval of admissible radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// `(−r̄, r̄)`; `r̄` may be infinite.
    Symmetric { r_bar: f64 },
    /// `[0, r̄)`.
    HalfOpen { r_bar: f64 },
}

impl Domain {
    pub fn r_bar(&self) -> f64 {
        match *self {
            Domain::Symmetric { r_bar } | Domain::HalfOpen { r_bar } => r_bar,
        }
    }

    pub fn is_half_open(&self) -> bool {
        matches!(self, Domain::HalfOpen { .. })
    }

    pub fn contains(&self, r: f64) -> bool {
        match *self {
            Domain::Symmetric { r_bar } => r.abs() < r_bar,
            Domain::HalfOpen { r_bar } => (0.0..r_bar).contains(&r),
        }
    }

    /// Left end of the domain (`−r̄` or `0`).
    pub fn lower(&self) -> f64 {
        match *self {
            Domain::Symmetric { r_bar } => -r_bar,
            Domain::HalfOpen { .. } => 0.0,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Symmetric { r_bar } => write!(f, "(-{r_bar}, {r_bar})"),
            Domain::HalfOpen { r_bar } => write!(f, "[0, {r_bar})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinFamily {
    Cosh,
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarpKind {
    ClosedForm,
    Tabulated,
}

#[derive(Debug, Clone)]
enum Profile {
    Cosh,
    Quadratic { alpha: f64 },
    Tabulated(Arc<DssTable>),
}

/// An immutable warping function together with its domain.
#[derive(Debug, Clone)]
pub struct WarpingFunction {
    profile: Profile,
    domain: Domain,
}

/// Builds one of the closed-form warps with `h(0) = 1`, `h'(0) = 0`.
///
/// `params` is empty for `cosh` and `[α]` for `1 + αr²`.
pub fn make_builtin_warp(
    family: BuiltinFamily,
    params: &[f64],
    r_max: f64,
) -> Result<WarpingFunction, WarpError> {
    if r_max.is_nan() || r_max <= 0.0 {
        return Err(WarpError::InvalidParameter(format!(
            "domain bound must be positive, got {r_max}"
        )));
    }
    let profile = match family {
        BuiltinFamily::Cosh => {
            if !params.is_empty() {
                return Err(WarpError::InvalidParameter(
                    "cosh warp takes no parameters".into(),
                ));
            }
            Profile::Cosh
        }
        BuiltinFamily::Quadratic => match params {
            [alpha] if *alpha > 0.0 && alpha.is_finite() => Profile::Quadratic { alpha: *alpha },
            [alpha] => {
                return Err(WarpError::InvalidParameter(format!(
                    "quadratic warp needs alpha > 0, got {alpha}"
                )))
            }
            _ => {
                return Err(WarpError::InvalidParameter(
                    "quadratic warp takes exactly one parameter [alpha]".into(),
                ))
            }
        },
    };
    Ok(WarpingFunction {
        profile,
        domain: Domain::Symmetric { r_bar: r_max },
    })
}

impl WarpingFunction {
    pub(crate) fn tabulated(table: DssTable) -> Self {
        let domain = Domain::HalfOpen {
            r_bar: table.r_cap(),
        };
        WarpingFunction {
            profile: Profile::Tabulated(Arc::new(table)),
            domain,
        }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn kind(&self) -> WarpKind {
        match self.profile {
            Profile::Tabulated(_) => WarpKind::Tabulated,
            _ => WarpKind::ClosedForm,
        }
    }

    /// Human-readable family name.
    pub fn family(&self) -> &'static str {
        match self.profile {
            Profile::Cosh => "cosh",
            Profile::Quadratic { .. } => "quadratic",
            Profile::Tabulated(_) => "dss",
        }
    }

    /// Ambient dimension the warp was built for, if it is tied to one.
    pub fn ambient_dim(&self) -> Option<usize> {
        match &self.profile {
            Profile::Tabulated(t) => Some(t.params().n),
            _ => None,
        }
    }

    pub fn table(&self) -> Option<&DssTable> {
        match &self.profile {
            Profile::Tabulated(t) => Some(t),
            _ => None,
        }
    }

    /// Evaluates `(h, h', h'')`, rejecting radii outside the domain.
    pub fn eval(&self, r: f64) -> Result<WarpValue, WarpError> {
        if !self.domain.contains(r) {
            return Err(WarpError::OutsideDomain {
                r,
                domain: self.domain,
            });
        }
        Ok(self.eval_unchecked(r))
    }

    /// Evaluates without the domain check. Callers must have validated `r`.
    #[inline]
    pub fn eval_unchecked(&self, r: f64) -> WarpValue {
        match &self.profile {
            Profile::Cosh => {
                let e = r.exp();
                let ei = 1.0 / e;
                let c = 0.5 * (e + ei);
                WarpValue {
                    h: c,
                    h_prime: if r.abs() < 1e-3 {
                        r.sinh()
                    } else {
                        0.5 * (e - ei)
                    },
                    h_double_prime: c,
                }
            }
            Profile::Quadratic { alpha } => WarpValue {
                h: 1.0 + alpha * r * r,
                h_prime: 2.0 * alpha * r,
                h_double_prime: 2.0 * alpha,
            },
            Profile::Tabulated(t) => t.eval(r),
        }
    }

    pub fn h(&self, r: f64) -> Result<f64, WarpError> {
        self.eval(r).map(|v| v.h)
    }

    /// Normalization constant `h₀ = h(0)`.
    pub fn h0(&self) -> f64 {
        self.eval_unchecked(0.0).h
    }
}
