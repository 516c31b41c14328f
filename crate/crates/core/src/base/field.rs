use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{BaseError, BaseManifold, BaseVariant, GridShape};

/// Values of a scalar quantity on every node of a base grid, row-major
/// (`x` slow, `y` fast on `T²`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    shape: GridShape,
    values: Vec<f64>,
}

impl ScalarField {
    pub(crate) fn from_values(shape: GridShape, values: Vec<f64>) -> Self {
        debug_assert_eq!(shape.len(), values.len());
        ScalarField { shape, values }
    }

    /// Wraps `values` for `base`, checking length and finiteness.
    pub fn new(base: &BaseManifold, values: Vec<f64>) -> Result<Self, BaseError> {
        let shape = base.shape();
        if values.len() != shape.len() {
            return Err(BaseError::InvalidGrid(format!(
                "expected {} values for {shape}, got {}",
                shape.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(BaseError::NonFinite(i));
        }
        Ok(ScalarField { shape, values })
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            shape: self.shape,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `max |v|`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Writes the field as CSV. The first line is a comment declaring the grid:
    ///
    /// ```text
    /// # base=flat_torus dim=2 shape=64x64 periods=1x1
    /// i,j,x,y,value
    /// ```
    ///
    /// `T¹` uses `i,x,value`; the sphere uses `i,theta,value`.
    pub fn write_csv<W: Write>(
        &self,
        base: &BaseManifold,
        mut out: W,
    ) -> Result<(), std::io::Error> {
        let shape = base.shape();
        assert_eq!(shape, self.shape, "field does not belong to this base");
        match base {
            BaseManifold::FlatTorus(t) if t.dim == 2 => {
                writeln!(
                    out,
                    "# base=flat_torus dim=2 shape={}x{} periods={}x{}",
                    t.points[0], t.points[1], t.periods[0], t.periods[1]
                )?;
                writeln!(out, "i,j,x,y,value")?;
                for (idx, v) in self.values.iter().enumerate() {
                    let [x, y] = base.coords(idx);
                    writeln!(
                        out,
                        "{},{},{x},{y},{v}",
                        idx / t.points[1],
                        idx % t.points[1]
                    )?;
                }
            }
            BaseManifold::FlatTorus(t) => {
                writeln!(
                    out,
                    "# base=flat_torus dim=1 shape={} periods={}",
                    t.points[0], t.periods[0]
                )?;
                writeln!(out, "i,x,value")?;
                for (idx, v) in self.values.iter().enumerate() {
                    writeln!(out, "{idx},{},{v}", base.coords(idx)[0])?;
                }
            }
            BaseManifold::SphereAxisym(s) => {
                writeln!(out, "# base=sphere_axisym dim={} shape={}", s.dim, s.nodes)?;
                writeln!(out, "i,theta,value")?;
                for (idx, v) in self.values.iter().enumerate() {
                    writeln!(out, "{idx},{},{v}", base.coords(idx)[0])?;
                }
            }
        }
        Ok(())
    }

    /// Reads a field written by [`ScalarField::write_csv`], returning the
    /// base declared in its header.
    pub fn read_csv<R: BufRead>(input: R) -> Result<(BaseManifold, ScalarField), BaseError> {
        let mut lines = input.lines();
        let mut next = || -> Result<String, BaseError> {
            lines
                .next()
                .ok_or_else(|| BaseError::Parse("unexpected end of file".into()))?
                .map_err(|e| BaseError::Parse(e.to_string()))
        };
        let header = next()?;
        let header = header
            .strip_prefix('#')
            .ok_or_else(|| BaseError::Parse("missing '# base=...' header".into()))?;
        let mut variant = None;
        let mut dim = None;
        let mut shape: Vec<usize> = Vec::new();
        let mut periods: Vec<f64> = Vec::new();
        for tok in header.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| BaseError::Parse(format!("bad header token '{tok}'")))?;
            let bad = |e: &dyn std::fmt::Display| {
                BaseError::Parse(format!("bad header value '{tok}': {e}"))
            };
            match k {
                "base" => {
                    variant = Some(match v {
                        "flat_torus" => BaseVariant::FlatTorus,
                        "sphere_axisym" => BaseVariant::SphereAxisym,
                        other => return Err(BaseError::Parse(format!("unknown base '{other}'"))),
                    })
                }
                "dim" => dim = Some(v.parse::<usize>().map_err(|e| bad(&e))?),
                "shape" => {
                    shape = v
                        .split('x')
                        .map(|s| s.parse::<usize>().map_err(|e| bad(&e)))
                        .collect::<Result<_, _>>()?
                }
                "periods" => {
                    periods = v
                        .split('x')
                        .map(|s| s.parse::<f64>().map_err(|e| bad(&e)))
                        .collect::<Result<_, _>>()?
                }
                other => return Err(BaseError::Parse(format!("unknown header key '{other}'"))),
            }
        }
        let dim = dim.ok_or_else(|| BaseError::Parse("header lacks dim".into()))?;
        let base = match variant {
            Some(BaseVariant::FlatTorus) => BaseManifold::flat_torus(&shape, &periods)?,
            Some(BaseVariant::SphereAxisym) => {
                let nodes = *shape
                    .first()
                    .ok_or_else(|| BaseError::Parse("header lacks shape".into()))?;
                BaseManifold::sphere_axisym(dim, nodes)?
            }
            None => return Err(BaseError::Parse("header lacks base".into())),
        };
        if base.dim() != dim {
            return Err(BaseError::Parse(format!("dim={dim} disagrees with shape")));
        }
        let _columns = next()?;
        let mut values = Vec::with_capacity(base.len());
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(|e| BaseError::Parse(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let last = line.rsplit(',').next().unwrap_or("");
            let v = last
                .trim()
                .parse::<f64>()
                .map_err(|e| BaseError::Parse(format!("line {}: {e}", lineno + 3)))?;
            values.push(v);
        }
        let field = ScalarField::new(&base, values)?;
        Ok((base, field))
    }
}
