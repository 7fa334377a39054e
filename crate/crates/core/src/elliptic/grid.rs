//! Uniform node grids over rectangles and their CSV form.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Rect, ScalarJetField};

/// Relative slack when checking that node coordinates are uniform.
const SPACING_TOL: f64 = 1e-9;

/// Node layout: `nx × ny` nodes at `(u_min + i h, v_min + j h)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub u_min: f64,
    pub v_min: f64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(u_min: f64, v_min: f64, h: f64, nx: usize, ny: usize) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::Grid(format!("need at least 3×3 nodes, got {nx}×{ny}")));
        }
        if !(h > 0.0 && h.is_finite() && u_min.is_finite() && v_min.is_finite()) {
            return Err(Error::Grid(format!("bad origin ({u_min}, {v_min}) or spacing {h}")));
        }
        Ok(GridSpec { u_min, v_min, h, nx, ny })
    }

    /// `nx` nodes across the `u` extent of `rect`; the `v` extent must be a
    /// whole number of cells of the same size.
    pub fn covering(rect: Rect, nx: usize) -> Result<Self> {
        if nx < 3 {
            return Err(Error::Grid(format!("need at least 3 nodes per side, got {nx}")));
        }
        let h = (rect.u_max - rect.u_min) / (nx - 1) as f64;
        let cells = (rect.v_max - rect.v_min) / h;
        let ny = cells.round();
        if (cells - ny).abs() > SPACING_TOL * cells.max(1.0) {
            return Err(Error::Grid(format!(
                "v extent {} is not a multiple of the spacing {h}",
                rect.v_max - rect.v_min
            )));
        }
        GridSpec::new(rect.u_min, rect.v_min, h, nx, ny as usize + 1)
    }

    pub fn u(&self, i: usize) -> f64 {
        self.u_min + i as f64 * self.h
    }

    pub fn v(&self, j: usize) -> f64 {
        self.v_min + j as f64 * self.h
    }

    pub fn u_max(&self) -> f64 {
        self.u(self.nx - 1)
    }

    pub fn v_max(&self) -> f64 {
        self.v(self.ny - 1)
    }

    pub fn rect(&self) -> Rect {
        Rect {
            u_min: self.u_min,
            u_max: self.u_max(),
            v_min: self.v_min,
            v_max: self.v_max(),
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny
    }

    /// Same rectangle at half the spacing.
    pub fn refined(&self) -> GridSpec {
        GridSpec {
            h: 0.5 * self.h,
            nx: 2 * self.nx - 1,
            ny: 2 * self.ny - 1,
            ..*self
        }
    }
}

/// Real values on the nodes of a [`GridSpec`], stored with `u` varying fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    spec: GridSpec,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Row {
    u: f64,
    v: f64,
    value: f64,
}

impl GridField {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        let spec = GridSpec::new(spec.u_min, spec.v_min, spec.h, spec.nx, spec.ny)?;
        if values.len() != spec.len() {
            return Err(Error::Grid(format!(
                "expected {} values, got {}",
                spec.len(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::Grid(format!(
                "non-finite value at node ({}, {})",
                k % spec.nx,
                k / spec.nx
            )));
        }
        Ok(GridField { spec, values })
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = (0..spec.ny)
            .flat_map(|j| (0..spec.nx).map(move |i| (i, j)))
            .map(|(i, j)| f(spec.u(i), spec.v(j)))
            .collect();
        GridField::new(spec, values)
    }

    pub fn sample(spec: GridSpec, f: &dyn ScalarJetField) -> Result<Self> {
        let mut values = Vec::with_capacity(spec.len());
        for j in 0..spec.ny {
            for i in 0..spec.nx {
                values.push(f.value(spec.u(i), spec.v(j))?);
            }
        }
        GridField::new(spec, values)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.spec.index(i, j)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        GridField::new(self.spec, self.values.iter().map(|&x| f(x)).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &GridField) -> Result<f64> {
        if self.spec != other.spec {
            return Err(Error::Grid("grid shapes differ".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// `max |self − f|` over the nodes.
    pub fn max_error(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let s = self.spec;
        (0..s.ny)
            .flat_map(|j| (0..s.nx).map(move |i| (i, j)))
            .map(|(i, j)| (self.get(i, j) - f(s.u(i), s.v(j))).abs())
            .fold(0.0, f64::max)
    }

    /// Writes `u,v,value` rows, `u` varying fastest.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let s = self.spec;
        for j in 0..s.ny {
            for i in 0..s.nx {
                out.serialize(Row {
                    u: s.u(i),
                    v: s.v(j),
                    value: self.get(i, j),
                })
                .map_err(csv_error)?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let header = rdr.headers().map_err(csv_error)?.clone();
        if header.iter().collect::<Vec<_>>() != ["u", "v", "value"] {
            return Err(Error::Grid(format!("expected header u,v,value, got {header:?}")));
        }
        let rows: Vec<Row> = rdr.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_error)?;
        let first = rows.first().ok_or_else(|| Error::Grid("empty grid file".into()))?;
        let nx = rows.iter().take_while(|r| r.v == first.v).count();
        if nx < 2 || !rows.len().is_multiple_of(nx) {
            return Err(Error::Grid(format!("{} rows do not form rows of {nx}", rows.len())));
        }
        let ny = rows.len() / nx;
        let h = rows[1].u - first.u;
        let spec = GridSpec::new(first.u, first.v, h, nx, ny)?;
        for (k, row) in rows.iter().enumerate() {
            let (i, j) = (k % nx, k / nx);
            let tol = SPACING_TOL * h.max(spec.u(i).abs()).max(spec.v(j).abs());
            if (row.u - spec.u(i)).abs() > tol || (row.v - spec.v(j)).abs() > tol {
                return Err(Error::Grid(format!(
                    "row {} at ({}, {}) breaks the uniform layout",
                    k + 2,
                    row.u,
                    row.v
                )));
            }
        }
        GridField::new(spec, rows.into_iter().map(|r| r.value).collect())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        GridField::read_csv(std::fs::File::open(path)?)
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}
