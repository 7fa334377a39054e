//! Heatmaps (binary PPM) and gnuplot-ready tables of nodal values.

use std::io::Write;

/// Nodal values on an `nx × ny` grid, `u` fastest; `None` marks nodes where
/// the field could not be evaluated.
pub struct Raster {
    pub nx: usize,
    pub ny: usize,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub values: Vec<Option<f64>>,
}

impl Raster {
    pub fn range(&self) -> Option<(f64, f64)> {
        let mut it = self.values.iter().flatten();
        let first = *it.next()?;
        Some(it.fold((first, first), |(lo, hi), &x| (lo.min(x), hi.max(x))))
    }

    pub fn missing(&self) -> usize {
        self.values.iter().filter(|x| x.is_none()).count()
    }

    /// `v` increases upwards; missing nodes are black.
    pub fn write_ppm<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "P6\n{} {}\n255\n", self.nx, self.ny)?;
        let (lo, hi) = self.range().unwrap_or((0.0, 1.0));
        let span = if hi > lo { hi - lo } else { 1.0 };
        let mut buf = Vec::with_capacity(3 * self.nx * self.ny);
        for j in (0..self.ny).rev() {
            for i in 0..self.nx {
                let rgb = match self.values[j * self.nx + i] {
                    Some(x) => colour((x - lo) / span),
                    None => [0, 0, 0],
                };
                buf.extend_from_slice(&rgb);
            }
        }
        w.write_all(&buf)
    }

    /// `u v value` rows in blocks of constant `v`; missing values as `nan`.
    pub fn write_table<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# u v value")?;
        for j in 0..self.ny {
            for i in 0..self.nx {
                match self.values[j * self.nx + i] {
                    Some(x) => writeln!(w, "{} {} {}", self.u[i], self.v[j], x)?,
                    None => writeln!(w, "{} {} nan", self.u[i], self.v[j])?,
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Blue through white to red for `t ∈ [0, 1]`.
fn colour(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    let byte = |x: f64| (255.0 * x).round() as u8;
    if t < 0.5 {
        let s = 2.0 * t;
        [byte(s), byte(s), 255]
    } else {
        let s = 2.0 * (1.0 - t);
        [255, byte(s), byte(s)]
    }
}
