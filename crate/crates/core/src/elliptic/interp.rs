//! Bicubic Hermite interpolation of grid data.
//!
//! Nodal slopes and cross derivatives are estimated by fourth-order finite
//! differences (one-sided near the edges), which keeps second derivatives of
//! the interpolant accurate to `O(h²)`.

use super::grid::GridField;
use crate::error::{Error, Result};
use crate::field::ScalarJetField;
use crate::jet::Jet;

/// Stencil width for nodal derivative estimates.
const STENCIL: usize = 5;

/// `L_k'(x)` for the Lagrange basis on `nodes`.
fn derivative_weights(nodes: &[f64], x: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|k| {
            let mut total = 0.0;
            for m in 0..nodes.len() {
                if m == k {
                    continue;
                }
                let mut term = 1.0 / (nodes[k] - nodes[m]);
                for l in 0..nodes.len() {
                    if l != k && l != m {
                        term *= (x - nodes[l]) / (nodes[k] - nodes[l]);
                    }
                }
                total += term;
            }
            total
        })
        .collect()
}

/// First derivative along a line of `n` samples at unit spacing.
fn differentiate(line: &[f64]) -> Vec<f64> {
    let n = line.len();
    let w = STENCIL.min(n);
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(w / 2).min(n - w);
            let nodes: Vec<f64> = (start..start + w).map(|k| k as f64).collect();
            derivative_weights(&nodes, i as f64)
                .iter()
                .zip(&line[start..start + w])
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect()
}

/// `C¹` bicubic interpolant of a [`GridField`].
#[derive(Clone, Debug)]
pub struct GridInterpolant {
    grid: GridField,
    /// Nodal `h ∂_u`, `h ∂_v` and `h² ∂_u∂_v`, in grid order.
    du: Vec<f64>,
    dv: Vec<f64>,
    duv: Vec<f64>,
}

/// Hermite basis on `[0, 1]` as cubic coefficients: value at 0, value at 1,
/// slope at 0, slope at 1.
const VALUE: [[f64; 4]; 2] = [[1.0, 0.0, -3.0, 2.0], [0.0, 0.0, 3.0, -2.0]];
const SLOPE: [[f64; 4]; 2] = [[0.0, 1.0, -2.0, 1.0], [0.0, 0.0, -1.0, 1.0]];

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn grid_to_field(g: &GridField) -> Result<GridInterpolant> {
    let s = *g.spec();
    if s.nx < 4 || s.ny < 4 {
        return Err(Error::Grid(format!(
            "interpolation needs at least 4×4 nodes, got {}×{}",
            s.nx, s.ny
        )));
    }
    let (nx, ny) = (s.nx, s.ny);
    let mut du = vec![0.0; s.len()];
    let mut dv = vec![0.0; s.len()];
    let mut duv = vec![0.0; s.len()];
    for j in 0..ny {
        let row: Vec<f64> = (0..nx).map(|i| g.get(i, j)).collect();
        for (i, d) in differentiate(&row).into_iter().enumerate() {
            du[s.index(i, j)] = d;
        }
    }
    for i in 0..nx {
        let col: Vec<f64> = (0..ny).map(|j| g.get(i, j)).collect();
        let dcol: Vec<f64> = (0..ny).map(|j| du[s.index(i, j)]).collect();
        for (j, (d, dd)) in differentiate(&col).into_iter().zip(differentiate(&dcol)).enumerate() {
            dv[s.index(i, j)] = d;
            duv[s.index(i, j)] = dd;
        }
    }
    Ok(GridInterpolant {
        grid: g.clone(),
        du,
        dv,
        duv,
    })
}

impl GridInterpolant {
    pub fn grid(&self) -> &GridField {
        &self.grid
    }

    fn locate(&self, x: f64, x0: f64, n: usize, h: f64) -> Option<(usize, f64)> {
        let t = (x - x0) / h;
        let slack = 1e-12 * (n as f64);
        if !(t >= -slack && t <= (n - 1) as f64 + slack) {
            return None;
        }
        let cell = (t.floor().max(0.0) as usize).min(n - 2);
        Some((cell, t - cell as f64))
    }

    /// Cubic coefficients `a[k][l]` of the patch in local `(s, t) ∈ [0, 1]²`.
    fn patch(&self, ci: usize, cj: usize) -> [[f64; 4]; 4] {
        let s = self.grid.spec();
        let mut a = [[0.0; 4]; 4];
        for (da, (va, sa)) in VALUE.iter().zip(&SLOPE).enumerate() {
            for (db, (vb, sb)) in VALUE.iter().zip(&SLOPE).enumerate() {
                let n = s.index(ci + da, cj + db);
                let terms = [
                    (self.grid.values()[n], va, vb),
                    (self.du[n], sa, vb),
                    (self.dv[n], va, sb),
                    (self.duv[n], sa, sb),
                ];
                for (w, p, q) in terms {
                    for k in 0..4 {
                        for l in 0..4 {
                            a[k][l] += w * p[k] * q[l];
                        }
                    }
                }
            }
        }
        a
    }
}

impl ScalarJetField for GridInterpolant {
    fn jet(&self, u: f64, v: f64, order: u8) -> Result<Jet> {
        let s = self.grid.spec();
        let (Some((ci, x)), Some((cj, y))) = (
            self.locate(u, s.u_min, s.nx, s.h),
            self.locate(v, s.v_min, s.ny, s.h),
        ) else {
            return Err(Error::Domain(format!(
                "({u}, {v}) outside the grid [{}, {}]×[{}, {}]",
                s.u_min,
                s.u_max(),
                s.v_min,
                s.v_max()
            )));
        };
        let a = self.patch(ci, cj);
        let mut jet = Jet::zero(order);
        let ord = order as usize;
        for m in 0..=ord.min(3) {
            for n in 0..=(ord - m).min(3) {
                let mut c = 0.0;
                for (k, row) in a.iter().enumerate().skip(m) {
                    for (l, akl) in row.iter().enumerate().skip(n) {
                        c += akl * binomial(k, m) * binomial(l, n) * x.powi((k - m) as i32) * y.powi((l - n) as i32);
                    }
                }
                jet.set_taylor([0, m as u8, n as u8], c / s.h.powi((m + n) as i32));
            }
        }
        Ok(jet)
    }
}
