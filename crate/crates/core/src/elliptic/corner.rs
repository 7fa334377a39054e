//! Corner singular functions for Dirichlet problems on rectangles.
//!
//! When the boundary data and the equation disagree at a corner about the
//! value of `Δφ`, the solution picks up a term
//!
//! ```text
//! w(x, y) = y²/2 + (xy ln(x² + y²) + (x² − y²) θ)/π,   θ = atan2(y, x),
//! ```
//!
//! in local coordinates `x, y ≥ 0` along the two edges. `w` vanishes on
//! both edges and `Δw = 1`, but its second derivatives are unbounded at the
//! corner. Subtracting `d·w` for the mismatch `d` leaves a remainder smooth
//! enough for second-order discretization and interpolation.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use super::grid::GridSpec;
use crate::error::{Error, Result};
use crate::field::ScalarJetField;
use crate::jet::Jet;

fn w_jet(x: Jet, y: Jet) -> Jet {
    let theta = if x.value() >= y.value() {
        (y / x).atan()
    } else {
        FRAC_PI_2 - (x / y).atan()
    };
    y * y * 0.5 + (x * y * (x * x + y * y).ln() + (x * x - y * y) * theta) * (1.0 / PI)
}

fn w_value(x: f64, y: f64) -> f64 {
    if x == 0.0 && y == 0.0 {
        return 0.0;
    }
    0.5 * y * y + (x * y * (x * x + y * y).ln() + (x * x - y * y) * y.atan2(x)) / PI
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Corner {
    pub u: f64,
    pub v: f64,
    /// Orientation of the local axes, `±1`.
    pub su: f64,
    pub sv: f64,
    /// `Δφ` demanded by the equation minus `Δ` of the boundary data.
    pub mismatch: f64,
}

impl Corner {
    fn local(&self, u: f64, v: f64) -> (f64, f64) {
        ((u - self.u) * self.su, (v - self.v) * self.sv)
    }
}

/// `S = Σ d_c w_c` over the four corners of a grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CornerSingularity {
    pub corners: [Corner; 4],
}

impl CornerSingularity {
    pub fn none(spec: &GridSpec) -> Self {
        Self::with_mismatch(spec, [0.0; 4])
    }

    fn with_mismatch(spec: &GridSpec, d: [f64; 4]) -> Self {
        let (a, b) = (spec.u_min, spec.u_max());
        let (c, e) = (spec.v_min, spec.v_max());
        CornerSingularity {
            corners: [
                Corner { u: a, v: c, su: 1.0, sv: 1.0, mismatch: d[0] },
                Corner { u: b, v: c, su: -1.0, sv: 1.0, mismatch: d[1] },
                Corner { u: a, v: e, su: 1.0, sv: -1.0, mismatch: d[2] },
                Corner { u: b, v: e, su: -1.0, sv: -1.0, mismatch: d[3] },
            ],
        }
    }

    /// Mismatch `d_c = rhs(c) − Δb(c)` for `Δφ = rhs(φ)` with boundary data `b`.
    pub fn for_problem(
        spec: &GridSpec,
        boundary: &dyn ScalarJetField,
        rhs: impl Fn(f64, f64, f64) -> Result<f64>,
    ) -> Result<Self> {
        let mut s = Self::none(spec);
        for c in &mut s.corners {
            let b = boundary.jet(c.u, c.v, 2)?;
            let lap = b.derivative([0, 2, 0]) + b.derivative([0, 0, 2]);
            c.mismatch = rhs(c.u, c.v, b.value())? - lap;
        }
        Ok(s)
    }

    /// Sum of the mismatches, which is `ΔS` away from the corners.
    pub fn laplacian(&self) -> f64 {
        self.corners.iter().map(|c| c.mismatch).sum()
    }

    pub fn is_trivial(&self) -> bool {
        self.corners.iter().all(|c| c.mismatch == 0.0)
    }

    /// `S` at a point of the closed rectangle, including the corners.
    pub fn node_value(&self, u: f64, v: f64) -> f64 {
        self.corners
            .iter()
            .filter(|c| c.mismatch != 0.0)
            .map(|c| {
                let (x, y) = c.local(u, v);
                c.mismatch * w_value(x.max(0.0), y.max(0.0))
            })
            .sum()
    }
}

impl ScalarJetField for CornerSingularity {
    fn jet(&self, u: f64, v: f64, order: u8) -> Result<Jet> {
        let mut s = Jet::zero(order);
        for c in self.corners.iter().filter(|c| c.mismatch != 0.0) {
            let (x, y) = c.local(u, v);
            if x == 0.0 && y == 0.0 && order > 0 {
                return Err(Error::Domain(format!(
                    "derivatives are singular at the corner ({u}, {v})"
                )));
            }
            let [_, uj, vj] = Jet::coordinates([0.0, u, v], order);
            let (xj, yj) = ((uj - c.u) * c.su, (vj - c.v) * c.sv);
            s += w_jet(xj, yj) * c.mismatch;
        }
        Ok(s)
    }
}
