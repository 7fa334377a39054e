//! Five-point finite-difference solvers with Dirichlet boundary data.
//!
//! Interior unknowns are numbered with `u` varying fastest, so the discrete
//! Laplacian is banded with half-bandwidth `nx − 2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::banded::{solve_certified, BandMatrix};
use super::corner::CornerSingularity;
use super::grid::{GridField, GridSpec};
use crate::error::{Error, Result};
use crate::field::ScalarJetField;
use crate::jet::Jet;
use super::interp::{grid_to_field, GridInterpolant};
use std::sync::Arc;

/// Relative residual certified for every linear solve.
pub const LINEAR_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Sup-norm bound on the discrete residual.
    pub tolerance: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    /// Step-halvings allowed per Newton iteration.
    pub max_backtracks: usize,
    /// Split off the corner singular functions when the boundary data are
    /// incompatible with the equation at a corner.
    pub corner_correction: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iterations: 50,
            tolerance: 1e-10,
            armijo: 1e-4,
            max_backtracks: 40,
            corner_correction: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) || self.max_iterations == 0 || !(self.armijo > 0.0 && self.armijo < 0.5) {
            return Err(Error::Precondition(format!("invalid solver configuration {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Final sup-norm residual.
    pub residual: f64,
    /// Sup-norm residual after each accepted step, starting from the initial guess.
    pub history: Vec<f64>,
    /// Euclidean residual norms, the merit function of the line search.
    pub merit_history: Vec<f64>,
    /// Accepted step lengths.
    pub steps: Vec<f64>,
    /// `1 + ½R` takes both signs on the grid, so the Jacobian need not be monotone.
    pub nonmonotone_jacobian: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrescribedSolution {
    /// `φ = ln P₀` on the nodes.
    pub phi: GridField,
    /// `φ − S` on the nodes, `S` being the corner singular part.
    pub remainder: GridField,
    pub corners: CornerSingularity,
    pub report: SolveReport,
}

impl PrescribedSolution {
    /// `P₀ = e^φ` on the nodes.
    pub fn p0(&self) -> GridField {
        self.phi.map(f64::exp).expect("exp of finite grid values is finite")
    }

    /// `P₀ = exp(interpolated remainder + S)` over the grid rectangle.
    pub fn p0_field(&self) -> Result<Arc<dyn ScalarJetField>> {
        Ok(Arc::new(SolvedP0 {
            remainder: grid_to_field(&self.remainder)?,
            corners: self.corners.clone(),
        }))
    }
}

struct SolvedP0 {
    remainder: GridInterpolant,
    corners: CornerSingularity,
}

impl ScalarJetField for SolvedP0 {
    fn jet(&self, u: f64, v: f64, order: u8) -> Result<Jet> {
        Ok((self.remainder.jet(u, v, order)? + self.corners.jet(u, v, order)?).exp())
    }
}

struct Interior {
    spec: GridSpec,
    mx: usize,
    my: usize,
}

impl Interior {
    fn new(spec: GridSpec) -> Self {
        Interior {
            spec,
            mx: spec.nx - 2,
            my: spec.ny - 2,
        }
    }

    fn len(&self) -> usize {
        self.mx * self.my
    }

    /// `h² Δ_h` with the boundary folded in; `diag` is added to the diagonal.
    fn laplacian(&self, diag: impl Fn(usize) -> f64) -> BandMatrix {
        let (mx, my) = (self.mx, self.my);
        let mut a = BandMatrix::zeros(self.len(), mx, mx);
        for jj in 0..my {
            for ii in 0..mx {
                let k = jj * mx + ii;
                a.add(k, k, -4.0 + diag(k));
                if ii > 0 {
                    a.add(k, k - 1, 1.0);
                }
                if ii + 1 < mx {
                    a.add(k, k + 1, 1.0);
                }
                if jj > 0 {
                    a.add(k, k - mx, 1.0);
                }
                if jj + 1 < my {
                    a.add(k, k + mx, 1.0);
                }
            }
        }
        a
    }

    /// `h² Δ_h x` at interior nodes for a full grid vector `x`.
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let nx = self.spec.nx;
        let mut out = vec![0.0; self.len()];
        out.par_chunks_mut(self.mx).enumerate().for_each(|(jj, row)| {
            let j = jj + 1;
            for (ii, o) in row.iter_mut().enumerate() {
                let i = ii + 1;
                let c = j * nx + i;
                *o = x[c - 1] + x[c + 1] + x[c - nx] + x[c + nx] - 4.0 * x[c];
            }
        });
        out
    }

    fn node(&self, k: usize) -> usize {
        (k / self.mx + 1) * self.spec.nx + k % self.mx + 1
    }

    fn scatter(&self, full: &mut [f64], interior: &[f64]) {
        for (k, x) in interior.iter().enumerate() {
            full[self.node(k)] = *x;
        }
    }
}

fn boundary_grid(spec: GridSpec, boundary: &dyn ScalarJetField) -> Result<Vec<f64>> {
    let mut x = vec![0.0; spec.len()];
    for j in 0..spec.ny {
        for i in 0..spec.nx {
            if spec.is_boundary(i, j) {
                let b = boundary.value(spec.u(i), spec.v(j))?;
                if !b.is_finite() {
                    return Err(Error::Evaluation {
                        message: format!("boundary value {b} at ({}, {})", spec.u(i), spec.v(j)),
                        offset: None,
                    });
                }
                x[spec.index(i, j)] = b;
            }
        }
    }
    Ok(x)
}

/// Solves `Δ_h x = rhs` at interior nodes, with `x` already holding the
/// boundary values.
fn linear_solve(it: &Interior, x: &mut [f64], rhs: impl Fn(usize) -> f64) -> Result<()> {
    let h2 = it.spec.h * it.spec.h;
    // with the interior zeroed, apply() leaves only the boundary terms
    let mut xb = x.to_vec();
    for k in 0..it.len() {
        xb[it.node(k)] = 0.0;
    }
    let bterm = it.apply(&xb);
    let b: Vec<f64> = (0..it.len()).map(|k| h2 * rhs(k) - bterm[k]).collect();
    let sol = solve_certified(it.laplacian(|_| 0.0), &b, LINEAR_TOL)?;
    it.scatter(x, &sol);
    Ok(())
}

/// Solves `ΔK = rhs` with `K = boundary` on the edge of the grid.
pub fn solve_poisson(rhs: &GridField, boundary: &dyn ScalarJetField) -> Result<GridField> {
    let spec = *rhs.spec();
    let it = Interior::new(spec);
    let mut x = boundary_grid(spec, boundary)?;
    linear_solve(&it, &mut x, |k| rhs.values()[it.node(k)])?;
    GridField::new(spec, x)
}

/// Sup norm of the discrete residual `Δ_h x − rhs` at interior nodes.
pub fn poisson_residual(x: &GridField, rhs: &GridField) -> Result<f64> {
    if x.spec() != rhs.spec() {
        return Err(Error::Grid("grid shapes differ".into()));
    }
    let it = Interior::new(*x.spec());
    let h2 = x.spec().h * x.spec().h;
    let lx = it.apply(x.values());
    Ok((0..it.len())
        .map(|k| (lx[k] / h2 - rhs.values()[it.node(k)]).abs())
        .fold(0.0, f64::max))
}

/// Residual `Δ_h φ̃ + ΔS − f e^{−2(φ̃ + S)}` at interior nodes.
fn curvature_residual(it: &Interior, rem: &[f64], shift: &[f64], lap_shift: f64, f: &[f64]) -> Vec<f64> {
    let h2 = it.spec.h * it.spec.h;
    let lx = it.apply(rem);
    lx.into_iter()
        .enumerate()
        .map(|(k, l)| {
            let n = it.node(k);
            l / h2 + lap_shift - f[k] * (-2.0 * (rem[n] + shift[n])).exp()
        })
        .collect()
}

fn sup(r: &[f64]) -> f64 {
    r.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn l2(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solves `Δφ = ½(1 + ½R) e^{−2φ}` for `φ = ln P₀`, so that the normal
/// form built from `P₀ = e^φ` has scalar curvature `R`.
///
/// Newton's method with Armijo backtracking on `½‖F‖²`, starting from the
/// harmonic extension of the boundary data.
///
/// The equation can have several solutions with the same boundary data
/// (for `R > −2` it is of Bratu type); this start selects the one reached
/// from below. See [`solve_prescribed_curvature_from`] to pick another.
pub fn solve_prescribed_curvature(
    r_target: &dyn ScalarJetField,
    spec: GridSpec,
    boundary: &dyn ScalarJetField,
    config: &SolverConfig,
) -> Result<PrescribedSolution> {
    solve_prescribed_curvature_from(r_target, spec, boundary, None, config)
}

/// As [`solve_prescribed_curvature`], starting Newton from `guess` at the
/// interior nodes when given.
pub fn solve_prescribed_curvature_from(
    r_target: &dyn ScalarJetField,
    spec: GridSpec,
    boundary: &dyn ScalarJetField,
    guess: Option<&dyn ScalarJetField>,
    config: &SolverConfig,
) -> Result<PrescribedSolution> {
    config.validate()?;
    let it = Interior::new(spec);
    let mut f = Vec::with_capacity(it.len());
    for k in 0..it.len() {
        let n = it.node(k);
        let (u, v) = (spec.u(n % spec.nx), spec.v(n / spec.nx));
        let r = r_target.value(u, v)?;
        if !r.is_finite() {
            return Err(Error::Evaluation {
                message: format!("target curvature {r} at ({u}, {v})"),
                offset: None,
            });
        }
        f.push(0.5 * (1.0 + 0.5 * r));
    }
    let nonmonotone_jacobian = f.iter().any(|&x| x > 0.0) && f.iter().any(|&x| x < 0.0);

    let corners = if config.corner_correction {
        CornerSingularity::for_problem(&spec, boundary, |u, v, b| {
            Ok(0.5 * (1.0 + 0.5 * r_target.value(u, v)?) * (-2.0 * b).exp())
        })?
    } else {
        CornerSingularity::none(&spec)
    };
    let lap_shift = corners.laplacian();
    let shift: Vec<f64> = (0..spec.len())
        .map(|n| corners.node_value(spec.u(n % spec.nx), spec.v(n / spec.nx)))
        .collect();

    let mut phi = boundary_grid(spec, boundary)?;
    for (p, s) in phi.iter_mut().zip(&shift) {
        *p -= s;
    }
    match guess {
        Some(g) => {
            for k in 0..it.len() {
                let n = it.node(k);
                phi[n] = g.value(spec.u(n % spec.nx), spec.v(n / spec.nx))? - shift[n];
            }
        }
        None => linear_solve(&it, &mut phi, |_| 0.0)?,
    }

    let h2 = spec.h * spec.h;
    let mut res = curvature_residual(&it, &phi, &shift, lap_shift, &f);
    let mut history = vec![sup(&res)];
    let mut merit_history = vec![l2(&res)];
    let mut steps = Vec::new();
    let mut iterations = 0;
    while sup(&res) > config.tolerance {
        if iterations == config.max_iterations {
            return Err(Error::Convergence {
                iterations,
                residual: sup(&res),
                history,
            });
        }
        iterations += 1;
        // h²J = h²Δ_h + 2h² f e^{−2φ}
        let jac = it.laplacian(|k| {
            let n = it.node(k);
            2.0 * h2 * f[k] * (-2.0 * (phi[n] + shift[n])).exp()
        });
        let rhs: Vec<f64> = res.iter().map(|r| -h2 * r).collect();
        let delta = solve_certified(jac, &rhs, LINEAR_TOL)?;

        let m0 = merit_history.last().copied().unwrap_or(0.0);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=config.max_backtracks {
            let mut trial = phi.clone();
            for (k, d) in delta.iter().enumerate() {
                trial[it.node(k)] += alpha * d;
            }
            let r = curvature_residual(&it, &trial, &shift, lap_shift, &f);
            let m = l2(&r);
            if !m.is_finite() {
                return Err(Error::Convergence {
                    iterations,
                    residual: f64::NAN,
                    history,
                });
            }
            if m * m <= (1.0 - 2.0 * config.armijo * alpha) * m0 * m0 {
                accepted = Some((trial, r, m));
                break;
            }
            alpha *= 0.5;
        }
        let Some((trial, r, m)) = accepted else {
            return Err(Error::Convergence {
                iterations,
                residual: sup(&res),
                history,
            });
        };
        phi = trial;
        res = r;
        history.push(sup(&res));
        merit_history.push(m);
        steps.push(alpha);
    }
    let remainder = GridField::new(spec, phi)?;
    let full: Vec<f64> = remainder.values().iter().zip(&shift).map(|(r, s)| r + s).collect();
    Ok(PrescribedSolution {
        phi: GridField::new(spec, full)?,
        remainder,
        corners,
        report: SolveReport {
            iterations,
            residual: sup(&res),
            history,
            merit_history,
            steps,
            nonmonotone_jacobian,
        },
    })
}
