//! Prescribed scalar curvature and the Sasakian potential on rectangular grids.

mod banded;
mod corner;
mod grid;
mod interp;
mod solver;

pub use corner::{Corner, CornerSingularity};
pub use banded::{solve_certified, BandLu, BandMatrix};
pub use grid::{GridField, GridSpec};
pub use interp::{grid_to_field, GridInterpolant};
pub use solver::{
    poisson_residual, solve_poisson, solve_prescribed_curvature, solve_prescribed_curvature_from, PrescribedSolution, SolveReport, SolverConfig,
    LINEAR_TOL,
};

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::curvature;
use crate::error::Result;
use crate::field::{Domain, Rect, ScalarJetField};
use crate::sasaki::{build_normal_form, SasakianStructure};

/// Normal form generated by interpolated grid values of `P₀`, with the
/// integration baseline through the middle of the grid.
pub fn structure_from_grid(p0: &GridField) -> Result<SasakianStructure> {
    structure_on_rect(Arc::new(grid_to_field(p0)?), p0.spec().rect())
}

/// Normal form of a solved `P₀`, keeping its corner singular part exact.
pub fn structure_from_solution(sol: &PrescribedSolution) -> Result<SasakianStructure> {
    structure_on_rect(sol.p0_field()?, sol.phi.spec().rect())
}

fn structure_on_rect(p0: Arc<dyn ScalarJetField>, rect: Rect) -> Result<SasakianStructure> {
    build_normal_form(p0, Domain::Rect(rect), 0.5 * (rect.v_min + rect.v_max))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvatureCheck {
    /// `max |R − R_target|` with `R` from the tensor route.
    pub tensor: f64,
    /// Same, with `R` from `4P₀²Δ ln P₀ − 2`.
    pub tanaka_webster: f64,
    pub samples: usize,
}

/// Compares the scalar curvature of the rebuilt metric with the target at
/// sample points `(u, v)`.
pub fn rebuilt_curvature_error(
    s: &SasakianStructure,
    r_target: &dyn ScalarJetField,
    samples: &[(f64, f64)],
) -> Result<CurvatureCheck> {
    let errs: Vec<(f64, f64)> = samples
        .par_iter()
        .map(|&(u, v)| {
            let target = r_target.value(u, v)?;
            let tensor = curvature(&s, [0.0, u, v])?.scalar;
            let tw = s.scalar_curvature_tw(u, v)?;
            Ok(((tensor - target).abs(), (tw - target).abs()))
        })
        .collect::<Result<_>>()?;
    Ok(CurvatureCheck {
        tensor: errs.iter().map(|e| e.0).fold(0.0, f64::max),
        tanaka_webster: errs.iter().map(|e| e.1).fold(0.0, f64::max),
        samples: samples.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::field;
    use crate::jet::Jet;

    #[test]
    fn end_to_end_prescribed_curvature() {
        let start = std::time::Instant::now();
        let r = field(|u, v| u.sin() * v.cos());
        let spec = GridSpec::covering(Rect::square(1.0), 129).unwrap();
        let sol = solve_prescribed_curvature(&*r, spec, &*field(|u, _| Jet::zero(u.order())), &SolverConfig::default())
            .unwrap();
        let solved = start.elapsed();
        let pts = Domain::Rect(Rect::square(1.0)).random_points(100, 17);
        let s = structure_from_solution(&sol).unwrap();
        let check = rebuilt_curvature_error(&s, &*r, &pts).unwrap();
        println!("{:?} solve {:?} total {:?}", check, solved, start.elapsed());
        assert!(check.tensor <= 5e-3 && check.tanaka_webster <= 5e-3, "{check:?}");
    }

    #[test]
    fn corner_mismatch_spoils_plain_scheme() {
        let r = field(|u, v| u.sin() * v.cos());
        let spec = GridSpec::covering(Rect::square(1.0), 65).unwrap();
        let zero = field(|u, _| Jet::zero(u.order()));
        let plain = SolverConfig { corner_correction: false, ..SolverConfig::default() };
        let pts = [(0.98, 0.97), (-0.985, -0.99), (0.0, 0.0)];
        let err = |cfg: &SolverConfig| {
            let sol = solve_prescribed_curvature(&*r, spec, &*zero, cfg).unwrap();
            rebuilt_curvature_error(&structure_from_solution(&sol).unwrap(), &*r, &pts).unwrap().tensor
        };
        let (fixed, raw) = (err(&SolverConfig::default()), err(&plain));
        assert!(fixed < 2e-3 && raw > 10.0 * fixed, "{fixed} {raw}");
    }
}
