//! Weyl-Schouten (Cotton) tensor and conformal flatness.
//!
//! With `C_ij = R_ij − ¼R g_ij` a 3-metric is conformally flat iff
//! `∇_[i C_j]k = 0`. On a Sasakian structure the frame components of `C`
//! reduce to `C₀₀ = 2 − R/4` and `C₊₋ = R/4 − 1`, so flatness forces `R = 6`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::curvature_jets;
use crate::error::{Error, Result};
use crate::jet::{Jet, Point, MAX_ORDER, NVARS};
use crate::metric::{Metric, Tensor2, Tensor3};
use crate::npp::{project, spin_jets};
use crate::sasaki::SasakianStructure;

pub const FLATNESS_TOL: f64 = 1e-5;

/// Tolerance for recognising `C₀₀ = C₊₋ = ½`.
pub const ROUND_SIGNATURE_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeylSchouten {
    /// `C_ij = R_ij − ¼R g_ij`
    pub schouten: Tensor2,
    /// `cotton[i][j][k] = ∇_[i C_j]k = ½(∇_i C_jk − ∇_j C_ik)`
    pub cotton: Tensor3,
    /// `sqrt(T_ijk T^ijk)`, equal to the norm in any orthonormal frame.
    pub norm: f64,
    /// Largest `|g^jk T_ijk|`.
    pub trace: f64,
    /// Largest `|T_ijk + T_jik|`.
    pub antisymmetry: f64,
}

pub fn weyl_schouten(metric: &dyn Metric, p: Point) -> Result<WeylSchouten> {
    let c = curvature_jets(metric, p, MAX_ORDER)?;
    let sch: [[Jet; NVARS]; NVARS] = std::array::from_fn(|i| {
        std::array::from_fn(|j| c.ricci[i][j] - c.g[i][j].truncate(1) * c.scalar * 0.25)
    });
    let gam = |i: usize, j: usize, k: usize| c.gamma[i][j][k].value();
    // nabla[k][i][j] = ∇_k C_ij
    let nabla: Tensor3 = std::array::from_fn(|k| {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let mut s = sch[i][j].d(k);
                for m in 0..NVARS {
                    s -= gam(m, k, i) * sch[m][j].value() + gam(m, k, j) * sch[i][m].value();
                }
                s
            })
        })
    });
    let cotton: Tensor3 =
        std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|k| 0.5 * (nabla[i][j][k] - nabla[j][i][k]))));
    let ginv = crate::metric::values(&c.ginv);

    let mut sq = 0.0;
    for (a, b, cc) in triples() {
        for (d, e, f) in triples() {
            sq += cotton[a][b][cc] * cotton[d][e][f] * ginv[a][d] * ginv[b][e] * ginv[cc][f];
        }
    }
    let mut trace = 0.0f64;
    let mut antisymmetry = 0.0f64;
    for i in 0..NVARS {
        let mut t = 0.0;
        for j in 0..NVARS {
            for k in 0..NVARS {
                t += ginv[j][k] * cotton[i][j][k];
                antisymmetry = antisymmetry.max((cotton[i][j][k] + cotton[j][i][k]).abs());
            }
        }
        trace = trace.max(t.abs());
    }
    Ok(WeylSchouten {
        schouten: std::array::from_fn(|i| std::array::from_fn(|j| sch[i][j].value())),
        cotton,
        norm: sq.max(0.0).sqrt(),
        trace,
        antisymmetry,
    })
}

fn triples() -> impl Iterator<Item = (usize, usize, usize)> {
    (0..NVARS).flat_map(|a| (0..NVARS).flat_map(move |b| (0..NVARS).map(move |c| (a, b, c))))
}

/// `C₀₀` and `C₊₋` in the adapted frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CottonComponents {
    pub c00: f64,
    pub cpm: f64,
}

impl CottonComponents {
    pub fn max_difference(&self, other: &CottonComponents) -> f64 {
        (self.c00 - other.c00).abs().max((self.cpm - other.cpm).abs())
    }
}

/// Spin route: with `X = δτ + δ̄τ̄ − 2ττ̄`,
/// `C₀₀ = −½(X − 3)` and `C₊₋ = ½(X − 1)`.
pub fn cotton_components_sasakian(s: &SasakianStructure, p: Point) -> Result<CottonComponents> {
    let triad = s.adapted_frame(p, 2)?;
    let spin = spin_jets(s, &triad, p)?;
    let tau = spin.tau;
    let x = spin.delta(&tau).value() + spin.delta_bar(&tau.conj()).value() - tau.value() * tau.value().conj() * 2.0;
    if x.im.abs() > 1e-8 * (1.0 + x.re.abs()) {
        return Err(Error::Frame(format!("δτ + δ̄τ̄ − 2ττ̄ = {x} is not real")));
    }
    Ok(CottonComponents {
        c00: -0.5 * (x.re - 3.0),
        cpm: 0.5 * (x.re - 1.0),
    })
}

/// Tensor route: `C_ij` projected onto `e₀` and `e₊, e₋`.
pub fn cotton_components_tensor(s: &SasakianStructure, p: Point) -> Result<CottonComponents> {
    let triad = s.adapted_frame(p, 1)?;
    let c = crate::curvature::curvature(s, p)?;
    let sch: Tensor2 =
        std::array::from_fn(|i| std::array::from_fn(|j| c.ricci[i][j] - 0.25 * c.scalar * c.metric[i][j]));
    let f: [[Complex64; NVARS]; 3] =
        [triad.e_zero(), triad.e_plus(), triad.e_minus()].map(|v| v.map(|x| x.value()));
    Ok(CottonComponents {
        c00: project(&sch, &f[0], &f[0]).re,
        cpm: project(&sch, &f[1], &f[2]).re,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CottonReport {
    pub samples: usize,
    pub tolerance: f64,
    /// Largest `‖∇_[i C_j]k‖` over the samples.
    pub max_norm: f64,
    pub max_trace: f64,
    pub max_antisymmetry: f64,
    /// Components at the first sample.
    pub c00: f64,
    pub cpm: f64,
    /// Largest spread of `C₀₀`, `C₊₋` across the samples.
    pub component_spread: f64,
    /// Largest spin-route minus tensor-route component difference.
    pub route_difference: f64,
    /// `C₀₀ = C₊₋ = ½` at every sample.
    pub round_signature: bool,
    pub flat: bool,
}

pub fn conformal_flatness_check(s: &SasakianStructure, samples: &[Point], tol: f64) -> Result<CottonReport> {
    if samples.is_empty() {
        return Err(Error::Precondition("no sample points".into()));
    }
    let rows: Vec<(WeylSchouten, CottonComponents, f64)> = samples
        .par_iter()
        .map(|&p| {
            let ws = weyl_schouten(s, p)?;
            let spin = cotton_components_sasakian(s, p)?;
            let tensor = cotton_components_tensor(s, p)?;
            Ok((ws, spin, spin.max_difference(&tensor)))
        })
        .collect::<Result<_>>()?;
    let max = |f: &dyn Fn(&(WeylSchouten, CottonComponents, f64)) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let first = rows[0].1;
    let max_norm = max(&|r| r.0.norm);
    Ok(CottonReport {
        samples: samples.len(),
        tolerance: tol,
        max_norm,
        max_trace: max(&|r| r.0.trace),
        max_antisymmetry: max(&|r| r.0.antisymmetry),
        c00: first.c00,
        cpm: first.cpm,
        component_spread: max(&|r| r.1.max_difference(&first)),
        route_difference: max(&|r| r.2),
        round_signature: rows
            .iter()
            .all(|r| (r.1.c00 - 0.5).abs() <= ROUND_SIGNATURE_TOL && (r.1.cpm - 0.5).abs() <= ROUND_SIGNATURE_TOL),
        flat: max_norm <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eta::EtaEinsteinFamily;
    use crate::metric::{Euclidean, FnMetric};

    fn family_report(w: f64) -> CottonReport {
        let fam = EtaEinsteinFamily::new(w).unwrap();
        conformal_flatness_check(&fam.structure().unwrap(), &fam.sample_points(12, 5), FLATNESS_TOL).unwrap()
    }

    #[test]
    fn euclidean_is_flat() {
        let ws = weyl_schouten(&Euclidean, [0.3, -0.2, 1.0]).unwrap();
        assert!(ws.norm == 0.0);
        assert!(ws.schouten.iter().flatten().all(|x| *x == 0.0));
    }

    #[test]
    fn conformally_flat_metric_detected() {
        // e^{2(u + r²/5)} times the flat metric
        let m = FnMetric::new(|x: &[Jet; 3]| {
            let f = (x[1] * 2.0 + x[0] * x[0] * 0.4).exp();
            let z = Jet::zero(x[0].order());
            [[f, z, z], [z, f, z], [z, z, f]]
        });
        let ws = weyl_schouten(&m, [0.2, 0.1, -0.4]).unwrap();
        assert!(ws.norm < 1e-10, "{}", ws.norm);
        assert!(ws.schouten[0][0].abs() > 0.1);
    }

    #[test]
    fn round_case_is_flat_with_half_components() {
        let r = family_report(2.0);
        assert!(r.flat && r.max_norm <= 1e-5, "{r:?}");
        assert!(r.round_signature);
        assert!((r.c00 - 0.5).abs() < 1e-6 && (r.cpm - 0.5).abs() < 1e-6);
        assert!(r.route_difference < 1e-6);
    }

    #[test]
    fn nil_and_hyperbolic_are_not_flat() {
        for (w, c00, cpm) in [(0.0, 2.5, -1.5), (-2.0, 4.5, -3.5)] {
            let r = family_report(w);
            assert!(!r.flat && r.max_norm > 0.1, "{w}: {r:?}");
            assert!(!r.round_signature);
            assert!((r.c00 - c00).abs() < 1e-6 && (r.cpm - cpm).abs() < 1e-6, "{r:?}");
            assert!(r.max_trace < 1e-8 && r.max_antisymmetry < 1e-8, "{r:?}");
            assert!(r.route_difference < 1e-6);
        }
    }

    #[test]
    fn components_track_scalar_curvature() {
        let fam = EtaEinsteinFamily::new(1.0).unwrap();
        let s = fam.structure().unwrap();
        let c = cotton_components_sasakian(&s, fam.sample_points(1, 9)[0]).unwrap();
        assert!((c.c00 - 1.5).abs() < 1e-8 && (c.cpm + 0.5).abs() < 1e-8, "{c:?}");
    }

    struct SecondOrderOnly;

    impl Metric for SecondOrderOnly {
        fn jet(&self, p: Point, order: u8) -> Result<crate::metric::MetricJet> {
            Euclidean.jet(p, order.min(2))
        }
    }

    #[test]
    fn third_derivatives_required() {
        assert!(matches!(weyl_schouten(&SecondOrderOnly, [0.0; 3]), Err(Error::Capability(_))));
    }

    #[test]
    fn empty_samples_rejected() {
        let s = EtaEinsteinFamily::new(2.0).unwrap().structure().unwrap();
        assert!(conformal_flatness_check(&s, &[], FLATNESS_TOL).is_err());
    }
}
