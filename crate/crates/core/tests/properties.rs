//! Property tests over randomly generated normal forms and families.

#![allow(clippy::needless_range_loop)]

use std::sync::Arc;

use proptest::prelude::*;
use sasaki_core::conformal::weyl_schouten;
use sasaki_core::curvature::{curvature, curvature_jets, einstein_divergence};
use sasaki_core::elliptic::{solve_prescribed_curvature, GridSpec, SolverConfig};
use sasaki_core::eta::{fit_eta_einstein, EtaEinsteinFamily};
use sasaki_core::field::{field, Domain, Rect, ScalarJetField};
use sasaki_core::metric::Metric;
use sasaki_core::sasaki::{build_normal_form, contact_isometry_check, HolomorphicMap, SasakianStructure};
use sasaki_core::Point;

/// `P₀ = c·exp(αu + βv)·(1 + ε sin(u + 2v))`, nowhere zero for `|ε| < 1`.
#[derive(Clone, Copy, Debug)]
struct P0Params {
    c: f64,
    alpha: f64,
    beta: f64,
    eps: f64,
}

impl P0Params {
    fn field(self) -> Arc<dyn ScalarJetField> {
        let P0Params { c, alpha, beta, eps } = self;
        field(move |u, v| ((u * alpha + v * beta).exp() * c) * ((u + v * 2.0).sin() * eps + 1.0))
    }

    fn structure(self, v0: f64) -> SasakianStructure {
        build_normal_form(self.field(), Domain::Rect(Rect::square(1.0)), v0).unwrap()
    }
}

fn p0_params() -> impl Strategy<Value = P0Params> {
    (0.3f64..2.0, -0.8f64..0.8, -0.8f64..0.8, -0.5f64..0.5).prop_map(|(c, alpha, beta, eps)| P0Params {
        c,
        alpha,
        beta,
        eps,
    })
}

fn point() -> impl Strategy<Value = Point> {
    (-3.0f64..3.0, -0.95f64..0.95, -0.95f64..0.95).prop_map(|(r, u, v)| [r, u, v])
}

/// As `W → 0` with `W ≠ 0` the family's `P₀` shrinks like `√|W|` and the
/// normal-form metric becomes too ill-conditioned to invert.
fn family_w() -> impl Strategy<Value = f64> {
    prop_oneof![-3.0f64..-0.25, Just(0.0), 0.25f64..3.0]
}

fn ricci_squared(s: &SasakianStructure, p: Point) -> f64 {
    let c = curvature(s, p).unwrap();
    let mut total = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    total += c.inverse[i][k] * c.inverse[j][l] * c.ricci[i][j] * c.ricci[k][l];
                }
            }
        }
    }
    total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn riemann_symmetries_and_r_independence(params in p0_params(), p in point()) {
        let s = params.structure(0.0);
        let rm = curvature(&s, p).unwrap().riemann_lowered;
        let scale = 1.0 + rm.iter().flatten().flatten().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let x = rm[i][j][k][l];
                        prop_assert!((x + rm[j][i][k][l]).abs() <= 1e-8 * scale);
                        prop_assert!((x + rm[i][j][l][k]).abs() <= 1e-8 * scale);
                        prop_assert!((x - rm[k][l][i][j]).abs() <= 1e-8 * scale);
                        prop_assert!((x + rm[i][k][l][j] + rm[i][l][j][k]).abs() <= 1e-8 * scale);
                    }
                }
            }
        }
        for row in s.jet(p, 1).unwrap() {
            for g in row {
                prop_assert_eq!(g.d(0), 0.0);
            }
        }
    }

    #[test]
    fn every_normal_form_is_sasakian(params in p0_params(), v0 in -0.5f64..0.5, seed in 0u64..1000) {
        let s = params.structure(v0);
        let samples = s.sample_points(100, seed);
        let report = s.verify(&samples, 1e-6).unwrap();
        prop_assert!(report.passed, "{report:?}");
        for p in samples.iter().take(10) {
            let cj = curvature_jets(&s, *p, 3).unwrap();
            prop_assert!((cj.scalar.value() - s.scalar_curvature_tw(p[1], p[2]).unwrap()).abs() <= 1e-6);
            // D(R) along the Reeb field ∂_r
            prop_assert!(cj.scalar.d(0).abs() <= 1e-10);
        }
    }

    #[test]
    fn identity_is_a_contact_isometry(params in p0_params(), seed in 0u64..1000) {
        let f = params.field();
        let id = HolomorphicMap { u: field(|u, _| u), v: field(|_, v| v) };
        let pts = Domain::Rect(Rect::square(1.0)).random_points(50, seed);
        let verdict = contact_isometry_check(&*f, &*f, &id, &pts, 1e-10).unwrap();
        prop_assert!(verdict.isometric);
        prop_assert_eq!(verdict.max_residual, 0.0);
    }

    #[test]
    fn baseline_change_preserves_invariants(params in p0_params(), v0 in -0.9f64..0.9, p in point()) {
        let (a, b) = (params.structure(0.0), params.structure(v0));
        let (ra, rb) = (curvature(&a, p).unwrap().scalar, curvature(&b, p).unwrap().scalar);
        prop_assert!((ra - rb).abs() <= 1e-8 * (1.0 + ra.abs()));
        let (qa, qb) = (ricci_squared(&a, p), ricci_squared(&b, p));
        prop_assert!((qa - qb).abs() <= 1e-8 * (1.0 + qa.abs()));
    }

    #[test]
    fn cotton_is_antisymmetric_and_traceless(params in p0_params(), p in point()) {
        let ws = weyl_schouten(&params.structure(0.0), p).unwrap();
        prop_assert!(ws.antisymmetry <= 1e-8);
        prop_assert!(ws.trace <= 1e-8);
    }

    #[test]
    fn families_are_eta_einstein(w in family_w(), seed in 0u64..1000) {
        let fam = EtaEinsteinFamily::new(w).unwrap();
        let s = fam.structure().unwrap();
        let samples = fam.sample_points(40, seed);
        let fit = fit_eta_einstein(&s, &samples, 1e-6).unwrap();
        prop_assert!(fit.eta_einstein && fit.residual <= 1e-6);
        prop_assert!((fit.a + fit.b - 2.0).abs() <= 1e-6);
        prop_assert!((fit.a - (2.0 * w - 2.0)).abs() <= 1e-6);
        for p in samples.iter().take(5) {
            prop_assert!((curvature(&s, *p).unwrap().scalar - (4.0 * w - 2.0)).abs() <= 1e-6);
            let div = einstein_divergence(&s, *p).unwrap();
            prop_assert!(div.iter().all(|d| d.abs() <= 1e-6), "{div:?}");
        }
    }

    #[test]
    fn jet_partials_match_central_differences(a in 0.2f64..1.5, b in 0.2f64..1.5, u in -0.8f64..0.8, v in -0.8f64..0.8) {
        let f = field(move |u, v| (u * a).exp() * (v * b).sin() + u * v * v + (u * v + 2.0).ln());
        let jet = f.jet(u, v, 2).unwrap();
        let val = |u: f64, v: f64| f.value(u, v).unwrap();
        let errors = |h: f64| {
            let du = (val(u + h, v) - val(u - h, v)) / (2.0 * h);
            let dv = (val(u, v + h) - val(u, v - h)) / (2.0 * h);
            let duv = (val(u + h, v + h) - val(u + h, v - h) - val(u - h, v + h) + val(u - h, v - h)) / (4.0 * h * h);
            (du - jet.d(1)).abs().max((dv - jet.d(2)).abs()).max((duv - jet.derivative([0, 1, 1])).abs())
        };
        let (coarse, fine) = (errors(2e-2), errors(1e-2));
        // second order: halving h divides the error by about four
        prop_assert!(fine <= coarse / 3.0 || fine <= 1e-9, "errors {coarse:e} -> {fine:e}");
    }

    #[test]
    fn damped_newton_merit_never_increases(k in 0.5f64..2.0, amp in 0.0f64..1.5) {
        let r = field(move |u, v| (u * k).sin() * (v * k).cos() * amp - 1.0);
        let spec = GridSpec::covering(Rect::square(1.0), 17).unwrap();
        let sol = solve_prescribed_curvature(&*r, spec, &*field(|u, _| u * 0.0), &SolverConfig::default()).unwrap();
        let m = &sol.report.merit_history;
        prop_assert!(m.windows(2).all(|w| w[1] <= w[0]), "{m:?}");
        prop_assert!(sol.phi.values().iter().all(|x| x.is_finite()));
        prop_assert!(sol.phi.values().iter().all(|x| x.exp() > 0.0));
    }
}

#[test]
fn grid_csv_round_trip_through_a_file() {
    use sasaki_core::elliptic::GridField;
    let spec = GridSpec::covering(Rect::square(1.0), 9).unwrap();
    let g = GridField::from_fn(spec, |u, v| (u - 2.0 * v).exp()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p0.csv");
    g.save(&path).unwrap();
    let back = GridField::load(&path).unwrap();
    assert_eq!(back.spec(), g.spec());
    assert_eq!(back.max_abs_diff(&g).unwrap(), 0.0);
}
