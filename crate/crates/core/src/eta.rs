//! Sasakian structures of constant Tanaka-Webster curvature `W`, their
//! Euler-coordinate forms, and the η-Einstein condition
//! `R_ij = a g_ij + b η_i η_j`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::{curvature, CurvatureBundle};
use crate::error::{Error, Result};
use crate::field::{Domain, Rect, ScalarJetField};
use crate::jet::{Jet, Point, NVARS};
use crate::metric::{values, Metric, MetricJet, Tensor2};
use crate::sasaki::{build_normal_form, SasakianStructure};

/// Half-width of the square used for `W ≥ 0` families.
pub const PLANE_HALF_WIDTH: f64 = 4.0;
/// Distance from ±1 at which an artanh argument is rejected.
pub const ARTANH_GUARD: f64 = 1e-12;
/// Fit residual below which a structure is reported η-Einstein.
pub const ETA_EINSTEIN_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SignClass {
    Positive,
    Zero,
    Negative,
}

impl SignClass {
    pub fn of(w: f64) -> Self {
        if w > 0.0 {
            SignClass::Positive
        } else if w < 0.0 {
            SignClass::Negative
        } else {
            SignClass::Zero
        }
    }

    /// Thurston geometry of the homogeneous member of the class.
    pub fn geometry(self) -> &'static str {
        match self {
            SignClass::Positive => "S3",
            SignClass::Zero => "Nil",
            SignClass::Negative => "SL2R~",
        }
    }
}

/// Constant-`W` family with its closed-form `P₀`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EtaEinsteinFamily {
    pub w: f64,
    pub class: SignClass,
}

impl EtaEinsteinFamily {
    pub fn new(w: f64) -> Result<Self> {
        if !w.is_finite() {
            return Err(Error::Domain(format!("W = {w} is not finite")));
        }
        Ok(EtaEinsteinFamily {
            w,
            class: SignClass::of(w),
        })
    }

    pub fn a(&self) -> f64 {
        2.0 * self.w - 2.0
    }

    pub fn b(&self) -> f64 {
        4.0 - 2.0 * self.w
    }

    pub fn scalar_curvature(&self) -> f64 {
        4.0 * self.w - 2.0
    }

    pub fn domain(&self) -> Domain {
        match self.class {
            SignClass::Negative => Domain::unit_disk(),
            _ => Domain::Rect(Rect::square(PLANE_HALF_WIDTH)),
        }
    }

    pub fn p0(&self) -> Arc<dyn ScalarJetField> {
        Arc::new(FamilyP0(*self))
    }

    pub fn structure(&self) -> Result<SasakianStructure> {
        build_normal_form(self.p0(), self.domain(), 0.0)
    }

    /// `Ω₀` in the gauge vanishing on `v = 0`.
    pub fn omega0(&self, u: f64, v: f64) -> Result<f64> {
        let w = self.w;
        match self.class {
            SignClass::Zero => Ok(-SQRT_2 * v),
            SignClass::Positive => {
                let a = 1.0 + u * u;
                Ok(-(v / a + (a + v * v) / a.powf(1.5) * (v / a.sqrt()).atan()) / w.sqrt())
            }
            SignClass::Negative => {
                let b = 1.0 - u * u;
                if u * u + v * v >= 1.0 {
                    return Err(Error::Domain(format!("({u}, {v}) outside the unit disk")));
                }
                Ok(-(v / b + (b - v * v) / b.powf(1.5) * (v / b.sqrt()).atanh()) / (-w).sqrt())
            }
        }
    }

    /// Reproducible points `(r, u, v)` away from the edge of the domain:
    /// `[−2, 2]²` for `W ≥ 0`, the disk of radius 0.9 for `W < 0`.
    pub fn sample_points(&self, n: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let r = rng.gen_range(-PI..PI);
            let (u, v) = match self.class {
                SignClass::Negative => {
                    let (u, v) = (rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9));
                    if u * u + v * v >= 0.81 {
                        continue;
                    }
                    (u, v)
                }
                _ => (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
            };
            out.push([r, u, v]);
        }
        out
    }

    /// Reproducible Euler-coordinate points `(ρ, θ, φ)` whose images lie in
    /// the sampling region.
    pub fn euler_points(&self, n: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta_max = match self.class {
            SignClass::Positive => 2.0 * 2f64.atan(),
            _ => 2.0 * 0.9f64.atanh(),
        };
        (0..n)
            .map(|_| {
                [
                    rng.gen_range(-PI..PI),
                    rng.gen_range(0.05..theta_max),
                    rng.gen_range(-PI..PI),
                ]
            })
            .collect()
    }
}

struct FamilyP0(EtaEinsteinFamily);

impl ScalarJetField for FamilyP0 {
    fn jet(&self, u: f64, v: f64, order: u8) -> Result<Jet> {
        let [_, u, v] = Jet::coordinates([0.0, u, v], order);
        let zz = u * u + v * v;
        let w = self.0.w;
        Ok(match self.0.class {
            SignClass::Positive => (zz + 1.0) * (0.5 * w.sqrt()),
            SignClass::Zero => Jet::constant(FRAC_1_SQRT_2, order),
            SignClass::Negative => (1.0 - zz) * (0.5 * (-w).sqrt()),
        })
    }
}

/// Closed-form family structure for the given `W`.
pub fn family_structure(w: f64) -> Result<SasakianStructure> {
    EtaEinsteinFamily::new(w)?.structure()
}

fn euler_class(w: f64, class: SignClass) -> Result<()> {
    if w == 0.0 || class == SignClass::Zero {
        return Err(Error::Domain("Euler coordinates need W != 0".into()));
    }
    if SignClass::of(w) != class {
        return Err(Error::Domain(format!("W = {w} is not in the {class:?} class")));
    }
    Ok(())
}

/// `(r, u, v)` as jets in `(ρ, θ, φ)`.
pub fn euler_transform_jet(w: f64, class: SignClass, x: &[Jet; NVARS]) -> Result<[Jet; NVARS]> {
    euler_class(w, class)?;
    let [rho, theta, phi] = *x;
    let (c, s) = (phi.cos(), phi.sin());
    let half = theta * 0.5;
    match class {
        SignClass::Positive => {
            if !(theta.value() > 0.0 && theta.value() < PI) {
                return Err(Error::Domain(format!("theta = {} outside (0, pi)", theta.value())));
            }
            let t = half.tan();
            let q = (c * c * t * t + 1.0).sqrt();
            let r = (rho + phi) / w - (c * t * 2.0) / (q * w) * (s * t / q).atan();
            Ok([r, c * t, s * t])
        }
        _ => {
            let t = half.tanh();
            let q = (1.0 - c * c * t * t).sqrt();
            let arg = s * t / q;
            if !(arg.value().abs() < 1.0 - ARTANH_GUARD) {
                return Err(Error::Domain(format!("artanh argument {} not in (-1, 1)", arg.value())));
            }
            let r = (rho + phi) / w + (c * t * 2.0) / (q * w) * arg.atanh();
            Ok([r, c * t, s * t])
        }
    }
}

pub fn euler_transform(w: f64, class: SignClass, rho: f64, theta: f64, phi: f64) -> Result<Point> {
    let x = Jet::coordinates([rho, theta, phi], 0);
    Ok(euler_transform_jet(w, class, &x)?.map(|j| j.value()))
}

/// `(1/2W)[dθ² + sin²θ dφ² + (2/W)(dρ + cos θ dφ)²]` and its hyperbolic
/// analogue, in coordinates `(ρ, θ, φ)`.
#[derive(Clone, Copy, Debug)]
pub struct EulerMetric {
    pub w: f64,
    pub class: SignClass,
}

impl EulerMetric {
    pub fn new(w: f64, class: SignClass) -> Result<Self> {
        euler_class(w, class)?;
        Ok(EulerMetric { w, class })
    }

    /// `α = (1/W)(dρ + cos θ dφ)` (resp. `cosh θ`).
    pub fn contact_form(&self, theta: f64) -> [f64; NVARS] {
        let c = match self.class {
            SignClass::Positive => theta.cos(),
            _ => theta.cosh(),
        };
        [1.0 / self.w, 0.0, c / self.w]
    }
}

impl Metric for EulerMetric {
    fn jet(&self, p: Point, order: u8) -> Result<MetricJet> {
        let [_, theta, _] = Jet::coordinates(p, order);
        let w = self.w;
        let (s, c) = match self.class {
            SignClass::Positive => (theta.sin(), theta.cos()),
            _ => (theta.sinh(), theta.cosh()),
        };
        if s.value().abs() < 1e-12 {
            return Err(Error::DegenerateMetric {
                at: p,
                det: s.value() * s.value(),
            });
        }
        let k = 1.0 / (w * w);
        let zero = Jet::zero(order);
        // the leading sign flips with the class; the fibre term never does
        let base = 1.0 / (2.0 * w.abs());
        let g_rr = Jet::constant(k, order);
        let g_tt = Jet::constant(base, order);
        let g_rp = c * k;
        let g_pp = s * s * base + c * c * k;
        Ok([[g_rr, zero, g_rp], [zero, g_tt, zero], [g_rp, zero, g_pp]])
    }

    fn coordinate_labels(&self) -> [&'static str; NVARS] {
        ["rho", "theta", "phi"]
    }
}

/// Residuals of the Euler-coordinate forms against the normal form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PullbackResidual {
    /// `max |(Φ*g)_αβ − g^E_αβ|`
    pub metric: f64,
    /// `max |(Φ*η)_α − α_α|`
    pub contact: f64,
}

/// Pulls the normal-form metric and contact form back through the Euler
/// transform at `(ρ, θ, φ)` and compares with the displayed forms.
pub fn euler_pullback_residual(s: &SasakianStructure, w: f64, class: SignClass, x: Point) -> Result<PullbackResidual> {
    let euler = EulerMetric::new(w, class)?;
    let y = euler_transform_jet(w, class, &Jet::coordinates(x, 1))?;
    let p = y.map(|j| j.value());
    let jac: [[f64; 3]; 3] = std::array::from_fn(|a| std::array::from_fn(|al| y[a].d(al)));
    let g = values(&s.jet(p, 0)?);
    let eta = s.contact_form(p, 0)?.map(|j| j.value());
    let ge = values(&euler.jet(x, 0)?);
    let alpha = euler.contact_form(x[1]);
    let mut metric = 0.0f64;
    let mut contact = 0.0f64;
    for al in 0..3 {
        let pulled: f64 = (0..3).map(|a| eta[a] * jac[a][al]).sum();
        contact = contact.max((pulled - alpha[al]).abs());
        for be in 0..3 {
            let mut sum = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    sum += jac[a][al] * g[a][b] * jac[b][be];
                }
            }
            metric = metric.max((sum - ge[al][be]).abs());
        }
    }
    Ok(PullbackResidual { metric, contact })
}

fn contract(ginv: &Tensor2, a: &Tensor2, b: &Tensor2) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    s += ginv[i][k] * ginv[j][l] * a[i][j] * b[k][l];
                }
            }
        }
    }
    s
}

fn eta_tensor(eta: &[f64; 3]) -> Tensor2 {
    std::array::from_fn(|i| std::array::from_fn(|j| eta[i] * eta[j]))
}

fn residual_at(c: &CurvatureBundle, eta: &[f64; 3], a: f64, b: f64) -> f64 {
    let t: Tensor2 =
        std::array::from_fn(|i| std::array::from_fn(|j| c.ricci[i][j] - a * c.metric[i][j] - b * eta[i] * eta[j]));
    contract(&c.inverse, &t, &t).max(0.0).sqrt()
}

fn sample_curvature(s: &SasakianStructure, p: Point) -> Result<(CurvatureBundle, [f64; 3])> {
    let c = curvature(s, p)?;
    let eta = s.contact_form(p, 0)?.map(|j| j.value());
    Ok((c, eta))
}

/// `max ‖R_ij − a g_ij − b η_i η_j‖` over the samples, in the norm induced
/// by the metric (equivalently, over an orthonormal frame).
pub fn eta_einstein_residual(s: &SasakianStructure, a: f64, b: f64, samples: &[Point]) -> Result<f64> {
    let r: Vec<f64> = samples
        .par_iter()
        .map(|&p| {
            let (c, eta) = sample_curvature(s, p)?;
            Ok(residual_at(&c, &eta, a, b))
        })
        .collect::<Result<_>>()?;
    Ok(r.into_iter().fold(0.0, f64::max))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EtaFit {
    pub a: f64,
    pub b: f64,
    pub residual: f64,
    pub eta_einstein: bool,
}

/// Least-squares `(a, b)` over the samples, with the residual of the fit.
pub fn fit_eta_einstein(s: &SasakianStructure, samples: &[Point], tol: f64) -> Result<EtaFit> {
    let mut distinct: Vec<Point> = Vec::with_capacity(samples.len());
    for p in samples {
        if !distinct.contains(p) {
            distinct.push(*p);
        }
    }
    if distinct.len() < 2 {
        return Err(Error::Precondition(format!(
            "need at least 2 distinct samples, got {}",
            distinct.len()
        )));
    }
    let data: Vec<(CurvatureBundle, [f64; 3])> = distinct
        .par_iter()
        .map(|&p| sample_curvature(s, p))
        .collect::<Result<_>>()?;
    let (mut n, mut rhs) = ([[0.0f64; 2]; 2], [0.0f64; 2]);
    for (c, eta) in &data {
        let ee = eta_tensor(eta);
        let basis = [&c.metric, &ee];
        for i in 0..2 {
            rhs[i] += contract(&c.inverse, basis[i], &c.ricci);
            for j in 0..2 {
                n[i][j] += contract(&c.inverse, basis[i], basis[j]);
            }
        }
    }
    let det = n[0][0] * n[1][1] - n[0][1] * n[1][0];
    let scale = (n[0][0] + n[1][1]).powi(2);
    if !(det.abs() > 1e-12 * scale) {
        return Err(Error::RankDeficient(format!(
            "normal equations determinant {det:e} relative to {scale:e}"
        )));
    }
    let a = (rhs[0] * n[1][1] - rhs[1] * n[0][1]) / det;
    let b = (n[0][0] * rhs[1] - n[1][0] * rhs[0]) / det;
    let residual = data
        .iter()
        .map(|(c, eta)| residual_at(c, eta, a, b))
        .fold(0.0, f64::max);
    Ok(EtaFit {
        a,
        b,
        residual,
        eta_einstein: residual <= tol,
    })
}

/// Sign of `R = 4W − 2` for a constant-`W` structure.
pub fn scalar_curvature_sign(w: f64) -> std::cmp::Ordering {
    (4.0 * w - 2.0).total_cmp(&0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{R, U, V};
    use std::cmp::Ordering;

    #[test]
    fn invariants_of_the_constants() {
        for w in [-3.0, -0.5, 0.0, 0.5, 2.0] {
            let f = EtaEinsteinFamily::new(w).unwrap();
            assert_eq!(f.a() + f.b(), 2.0);
            assert_eq!(f.scalar_curvature(), 3.0 * f.a() + f.b());
        }
        assert_eq!(EtaEinsteinFamily::new(2.0).unwrap().b(), 0.0);
    }

    #[test]
    fn families_have_expected_scalar_curvature() {
        for w in [-2.0, 0.0, 1.0, 2.0] {
            let f = EtaEinsteinFamily::new(w).unwrap();
            let s = f.structure().unwrap();
            for p in f.sample_points(3, 11) {
                let r = curvature(&s, p).unwrap().scalar;
                assert!((r - (4.0 * w - 2.0)).abs() < 1e-8, "W={w}: {r}");
            }
        }
    }

    #[test]
    fn disk_family_rejects_outside_points() {
        let s = family_structure(-1.0).unwrap();
        assert!(matches!(s.jet([0.0, 0.9, 0.9], 1), Err(Error::Domain(_))));
    }

    #[test]
    fn closed_form_omega_matches_quadrature() {
        for w in [-2.0, 0.0, 0.5, 3.0] {
            let f = EtaEinsteinFamily::new(w).unwrap();
            let s = f.structure().unwrap();
            for p in f.sample_points(4, 5) {
                let (u, v) = (p[U], p[V]);
                let q = s.omega0(u, v).unwrap();
                assert!((q - f.omega0(u, v).unwrap()).abs() < 1e-9, "W={w} at ({u},{v})");
            }
        }
    }

    #[test]
    fn euler_transform_examples() {
        let p = euler_transform(2.0, SignClass::Positive, 0.3, 1e-9, 0.4).unwrap();
        assert!((p[R] - 0.35).abs() < 1e-8 && p[U].abs() < 1e-8 && p[V].abs() < 1e-8);
        let p = euler_transform(1.0, SignClass::Positive, 0.0, PI / 2.0, 0.0).unwrap();
        assert!((p[U] - 1.0).abs() < 1e-15 && p[V].abs() < 1e-15);
        let p = euler_transform(-1.0, SignClass::Negative, 0.0, 1.0, PI / 2.0).unwrap();
        assert!(p[U].abs() < 1e-15 && (p[V] - 0.5f64.tanh()).abs() < 1e-15);
        assert!(euler_transform(0.0, SignClass::Zero, 0.0, 1.0, 0.0).is_err());
        assert!(euler_transform(1.0, SignClass::Negative, 0.0, 1.0, 0.0).is_err());
        assert!(euler_transform(1.0, SignClass::Positive, 0.0, 3.5, 0.0).is_err());
    }

    #[test]
    fn euler_metric_at_equator() {
        let g = values(&EulerMetric::new(2.0, SignClass::Positive).unwrap().jet([0.0, PI / 2.0, 0.0], 0).unwrap());
        for (i, row) in g.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                let want = if i == j { 0.25 } else { 0.0 };
                assert!((x - want).abs() < 1e-15);
            }
        }
        let m = EulerMetric::new(2.0, SignClass::Positive).unwrap();
        assert!(matches!(m.jet([0.0, 0.0, 0.0], 0), Err(Error::DegenerateMetric { .. })));
    }

    #[test]
    fn euler_pullback_matches() {
        for w in [-2.0, -0.5, 1.0, 2.0, 3.0] {
            let f = EtaEinsteinFamily::new(w).unwrap();
            let s = f.structure().unwrap();
            for x in f.euler_points(5, 3) {
                let r = euler_pullback_residual(&s, w, f.class, x).unwrap();
                assert!(r.metric < 1e-8 && r.contact < 1e-8, "W={w} at {x:?}: {r:?}");
            }
        }
    }

    #[test]
    fn euler_metric_curvature() {
        let m = EulerMetric::new(-2.0, SignClass::Negative).unwrap();
        let r = curvature(&m, [0.1, 0.7, 0.2]).unwrap().scalar;
        assert!((r + 10.0).abs() < 1e-10);
    }

    #[test]
    fn residual_examples() {
        let nil = family_structure(0.0).unwrap();
        let pts = [[0.0, 0.1, 0.2], [0.5, -0.3, 1.1]];
        assert!(eta_einstein_residual(&nil, -2.0, 4.0, &pts).unwrap() < 1e-8);
        assert!(eta_einstein_residual(&nil, 0.0, 0.0, &pts).unwrap() > 1.0);
        let round = family_structure(2.0).unwrap();
        assert!(eta_einstein_residual(&round, 2.0, 0.0, &pts).unwrap() < 1e-8);
    }

    #[test]
    fn fits() {
        let pts = [[0.0, 0.1, 0.2], [0.5, -0.3, 0.4], [1.0, 0.6, -0.2]];
        let f = fit_eta_einstein(&family_structure(2.0).unwrap(), &pts, ETA_EINSTEIN_TOL).unwrap();
        assert!((f.a - 2.0).abs() < 1e-8 && f.b.abs() < 1e-8 && f.eta_einstein);
        let f = fit_eta_einstein(&family_structure(0.0).unwrap(), &pts, ETA_EINSTEIN_TOL).unwrap();
        assert!((f.a + 2.0).abs() < 1e-8 && (f.b - 4.0).abs() < 1e-8);

        let g = build_normal_form(crate::field::field(|u, _| (u * u).exp()), Domain::Rect(Rect::square(1.0)), 0.0)
            .unwrap();
        let f = fit_eta_einstein(&g, &pts, ETA_EINSTEIN_TOL).unwrap();
        assert!(!f.eta_einstein, "{f:?}");

        assert!(matches!(
            fit_eta_einstein(&g, &[pts[0], pts[0]], ETA_EINSTEIN_TOL),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn sign_table() {
        assert_eq!(scalar_curvature_sign(0.4), Ordering::Less);
        assert_eq!(scalar_curvature_sign(0.5), Ordering::Equal);
        assert_eq!(scalar_curvature_sign(0.6), Ordering::Greater);
        assert_eq!(scalar_curvature_sign(0.0), Ordering::Less);
        assert_eq!(scalar_curvature_sign(-1.0), Ordering::Less);
    }
}
