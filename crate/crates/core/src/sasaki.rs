//! Local normal form of a Sasakian 3-manifold built from a nowhere-zero
//! function `P₀(u, v)`:
//!
//! ```text
//! ds² = (dr + A du)² + (du² + dv²) / (2P₀²),   A(u, v) = ∫_{v₀}^{v} P₀(u, s)⁻² ds
//! ```
//!
//! with Reeb field `∂/∂r` and contact form `η = dr + A du`. The integration
//! constant in `A` (equivalently in `Ω₀ = −P₀ A`) is fixed to vanish on the
//! baseline `v = v₀`; any other choice differs by a relabelling of `r`.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::{curvature, killing_residual};
use crate::error::{Error, Result};
use crate::field::{Domain, ScalarJetField};
use crate::jet::{CJet, Jet, Point, R, U, V};
use crate::metric::{inner, ConstantVectorField, Metric, MetricJet, VectorField};
use crate::npp::{spin_coefficients, Triad};
use crate::quadrature::adaptive_simpson;

/// Absolute quadrature tolerance for `A` and its derivatives.
pub const A_QUAD_TOL: f64 = 1e-10;
/// Tightened tolerance used when third derivatives are requested.
pub const A_QUAD_TOL_THIRD_ORDER: f64 = 1e-12;
/// Side of the lattice scanned for zeros of `P₀` when building.
pub const ZERO_SCAN_RESOLUTION: usize = 64;
/// Cauchy-Riemann tolerance for maps handed to [`contact_isometry_check`].
pub const HOLOMORPHIC_TOL: f64 = 1e-10;

/// Jet of `A(u, v) = ∫_{v₀}^{v} P₀(u, s)⁻² ds`.
///
/// `v`-derivatives come straight from the integrand (`∂A/∂v = P₀⁻²`); pure
/// `u`-derivatives are obtained by differentiating under the integral sign
/// and integrating the jet coefficients with adaptive Simpson quadrature.
pub fn integral_a(p0: &dyn ScalarJetField, u: f64, v: f64, v0: f64, order: u8, tol: f64) -> Result<Jet> {
    let pure_u = |s: f64| -> Result<[f64; 4]> {
        let w = p0.jet(u, s, order)?.recip().square();
        Ok(std::array::from_fn(|k| w.taylor([0, k as u8, 0])))
    };
    let integrals = adaptive_simpson(&pure_u, v0, v, tol)?;
    let mut a = Jet::zero(order);
    a.set_taylor([0, 0, 0], integrals[0]);
    if order == 0 {
        return Ok(a);
    }
    let w = p0.jet(u, v, order)?.recip().square();
    for total in 1..=order {
        for j in 0..=total {
            let i = total - j;
            let coeff = if j == 0 {
                integrals[i as usize]
            } else {
                w.taylor([0, i, j - 1]) / f64::from(j)
            };
            a.set_taylor([0, i, j], coeff);
        }
    }
    Ok(a)
}

/// `Ω₀ = −P₀ ∫_{v₀}^{v} P₀⁻² ds`, the solution of `P₀² ∂_v(Ω₀/P₀) = −1`
/// that vanishes on the baseline.
pub fn omega0(p0: &dyn ScalarJetField, u: f64, v: f64, v0: f64) -> Result<f64> {
    let a = integral_a(p0, u, v, v0, 0, A_QUAD_TOL)?;
    Ok(-p0.value(u, v)? * a.value())
}

/// `τ₀ = 2∂P₀/∂z − iΩ₀` from first-order jets of `P₀` and a real `Ω₀`.
pub fn compute_tau0(p0: &Jet, omega0: &Jet) -> CJet {
    let i = Complex64::i();
    let p0u = p0.partial(U).to_complex();
    let p0v = p0.partial(V).to_complex();
    let om = omega0.truncate(p0u.order()).to_complex();
    p0u - (p0v + om) * i
}

/// Scalar curvature of the normal form, `R = 4P₀² Δ ln|P₀| − 2`.
pub fn scalar_curvature_tw(p0: &dyn ScalarJetField, u: f64, v: f64) -> Result<f64> {
    let p = p0.jet(u, v, 2)?;
    if p.value() == 0.0 {
        return Err(Error::Domain(format!("P0 vanishes at ({u}, {v})")));
    }
    let phi = p.abs().ln();
    let lap = phi.derivative([0, 2, 0]) + phi.derivative([0, 0, 2]);
    Ok(4.0 * p.value() * p.value() * lap - 2.0)
}

/// Tanaka-Webster curvature `W = (R + 2)/4`.
pub fn tanaka_webster(scalar_curvature: f64) -> f64 {
    (scalar_curvature + 2.0) / 4.0
}

/// Complex-valued field over `(u, v)`.
pub trait ComplexJetField: Send + Sync {
    fn cjet(&self, u: f64, v: f64, order: u8) -> Result<CJet>;
}

/// Complex field given by real and imaginary parts.
pub struct SplitComplexField<A, B> {
    pub re: A,
    pub im: B,
}

impl<A: ScalarJetField, B: ScalarJetField> ComplexJetField for SplitComplexField<A, B> {
    fn cjet(&self, u: f64, v: f64, order: u8) -> Result<CJet> {
        let re = self.re.jet(u, v, order)?.to_complex();
        let im = self.im.jet(u, v, order)?.to_complex();
        Ok(re + im * Complex64::i())
    }
}

/// Residuals of the reduced system at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReducedResidual {
    /// `2P₀[∂_z̄τ₀ + ∂_z τ̄₀] + (Ω₀τ₀ − Ω̄₀τ̄₀)i − (2τ₀τ̄₀ − 1 + ½R)`, real by construction.
    pub scalar: f64,
    /// `2P₀[∂_z̄Ω̄₀ − ∂_zΩ₀] + 2Ω₀Ω̄₀ i − (τ̄₀Ω̄₀ − τ₀Ω₀ − 2i)`
    pub connection: Complex64,
    /// `2∂_z̄P₀ − (τ̄₀ − Ω₀ i)`
    pub frame: Complex64,
}

impl ReducedResidual {
    pub fn max_norm(&self) -> f64 {
        self.scalar.abs().max(self.connection.norm()).max(self.frame.norm())
    }
}

fn d_z(f: &CJet) -> Complex64 {
    (f.d(U) - f.d(V) * Complex64::i()) * 0.5
}

fn d_zbar(f: &CJet) -> Complex64 {
    (f.d(U) + f.d(V) * Complex64::i()) * 0.5
}

pub fn reduced_system_residual(
    p0: &dyn ScalarJetField,
    omega0: &dyn ScalarJetField,
    tau0: &dyn ComplexJetField,
    scalar_curvature: &dyn ScalarJetField,
    u: f64,
    v: f64,
) -> Result<ReducedResidual> {
    let i = Complex64::i();
    let p = p0.jet(u, v, 1)?.to_complex();
    let om = omega0.jet(u, v, 1)?.to_complex();
    let tau = tau0.cjet(u, v, 1)?;
    let r = scalar_curvature.value(u, v)?;
    let (pv, omv, tv) = (p.value(), om.value(), tau.value());
    let scalar = pv * 2.0 * (d_zbar(&tau) + d_z(&tau.conj())) + (omv * tv - omv.conj() * tv.conj()) * i
        - (tv * tv.conj() * 2.0 - 1.0 + 0.5 * r);
    let connection = pv * 2.0 * (d_zbar(&om.conj()) - d_z(&om)) + omv * omv.conj() * 2.0 * i
        - (tv.conj() * omv.conj() - tv * omv - 2.0 * i);
    let frame = d_zbar(&p) * 2.0 - (tv.conj() - omv * i);
    Ok(ReducedResidual {
        scalar: scalar.re,
        connection,
        frame,
    })
}

/// Sasakian normal form generated by `P₀`.
#[derive(Clone)]
pub struct SasakianStructure {
    p0: Arc<dyn ScalarJetField>,
    domain: Domain,
    v0: f64,
}

impl std::fmt::Debug for SasakianStructure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SasakianStructure")
            .field("domain", &self.domain)
            .field("v0", &self.v0)
            .finish_non_exhaustive()
    }
}

/// Builds the normal form, checking (heuristically, on a 64×64 lattice)
/// that `P₀` has no zero on the domain.
pub fn build_normal_form(p0: Arc<dyn ScalarJetField>, domain: Domain, v0: f64) -> Result<SasakianStructure> {
    let b = domain.bounding_rect();
    if !(v0 >= b.v_min && v0 <= b.v_max) {
        return Err(Error::Domain(format!(
            "baseline v0 = {v0} outside [{}, {}]",
            b.v_min, b.v_max
        )));
    }
    let mut sign = 0.0f64;
    for (u, v) in domain.lattice(ZERO_SCAN_RESOLUTION) {
        let x = p0.value(u, v)?;
        if x == 0.0 || (sign != 0.0 && x.signum() != sign) {
            return Err(Error::Domain(format!("P0 vanishes near ({u}, {v})")));
        }
        sign = x.signum();
    }
    Ok(SasakianStructure { p0, domain, v0 })
}

impl SasakianStructure {
    pub fn p0(&self) -> &Arc<dyn ScalarJetField> {
        &self.p0
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    fn check(&self, u: f64, v: f64) -> Result<()> {
        if !self.domain.contains(u, v) {
            return Err(Error::Domain(format!("({u}, {v}) outside {:?}", self.domain)));
        }
        if !self.domain.contains(u, self.v0) {
            return Err(Error::Domain(format!(
                "integration baseline ({u}, {}) outside {:?}",
                self.v0, self.domain
            )));
        }
        Ok(())
    }

    pub fn p0_jet(&self, u: f64, v: f64, order: u8) -> Result<Jet> {
        self.check(u, v)?;
        self.p0.jet(u, v, order)
    }

    pub fn a_jet(&self, u: f64, v: f64, order: u8) -> Result<Jet> {
        self.check(u, v)?;
        let tol = if order >= 3 {
            A_QUAD_TOL_THIRD_ORDER
        } else {
            A_QUAD_TOL
        };
        integral_a(&*self.p0, u, v, self.v0, order, tol)
    }

    pub fn omega0_jet(&self, u: f64, v: f64, order: u8) -> Result<Jet> {
        Ok(-(self.p0_jet(u, v, order)? * self.a_jet(u, v, order)?))
    }

    pub fn omega0(&self, u: f64, v: f64) -> Result<f64> {
        Ok(self.omega0_jet(u, v, 0)?.value())
    }

    /// `τ₀` as a jet of order `order ≤ 2`.
    pub fn tau0_jet(&self, u: f64, v: f64, order: u8) -> Result<CJet> {
        let p = self.p0_jet(u, v, order + 1)?;
        let om = self.omega0_jet(u, v, order)?;
        Ok(compute_tau0(&p, &om))
    }

    pub fn tau0(&self, u: f64, v: f64) -> Result<Complex64> {
        Ok(self.tau0_jet(u, v, 0)?.value())
    }

    pub fn scalar_curvature_tw(&self, u: f64, v: f64) -> Result<f64> {
        self.check(u, v)?;
        scalar_curvature_tw(&*self.p0, u, v)
    }

    /// Residual of `P₀² ∂_v(Ω₀/P₀) = −1`.
    pub fn omega0_residual(&self, u: f64, v: f64) -> Result<f64> {
        let p = self.p0_jet(u, v, 1)?;
        let ratio = self.omega0_jet(u, v, 1)? / p;
        Ok(p.value() * p.value() * ratio.d(V) + 1.0)
    }

    /// Reduced-system residuals with `Ω₀`, `τ₀` and `R` all derived from `P₀`.
    pub fn reduced_residual(&self, u: f64, v: f64) -> Result<ReducedResidual> {
        struct Omega<'a>(&'a SasakianStructure);
        impl ScalarJetField for Omega<'_> {
            fn jet(&self, u: f64, v: f64, order: u8) -> Result<Jet> {
                self.0.omega0_jet(u, v, order)
            }
        }
        struct Tau<'a>(&'a SasakianStructure);
        impl ComplexJetField for Tau<'_> {
            fn cjet(&self, u: f64, v: f64, order: u8) -> Result<CJet> {
                self.0.tau0_jet(u, v, order)
            }
        }
        struct Curv<'a>(&'a SasakianStructure);
        impl ScalarJetField for Curv<'_> {
            fn jet(&self, u: f64, v: f64, order: u8) -> Result<Jet> {
                Ok(Jet::constant(self.0.scalar_curvature_tw(u, v)?, order))
            }
        }
        self.check(u, v)?;
        reduced_system_residual(&*self.p0, &Omega(self), &Tau(self), &Curv(self), u, v)
    }

    /// Contact form `η = dr + A du` as component jets.
    pub fn contact_form(&self, p: Point, order: u8) -> Result<[Jet; 3]> {
        let a = self.a_jet(p[U], p[V], order)?;
        Ok([Jet::constant(1.0, order), a, Jet::zero(order)])
    }

    /// Reeb field `∂/∂r`.
    pub fn reeb(&self) -> ConstantVectorField {
        ConstantVectorField([1.0, 0.0, 0.0])
    }

    /// Frame dual to `θ⁰ = dr + A du`, `θ¹ = du/(√2P₀)`, `θ² = −dv/(√2P₀)`,
    /// with `e₊` carrying the phase `e^{−ir}`. The sign of `e₂` orients the
    /// frame so that `ρ = +i` and `e₊ = e^{−ir} P₀(∂_u + i∂_v − A∂_r)`.
    pub fn adapted_frame(&self, p: Point, order: u8) -> Result<Triad> {
        let pp = self.p0_jet(p[U], p[V], order)?;
        let a = self.a_jet(p[U], p[V], order)?;
        let s = pp * SQRT_2;
        let (one, zero) = (Jet::constant(1.0, order), Jet::zero(order));
        Ok(Triad::new([one, zero, zero], [-(s * a), s, zero], [zero, zero, -s])
            .with_phase(Jet::variable(R, p[R], order)))
    }

    /// Reproducible points `(r, u, v)` with `(u, v)` uniform on the domain
    /// and `r ∈ [−π, π)`.
    pub fn sample_points(&self, n: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(!seed);
        let mut out = Vec::with_capacity(n);
        let mut batch = 0;
        while out.len() < n {
            for (u, v) in self.domain.random_points(n, seed.wrapping_add(batch)) {
                let r = rng.gen_range(-PI..PI);
                if out.len() < n && self.domain.contains(u, self.v0) {
                    out.push([r, u, v]);
                }
            }
            batch += 1;
            if batch > 64 && out.is_empty() {
                break;
            }
        }
        out
    }

    /// Checks the Sasakian characterization at `(r, u, v)` sample points.
    pub fn verify(&self, samples: &[Point], tol: f64) -> Result<SasakianReport> {
        verify_sasakian(self, &self.reeb(), &|p| self.adapted_frame(p, 2), samples, tol)
    }
}

impl Metric for SasakianStructure {
    fn jet(&self, p: Point, order: u8) -> Result<MetricJet> {
        let a = self.a_jet(p[U], p[V], order)?;
        let pp = self.p0_jet(p[U], p[V], order)?;
        let h = (pp.square() * 2.0).recip();
        let (one, zero) = (Jet::constant(1.0, order), Jet::zero(order));
        Ok([[one, a, zero], [a, a * a + h, zero], [zero, zero, h]])
    }
}

/// Maximum residuals of the Sasakian characterization over a sample set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SasakianReport {
    pub samples: usize,
    pub tolerance: f64,
    /// `max |∇_(i e₀_j)|`
    pub killing: f64,
    /// `max |g(e₀, e₀) − 1|`
    pub unit_length: f64,
    /// `max |κ|`; also the geodesic condition
    pub kappa: f64,
    /// `max |σ|` (shear)
    pub sigma: f64,
    /// `max |ε|` (frame gauge)
    pub epsilon: f64,
    /// `max |Re ρ|`
    pub divergence: f64,
    /// `max |Im ρ − 1|`
    pub twist: f64,
    /// `max ‖R(X, e₀)Y − g(e₀, Y)X + g(X, Y)e₀‖` over frame pairs
    pub sasaki_condition: f64,
    pub passed: bool,
}

impl SasakianReport {
    pub fn worst(&self) -> f64 {
        [
            self.killing,
            self.unit_length,
            self.kappa,
            self.sigma,
            self.epsilon,
            self.divergence,
            self.twist,
            self.sasaki_condition,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Sasakian characterization for an arbitrary metric, Reeb candidate and
/// frame provider (the frame's `e₀` must be the Reeb candidate).
pub fn verify_sasakian(
    metric: &dyn Metric,
    reeb: &dyn VectorField,
    frame: &(dyn Fn(Point) -> Result<Triad> + Sync),
    samples: &[Point],
    tol: f64,
) -> Result<SasakianReport> {
    let per_point = |p: &Point| -> Result<[f64; 8]> {
        let p = *p;
        let triad = frame(p)?;
        let spin = spin_coefficients(metric, &triad, p)?;
        let killing = killing_residual(metric, reeb, p)?
            .iter()
            .flatten()
            .fold(0.0f64, |m, x| m.max(x.abs()));
        let curv = curvature(metric, p)?;
        let g = &curv.metric;
        let basis = triad.real_vectors();
        let e0 = basis[0];
        let mut sas = 0.0f64;
        for x in &basis {
            for y in &basis {
                let lhs = curv.endomorphism(x, &e0, y);
                let (a, b) = (inner(g, &e0, y), inner(g, x, y));
                let w: [f64; 3] = std::array::from_fn(|i| lhs[i] - (a * x[i] - b * e0[i]));
                sas = sas.max(inner(g, &w, &w).sqrt());
            }
        }
        Ok([
            killing,
            (inner(g, &e0, &e0) - 1.0).abs(),
            spin.kappa.norm(),
            spin.sigma.norm(),
            spin.epsilon.norm(),
            spin.rho.re.abs(),
            (spin.rho.im - 1.0).abs(),
            sas,
        ])
    };
    let rows: Vec<[f64; 8]> = samples.par_iter().map(per_point).collect::<Result<_>>()?;
    let mut m = [0.0f64; 8];
    for row in &rows {
        for (acc, x) in m.iter_mut().zip(row) {
            *acc = acc.max(*x);
        }
    }
    let mut report = SasakianReport {
        samples: samples.len(),
        tolerance: tol,
        killing: m[0],
        unit_length: m[1],
        kappa: m[2],
        sigma: m[3],
        epsilon: m[4],
        divergence: m[5],
        twist: m[6],
        sasaki_condition: m[7],
        passed: false,
    };
    report.passed = report.worst() <= tol;
    Ok(report)
}

/// Holomorphic change of coordinates `z = z(w)`, given by its real and
/// imaginary parts as functions of `w = ũ + iṽ`.
#[derive(Clone)]
pub struct HolomorphicMap {
    pub u: Arc<dyn ScalarJetField>,
    pub v: Arc<dyn ScalarJetField>,
}

impl HolomorphicMap {
    /// `(z(w), dz/dw, Cauchy-Riemann residual)`.
    pub fn eval(&self, wu: f64, wv: f64) -> Result<(Complex64, Complex64, f64)> {
        let (u, v) = (self.u.jet(wu, wv, 1)?, self.v.jet(wu, wv, 1)?);
        let cr = (u.d(U) - v.d(V)).abs().max((u.d(V) + v.d(U)).abs());
        Ok((
            Complex64::new(u.value(), v.value()),
            Complex64::new(u.d(U), v.d(U)),
            cr,
        ))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IsometryVerdict {
    pub isometric: bool,
    pub max_residual: f64,
    pub samples: usize,
}

/// Criterion `P̃₀(w)² |dz/dw|² = P₀(z(w))²` for contact isometry, checked
/// at sample points `w`.
pub fn contact_isometry_check(
    p0: &dyn ScalarJetField,
    p0_tilde: &dyn ScalarJetField,
    map: &HolomorphicMap,
    samples: &[(f64, f64)],
    tol: f64,
) -> Result<IsometryVerdict> {
    let mut worst = 0.0f64;
    for &(wu, wv) in samples {
        let (z, dz, cr) = map.eval(wu, wv)?;
        if cr > HOLOMORPHIC_TOL {
            return Err(Error::Precondition(format!(
                "map is not holomorphic at w = ({wu}, {wv}): Cauchy-Riemann residual {cr:e}"
            )));
        }
        let pt = p0_tilde.value(wu, wv)?;
        let pz = p0.value(z.re, z.im)?;
        worst = worst.max((pt * pt * dz.norm_sqr() - pz * pz).abs());
    }
    Ok(IsometryVerdict {
        isometric: worst <= tol,
        max_residual: worst,
        samples: samples.len(),
    })
}
