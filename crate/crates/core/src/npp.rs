//! Spin-coefficient formalism for riemannian 3-manifolds.
//!
//! An orthonormal triad `(e₀, e₁, e₂)` is complexified to
//! `e₊ = e^{−iψ}(e₁ − i e₂)/√2`, `e₋ = conj(e₊)`, with an optional phase
//! field `ψ`. The metric is extended bilinearly, so `g(e₊, e₋) = 1` and
//! `g(e₊, e₊) = 0`. The connection coefficients are
//! `γ_mnp = g(∇_{e_p} e_m, e_n)` with frame labels ordered `0, +, −`, and
//!
//! ```text
//! ρ = γ₊₀₋   σ = γ₊₀₊   τ = γ₊₋₋   κ = γ₊₀₀   ε = γ₊₋₀
//! ```
//!
//! Directional derivatives are `D = e₀^i ∂_i`, `δ = e₊^i ∂_i` and
//! `δ̄ = e₋^i ∂_i`. `δ̄` acting on a conjugated argument equals the conjugate
//! of `δ` acting on the original, which is how `δ̄τ̄` and friends are evaluated.
//!
//! Every quantity here is computed on jets, so derivatives of the spin
//! coefficients are exact rather than differenced.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::{CJet, Jet, Point, NVARS};
use crate::metric::{inverse, Metric, Tensor2};

/// Frame orthonormality tolerance.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

type CVec = [CJet; NVARS];

/// Orthonormal triad with jet-valued components.
#[derive(Clone, Debug)]
pub struct Triad {
    pub e0: [Jet; NVARS],
    pub e1: [Jet; NVARS],
    pub e2: [Jet; NVARS],
    /// Phase `ψ` applied as `e₊ ↦ e^{−iψ} e₊`.
    pub phase: Option<Jet>,
}

impl Triad {
    pub fn new(e0: [Jet; NVARS], e1: [Jet; NVARS], e2: [Jet; NVARS]) -> Self {
        Triad {
            e0,
            e1,
            e2,
            phase: None,
        }
    }

    /// Constant coordinate frame `(∂₀, ∂₁, ∂₂)`.
    pub fn cartesian(order: u8) -> Self {
        let e = |k: usize| std::array::from_fn(|i| Jet::constant(if i == k { 1.0 } else { 0.0 }, order));
        Triad::new(e(0), e(1), e(2))
    }

    pub fn with_phase(mut self, phase: Jet) -> Self {
        self.phase = Some(phase);
        self
    }

    pub fn order(&self) -> u8 {
        self.e0
            .iter()
            .chain(&self.e1)
            .chain(&self.e2)
            .chain(self.phase.iter())
            .map(Jet::order)
            .min()
            .unwrap_or(0)
    }

    pub fn e_zero(&self) -> CVec {
        self.e0.map(|c| c.to_complex())
    }

    pub fn e_plus(&self) -> CVec {
        let i = Complex64::i();
        let base: CVec = std::array::from_fn(|k| {
            (self.e1[k].to_complex() - self.e2[k].to_complex() * i) * Complex64::from(FRAC_1_SQRT_2)
        });
        match &self.phase {
            None => base,
            Some(psi) => {
                let rot = CJet::cis(&-*psi);
                base.map(|c| c * rot)
            }
        }
    }

    pub fn e_minus(&self) -> CVec {
        self.e_plus().map(|c| c.conj())
    }

    /// Values of the (phase-rotated) real frame `e₀, e₁', e₂'` with
    /// `e₊ = (e₁' − i e₂')/√2`.
    pub fn real_vectors(&self) -> [[f64; NVARS]; 3] {
        let ep = self.e_plus();
        [
            self.e0.map(|c| c.value()),
            std::array::from_fn(|k| std::f64::consts::SQRT_2 * ep[k].value().re),
            std::array::from_fn(|k| -std::f64::consts::SQRT_2 * ep[k].value().im),
        ]
    }

    /// Largest deviation of `g(e_a, e_b)` from `δ_ab`.
    pub fn orthonormality_residual(&self, g: &Tensor2) -> f64 {
        let v = self.real_vectors();
        let mut worst = 0.0f64;
        for a in 0..3 {
            for b in 0..3 {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((crate::metric::inner(g, &v[a], &v[b]) - target).abs());
            }
        }
        worst
    }
}

/// The five named spin coefficients at a point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpinCoefficients {
    pub kappa: Complex64,
    pub sigma: Complex64,
    pub rho: Complex64,
    pub tau: Complex64,
    pub epsilon: Complex64,
}

/// Spin coefficients as jets together with the complex frame that produced them.
#[derive(Clone, Debug)]
pub struct SpinJets {
    /// `gamma[m][n][p] = γ_mnp`, labels `0, +, −`.
    pub gamma: [[[CJet; 3]; 3]; 3],
    /// Complex frame `e₀, e₊, e₋`.
    pub frame: [CVec; 3],
    pub kappa: CJet,
    pub sigma: CJet,
    pub rho: CJet,
    pub tau: CJet,
    pub epsilon: CJet,
}

impl SpinJets {
    pub fn values(&self) -> SpinCoefficients {
        SpinCoefficients {
            kappa: self.kappa.value(),
            sigma: self.sigma.value(),
            rho: self.rho.value(),
            tau: self.tau.value(),
            epsilon: self.epsilon.value(),
        }
    }

    /// `D f`
    pub fn d(&self, f: &CJet) -> CJet {
        directional(&self.frame[0], f)
    }

    /// `δ f`
    pub fn delta(&self, f: &CJet) -> CJet {
        directional(&self.frame[1], f)
    }

    /// `δ̄ f`
    pub fn delta_bar(&self, f: &CJet) -> CJet {
        directional(&self.frame[2], f)
    }

    /// Largest `|γ_mnp + γ_nmp|` at the point.
    pub fn antisymmetry_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for m in 0..3 {
            for n in 0..3 {
                for p in 0..3 {
                    worst = worst.max((self.gamma[m][n][p].value() + self.gamma[n][m][p].value()).norm());
                }
            }
        }
        worst
    }
}

fn directional(e: &CVec, f: &CJet) -> CJet {
    let mut s = e[0] * f.partial(0);
    s += e[1] * f.partial(1);
    s += e[2] * f.partial(2);
    s
}

fn require_order(triad: &Triad, needed: u8, what: &str) -> Result<u8> {
    let order = triad.order();
    if order < needed {
        return Err(Error::Capability(format!(
            "{what} needs frame jets of order {needed}, got {order}"
        )));
    }
    Ok(order)
}

/// Spin-coefficient jets of order `triad.order() − 1`.
pub fn spin_jets(metric: &dyn Metric, triad: &Triad, p: Point) -> Result<SpinJets> {
    let order = require_order(triad, 1, "spin coefficients")?;
    let g = metric.jet(p, order)?;
    let ginv = inverse(&g, p)?;
    let gv = crate::metric::values(&g);
    let ortho = triad.orthonormality_residual(&gv);
    if ortho > ORTHONORMAL_TOL {
        return Err(Error::Frame(format!(
            "triad not orthonormal at {p:?} (deviation {ortho:e})"
        )));
    }
    let gc: [[CJet; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| g[i][j].to_complex()));
    // Γ^i_jk as complex jets of order `order − 1`
    let gamma_c: [[[CJet; 3]; 3]; 3] = {
        let dg: [[[Jet; 3]; 3]; 3] =
            std::array::from_fn(|k| std::array::from_fn(|i| std::array::from_fn(|j| g[i][j].partial(k))));
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                std::array::from_fn(|k| {
                    let mut s = Jet::zero(order - 1);
                    for l in 0..3 {
                        s += ginv[i][l] * (dg[j][l][k] + dg[k][l][j] - dg[l][j][k]);
                    }
                    (s * 0.5).to_complex()
                })
            })
        })
    };
    let frame = [triad.e_zero(), triad.e_plus(), triad.e_minus()];
    // ∇_{e_p} e_m
    let nabla = |m: usize, pp: usize| -> CVec {
        let (em, ep) = (&frame[m], &frame[pp]);
        std::array::from_fn(|j| {
            let mut s = directional(ep, &em[j]);
            for k in 0..3 {
                for l in 0..3 {
                    s += gamma_c[j][k][l] * ep[k] * em[l];
                }
            }
            s
        })
    };
    let mut cov: [[CVec; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| [CJet::zero(0); 3]));
    for (m, row) in cov.iter_mut().enumerate() {
        for (pp, slot) in row.iter_mut().enumerate() {
            *slot = nabla(m, pp);
        }
    }
    let bilinear = |a: &CVec, b: &CVec| {
        let mut s = CJet::zero(order - 1);
        for i in 0..3 {
            for j in 0..3 {
                s += gc[i][j] * a[i] * b[j];
            }
        }
        s
    };
    let gamma: [[[CJet; 3]; 3]; 3] = std::array::from_fn(|m| {
        std::array::from_fn(|n| std::array::from_fn(|pp| bilinear(&cov[m][pp], &frame[n])))
    });
    let (zero, plus, minus) = (0, 1, 2);
    let s = SpinJets {
        kappa: gamma[plus][zero][zero],
        sigma: gamma[plus][zero][plus],
        rho: gamma[plus][zero][minus],
        tau: gamma[plus][minus][minus],
        epsilon: gamma[plus][minus][zero],
        gamma,
        frame,
    };
    let anti = s.antisymmetry_residual();
    if anti > ORTHONORMAL_TOL {
        return Err(Error::Frame(format!(
            "connection coefficients not antisymmetric at {p:?} (residual {anti:e})"
        )));
    }
    Ok(s)
}

pub fn spin_coefficients(metric: &dyn Metric, triad: &Triad, p: Point) -> Result<SpinCoefficients> {
    Ok(spin_jets(metric, triad, p)?.values())
}

/// `(Df, δf, δ̄f)` at the expansion point of `f`.
pub fn directional_derivatives(triad: &Triad, f: &CJet) -> [Complex64; 3] {
    let frame = [triad.e_zero(), triad.e_plus(), triad.e_minus()];
    frame.map(|e| directional(&e, f).value())
}

/// Residuals of
/// `(Dδ − δD)f = [(ρ̄ + ε)δ + σδ̄ + κD]f` and
/// `(δδ̄ − δ̄δ)f = [τ̄δ̄ − τδ + (ρ̄ − ρ)D]f`.
pub fn commutator_residual(triad: &Triad, spin: &SpinCoefficients, f: &CJet) -> (Complex64, Complex64) {
    let [e0, ep, em] = [triad.e_zero(), triad.e_plus(), triad.e_minus()];
    let df = directional(&e0, f);
    let dlf = directional(&ep, f);
    let dlbf = directional(&em, f);
    let SpinCoefficients {
        kappa,
        sigma,
        rho,
        tau,
        epsilon,
    } = *spin;
    let lhs1 = directional(&e0, &dlf).value() - directional(&ep, &df).value();
    let rhs1 = (rho.conj() + epsilon) * dlf.value() + sigma * dlbf.value() + kappa * df.value();
    let lhs2 = directional(&ep, &dlbf).value() - directional(&em, &dlf).value();
    let rhs2 = tau.conj() * dlbf.value() - tau * dlf.value() + (rho.conj() - rho) * df.value();
    (lhs1 - rhs1, lhs2 - rhs2)
}

/// Frame components of the Ricci tensor together with the scalar curvature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrameRicci {
    pub r00: Complex64,
    pub rpp: Complex64,
    pub r0p: Complex64,
    pub r0m: Complex64,
    pub rpm: Complex64,
    pub scalar: Complex64,
}

impl FrameRicci {
    pub fn max_difference(&self, other: &FrameRicci) -> f64 {
        [
            self.r00 - other.r00,
            self.rpp - other.rpp,
            self.r0p - other.r0p,
            self.r0m - other.r0m,
            self.rpm - other.rpm,
            self.scalar - other.scalar,
        ]
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct FrameRicciJets {
    pub r00: CJet,
    pub rpp: CJet,
    pub r0p: CJet,
    pub r0m: CJet,
    pub rpm: CJet,
    pub half_scalar: CJet,
}

pub(crate) fn ricci_from_spin_jets(s: &SpinJets) -> FrameRicciJets {
    let two = Complex64::from(2.0);
    let (k, sg, r, t, e) = (s.kappa, s.sigma, s.rho, s.tau, s.epsilon);
    let (kb, sb, rb, tb) = (k.conj(), sg.conj(), r.conj(), t.conj());
    let d = |x: &CJet| s.d(x);
    let dl = |x: &CJet| s.delta(x);
    let dlb = |x: &CJet| s.delta_bar(x);

    let r00 = d(&r) + d(&rb) - dlb(&k) - dl(&kb) + t * k + tb * kb
        - (k * kb) * two
        - (sg * sb) * two
        - r * r
        - rb * rb;
    let rpp = -dl(&k) + d(&sg) - (e * sg) * two - tb * k - k * k - sg * rb - r * sg;
    let r0p = -dlb(&sg) + dl(&r) + (t * sg) * two + k * r - k * rb;
    let r0m = -dlb(&e) + d(&t) + k * sb - r * kb + e * t - e * kb + tb * sb - t * r;
    let rpm = -dlb(&k) + d(&r) + dl(&t) + dlb(&tb) + e * r - e * rb - k * kb + k * t - r * rb - r * r
        - (t * tb) * two;
    let half_scalar = -dl(&kb) * two + d(&rb) * two + dl(&t) + dlb(&tb) - (k * kb) * two
        + (kb * tb) * two
        - (rb * rb) * two
        - sg * sb
        + e * r
        - e * rb
        - r * rb
        - (t * tb) * two;
    FrameRicciJets {
        r00,
        rpp,
        r0p,
        r0m,
        rpm,
        half_scalar,
    }
}

/// Ricci components from the spin-coefficient formulas.
pub fn ricci_from_spin(metric: &dyn Metric, triad: &Triad, p: Point) -> Result<FrameRicci> {
    require_order(triad, 2, "spin-coefficient Ricci")?;
    let j = ricci_from_spin_jets(&spin_jets(metric, triad, p)?);
    Ok(FrameRicci {
        r00: j.r00.value(),
        rpp: j.rpp.value(),
        r0p: j.r0p.value(),
        r0m: j.r0m.value(),
        rpm: j.rpm.value(),
        scalar: j.half_scalar.value() * 2.0,
    })
}

/// Projection of a coordinate tensor `T_ij` onto the complex frame.
pub fn project(t: &Tensor2, a: &[Complex64; 3], b: &[Complex64; 3]) -> Complex64 {
    let mut s = Complex64::from(0.0);
    for i in 0..3 {
        for j in 0..3 {
            s += a[i] * b[j] * t[i][j];
        }
    }
    s
}

/// Tensor-route Ricci projected onto the complex frame, for comparison
/// with [`ricci_from_spin`].
pub fn ricci_projection(metric: &dyn Metric, triad: &Triad, p: Point) -> Result<FrameRicci> {
    let c = crate::curvature::curvature(metric, p)?;
    let f = [triad.e_zero(), triad.e_plus(), triad.e_minus()].map(|v| v.map(|x| x.value()));
    Ok(FrameRicci {
        r00: project(&c.ricci, &f[0], &f[0]),
        rpp: project(&c.ricci, &f[1], &f[1]),
        r0p: project(&c.ricci, &f[0], &f[1]),
        r0m: project(&c.ricci, &f[0], &f[2]),
        rpm: project(&c.ricci, &f[1], &f[2]),
        scalar: Complex64::from(c.scalar),
    })
}

/// Residuals of the two curvature identities
/// `Dρ − δ̄κ + κτ − ρ² = Dρ̄ − δκ̄ + κ̄τ̄ − ρ̄²` and
/// `δσ̄ − δ̄ρ̄ − τ̄σ̄ − κ̄ρ̄ = δ̄ε − Dτ − κσ̄ − ετ + εκ̄ + τρ`.
pub fn curvature_identity_residual(metric: &dyn Metric, triad: &Triad, p: Point) -> Result<(Complex64, Complex64)> {
    require_order(triad, 2, "curvature identities")?;
    let s = spin_jets(metric, triad, p)?;
    let (k, sg, r, t, e) = (
        s.kappa.value(),
        s.sigma.value(),
        s.rho.value(),
        s.tau.value(),
        s.epsilon.value(),
    );
    let (kb, sb, rb, tb) = (k.conj(), sg.conj(), r.conj(), t.conj());
    let d = |x: &CJet| s.d(x).value();
    let dl = |x: &CJet| s.delta(x).value();
    let dlb = |x: &CJet| s.delta_bar(x).value();

    let id1 = (d(&s.rho) - dlb(&s.kappa) + k * t - r * r)
        - (d(&s.rho.conj()) - dl(&s.kappa.conj()) + kb * tb - rb * rb);
    let id2 = (dl(&s.sigma.conj()) - dlb(&s.rho.conj()) - tb * sb - kb * rb)
        - (dlb(&s.epsilon) - d(&s.tau) - k * sb - e * t + e * kb + t * r);
    Ok((id1, id2))
}

/// Residuals of the two contracted Bianchi identities written in the
/// complex frame, with `E_ab = R_ab − ½R g_ab` taken from the spin route.
pub fn bianchi_residual(metric: &dyn Metric, triad: &Triad, p: Point) -> Result<(Complex64, Complex64)> {
    require_order(triad, 3, "Bianchi identities")?;
    let s = spin_jets(metric, triad, p)?;
    let ric = ricci_from_spin_jets(&s);
    let half_r = ric.half_scalar;
    let e00 = ric.r00 - half_r;
    let epm = ric.rpm - half_r;
    let e0p = ric.r0p;
    let e0m = ric.r0m;
    let epp = ric.rpp;
    let emm = ric.rpp.conj();

    let v = |x: &CJet| x.value();
    let (k, sg, r, t, e) = (v(&s.kappa), v(&s.sigma), v(&s.rho), v(&s.tau), v(&s.epsilon));
    let (kb, sb, rb, tb) = (k.conj(), sg.conj(), r.conj(), t.conj());
    let two = Complex64::from(2.0);

    let b1 = s.d(&e00).value()
        + s.delta_bar(&e0p).value()
        + s.delta(&e0m).value()
        + (r + rb) * (v(&epm) - v(&e00))
        + (two * kb - t) * v(&e0p)
        + (two * k - tb) * v(&e0m)
        + sb * v(&epp)
        + sg * v(&emm);
    let b2 = s.d(&e0p).value() + s.delta_bar(&epp).value() + s.delta(&epm).value()
        + k * (v(&epm) - v(&e00))
        - (e + two * r + rb) * v(&e0p)
        - sg * v(&e0m)
        + (kb - two * t) * v(&epp);
    Ok((b1, b2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{Euclidean, FnMetric};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn euclidean_cartesian_frame_has_vanishing_coefficients() {
        let t = Triad::cartesian(3);
        let s = spin_coefficients(&Euclidean, &t, [0.1, 0.2, 0.3]).unwrap();
        assert_eq!(s.kappa, c(0.0, 0.0));
        assert_eq!(s.rho, c(0.0, 0.0));
        assert_eq!(s.tau, c(0.0, 0.0));
        let (b1, b2) = bianchi_residual(&Euclidean, &t, [0.0; 3]).unwrap();
        assert_eq!((b1, b2), (c(0.0, 0.0), c(0.0, 0.0)));
        let r = ricci_from_spin(&Euclidean, &t, [0.0; 3]).unwrap();
        assert_eq!(r.max_difference(&ricci_projection(&Euclidean, &t, [0.0; 3]).unwrap()), 0.0);
    }

    #[test]
    fn directional_derivative_of_u() {
        let t = Triad::cartesian(2);
        let f = Jet::variable(1, 0.5, 2).to_complex();
        let [d, dl, dlb] = directional_derivatives(&t, &f);
        assert_eq!(d, c(0.0, 0.0));
        assert!((dl - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-16);
        assert!((dlb - dl.conj()).norm() < 1e-16);
    }

    #[test]
    fn delta_bar_is_conjugate_of_delta_on_conjugate() {
        // rotating frame so that the check is not trivially symmetric
        let [r, u, v] = Jet::coordinates([0.3, 0.2, -0.4], 3);
        let z = Jet::zero(3);
        let one = Jet::constant(1.0, 3);
        let t = Triad::new([one, z, z], [z, u.cos(), u.sin()], [z, -u.sin(), u.cos()]).with_phase(r);
        let f = CJet::cis(&(u * v)) * (r + 2.0).to_complex();
        let [_, dl, dlb] = directional_derivatives(&t, &f);
        let [_, dl_conj, _] = directional_derivatives(&t, &f.conj());
        assert!((dlb - dl_conj.conj()).norm() < 1e-15);
        assert!((dl - dlb).norm() > 1e-3);
    }

    #[test]
    fn non_orthonormal_triad_rejected() {
        let mut t = Triad::cartesian(2);
        t.e1[1] = Jet::constant(1.1, 2);
        assert!(matches!(spin_coefficients(&Euclidean, &t, [0.0; 3]), Err(Error::Frame(_))));
    }

    #[test]
    fn insufficient_order_is_a_capability_error() {
        let t = Triad::cartesian(1);
        assert!(matches!(bianchi_residual(&Euclidean, &t, [0.0; 3]), Err(Error::Capability(_))));
    }

    fn generic_components(x: &[Jet; 3]) -> [[Jet; 3]; 3] {
        let [r, u, v] = *x;
        let a = (u * v * 0.5).exp();
        [
            [a + 0.5, u * 0.3, v * r * 0.1],
            [u * 0.3, v.sin() + 2.0, r * 0.2],
            [v * r * 0.1, r * 0.2, u * u + 1.5],
        ]
    }

    /// Generic metric and Gram-Schmidt frame: no Sasakian simplification applies.
    fn generic() -> (impl Metric, impl Fn(Point) -> Triad) {
        let frame = |p: Point| {
            let g = generic_components(&Jet::coordinates(p, 3));
            let x = Jet::coordinates(p, 3);
            let raw = [
                [Jet::constant(1.0, 3), x[2] * 0.2, Jet::zero(3)],
                [x[0] * 0.1, Jet::constant(1.0, 3), x[1] * 0.3],
                [Jet::zero(3), x[0] * 0.2, Jet::constant(1.0, 3)],
            ];
            let ip = |a: &[Jet; 3], b: &[Jet; 3]| {
                let mut s = Jet::zero(3);
                for i in 0..3 {
                    for j in 0..3 {
                        s += g[i][j] * a[i] * b[j];
                    }
                }
                s
            };
            let mut out: Vec<[Jet; 3]> = Vec::new();
            for v in raw {
                let mut w = v;
                for e in &out {
                    let c = ip(&w, e);
                    w = std::array::from_fn(|k| w[k] - c * e[k]);
                }
                let n = ip(&w, &w).sqrt();
                out.push(w.map(|c| c / n));
            }
            Triad::new(out[0], out[1], out[2]).with_phase(x[1] * x[2])
        };
        (FnMetric::new(generic_components), frame)
    }

    #[test]
    fn spin_route_matches_tensor_route_on_generic_frame() {
        let (m, frame) = generic();
        for p in [[0.1, 0.2, -0.3], [-0.4, 0.5, 0.25], [0.7, -0.6, 0.1]] {
            let t = frame(p);
            let spin = ricci_from_spin(&m, &t, p).unwrap();
            let tensor = ricci_projection(&m, &t, p).unwrap();
            assert!(spin.max_difference(&tensor) < 1e-10, "{spin:?}\n{tensor:?}");
        }
    }

    #[test]
    fn identities_hold_on_generic_frame() {
        let (m, frame) = generic();
        let p = [0.3, -0.2, 0.45];
        let t = frame(p);
        let (i1, i2) = curvature_identity_residual(&m, &t, p).unwrap();
        assert!(i1.norm() < 1e-10 && i2.norm() < 1e-10, "{i1} {i2}");
        let (b1, b2) = bianchi_residual(&m, &t, p).unwrap();
        assert!(b1.norm() < 1e-9 && b2.norm() < 1e-9, "{b1} {b2}");
        let spin = spin_coefficients(&m, &t, p).unwrap();
        let f = (Jet::variable(1, p[1], 3) * Jet::variable(2, p[2], 3)).sin().to_complex();
        let (c1, c2) = commutator_residual(&t, &spin, &f);
        assert!(c1.norm() < 1e-12 && c2.norm() < 1e-12, "{c1} {c2}");
    }
}
