//! Levi-Civita connection and curvature by classical tensor calculus.
//!
//! Sign conventions (pinned by `sasakian_condition_convention` below):
//!
//! * `Γ^i_jk = ½ g^il (∂_j g_lk + ∂_k g_lj − ∂_l g_jk)`
//! * `R^i_jkl = ∂_k Γ^i_lj − ∂_l Γ^i_kj + Γ^i_km Γ^m_lj − Γ^i_lm Γ^m_kj`
//! * `R(X, Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z`, i.e. `(R(X,Y)Z)^i = R^i_jkl Z^j X^k Y^l`
//! * `R_jl = R^i_jil`, positive on round spheres.

use crate::error::{Error, Result};
use crate::jet::{Jet, Point, NVARS};
use crate::metric::{inverse, Metric, MetricJet, Tensor2, Tensor3, Tensor4, VectorField};

pub type Christoffel = Tensor3;

type JetT3 = [[[Jet; NVARS]; NVARS]; NVARS];
type JetT4 = [[[[Jet; NVARS]; NVARS]; NVARS]; NVARS];

/// Connection and curvature as jets about one point.
///
/// With a metric jet of order `n`, `gamma` carries order `n − 1` and the
/// curvature quantities order `n − 2`.
#[derive(Clone, Debug)]
pub struct CurvatureJets {
    pub g: MetricJet,
    pub ginv: MetricJet,
    /// `gamma[i][j][k] = Γ^i_jk`
    pub gamma: JetT3,
    /// `riemann[i][j][k][l] = R^i_jkl`
    pub riemann: Box<JetT4>,
    pub ricci: [[Jet; NVARS]; NVARS],
    pub scalar: Jet,
}

fn christoffel_jets(g: &MetricJet, ginv: &MetricJet) -> JetT3 {
    let order = g[0][0].order();
    assert!(order >= 1, "Christoffel symbols need first derivatives");
    // dg[k][i][j] = ∂_k g_ij
    let dg: JetT3 =
        std::array::from_fn(|k| std::array::from_fn(|i| std::array::from_fn(|j| g[i][j].partial(k))));
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            std::array::from_fn(|k| {
                let mut s = Jet::zero(order - 1);
                for l in 0..NVARS {
                    s += ginv[i][l] * (dg[j][l][k] + dg[k][l][j] - dg[l][j][k]);
                }
                s * 0.5
            })
        })
    })
}

pub fn curvature_jets(metric: &dyn Metric, p: Point, order: u8) -> Result<CurvatureJets> {
    assert!(order >= 2, "curvature needs second derivatives");
    let g = metric.jet(p, order)?;
    let got = g.iter().flatten().map(Jet::order).min().unwrap_or(0);
    if got < order {
        return Err(Error::Capability(format!(
            "metric supplied jets of order {got}, {order} requested"
        )));
    }
    let ginv = inverse(&g, p)?;
    let gamma = christoffel_jets(&g, &ginv);
    let co = order - 2;
    let dgamma: Box<JetT4> = Box::new(std::array::from_fn(|k| {
        std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|l| gamma[i][j][l].partial(k))))
    }));
    // dgamma[k][i][j][l] = ∂_k Γ^i_jl
    let riemann: Box<JetT4> = Box::new(std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            std::array::from_fn(|k| {
                std::array::from_fn(|l| {
                    let mut s = dgamma[k][i][l][j] - dgamma[l][i][k][j];
                    for m in 0..NVARS {
                        s += (gamma[i][k][m] * gamma[m][l][j] - gamma[i][l][m] * gamma[m][k][j])
                            .truncate(co);
                    }
                    s
                })
            })
        })
    }));
    let ricci: [[Jet; 3]; 3] = std::array::from_fn(|j| {
        std::array::from_fn(|l| {
            let mut s = Jet::zero(co);
            for i in 0..NVARS {
                s += riemann[i][j][i][l];
            }
            s
        })
    });
    let mut scalar = Jet::zero(co);
    for j in 0..NVARS {
        for l in 0..NVARS {
            scalar += ginv[j][l] * ricci[j][l];
        }
    }
    Ok(CurvatureJets {
        g,
        ginv,
        gamma,
        riemann,
        ricci,
        scalar,
    })
}

/// Curvature quantities at a point.
#[derive(Clone, Debug)]
pub struct CurvatureBundle {
    pub metric: Tensor2,
    pub inverse: Tensor2,
    /// `christoffel[i][j][k] = Γ^i_jk`
    pub christoffel: Christoffel,
    /// `riemann[i][j][k][l] = R^i_jkl`
    pub riemann: Tensor4,
    /// `riemann_lowered[i][j][k][l] = R_ijkl = g_im R^m_jkl`
    pub riemann_lowered: Tensor4,
    pub ricci: Tensor2,
    pub scalar: f64,
}

impl CurvatureBundle {
    fn from_jets(c: &CurvatureJets) -> Self {
        let val2 = |t: &[[Jet; 3]; 3]| -> Tensor2 {
            std::array::from_fn(|i| std::array::from_fn(|j| t[i][j].value()))
        };
        let metric = val2(&c.g);
        let riemann: Tensor4 = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                std::array::from_fn(|k| std::array::from_fn(|l| c.riemann[i][j][k][l].value()))
            })
        });
        let riemann_lowered = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                std::array::from_fn(|k| {
                    std::array::from_fn(|l| (0..3).map(|m| metric[i][m] * riemann[m][j][k][l]).sum())
                })
            })
        });
        CurvatureBundle {
            metric,
            inverse: val2(&c.ginv),
            christoffel: std::array::from_fn(|i| {
                std::array::from_fn(|j| std::array::from_fn(|k| c.gamma[i][j][k].value()))
            }),
            riemann,
            riemann_lowered,
            ricci: val2(&c.ricci),
            scalar: c.scalar.value(),
        }
    }

    /// `E_ij = R_ij − ½ R g_ij`.
    pub fn einstein(&self) -> Tensor2 {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| self.ricci[i][j] - 0.5 * self.scalar * self.metric[i][j])
        })
    }

    /// `R(X, Y)Z`.
    pub fn endomorphism(&self, x: &[f64; 3], y: &[f64; 3], z: &[f64; 3]) -> [f64; 3] {
        std::array::from_fn(|i| {
            let mut s = 0.0;
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        s += self.riemann[i][j][k][l] * z[j] * x[k] * y[l];
                    }
                }
            }
            s
        })
    }

    /// Largest violation of the algebraic Riemann symmetries:
    /// both antisymmetries, pair symmetry and the first Bianchi identity.
    pub fn symmetry_residual(&self) -> f64 {
        let r = &self.riemann_lowered;
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let x = r[i][j][k][l];
                        worst = worst
                            .max((x + r[j][i][k][l]).abs())
                            .max((x + r[i][j][l][k]).abs())
                            .max((x - r[k][l][i][j]).abs())
                            .max((x + r[i][k][l][j] + r[i][l][j][k]).abs());
                    }
                }
            }
        }
        worst
    }
}

pub fn christoffel(metric: &dyn Metric, p: Point) -> Result<Christoffel> {
    let g = metric.jet(p, 1)?;
    let ginv = inverse(&g, p)?;
    let gamma = christoffel_jets(&g, &ginv);
    Ok(std::array::from_fn(|i| {
        std::array::from_fn(|j| std::array::from_fn(|k| gamma[i][j][k].value()))
    }))
}

pub fn curvature(metric: &dyn Metric, p: Point) -> Result<CurvatureBundle> {
    Ok(CurvatureBundle::from_jets(&curvature_jets(metric, p, 2)?))
}

/// Symmetrized covariant derivative `∇_(i X_j)`; zero iff `X` is Killing at `p`.
pub fn killing_residual(metric: &dyn Metric, x: &dyn VectorField, p: Point) -> Result<Tensor2> {
    let g = metric.jet(p, 1)?;
    let ginv = inverse(&g, p)?;
    let gamma = christoffel_jets(&g, &ginv);
    let xu = x.jet(p, 1)?;
    let lowered: [Jet; 3] = std::array::from_fn(|j| {
        let mut s = Jet::zero(1);
        for k in 0..3 {
            s += g[j][k] * xu[k];
        }
        s
    });
    let nabla = |i: usize, j: usize| {
        let mut s = lowered[j].d(i);
        for l in 0..3 {
            s -= gamma[l][i][j].value() * lowered[l].value();
        }
        s
    };
    Ok(std::array::from_fn(|i| {
        std::array::from_fn(|j| 0.5 * (nabla(i, j) + nabla(j, i)))
    }))
}

/// `R(X, e₀)Y` at `p`.
pub fn curvature_endomorphism(
    metric: &dyn Metric,
    x: &[f64; 3],
    e0: &[f64; 3],
    y: &[f64; 3],
    p: Point,
) -> Result<[f64; 3]> {
    Ok(curvature(metric, p)?.endomorphism(x, e0, y))
}

/// Contracted Bianchi quantity `∇^i E_ij`, which must vanish identically.
pub fn einstein_divergence(metric: &dyn Metric, p: Point) -> Result<[f64; 3]> {
    let c = curvature_jets(metric, p, 3)?;
    let e: [[Jet; 3]; 3] = std::array::from_fn(|i| {
        std::array::from_fn(|j| c.ricci[i][j] - c.g[i][j].truncate(1) * c.scalar * 0.5)
    });
    let ginv = crate::metric::values(&c.ginv);
    let gam = |i: usize, j: usize, k: usize| c.gamma[i][j][k].value();
    Ok(std::array::from_fn(|j| {
        let mut s = 0.0;
        for i in 0..3 {
            for k in 0..3 {
                let mut nab = e[i][j].d(k);
                for l in 0..3 {
                    nab -= gam(l, k, i) * e[l][j].value() + gam(l, k, j) * e[i][l].value();
                }
                s += ginv[i][k] * nab;
            }
        }
        s
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{CoordVectorField, Euclidean, FnMetric};

    /// Round metric of the unit 2-sphere times a line: dr² + dθ² + sin²θ dφ².
    fn sphere_cylinder() -> impl Metric {
        FnMetric::new(|x: &[Jet; 3]| {
            let o = x[0].order();
            let one = Jet::constant(1.0, o);
            let z = Jet::zero(o);
            [[one, z, z], [z, one, z], [z, z, x[1].sin().square()]]
        })
    }

    #[test]
    fn euclidean_is_flat() {
        let b = curvature(&Euclidean, [0.3, -1.0, 2.0]).unwrap();
        assert!(b.christoffel.iter().flatten().flatten().all(|&x| x == 0.0));
        assert_eq!(b.scalar, 0.0);
    }

    #[test]
    fn two_sphere_factor_has_scalar_curvature_two() {
        let b = curvature(&sphere_cylinder(), [0.0, 0.9, 0.2]).unwrap();
        assert!((b.scalar - 2.0).abs() < 1e-12);
        assert!((b.ricci[1][1] - 1.0).abs() < 1e-12);
        assert!(b.symmetry_residual() < 1e-12);
    }

    #[test]
    fn metric_compatibility() {
        let m = sphere_cylinder();
        let p = [0.0, 0.7, 0.1];
        let g = m.jet(p, 1).unwrap();
        let gam = christoffel(&m, p).unwrap();
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let mut s = g[i][j].d(k);
                    for l in 0..3 {
                        s -= gam[l][k][i] * g[l][j].value() + gam[l][k][j] * g[i][l].value();
                    }
                    assert!(s.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn euclidean_killing_fields() {
        let p = [0.0, 0.4, -0.3];
        let rot = CoordVectorField(|x: &[Jet; 3]| [Jet::zero(x[0].order()), -x[2], x[1]]);
        let k = killing_residual(&Euclidean, &rot, p).unwrap();
        assert!(k.iter().flatten().all(|x| x.abs() < 1e-15));

        let dil = CoordVectorField(|x: &[Jet; 3]| [Jet::zero(x[0].order()), x[1], x[2]]);
        let k = killing_residual(&Euclidean, &dil, p).unwrap();
        assert_eq!(k, [[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    }

    #[test]
    fn euclidean_endomorphism_vanishes() {
        let w = curvature_endomorphism(&Euclidean, &[1.0, 2.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 1.0], [0.0; 3])
            .unwrap();
        assert_eq!(w, [0.0; 3]);
    }

    #[test]
    fn contracted_bianchi_on_warped_metric() {
        let m = FnMetric::new(|x: &[Jet; 3]| {
            let [r, u, v] = *x;
            let z = Jet::zero(r.order());
            let a = (u * v).exp();
            [
                [a, u * 0.3, z],
                [u * 0.3, (v.sin() + 2.0), r * 0.1],
                [z, r * 0.1, u * u + 1.5],
            ]
        });
        let d = einstein_divergence(&m, [0.2, 0.1, -0.5]).unwrap();
        assert!(d.iter().all(|x| x.abs() < 1e-11), "{d:?}");
        let b = curvature(&m, [0.2, 0.1, -0.5]).unwrap();
        assert!(b.symmetry_residual() < 1e-12);
    }
}
