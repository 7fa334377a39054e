//! Metric evaluators and vector fields carried as jets.

use crate::error::{Error, Result};
use crate::jet::{Jet, Point, NVARS};

/// Symmetric 3×3 array of component jets `g_ij`.
pub type MetricJet = [[Jet; NVARS]; NVARS];

pub type Tensor2 = [[f64; NVARS]; NVARS];
pub type Tensor3 = [[[f64; NVARS]; NVARS]; NVARS];
pub type Tensor4 = [[[[f64; NVARS]; NVARS]; NVARS]; NVARS];

/// A riemannian metric on a coordinate patch, queried pointwise for its
/// component jets up to a requested order (≤ 3).
pub trait Metric: Send + Sync {
    fn jet(&self, p: Point, order: u8) -> Result<MetricJet>;

    fn coordinate_labels(&self) -> [&'static str; NVARS] {
        ["r", "u", "v"]
    }
}

impl<M: Metric + ?Sized> Metric for &M {
    fn jet(&self, p: Point, order: u8) -> Result<MetricJet> {
        (**self).jet(p, order)
    }

    fn coordinate_labels(&self) -> [&'static str; NVARS] {
        (**self).coordinate_labels()
    }
}

/// Components and coordinate derivatives of a metric at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSample {
    pub g: Tensor2,
    /// `dg[k][i][j] = ∂_k g_ij`
    pub dg: Tensor3,
    /// `d2g[k][l][i][j] = ∂_k ∂_l g_ij`
    pub d2g: Tensor4,
}

pub fn sample(metric: &dyn Metric, p: Point) -> Result<MetricSample> {
    let g = metric.jet(p, 2)?;
    let mut out = MetricSample {
        g: [[0.0; 3]; 3],
        dg: [[[0.0; 3]; 3]; 3],
        d2g: [[[[0.0; 3]; 3]; 3]; 3],
    };
    for i in 0..3 {
        for j in 0..3 {
            out.g[i][j] = g[i][j].value();
            for k in 0..3 {
                out.dg[k][i][j] = g[i][j].d(k);
                for l in 0..3 {
                    let mut alpha = [0u8; 3];
                    alpha[k] += 1;
                    alpha[l] += 1;
                    out.d2g[k][l][i][j] = g[i][j].derivative(alpha);
                }
            }
        }
    }
    Ok(out)
}

/// Flat metric `dr² + du² + dv²`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Euclidean;

impl Metric for Euclidean {
    fn jet(&self, _p: Point, order: u8) -> Result<MetricJet> {
        Ok(std::array::from_fn(|i| {
            std::array::from_fn(|j| Jet::constant(if i == j { 1.0 } else { 0.0 }, order))
        }))
    }
}

/// Metric given by a closure over the seeded coordinate jets.
pub struct FnMetric<F> {
    f: F,
    labels: [&'static str; NVARS],
}

impl<F> FnMetric<F>
where
    F: Fn(&[Jet; NVARS]) -> MetricJet + Send + Sync,
{
    pub fn new(f: F) -> Self {
        FnMetric {
            f,
            labels: ["r", "u", "v"],
        }
    }

    pub fn with_labels(mut self, labels: [&'static str; NVARS]) -> Self {
        self.labels = labels;
        self
    }
}

impl<F> Metric for FnMetric<F>
where
    F: Fn(&[Jet; NVARS]) -> MetricJet + Send + Sync,
{
    fn jet(&self, p: Point, order: u8) -> Result<MetricJet> {
        Ok((self.f)(&Jet::coordinates(p, order)))
    }

    fn coordinate_labels(&self) -> [&'static str; NVARS] {
        self.labels
    }
}

/// Determinant threshold, relative to the cube of the mean diagonal.
pub const DEGENERACY_RATIO: f64 = 1e-12;

/// Inverse of a metric jet, failing on (near-)degenerate metrics.
pub fn inverse(g: &MetricJet, at: Point) -> Result<MetricJet> {
    let cof = |i: usize, j: usize| {
        let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
        let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
        g[i1][j1] * g[i2][j2] - g[i1][j2] * g[i2][j1]
    };
    let c: [[Jet; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| cof(i, j)));
    let det = g[0][0] * c[0][0] + g[0][1] * c[0][1] + g[0][2] * c[0][2];
    let scale = (g[0][0].value() + g[1][1].value() + g[2][2].value()) / 3.0;
    let d = det.value();
    if !(d.is_finite() && scale > 0.0 && d > DEGENERACY_RATIO * scale.powi(3)) {
        return Err(Error::DegenerateMetric { at, det: d });
    }
    let inv_det = det.recip();
    // symmetric, so the adjugate is the cofactor matrix itself
    Ok(std::array::from_fn(|i| {
        std::array::from_fn(|j| c[j][i] * inv_det)
    }))
}

/// Values of a metric jet.
pub fn values(g: &MetricJet) -> Tensor2 {
    std::array::from_fn(|i| std::array::from_fn(|j| g[i][j].value()))
}

/// `g(a, b)` for vectors given by components.
pub fn inner(g: &Tensor2, a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .map(|(i, j)| g[i][j] * a[i] * b[j])
        .sum()
}

/// A vector field whose components are available as jets.
pub trait VectorField: Send + Sync {
    fn jet(&self, p: Point, order: u8) -> Result<[Jet; NVARS]>;
}

/// Vector field given by a closure over seeded coordinate jets.
pub struct CoordVectorField<F>(pub F);

impl<F> VectorField for CoordVectorField<F>
where
    F: Fn(&[Jet; NVARS]) -> [Jet; NVARS] + Send + Sync,
{
    fn jet(&self, p: Point, order: u8) -> Result<[Jet; NVARS]> {
        Ok((self.0)(&Jet::coordinates(p, order)))
    }
}

/// Constant coordinate field, e.g. `∂/∂r`.
#[derive(Clone, Copy, Debug)]
pub struct ConstantVectorField(pub [f64; NVARS]);

impl VectorField for ConstantVectorField {
    fn jet(&self, _p: Point, order: u8) -> Result<[Jet; NVARS]> {
        Ok(self.0.map(|c| Jet::constant(c, order)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_times_metric_is_identity_to_all_orders() {
        let m = FnMetric::new(|x: &[Jet; 3]| {
            let [_, u, v] = *x;
            let a = u * v;
            let one = Jet::constant(1.0, u.order());
            let zero = Jet::zero(u.order());
            [
                [one, a, zero],
                [a, a * a + (u.sin() + 2.0), zero],
                [zero, zero, (v * v) + 1.0],
            ]
        });
        let p = [0.0, 0.3, -0.4];
        let g = m.jet(p, 3).unwrap();
        let gi = inverse(&g, p).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = Jet::zero(3);
                for k in 0..3 {
                    s += g[i][k] * gi[k][j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((s.value() - target).abs() < 1e-14);
                for alpha in [[0, 1, 0], [0, 1, 1], [0, 0, 3]] {
                    assert!(s.derivative(alpha).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn degenerate_metric_detected() {
        let m = FnMetric::new(|x: &[Jet; 3]| {
            let o = x[0].order();
            let one = Jet::constant(1.0, o);
            let zero = Jet::zero(o);
            [[one, one, zero], [one, one, zero], [zero, zero, one]]
        });
        let p = [0.0; 3];
        let g = m.jet(p, 1).unwrap();
        assert!(matches!(inverse(&g, p), Err(Error::DegenerateMetric { .. })));
    }
}
