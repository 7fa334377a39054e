//! Scalar fields over the `(u, v)` plane and their domains.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, U, V};

/// A smooth function of `(u, v)` queryable for its jet up to order 3.
///
/// The returned jet is expressed in the shared `(r, u, v)` slots with
/// vanishing `r`-coefficients.
pub trait ScalarJetField: Send + Sync {
    fn jet(&self, u: f64, v: f64, order: u8) -> Result<Jet>;

    fn value(&self, u: f64, v: f64) -> Result<f64> {
        Ok(self.jet(u, v, 0)?.value())
    }
}

impl<F: ScalarJetField + ?Sized> ScalarJetField for Arc<F> {
    fn jet(&self, u: f64, v: f64, order: u8) -> Result<Jet> {
        (**self).jet(u, v, order)
    }
}

impl<F: ScalarJetField + ?Sized> ScalarJetField for &F {
    fn jet(&self, u: f64, v: f64, order: u8) -> Result<Jet> {
        (**self).jet(u, v, order)
    }
}

/// Field defined by a closure over the seeded coordinate jets `u` and `v`.
pub struct FnField<F>(pub F);

impl<F> FnField<F>
where
    F: Fn(Jet, Jet) -> Jet + Send + Sync,
{
    pub fn new(f: F) -> Self {
        FnField(f)
    }
}

impl<F> ScalarJetField for FnField<F>
where
    F: Fn(Jet, Jet) -> Jet + Send + Sync,
{
    fn jet(&self, u: f64, v: f64, order: u8) -> Result<Jet> {
        let j = (self.0)(Jet::variable(U, u, order), Jet::variable(V, v, order));
        if !j.is_finite() {
            return Err(Error::Evaluation {
                message: format!("non-finite jet at (u, v) = ({u}, {v})"),
                offset: None,
            });
        }
        Ok(j)
    }
}

/// Boxes a closure as a shareable field.
pub fn field(f: impl Fn(Jet, Jet) -> Jet + Send + Sync + 'static) -> Arc<dyn ScalarJetField> {
    Arc::new(FnField(f))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

impl Rect {
    pub fn new(u_min: f64, u_max: f64, v_min: f64, v_max: f64) -> Result<Self> {
        let ok = [u_min, u_max, v_min, v_max].iter().all(|x| x.is_finite())
            && u_min < u_max
            && v_min < v_max;
        if !ok {
            return Err(Error::Domain(format!(
                "invalid rectangle [{u_min}, {u_max}] x [{v_min}, {v_max}]"
            )));
        }
        Ok(Rect {
            u_min,
            u_max,
            v_min,
            v_max,
        })
    }

    pub fn square(half_width: f64) -> Self {
        Rect {
            u_min: -half_width,
            u_max: half_width,
            v_min: -half_width,
            v_max: half_width,
        }
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        (self.u_min..=self.u_max).contains(&u) && (self.v_min..=self.v_max).contains(&v)
    }
}

/// Region of the `(u, v)` plane on which a structure is declared.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    /// Closed rectangle.
    Rect(Rect),
    /// Open disk.
    Disk { center: (f64, f64), radius: f64 },
}

impl Domain {
    pub fn unit_disk() -> Self {
        Domain::Disk {
            center: (0.0, 0.0),
            radius: 1.0,
        }
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        match *self {
            Domain::Rect(r) => r.contains(u, v),
            Domain::Disk { center, radius } => {
                let (du, dv) = (u - center.0, v - center.1);
                du * du + dv * dv < radius * radius
            }
        }
    }

    pub fn bounding_rect(&self) -> Rect {
        match *self {
            Domain::Rect(r) => r,
            Domain::Disk { center, radius } => Rect {
                u_min: center.0 - radius,
                u_max: center.0 + radius,
                v_min: center.1 - radius,
                v_max: center.1 + radius,
            },
        }
    }

    /// Node-centred `n × n` lattice over the bounding rectangle, keeping
    /// only points inside the domain.
    pub fn lattice(&self, n: usize) -> Vec<(f64, f64)> {
        let b = self.bounding_rect();
        let n = n.max(2);
        let step = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
        (0..n)
            .flat_map(|j| (0..n).map(move |i| (i, j)))
            .map(|(i, j)| (step(b.u_min, b.u_max, i), step(b.v_min, b.v_max, j)))
            .filter(|&(u, v)| self.contains(u, v))
            .collect()
    }

    /// `n` uniformly distributed points, reproducible from `seed`.
    pub fn random_points(&self, n: usize, seed: u64) -> Vec<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = self.bounding_rect();
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let u = rng.gen_range(b.u_min..=b.u_max);
            let v = rng.gen_range(b.v_min..=b.v_max);
            if self.contains(u, v) {
                out.push((u, v));
            }
        }
        out
    }
}

impl From<Rect> for Domain {
    fn from(r: Rect) -> Self {
        Domain::Rect(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_field_jets() {
        let f = FnField::new(|u, v| u * v + u.sin());
        let j = f.jet(0.2, 3.0, 2).unwrap();
        assert!((j.value() - (0.6 + 0.2f64.sin())).abs() < 1e-15);
        assert!((j.derivative([0, 1, 1]) - 1.0).abs() < 1e-15);
        assert_eq!(j.d(0), 0.0);
    }

    #[test]
    fn non_finite_jet_is_an_error() {
        let f = FnField::new(|u, _v| u.ln());
        assert!(matches!(f.jet(-1.0, 0.0, 1), Err(Error::Evaluation { .. })));
    }

    #[test]
    fn disk_is_open() {
        let d = Domain::unit_disk();
        assert!(d.contains(0.0, 0.99));
        assert!(!d.contains(1.0, 0.0));
        assert!(d.random_points(50, 1).iter().all(|&(u, v)| u * u + v * v < 1.0));
    }

    #[test]
    fn random_points_are_reproducible() {
        let d = Domain::Rect(Rect::square(1.0));
        assert_eq!(d.random_points(10, 7), d.random_points(10, 7));
        assert_ne!(d.random_points(10, 7), d.random_points(10, 8));
    }
}
