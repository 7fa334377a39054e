//! Adaptive composite Simpson quadrature for vector-valued integrands.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;
const MAX_EVALS: usize = 4_000_000;
const INITIAL_PANELS: usize = 4;

struct State<'a, const N: usize> {
    f: &'a dyn Fn(f64) -> Result<[f64; N]>,
    evals: usize,
}

fn add<const N: usize>(a: [f64; N], b: [f64; N]) -> [f64; N] {
    std::array::from_fn(|k| a[k] + b[k])
}

fn simpson<const N: usize>(h: f64, fa: &[f64; N], fm: &[f64; N], fb: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|k| h / 6.0 * (fa[k] + 4.0 * fm[k] + fb[k]))
}

impl<const N: usize> State<'_, N> {
    fn eval(&mut self, x: f64) -> Result<[f64; N]> {
        self.evals += 1;
        if self.evals > MAX_EVALS {
            return Err(Error::Accuracy(format!(
                "quadrature exceeded {MAX_EVALS} integrand evaluations"
            )));
        }
        (self.f)(x)
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(
        &mut self,
        a: f64,
        b: f64,
        fa: [f64; N],
        fm: [f64; N],
        fb: [f64; N],
        whole: [f64; N],
        tol: f64,
        depth: u32,
    ) -> Result<[f64; N]> {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let flm = self.eval(lm)?;
        let frm = self.eval(rm)?;
        let left = simpson(m - a, &fa, &flm, &fm);
        let right = simpson(b - m, &fm, &frm, &fb);
        let both = add(left, right);
        let err = (0..N).map(|k| (both[k] - whole[k]).abs()).fold(0.0, f64::max);
        // below this the estimate is rounding noise in the integrand
        let scale = [&fa, &flm, &fm, &frm, &fb].iter().flat_map(|f| f.iter()).fold(0.0f64, |s, x| s.max(x.abs()));
        let noise = 64.0 * f64::EPSILON * (b - a).abs() * scale;
        if err <= 15.0 * tol.max(noise) {
            return Ok(std::array::from_fn(|k| both[k] + (both[k] - whole[k]) / 15.0));
        }
        if depth >= MAX_DEPTH || !err.is_finite() {
            return Err(Error::Accuracy(format!(
                "quadrature did not converge on [{a}, {b}] (error estimate {err:e}, tolerance {tol:e})"
            )));
        }
        let l = self.refine(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?;
        let r = self.refine(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?;
        Ok(add(l, r))
    }
}

/// `∫_a^b f(x) dx` componentwise, to absolute tolerance `tol` in the max norm.
/// `b < a` is allowed and yields the negated integral.
pub fn adaptive_simpson<const N: usize>(
    f: &dyn Fn(f64) -> Result<[f64; N]>,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<[f64; N]> {
    if a == b {
        return Ok([0.0; N]);
    }
    let mut st = State { f, evals: 0 };
    let h = (b - a) / INITIAL_PANELS as f64;
    let panel_tol = tol / INITIAL_PANELS as f64;
    let mut total = [0.0; N];
    let mut x0 = a;
    let mut f0 = st.eval(x0)?;
    for i in 0..INITIAL_PANELS {
        let x1 = if i + 1 == INITIAL_PANELS { b } else { a + h * (i + 1) as f64 };
        let xm = 0.5 * (x0 + x1);
        let fm = st.eval(xm)?;
        let f1 = st.eval(x1)?;
        let whole = simpson(x1 - x0, &f0, &fm, &f1);
        let part = st.refine(x0, x1, f0, fm, f1, whole, panel_tol, 0)?;
        total = add(total, part);
        x0 = x1;
        f0 = f1;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = adaptive_simpson(&|x| Ok([1.0, x * x * x, x]), 0.0, 2.0, 1e-12).unwrap();
        assert!((r[0] - 2.0).abs() < 1e-14);
        assert!((r[1] - 4.0).abs() < 1e-13);
        assert!((r[2] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn reversed_limits_negate() {
        let f = |x: f64| Ok([x.exp()]);
        let a = adaptive_simpson(&f, 0.0, 1.0, 1e-12).unwrap()[0];
        let b = adaptive_simpson(&f, 1.0, 0.0, 1e-12).unwrap()[0];
        assert!((a - (1f64.exp() - 1.0)).abs() < 1e-12);
        assert!((a + b).abs() < 1e-14);
    }

    #[test]
    fn interval_of_a_few_ulps() {
        let a = -0.360415894982024;
        let b = -0.3604158949820243;
        let r = adaptive_simpson(&|x: f64| Ok([2.0 + x.sin()]), a, b, 1e-13).unwrap()[0];
        assert!((r - (b - a) * (2.0 + a.sin())).abs() < 1e-28);
    }

    #[test]
    fn rational_integrand() {
        // ∫_0^1 2/(1+s²)² ds = π/4 + 1/2
        let r = adaptive_simpson(&|s| Ok([2.0 / (1.0 + s * s).powi(2)]), 0.0, 1.0, 1e-12).unwrap();
        assert!((r[0] - (std::f64::consts::FRAC_PI_4 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn singular_integrand_reports_accuracy_error() {
        let r = adaptive_simpson(&|s: f64| Ok([1.0 / s.abs().max(1e-300)]), -1.0, 1.0, 1e-12);
        assert!(matches!(r, Err(Error::Accuracy(_))));
    }
}
