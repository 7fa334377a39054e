//! Truncated multivariate Taylor arithmetic in the three coordinates
//! `(r, u, v)`, up to total order 3.
//!
//! A [`Jet`] stores the Taylor coefficients `c_α` of a function about a
//! point, so that `f(p + x) ≈ Σ c_α x^α` for `|α| ≤ order`. Mixed partials
//! share a single coefficient and are therefore symmetric by construction.
//! Fields that only depend on `(u, v)` simply carry zero `r`-coefficients.
//!
//! The derivative `∂^α f(p)` is recovered as `α! c_α`, see [`Jet::derivative`].

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::LazyLock;

use num_complex::Complex64;
use num_traits::Num;

/// Number of coordinates carried by every jet.
pub const NVARS: usize = 3;
/// Highest truncation order supported.
pub const MAX_ORDER: u8 = 3;
/// Number of monomials of total degree ≤ 3 in three variables.
pub const NCOEF: usize = 20;

/// Coordinate slot of `r`.
pub const R: usize = 0;
/// Coordinate slot of `u`.
pub const U: usize = 1;
/// Coordinate slot of `v`.
pub const V: usize = 2;

/// A point in `(r, u, v)` coordinates.
pub type Point = [f64; NVARS];

/// Scalars a jet can carry.
pub trait Scalar:
    Copy + Num + Neg<Output = Self> + From<f64> + fmt::Debug + Send + Sync + 'static
{
}

impl Scalar for f64 {}
impl Scalar for Complex64 {}

struct Tables {
    exps: [[u8; NVARS]; NCOEF],
    lookup: [[[usize; 4]; 4]; 4],
    /// `(a, b, a*b)` index triples sorted by result degree.
    products: Vec<(usize, usize, usize)>,
    /// `prod_end[k]`: number of product triples whose result has degree ≤ k.
    prod_end: [usize; 4],
    /// `coef_end[k]`: number of monomials of degree ≤ k.
    coef_end: [usize; 4],
}

fn degree(e: [u8; NVARS]) -> u8 {
    e.iter().sum()
}

static TABLES: LazyLock<Tables> = LazyLock::new(|| {
    let mut exps = [[0u8; NVARS]; NCOEF];
    let mut lookup = [[[usize::MAX; 4]; 4]; 4];
    let mut coef_end = [0usize; 4];
    let mut n = 0;
    for d in 0..=MAX_ORDER {
        for a in (0..=d).rev() {
            for b in (0..=d - a).rev() {
                let c = d - a - b;
                exps[n] = [a, b, c];
                lookup[a as usize][b as usize][c as usize] = n;
                n += 1;
            }
        }
        coef_end[d as usize] = n;
    }
    debug_assert_eq!(n, NCOEF);

    let mut products = Vec::new();
    for i in 0..NCOEF {
        for j in 0..NCOEF {
            let (ei, ej) = (exps[i], exps[j]);
            let e = [ei[0] + ej[0], ei[1] + ej[1], ei[2] + ej[2]];
            if degree(e) <= MAX_ORDER {
                let k = lookup[e[0] as usize][e[1] as usize][e[2] as usize];
                products.push((i, j, k));
            }
        }
    }
    products.sort_by_key(|&(_, _, k)| degree(exps[k]));
    let mut prod_end = [0usize; 4];
    for (d, end) in prod_end.iter_mut().enumerate() {
        *end = products
            .iter()
            .take_while(|&&(_, _, k)| degree(exps[k]) as usize <= d)
            .count();
    }
    Tables {
        exps,
        lookup,
        products,
        prod_end,
        coef_end,
    }
});

fn index_of(e: [u8; NVARS]) -> Option<usize> {
    if degree(e) > MAX_ORDER {
        return None;
    }
    let k = TABLES.lookup[e[0] as usize][e[1] as usize][e[2] as usize];
    (k != usize::MAX).then_some(k)
}

fn factorial(n: u8) -> f64 {
    (1..=n as u32).map(f64::from).product()
}

/// Truncated Taylor expansion of a scalar function of `(r, u, v)`.
#[derive(Clone, Copy, PartialEq)]
pub struct Jet<T: Scalar = f64> {
    order: u8,
    c: [T; NCOEF],
}

/// Complex-valued jet.
pub type CJet = Jet<Complex64>;

impl<T: Scalar> fmt::Debug for Jet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = &*TABLES;
        let mut dbg = f.debug_struct("Jet");
        dbg.field("order", &self.order);
        let terms: Vec<String> = (0..t.coef_end[self.order as usize])
            .filter(|&k| self.c[k] != T::zero())
            .map(|k| format!("{:?}*{:?}", self.c[k], t.exps[k]))
            .collect();
        dbg.field("terms", &terms).finish()
    }
}

impl<T: Scalar> Jet<T> {
    pub fn constant(value: T, order: u8) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut c = [T::zero(); NCOEF];
        c[0] = value;
        Jet { order, c }
    }

    pub fn zero(order: u8) -> Self {
        Self::constant(T::zero(), order)
    }

    /// The coordinate function `x_var` expanded about `value`.
    pub fn variable(var: usize, value: T, order: u8) -> Self {
        let mut j = Self::constant(value, order);
        if order >= 1 {
            j.c[1 + var] = T::one();
        }
        j
    }

    /// Seeds the three coordinate jets at `p`.
    pub fn coordinates(p: [T; NVARS], order: u8) -> [Self; NVARS] {
        [0, 1, 2].map(|i| Self::variable(i, p[i], order))
    }

    #[inline]
    pub fn order(&self) -> u8 {
        self.order
    }

    #[inline]
    pub fn value(&self) -> T {
        self.c[0]
    }

    /// Taylor coefficient of the monomial `x^α`; zero beyond the truncation order.
    pub fn taylor(&self, alpha: [u8; NVARS]) -> T {
        match index_of(alpha) {
            Some(k) if degree(alpha) <= self.order => self.c[k],
            _ => T::zero(),
        }
    }

    /// Sets the Taylor coefficient of `x^α`. Panics if `α` exceeds the order.
    pub fn set_taylor(&mut self, alpha: [u8; NVARS], value: T) {
        assert!(degree(alpha) <= self.order, "monomial beyond jet order");
        let k = index_of(alpha).expect("monomial within MAX_ORDER");
        self.c[k] = value;
    }

    /// Partial derivative `∂^α f` at the expansion point.
    pub fn derivative(&self, alpha: [u8; NVARS]) -> T {
        let scale = alpha.iter().map(|&a| factorial(a)).product::<f64>();
        self.taylor(alpha) * T::from(scale)
    }

    /// First partial derivative `∂f/∂x_var` at the expansion point.
    pub fn d(&self, var: usize) -> T {
        let mut alpha = [0; NVARS];
        alpha[var] = 1;
        self.taylor(alpha)
    }

    /// Jet of `∂f/∂x_var`, one order lower.
    pub fn partial(&self, var: usize) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let t = &*TABLES;
        let order = self.order - 1;
        let mut c = [T::zero(); NCOEF];
        for (k, slot) in c.iter_mut().enumerate().take(t.coef_end[order as usize]) {
            let mut e = t.exps[k];
            e[var] += 1;
            let src = index_of(e).expect("raised monomial within order");
            *slot = self.c[src] * T::from(f64::from(e[var]));
        }
        Jet { order, c }
    }

    /// Gradient jets `(∂_r f, ∂_u f, ∂_v f)`.
    pub fn gradient(&self) -> [Self; NVARS] {
        [0, 1, 2].map(|i| self.partial(i))
    }

    /// Drops every coefficient above `order`.
    pub fn truncate(&self, order: u8) -> Self {
        let order = order.min(self.order);
        let mut out = *self;
        out.order = order;
        for k in TABLES.coef_end[order as usize]..NCOEF {
            out.c[k] = T::zero();
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = *self;
        for x in out.c.iter_mut() {
            *x = *x * s;
        }
        out
    }

    pub fn map_coefficients(&self, f: impl Fn(T) -> T) -> Self {
        let mut out = *self;
        for x in out.c.iter_mut() {
            *x = f(*x);
        }
        out
    }

    /// `g(f)` for a univariate `g` given its value and first three derivatives at `f(p)`.
    pub fn compose(&self, d: [T; 4]) -> Self {
        let mut h = *self;
        h.c[0] = T::zero();
        let mut out = Self::constant(d[0], self.order);
        if self.order >= 1 {
            out += h.scale(d[1]);
        }
        if self.order >= 2 {
            let h2 = h * h;
            out += h2.scale(d[2] / T::from(2.0));
            if self.order >= 3 {
                out += (h2 * h).scale(d[3] / T::from(6.0));
            }
        }
        out
    }

    pub fn recip(&self) -> Self {
        let a = self.value();
        let inv = T::one() / a;
        let inv2 = inv * inv;
        self.compose([
            inv,
            -inv2,
            T::from(2.0) * inv2 * inv,
            T::from(-6.0) * inv2 * inv2,
        ])
    }

    pub fn powi(&self, n: i32) -> Self {
        if n < 0 {
            return self.recip().powi(-n);
        }
        let mut out = Self::constant(T::one(), self.order);
        let mut base = *self;
        let mut n = n as u32;
        while n > 0 {
            if n & 1 == 1 {
                out *= base;
            }
            base = base * base;
            n >>= 1;
        }
        out
    }

    pub fn square(&self) -> Self {
        *self * *self
    }
}

impl Jet<f64> {
    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|x| x.is_finite())
    }

    /// True when every derivative coefficient vanishes.
    pub fn is_constant(&self) -> bool {
        self.c[1..].iter().all(|&x| x == 0.0)
    }

    pub fn to_complex(&self) -> CJet {
        let mut c = [Complex64::new(0.0, 0.0); NCOEF];
        for (dst, &src) in c.iter_mut().zip(self.c.iter()) {
            *dst = Complex64::new(src, 0.0);
        }
        Jet { order: self.order, c }
    }

    pub fn sqrt(&self) -> Self {
        let s = self.value().sqrt();
        self.compose([
            s,
            0.5 / s,
            -0.25 / (s * s * s),
            0.375 / (s * s * s * s * s),
        ])
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose([e; 4])
    }

    pub fn ln(&self) -> Self {
        let a = self.value();
        self.compose([a.ln(), 1.0 / a, -1.0 / (a * a), 2.0 / (a * a * a)])
    }

    pub fn powf(&self, p: f64) -> Self {
        let a = self.value();
        self.compose([
            a.powf(p),
            p * a.powf(p - 1.0),
            p * (p - 1.0) * a.powf(p - 2.0),
            p * (p - 1.0) * (p - 2.0) * a.powf(p - 3.0),
        ])
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose([c, -s, -c, s])
    }

    pub fn tan(&self) -> Self {
        let t = self.value().tan();
        let sec2 = 1.0 + t * t;
        self.compose([
            t,
            sec2,
            2.0 * t * sec2,
            2.0 * sec2 * (1.0 + 3.0 * t * t),
        ])
    }

    pub fn atan(&self) -> Self {
        let a = self.value();
        let q = 1.0 + a * a;
        self.compose([
            a.atan(),
            1.0 / q,
            -2.0 * a / (q * q),
            (6.0 * a * a - 2.0) / (q * q * q),
        ])
    }

    pub fn sinh(&self) -> Self {
        let (s, c) = (self.value().sinh(), self.value().cosh());
        self.compose([s, c, s, c])
    }

    pub fn cosh(&self) -> Self {
        let (s, c) = (self.value().sinh(), self.value().cosh());
        self.compose([c, s, c, s])
    }

    pub fn tanh(&self) -> Self {
        let t = self.value().tanh();
        let s = 1.0 - t * t;
        self.compose([t, s, -2.0 * t * s, (6.0 * t * t - 2.0) * s])
    }

    pub fn atanh(&self) -> Self {
        let a = self.value();
        let q = 1.0 - a * a;
        self.compose([
            a.atanh(),
            1.0 / q,
            2.0 * a / (q * q),
            (2.0 + 6.0 * a * a) / (q * q * q),
        ])
    }

    /// `|f|`; the derivative part is that of `sign(f(p)) f`.
    pub fn abs(&self) -> Self {
        if self.value() < 0.0 {
            -*self
        } else {
            *self
        }
    }
}

impl Jet<Complex64> {
    pub fn conj(&self) -> Self {
        self.map_coefficients(|z| z.conj())
    }

    pub fn re(&self) -> Jet<f64> {
        let mut c = [0.0; NCOEF];
        for (dst, src) in c.iter_mut().zip(self.c.iter()) {
            *dst = src.re;
        }
        Jet { order: self.order, c }
    }

    pub fn im(&self) -> Jet<f64> {
        let mut c = [0.0; NCOEF];
        for (dst, src) in c.iter_mut().zip(self.c.iter()) {
            *dst = src.im;
        }
        Jet { order: self.order, c }
    }

    /// `e^{iθ}` for a real phase jet.
    pub fn cis(theta: &Jet<f64>) -> Self {
        let (c, s) = (theta.cos(), theta.sin());
        let mut out = c.to_complex();
        for (dst, src) in out.c.iter_mut().zip(s.c.iter()) {
            dst.im = *src;
        }
        out
    }
}

impl From<Jet<f64>> for CJet {
    fn from(j: Jet<f64>) -> Self {
        j.to_complex()
    }
}

impl<T: Scalar> Add for Jet<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let order = self.order.min(rhs.order);
        let mut c = [T::zero(); NCOEF];
        for k in 0..TABLES.coef_end[order as usize] {
            c[k] = self.c[k] + rhs.c[k];
        }
        Jet { order, c }
    }
}

impl<T: Scalar> Sub for Jet<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let order = self.order.min(rhs.order);
        let mut c = [T::zero(); NCOEF];
        for k in 0..TABLES.coef_end[order as usize] {
            c[k] = self.c[k] - rhs.c[k];
        }
        Jet { order, c }
    }
}

impl<T: Scalar> Mul for Jet<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let t = &*TABLES;
        let order = self.order.min(rhs.order);
        let mut c = [T::zero(); NCOEF];
        for &(a, b, k) in &t.products[..t.prod_end[order as usize]] {
            c[k] = c[k] + self.c[a] * rhs.c[b];
        }
        Jet { order, c }
    }
}

impl<T: Scalar> Div for Jet<T> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl<T: Scalar> Neg for Jet<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map_coefficients(|x| -x)
    }
}

impl<T: Scalar> Add<T> for Jet<T> {
    type Output = Self;
    fn add(mut self, rhs: T) -> Self {
        self.c[0] = self.c[0] + rhs;
        self
    }
}

impl<T: Scalar> Sub<T> for Jet<T> {
    type Output = Self;
    fn sub(mut self, rhs: T) -> Self {
        self.c[0] = self.c[0] - rhs;
        self
    }
}

impl<T: Scalar> Mul<T> for Jet<T> {
    type Output = Self;
    fn mul(self, rhs: T) -> Self {
        self.scale(rhs)
    }
}

impl<T: Scalar> Div<T> for Jet<T> {
    type Output = Self;
    fn div(self, rhs: T) -> Self {
        self.scale(T::one() / rhs)
    }
}

impl Add<Jet<f64>> for f64 {
    type Output = Jet<f64>;
    fn add(self, rhs: Jet<f64>) -> Jet<f64> {
        rhs + self
    }
}

impl Sub<Jet<f64>> for f64 {
    type Output = Jet<f64>;
    fn sub(self, rhs: Jet<f64>) -> Jet<f64> {
        -rhs + self
    }
}

impl Mul<Jet<f64>> for f64 {
    type Output = Jet<f64>;
    fn mul(self, rhs: Jet<f64>) -> Jet<f64> {
        rhs.scale(self)
    }
}

impl Div<Jet<f64>> for f64 {
    type Output = Jet<f64>;
    fn div(self, rhs: Jet<f64>) -> Jet<f64> {
        rhs.recip().scale(self)
    }
}

impl<T: Scalar> AddAssign for Jet<T> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Scalar> SubAssign for Jet<T> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<T: Scalar> MulAssign for Jet<T> {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

/// `Σ_i a_i b_i` over jets.
pub fn dot<T: Scalar>(a: &[Jet<T>; NVARS], b: &[Jet<T>; NVARS]) -> Jet<T> {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn at(p: Point) -> [Jet; 3] {
        Jet::coordinates(p, 3)
    }

    #[test]
    fn table_shape() {
        let t = &*TABLES;
        assert_eq!(t.coef_end, [1, 4, 10, 20]);
        assert_eq!(t.products.len(), t.prod_end[3]);
        assert_eq!(t.prod_end[0], 1);
    }

    #[test]
    fn polynomial_derivatives_are_exact() {
        // f = u^2 v + 3 r u - v^3 at (0.5, 2, -1)
        let [r, u, v] = at([0.5, 2.0, -1.0]);
        let f = u * u * v + r * u * 3.0 - v * v * v;
        assert_abs_diff_eq!(f.value(), -4.0 + 3.0 + 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.derivative([0, 1, 0]), -4.0 + 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(f.derivative([0, 1, 1]), 4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.derivative([0, 2, 1]), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.derivative([0, 0, 3]), -6.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.derivative([1, 1, 0]), 3.0, epsilon = 1e-14);
        assert_eq!(f.derivative([1, 1, 1]), 0.0);
    }

    #[test]
    fn partial_lowers_order() {
        let [_, u, v] = at([0.0, 1.0, 2.0]);
        let f = u * u * v;
        let fu = f.partial(U);
        assert_eq!(fu.order(), 2);
        assert_abs_diff_eq!(fu.value(), 4.0);
        assert_abs_diff_eq!(fu.derivative([0, 1, 1]), 2.0);
    }

    #[test]
    fn elementary_functions_match_closed_forms() {
        let x = Jet::variable(U, 0.3, 3);
        let cases: Vec<(Jet, [f64; 4])> = vec![
            (x.sin(), [0.3f64.sin(), 0.3f64.cos(), -0.3f64.sin(), -0.3f64.cos()]),
            (x.exp(), [0.3f64.exp(); 4]),
            (x.ln(), [0.3f64.ln(), 1.0 / 0.3, -1.0 / 0.09, 2.0 / 0.027]),
            (x.recip(), [1.0 / 0.3, -1.0 / 0.09, 2.0 / 0.027, -6.0 / 0.0081]),
        ];
        for (j, d) in cases {
            for k in 0..4u8 {
                assert_abs_diff_eq!(j.derivative([0, k, 0]), d[k as usize], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn inverse_functions_compose_to_identity() {
        let x = Jet::variable(V, 0.4, 3);
        let ids = [x.tan().atan(), x.tanh().atanh(), x.exp().ln(), x.sqrt().square()];
        for id in ids {
            assert_abs_diff_eq!(id.value(), 0.4, epsilon = 1e-14);
            assert_abs_diff_eq!(id.d(V), 1.0, epsilon = 1e-13);
            assert_abs_diff_eq!(id.derivative([0, 0, 2]), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(id.derivative([0, 0, 3]), 0.0, epsilon = 1e-11);
        }
        let hyper = x.cosh().square() - x.sinh().square();
        assert_abs_diff_eq!(hyper.derivative([0, 0, 3]), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn complex_phase() {
        let r = Jet::variable(R, 0.7, 3);
        let z = CJet::cis(&r);
        assert_abs_diff_eq!(z.value().re, 0.7f64.cos());
        // d/dr e^{ir} = i e^{ir}
        let dz = z.d(R);
        assert_abs_diff_eq!(dz.re, -0.7f64.sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(dz.im, 0.7f64.cos(), epsilon = 1e-15);
        let one = z * z.conj();
        assert_abs_diff_eq!(one.derivative([3, 0, 0]).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn truncation_follows_lowest_order() {
        let a = Jet::variable(U, 1.0, 3);
        let b = Jet::variable(V, 2.0, 1);
        let p = a * b;
        assert_eq!(p.order(), 1);
        assert_eq!(p.taylor([0, 1, 1]), 0.0);
    }
}
