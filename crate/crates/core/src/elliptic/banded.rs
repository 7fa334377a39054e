//! Banded LU factorization with partial pivoting.
//!
//! Storage follows the LAPACK `gbtrf` layout: column `j` holds rows
//! `j − ku − kl ..= j + kl`, the extra `kl` rows absorbing fill-in from
//! row interchanges.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            ldab,
            ab: vec![0.0; ldab * n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        j * self.ldab + (self.kl + self.ku + i - j)
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i <= j + self.kl && j <= i + self.ku
    }

    /// Adds `x` to entry `(i, j)`, which must lie inside the band.
    pub fn add(&mut self, i: usize, j: usize, x: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside the band");
        let k = self.slot(i, j);
        self.ab[k] += x;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.ab[self.slot(i, j)]
        } else {
            0.0
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for (i, yi) in y.iter_mut().enumerate().take(hi + 1).skip(lo) {
                *yi += self.ab[self.slot(i, j)] * x[j];
            }
        }
        y
    }

    /// Factorizes in place, consuming the matrix.
    pub fn factor(mut self) -> Result<BandLu> {
        let (n, kl, ku, ldab) = (self.n, self.kl, self.ku, self.ldab);
        let kv = kl + ku;
        let mut ipiv = vec![0usize; n];
        let mut ju = 0usize;
        let idx = |i: usize, j: usize| j * ldab + kv + i - j;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let col = j * ldab + kv;
            let mut jp = 0;
            let mut best = self.ab[col].abs();
            for t in 1..=km {
                let x = self.ab[col + t].abs();
                if x > best {
                    best = x;
                    jp = t;
                }
            }
            ipiv[j] = j + jp;
            if best == 0.0 || !best.is_finite() {
                return Err(Error::RankDeficient(format!("zero pivot in column {j} of {n}")));
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    self.ab.swap(idx(j, c), idx(j + jp, c));
                }
            }
            let pivot = self.ab[col];
            for t in 1..=km {
                self.ab[col + t] /= pivot;
            }
            for c in j + 1..=ju {
                let ujc = self.ab[idx(j, c)];
                if ujc == 0.0 {
                    continue;
                }
                let base = idx(j, c);
                for t in 1..=km {
                    self.ab[base + t] -= self.ab[col + t] * ujc;
                }
            }
        }
        Ok(BandLu { m: self, ipiv })
    }
}

#[derive(Clone, Debug)]
pub struct BandLu {
    m: BandMatrix,
    ipiv: Vec<usize>,
}

impl BandLu {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let BandMatrix { n, kl, ku, ldab, ref ab } = self.m;
        let kv = kl + ku;
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let bj = b[j];
            if bj != 0.0 {
                let col = j * ldab + kv;
                for t in 1..=kl.min(n - 1 - j) {
                    b[j + t] -= ab[col + t] * bj;
                }
            }
        }
        for j in (0..n).rev() {
            let col = j * ldab + kv;
            b[j] /= ab[col];
            let bj = b[j];
            if bj != 0.0 {
                for t in 1..=kv.min(j) {
                    b[j - t] -= ab[col - t] * bj;
                }
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Solves `A x = b` and certifies `‖A x − b‖∞ ≤ tol · max(1, ‖b‖∞)`,
/// applying up to two rounds of iterative refinement.
pub fn solve_certified(a: BandMatrix, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    let check = a.clone();
    let lu = a.factor()?;
    let mut x = lu.solve(b);
    let bound = tol * b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut res = f64::INFINITY;
    for _ in 0..3 {
        let ax = check.mul_vec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        res = r.iter().fold(0.0, |m, v| m.max(v.abs()));
        if res <= bound {
            return Ok(x);
        }
        let dx = lu.solve(&r);
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
    }
    Err(Error::Accuracy(format!(
        "linear residual {res:e} above {bound:e} after refinement"
    )))
}
