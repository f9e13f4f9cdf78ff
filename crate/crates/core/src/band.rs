//! Row-major banded matrices with an unpivoted LU factorization.

use crate::error::{Result, WideError};
use alloc::vec;
use alloc::vec::Vec;

/// `n x n` matrix with `kl` sub- and `ku` superdiagonals. Row `i` stores
/// columns `i-kl ..= i+ku` contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        BandMatrix { n, kl, ku, data: vec![0.0; n * (kl + ku + 1)] }
    }

    pub fn size(&self) -> usize {
        self.n
    }
    pub fn lower(&self) -> usize {
        self.kl
    }
    pub fn upper(&self) -> usize {
        self.ku
    }

    #[inline]
    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    #[inline]
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku && i < self.n && j < self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width() + j + self.kl - i
    }

    /// Largest absolute row sum.
    pub fn max_row_sum(&self) -> f64 {
        self.data.chunks(self.width()).map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            0.0
        }
    }

    /// Panics outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn add_diagonal(&mut self, mu: f64) {
        for i in 0..self.n {
            let k = self.idx(i, i);
            self.data[k] += mu;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.data[self.idx(i, i)]).collect()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let w = self.width();
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku + 1).min(self.n);
            let row = &self.data[i * w..(i + 1) * w];
            let mut s = 0.0;
            for j in lo..hi {
                s += row[j + self.kl - i] * x[j];
            }
            y[i] = s;
        }
    }

    /// Largest occupied distance from the diagonal.
    pub fn occupied_bandwidth(&self) -> (usize, usize) {
        let (mut l, mut u) = (0, 0);
        for i in 0..self.n {
            for j in i.saturating_sub(self.kl)..(i + self.ku + 1).min(self.n) {
                if self.get(i, j) != 0.0 {
                    if j < i {
                        l = l.max(i - j);
                    } else {
                        u = u.max(j - i);
                    }
                }
            }
        }
        (l, u)
    }

    /// Doolittle LU without pivoting, in place. Fails on a zero or
    /// non-finite pivot.
    pub fn factor(mut self) -> Result<BandLu> {
        let (n, kl, ku, w) = (self.n, self.kl, self.ku, self.width());
        for k in 0..n {
            let piv = self.data[k * w + kl];
            if piv == 0.0 || !piv.is_finite() {
                return Err(WideError::SingularSystem { row: k, pivot: piv });
            }
            let jmax = (k + ku + 1).min(n);
            let imax = (k + kl + 1).min(n);
            for i in k + 1..imax {
                let (head, tail) = self.data.split_at_mut(i * w);
                let prow = &head[k * w..(k + 1) * w];
                let row = &mut tail[..w];
                let l = row[k + kl - i] / piv;
                row[k + kl - i] = l;
                if l != 0.0 {
                    let cnt = jmax - (k + 1);
                    let dst = &mut row[k + 1 + kl - i..k + 1 + kl - i + cnt];
                    let src = &prow[kl + 1..kl + 1 + cnt];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d -= l * s;
                    }
                }
            }
        }
        Ok(BandLu { m: self })
    }
}

/// Factors `L U` stored in the band of the original matrix.
#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
}

impl BandLu {
    pub fn pivots(&self) -> Vec<f64> {
        self.m.diagonal()
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let m = &self.m;
        let (n, kl, ku, w) = (m.n, m.kl, m.ku, m.width());
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let row = &m.data[i * w..(i + 1) * w];
            let mut s = b[i];
            for j in lo..i {
                s -= row[j + kl - i] * b[j];
            }
            b[i] = s;
        }
        for i in (0..n).rev() {
            let hi = (i + ku + 1).min(n);
            let row = &m.data[i * w..(i + 1) * w];
            let mut s = b[i];
            for j in i + 1..hi {
                s -= row[j + kl - i] * b[j];
            }
            b[i] = s / row[kl];
        }
    }
}
