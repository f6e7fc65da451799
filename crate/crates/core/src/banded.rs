//! Banded LU factorization with partial pivoting.
//!
//! Storage follows the LAPACK `gbtrf` layout: an `(2 kl + ku + 1) × n`
//! array where entry `(i, j)` of the matrix sits at row `kl + ku + i - j`.
//! The extra `kl` rows hold fill-in from row interchanges.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self {
            n,
            kl,
            ku,
            ab: vec![0.0; (2 * kl + ku + 1) * n],
        }
    }

    fn ldab(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.ldab() + self.kl + self.ku + i - j
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i <= j + self.kl && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.ab[self.idx(i, j)]
        } else {
            0.0
        }
    }

    /// # Panics
    /// If `(i, j)` lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.ab[k] = v;
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.n, |i, _| {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku + 1).min(self.n);
            (lo..hi).map(|j| self.get(i, j) * x[j]).sum()
        })
    }

    /// 1-norm.
    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| {
                let lo = j.saturating_sub(self.ku);
                let hi = (j + self.kl + 1).min(self.n);
                (lo..hi).map(|i| self.get(i, j).abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn lu(&self) -> Result<BandedLu> {
        BandedLu::factor(self.clone())
    }
}

/// `P A = L U` of a banded matrix.
#[derive(Debug, Clone)]
pub struct BandedLu {
    m: BandedMatrix,
    pivots: Vec<usize>,
    norm1: f64,
}

impl BandedLu {
    fn factor(mut m: BandedMatrix) -> Result<Self> {
        let norm1 = m.norm1();
        let (n, kl, ku) = (m.n, m.kl, m.ku);
        let mut pivots = vec![0; n];
        // U may extend kl + ku above the diagonal after pivoting
        let kv = kl + ku;
        for j in 0..n {
            let last = (j + kl).min(n - 1);
            let mut p = j;
            let mut best = m.ab[m.idx(j, j)].abs();
            for i in j + 1..=last {
                let v = m.ab[m.idx(i, j)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            pivots[j] = p;
            if best == 0.0 {
                return Err(Error::IllConditioned(f64::INFINITY));
            }
            let jend = (j + kv).min(n - 1);
            if p != j {
                for c in j..=jend {
                    let (a, b) = (m.idx(j, c), m.idx(p, c));
                    m.ab.swap(a, b);
                }
            }
            let piv = m.ab[m.idx(j, j)];
            for i in j + 1..=last {
                let k = m.idx(i, j);
                m.ab[k] /= piv;
                let l = m.ab[k];
                if l != 0.0 {
                    for c in j + 1..=jend {
                        let u = m.ab[m.idx(j, c)];
                        let t = m.idx(i, c);
                        m.ab[t] -= l * u;
                    }
                }
            }
        }
        Ok(Self { m, pivots, norm1 })
    }

    fn u(&self, i: usize, j: usize) -> f64 {
        self.m.ab[self.m.idx(i, j)]
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let (n, kl, kv) = (self.m.n, self.m.kl, self.m.kl + self.m.ku);
        let mut x = b.clone();
        for j in 0..n {
            x.swap_rows(j, self.pivots[j]);
            let xj = x[j];
            for i in j + 1..=(j + kl).min(n - 1) {
                x[i] -= self.u(i, j) * xj;
            }
        }
        for j in (0..n).rev() {
            x[j] /= self.u(j, j);
            let xj = x[j];
            for i in j.saturating_sub(kv)..j {
                x[i] -= self.u(i, j) * xj;
            }
        }
        x
    }

    /// Solve `Aᵀ x = b`.
    pub fn solve_transpose(&self, b: &DVector<f64>) -> DVector<f64> {
        let (n, kl, kv) = (self.m.n, self.m.kl, self.m.kl + self.m.ku);
        let mut x = b.clone();
        for j in 0..n {
            let s: f64 = (j.saturating_sub(kv)..j).map(|i| self.u(i, j) * x[i]).sum();
            x[j] = (x[j] - s) / self.u(j, j);
        }
        for j in (0..n).rev() {
            let s: f64 = (j + 1..=(j + kl).min(n - 1)).map(|i| self.u(i, j) * x[i]).sum();
            x[j] -= s;
            x.swap_rows(j, self.pivots[j]);
        }
        x
    }

    /// Hager's estimate of `‖A⁻¹‖₁`, times `‖A‖₁`.
    pub fn condition_estimate(&self) -> f64 {
        let n = self.m.n;
        let mut x = DVector::from_element(n, 1.0 / n as f64);
        let mut est = 0.0;
        for _ in 0..5 {
            let y = self.solve(&x);
            let new = y.iter().map(|v| v.abs()).sum::<f64>();
            let xi = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
            let z = self.solve_transpose(&xi);
            let (jmax, zmax) = z
                .iter()
                .enumerate()
                .fold((0, 0.0), |acc, (j, v)| if v.abs() > acc.1 { (j, v.abs()) } else { acc });
            if new <= est || zmax <= z.dot(&x) {
                est = est.max(new);
                break;
            }
            est = new;
            x = DVector::zeros(n);
            x[jmax] = 1.0;
        }
        est * self.norm1
    }
}
