//! Banded matrices and a banded LU factorization with partial pivoting.
//!
//! Every implicit system in this crate is banded: the 1D step matrices are
//! pentadiagonal, the 2D ones have half-bandwidth `2 (N_x - 2)` under the
//! lexicographic ordering, and the interleaved `(u, v)` subdomain systems of
//! the Neumann-Neumann solver have half-bandwidth 3.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Square matrix stored by rows over the band `j - i ∈ [-kl, ku]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self {
            n,
            kl,
            ku,
            data: vec![0.0; n * (kl + ku + 1)],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), 0, 0);
        m.data.copy_from_slice(diag);
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn lower_bandwidth(&self) -> usize {
        self.kl
    }

    #[inline]
    pub fn upper_bandwidth(&self) -> usize {
        self.ku
    }

    #[inline]
    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    #[inline]
    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && j <= i + self.ku
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        i * self.width() + (j + self.kl - i)
    }

    /// Columns of row `i` that lie inside the band.
    #[inline]
    pub fn row_range(&self, i: usize) -> std::ops::RangeInclusive<usize> {
        i.saturating_sub(self.kl)..=(i + self.ku).min(self.n - 1)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.index(i, j)]
        } else {
            0.0
        }
    }

    /// Panics if `(i, j)` lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let idx = self.index(i, j);
        self.data[idx] = value;
    }

    /// Panics if `(i, j)` lies outside the band.
    pub fn add_to(&mut self, i: usize, j: usize, value: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let idx = self.index(i, j);
        self.data[idx] += value;
    }

    /// Same entries, re-stored with (at least) the requested bandwidths.
    pub fn widen(&self, kl: usize, ku: usize) -> Self {
        let kl = kl.max(self.kl);
        let ku = ku.max(self.ku);
        if kl == self.kl && ku == self.ku {
            return self.clone();
        }
        let mut out = Self::zeros(self.n, kl, ku);
        for i in 0..self.n {
            for j in self.row_range(i) {
                out.set(i, j, self.get(i, j));
            }
        }
        out
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let w = self.width();
        for (i, yi) in y.iter_mut().enumerate() {
            let row = &self.data[i * w..(i + 1) * w];
            let mut acc = 0.0;
            for j in self.row_range(i) {
                acc += row[j + self.kl - i] * x[j];
            }
            *yi = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// Matrix product; the bandwidths of the result are the sums of the
    /// operands' bandwidths.
    pub fn matmul(&self, other: &BandMatrix) -> BandMatrix {
        assert_eq!(self.n, other.n);
        let mut out = BandMatrix::zeros(self.n, self.kl + other.kl, self.ku + other.ku);
        for i in 0..self.n {
            for k in self.row_range(i) {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in other.row_range(k) {
                    out.add_to(i, j, a * other.get(k, j));
                }
            }
        }
        out
    }

    /// `self · diag(d)`.
    pub fn scale_columns(&self, d: &[f64]) -> BandMatrix {
        assert_eq!(d.len(), self.n);
        let mut out = self.clone();
        for i in 0..self.n {
            for j in self.row_range(i) {
                let idx = out.index(i, j);
                out.data[idx] *= d[j];
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> BandMatrix {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `self + s · other`, stored with the wider of the two bands.
    pub fn add_scaled(&self, s: f64, other: &BandMatrix) -> BandMatrix {
        assert_eq!(self.n, other.n);
        let mut out = self.widen(other.kl, other.ku);
        for i in 0..other.n {
            for j in other.row_range(i) {
                out.add_to(i, j, s * other.get(i, j));
            }
        }
        out
    }

    pub fn transpose(&self) -> BandMatrix {
        let mut out = BandMatrix::zeros(self.n, self.ku, self.kl);
        for i in 0..self.n {
            for j in self.row_range(i) {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn factor(&self) -> Result<BandLu> {
        BandLu::new(self)
    }
}

/// `P A = L U` for a banded `A`, following the LAPACK `gbtrf` layout:
/// row interchanges are recorded per elimination step and the multipliers
/// are never permuted afterwards, so the solve replays the steps in order.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    /// Upper bandwidth of `U`, i.e. `kl + ku` of the original matrix.
    ku: usize,
    /// Row `i` holds columns `i - kl ..= i + ku` of the working matrix.
    upper: Vec<f64>,
    /// `lower[k * kl + r]` is the multiplier for row `k + 1 + r` at step `k`.
    lower: Vec<f64>,
    pivots: Vec<usize>,
    pivot_ratio: f64,
}

impl BandLu {
    fn new(a: &BandMatrix) -> Result<Self> {
        let n = a.n;
        let kl = a.kl;
        let ku = a.kl + a.ku;
        let w = kl + ku + 1;
        let at = |i: usize, j: usize| i * w + (j + kl - i);

        let mut upper = vec![0.0; n * w];
        for i in 0..n {
            for j in a.row_range(i) {
                upper[at(i, j)] = a.get(i, j);
            }
        }
        let mut lower = vec![0.0; n * kl];
        let mut pivots = vec![0; n];
        let mut max_pivot = 0.0_f64;
        let mut min_pivot = f64::INFINITY;

        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + ku).min(n - 1);

            let mut p = k;
            let mut best = upper[at(k, k)].abs();
            for i in k + 1..=last_row {
                let v = upper[at(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            pivots[k] = p;
            if best.is_nan() || best <= 0.0 || best.is_infinite() {
                let condition_estimate = if best > 0.0 { max_pivot / best } else { f64::INFINITY };
                return Err(Error::SingularMatrix {
                    row: k,
                    condition_estimate,
                });
            }
            max_pivot = max_pivot.max(best);
            min_pivot = min_pivot.min(best);

            if p != k {
                for j in k..=last_col {
                    upper.swap(at(k, j), at(p, j));
                }
            }

            let pivot = upper[at(k, k)];
            for i in k + 1..=last_row {
                let l = upper[at(i, k)] / pivot;
                lower[k * kl + (i - k - 1)] = l;
                if l != 0.0 {
                    for j in k + 1..=last_col {
                        upper[at(i, j)] -= l * upper[at(k, j)];
                    }
                }
            }
        }

        Ok(Self {
            n,
            kl,
            ku,
            upper,
            lower,
            pivots,
            pivot_ratio: if n == 0 { 1.0 } else { max_pivot / min_pivot },
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Ratio of the largest to the smallest pivot magnitude; a cheap
    /// lower-bound proxy for the condition number.
    pub fn pivot_ratio(&self) -> f64 {
        self.pivot_ratio
    }

    #[allow(clippy::needless_range_loop)]
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let w = kl + ku + 1;
        let at = |i: usize, j: usize| i * w + (j + kl - i);

        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for i in k + 1..=(k + kl).min(n - 1) {
                    b[i] -= self.lower[k * kl + (i - k - 1)] * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut acc = b[k];
            for j in k + 1..=(k + ku).min(n - 1) {
                acc -= self.upper[at(k, j)] * b[j];
            }
            b[k] = acc / self.upper[at(k, k)];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_band(n: usize, kl: usize, ku: usize, seed: u64) -> BandMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = BandMatrix::zeros(n, kl, ku);
        for i in 0..n {
            for j in m.row_range(i) {
                m.set(i, j, rng.random_range(-1.0..1.0));
            }
        }
        m
    }

    #[test]
    fn lu_solve_matches_dense() {
        for &(n, kl, ku) in &[(1, 0, 0), (5, 1, 1), (12, 2, 2), (20, 3, 1), (9, 0, 4)] {
            let a = random_band(n, kl, ku, n as u64 + 7);
            let b: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 0.5).collect();
            let x = a.factor().unwrap().solve(&b);
            let dense = a
                .to_dense()
                .lu()
                .solve(&nalgebra::DVector::from_vec(b.clone()))
                .unwrap();
            for i in 0..n {
                assert!((x[i] - dense[i]).abs() < 1e-9 * (1.0 + dense[i].abs()), "n={n} i={i}");
            }
        }
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        // [[0, 1], [1, 0]] needs a row swap.
        let mut a = BandMatrix::zeros(2, 1, 1);
        a.set(0, 1, 1.0);
        a.set(1, 0, 1.0);
        let x = a.factor().unwrap().solve(&[3.0, 4.0]);
        assert_eq!(x, vec![4.0, 3.0]);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = BandMatrix::zeros(3, 1, 1);
        assert!(matches!(a.factor(), Err(Error::SingularMatrix { row: 0, .. })));
    }

    #[test]
    fn products_match_dense() {
        let a = random_band(10, 1, 2, 1);
        let b = random_band(10, 2, 1, 2);
        let d: Vec<f64> = (0..10).map(|i| i as f64 - 3.0).collect();
        let prod = a.matmul(&b).to_dense();
        let expected = a.to_dense() * b.to_dense();
        assert!((prod - expected).amax() < 1e-14);
        let scaled = a.scale_columns(&d).to_dense();
        let expected = a.to_dense() * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d));
        assert!((scaled - expected).amax() < 1e-14);
        let sum = a.add_scaled(-2.0, &b).to_dense();
        assert!((sum - (a.to_dense() - 2.0 * b.to_dense())).amax() < 1e-14);
        assert_eq!(a.transpose().to_dense(), a.to_dense().transpose());
    }
}
