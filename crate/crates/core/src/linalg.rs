//! Dense row-major matrices, a blocked LU factorization with partial pivoting,
//! and the handful of products the input-output code needs.

use alloc::vec;
use alloc::vec::Vec;

/// Panel width of the blocked factorization.
const PANEL: usize = 64;
/// Column tile width of the trailing update; keeps a `PANEL x TILE` slab of U in cache.
const TILE: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is singular (zero pivot in column {0})")]
    Singular(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Builds a matrix from nested rows. Panics on ragged input; intended for literals.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        DenseMatrix {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (acc, v) in s.iter_mut().zip(self.row(i)) {
                *acc += v;
            }
        }
        s
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Elementwise maximum of `|self - other|`.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn add_assign(&mut self, other: &DenseMatrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    /// `I - self` for a square matrix.
    pub fn identity_minus(&self) -> DenseMatrix {
        assert!(self.is_square());
        let n = self.rows;
        let mut m = DenseMatrix {
            rows: n,
            cols: n,
            data: self.data.iter().map(|v| -v).collect(),
        };
        for i in 0..n {
            m.data[i * n + i] += 1.0;
        }
        m
    }

    /// Matrix product. Zero entries of `self` are skipped, so a sparse left
    /// operand (such as a nearly diagonal market-share matrix) is cheap.
    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                found: rhs.rows,
            });
        }
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &lik) in self.row(i).iter().enumerate() {
                if lik == 0.0 {
                    continue;
                }
                add_scaled(out_row, lik, rhs.row(k));
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if x.len() != self.cols {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// Column `j` as an owned vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }
}

/// `y += a * x`
#[inline]
fn add_scaled(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// `y -= a * x`
#[inline]
fn sub_scaled(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi -= a * xi;
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// LU factorization `P M = L U` with unit lower `L`, stored packed.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: DenseMatrix,
    /// Row `k` was swapped with row `swaps[k]` at step `k`.
    swaps: Vec<usize>,
}

impl LuFactors {
    /// Factorizes a square matrix. The computation is sequential and
    /// deterministic for a given input.
    pub fn factorize(mut m: DenseMatrix) -> Result<Self, LinalgError> {
        if !m.is_square() {
            return Err(LinalgError::DimensionMismatch {
                expected: m.rows,
                found: m.cols,
            });
        }
        let n = m.rows;
        let mut swaps = vec![0usize; n];
        let data = &mut m.data;

        let mut kb = 0;
        while kb < n {
            let kend = (kb + PANEL).min(n);

            // Unblocked factorization of the panel columns kb..kend.
            for k in kb..kend {
                let mut p = k;
                let mut best = data[k * n + k].abs();
                for i in k + 1..n {
                    let v = data[i * n + k].abs();
                    if v > best {
                        best = v;
                        p = i;
                    }
                }
                if best == 0.0 || !best.is_finite() {
                    return Err(LinalgError::Singular(k));
                }
                swaps[k] = p;
                if p != k {
                    let (top, bottom) = data.split_at_mut(p * n);
                    top[k * n..(k + 1) * n].swap_with_slice(&mut bottom[..n]);
                }
                let (top, bottom) = data.split_at_mut((k + 1) * n);
                let pivot_row = &top[k * n..(k + 1) * n];
                let pivot = pivot_row[k];
                for row in bottom.chunks_exact_mut(n) {
                    let l = row[k] / pivot;
                    row[k] = l;
                    if l != 0.0 {
                        sub_scaled(&mut row[k + 1..kend], l, &pivot_row[k + 1..kend]);
                    }
                }
            }

            if kend < n {
                // U12 = L11^{-1} A12
                for k in kb..kend {
                    let (top, bottom) = data.split_at_mut((k + 1) * n);
                    let src = &top[k * n + kend..(k + 1) * n];
                    for row in bottom[..(kend - k - 1) * n].chunks_exact_mut(n) {
                        let l = row[k];
                        if l != 0.0 {
                            sub_scaled(&mut row[kend..], l, src);
                        }
                    }
                }
                // A22 -= L21 U12, tiled over columns.
                let (top, bottom) = data.split_at_mut(kend * n);
                let mut jt = kend;
                while jt < n {
                    let jend = (jt + TILE).min(n);
                    for row in bottom.chunks_exact_mut(n) {
                        let (left, right) = row.split_at_mut(jt);
                        let target = &mut right[..jend - jt];
                        for k in kb..kend {
                            let l = left[k];
                            if l != 0.0 {
                                sub_scaled(target, l, &top[k * n + jt..k * n + jend]);
                            }
                        }
                    }
                    jt = jend;
                }
            }
            kb = kend;
        }
        Ok(LuFactors { lu: m, swaps })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    /// Solves `M x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) -> Result<(), LinalgError> {
        let n = self.dim();
        if b.len() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        for (k, &p) in self.swaps.iter().enumerate() {
            b.swap(k, p);
        }
        for i in 0..n {
            let s = dot(&self.lu.row(i)[..i], &b[..i]);
            b[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s = dot(&row[i + 1..], &b[i + 1..]);
            b[i] = (b[i] - s) / row[i];
        }
        Ok(())
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    /// Explicit inverse, column by column.
    pub fn inverse(&self) -> DenseMatrix {
        let n = self.dim();
        let mut inv = DenseMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            self.solve_in_place(&mut e).expect("dimension checked");
            for (i, v) in e.iter().enumerate() {
                inv.data[i * n + j] = *v;
            }
        }
        inv
    }
}
