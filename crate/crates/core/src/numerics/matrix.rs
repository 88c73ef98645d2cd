use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "matrix {rows}x{cols} needs {} elements, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
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

    /// Builds a matrix from equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::invalid(format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact(0) panics; a zero-column matrix has no meaningful rows anyway
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self · other`.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(self.shape_err("matmul", other));
        }
        Ok(gemm(self, other))
    }

    /// `self · otherᵀ`.
    pub fn matmul_nt(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(self.shape_err("matmul_nt", other));
        }
        Ok(gemm(self, &other.transpose()))
    }

    /// `selfᵀ · other`.
    pub fn matmul_tn(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(self.shape_err("matmul_tn", other));
        }
        Ok(gemm(&self.transpose(), other))
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// Adds `v` to every row.
    pub fn add_row_vector(&mut self, v: &[f64]) -> Result<()> {
        if v.len() != self.cols {
            return Err(Error::Shape {
                op: "add_row_vector",
                left: self.shape(),
                right: (1, v.len()),
            });
        }
        for row in self.data.chunks_exact_mut(self.cols.max(1)) {
            for (x, b) in row.iter_mut().zip(v) {
                *x += b;
            }
        }
        Ok(())
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for row in self.row_iter() {
            for (s, x) in sums.iter_mut().zip(row) {
                *s += x;
            }
        }
        sums
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// New matrix made of the listed rows, in order.
    pub fn gather_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    fn shape_err(&self, op: &'static str, other: &Matrix) -> Error {
        Error::Shape {
            op,
            left: self.shape(),
            right: other.shape(),
        }
    }
}

const TILE_ROWS: usize = 4;
const TILE_COLS: usize = 8;

/// Row-major product with a 4x8 register tile. Every output entry is summed
/// over `k` in ascending order with separate multiplies and adds, so the
/// result depends neither on tiling nor on the vector width picked at runtime.
fn gemm(a: &Matrix, b: &Matrix) -> Matrix {
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("avx") {
        // SAFETY: the CPU supports AVX
        return unsafe { gemm_avx(a, b) };
    }
    gemm_kernel(a, b)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx")]
unsafe fn gemm_avx(a: &Matrix, b: &Matrix) -> Matrix {
    gemm_kernel(a, b)
}

#[inline(always)]
fn gemm_kernel(a: &Matrix, b: &Matrix) -> Matrix {
    let (m, n) = (a.rows, b.cols);
    let mut out = Matrix::zeros(m, n);
    let full_cols = n - n % TILE_COLS;
    let mut i = 0;
    while i + TILE_ROWS <= m {
        let rows: [&[f64]; TILE_ROWS] = std::array::from_fn(|r| a.row(i + r));
        let mut j = 0;
        while j < full_cols {
            let mut acc = [[0.0f64; TILE_COLS]; TILE_ROWS];
            let a_cols = rows[0].iter().zip(rows[1]).zip(rows[2]).zip(rows[3]);
            for (b_row, (((&a0, &a1), &a2), &a3)) in b.data.chunks_exact(n).zip(a_cols) {
                let bk: &[f64; TILE_COLS] = b_row[j..j + TILE_COLS].try_into().unwrap();
                for (acc_r, av) in acc.iter_mut().zip([a0, a1, a2, a3]) {
                    for c in 0..TILE_COLS {
                        acc_r[c] += av * bk[c];
                    }
                }
            }
            for r in 0..TILE_ROWS {
                out.data[(i + r) * n + j..(i + r) * n + j + TILE_COLS].copy_from_slice(&acc[r]);
            }
            j += TILE_COLS;
        }
        for r in 0..TILE_ROWS {
            gemm_row_tail(rows[r], b, full_cols, &mut out.data[(i + r) * n..(i + r + 1) * n]);
        }
        i += TILE_ROWS;
    }
    while i < m {
        let row = a.row(i);
        let out_row = &mut out.data[i * n..(i + 1) * n];
        let mut j = 0;
        while j < full_cols {
            let mut acc = [0.0f64; TILE_COLS];
            for (k, &av) in row.iter().enumerate() {
                let bk = &b.data[k * n + j..k * n + j + TILE_COLS];
                for c in 0..TILE_COLS {
                    acc[c] += av * bk[c];
                }
            }
            out_row[j..j + TILE_COLS].copy_from_slice(&acc);
            j += TILE_COLS;
        }
        gemm_row_tail(row, b, full_cols, out_row);
        i += 1;
    }
    out
}

#[inline]
fn gemm_row_tail(row: &[f64], b: &Matrix, from: usize, out_row: &mut [f64]) {
    let n = b.cols;
    for j in from..n {
        let mut acc = 0.0;
        for (k, &av) in row.iter().enumerate() {
            acc += av * b.data[k * n + j];
        }
        out_row[j] = acc;
    }
}
