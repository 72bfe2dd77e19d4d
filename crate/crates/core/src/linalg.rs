//! Dense complex matrices.
//!
//! Only the handful of operations the channel model and the beamforming
//! solvers need: products, conjugate transpose, Kronecker products, diagonal
//! embedding, traces, and a right pseudo-inverse for wide full-row-rank
//! matrices.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use thiserror::Error;

/// Pivot ratio below which `A·Aᴴ` is treated as singular.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {op} of {lhs:?} and {rhs:?}")]
    DimensionMismatch {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },
    #[error("matrix of shape {0:?} is not square")]
    NotSquare((usize, usize)),
    #[error("pseudo-inverse needs rows <= cols, got {0:?}")]
    TallMatrix((usize, usize)),
    #[error("matrix is rank deficient (pivot ratio {ratio:.3e})")]
    RankDeficient { ratio: f64 },
    #[error("entry count {len} does not match shape {rows}x{cols}")]
    BadLength { rows: usize, cols: usize, len: usize },
    #[error("matrix contains a non-finite entry")]
    NonFinite,
}

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::BadLength {
                rows,
                cols,
                len: data.len(),
            });
        }
        if data.iter().any(|z| !z.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows. Panics on ragged input.
    pub fn from_rows<R: AsRef<[Complex64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn column_vector(v: &[Complex64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn row_vector(v: &[Complex64]) -> Self {
        Self {
            rows: 1,
            cols: v.len(),
            data: v.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.is_finite())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Elementwise `a·self + b·other`.
    pub fn axpby(&self, a: f64, other: &Self, b: f64) -> Result<Self, LinalgError> {
        if self.shape() != other.shape() {
            return Err(LinalgError::DimensionMismatch {
                op: "axpby",
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| x * a + y * b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinalgError> {
        self.axpby(1.0, other, -1.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Stacks `blocks` on top of each other.
    pub fn vstack(blocks: &[CMatrix]) -> Result<Self, LinalgError> {
        let cols = blocks.first().map_or(0, |b| b.cols);
        let mut data = Vec::new();
        let mut rows = 0;
        for b in blocks {
            if b.cols != cols {
                return Err(LinalgError::DimensionMismatch {
                    op: "vstack",
                    lhs: (rows, cols),
                    rhs: b.shape(),
                });
            }
            rows += b.rows;
            data.extend_from_slice(&b.data);
        }
        Ok(Self { rows, cols, data })
    }

    /// Places `blocks` side by side.
    pub fn hstack(blocks: &[CMatrix]) -> Result<Self, LinalgError> {
        let rows = blocks.first().map_or(0, |b| b.rows);
        if let Some(b) = blocks.iter().find(|b| b.rows != rows) {
            return Err(LinalgError::DimensionMismatch {
                op: "hstack",
                lhs: (rows, 0),
                rhs: b.shape(),
            });
        }
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for b in blocks {
                data.extend_from_slice(b.row(i));
            }
        }
        Ok(Self { rows, cols, data })
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.4}{:+.4}j ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

pub fn matmul(a: &CMatrix, b: &CMatrix) -> Result<CMatrix, LinalgError> {
    if a.cols != b.rows {
        return Err(LinalgError::DimensionMismatch {
            op: "matmul",
            lhs: a.shape(),
            rhs: b.shape(),
        });
    }
    let mut out = CMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        let out_row = &mut out.data[i * b.cols..(i + 1) * b.cols];
        for (k, &aik) in a.row(i).iter().enumerate() {
            if aik == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (o, &bkj) in out_row.iter_mut().zip(b.row(k)) {
                *o += aik * bkj;
            }
        }
    }
    Ok(out)
}

/// Conjugate transpose.
pub fn hermitian(a: &CMatrix) -> CMatrix {
    CMatrix::from_fn(a.cols, a.rows, |i, j| a[(j, i)].conj())
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    CMatrix::from_fn(a.rows * b.rows, a.cols * b.cols, |i, j| {
        a[(i / b.rows, j / b.cols)] * b[(i % b.rows, j % b.cols)]
    })
}

pub fn diag_embed(v: &[Complex64]) -> CMatrix {
    let mut m = CMatrix::zeros(v.len(), v.len());
    for (i, &z) in v.iter().enumerate() {
        m[(i, i)] = z;
    }
    m
}

pub fn trace(a: &CMatrix) -> Result<Complex64, LinalgError> {
    if a.rows != a.cols {
        return Err(LinalgError::NotSquare(a.shape()));
    }
    Ok((0..a.rows).map(|i| a[(i, i)]).sum())
}

/// `trace(AᴴA)`, i.e. the squared Frobenius norm, without forming the product.
pub fn gram_trace(a: &CMatrix) -> f64 {
    a.data.iter().map(|z| z.norm_sqr()).sum()
}

/// Lower-triangular Cholesky factor of a Hermitian positive-definite matrix.
///
/// Fails with [`LinalgError::RankDeficient`] when the smallest pivot falls
/// below [`RANK_TOLERANCE`] times the largest one.
fn cholesky(m: &CMatrix) -> Result<CMatrix, LinalgError> {
    let n = m.rows;
    let mut l = CMatrix::zeros(n, n);
    let mut pivots = Vec::with_capacity(n);
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        pivots.push(d);
        let max_pivot = pivots.iter().cloned().fold(f64::MIN, f64::max);
        if !(d > RANK_TOLERANCE * max_pivot) || max_pivot <= 0.0 {
            let ratio = if max_pivot > 0.0 { d / max_pivot } else { 0.0 };
            return Err(LinalgError::RankDeficient { ratio });
        }
        let ljj = d.sqrt();
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    // Earlier pivots may be tiny relative to a later, larger one.
    let max_pivot = pivots.iter().cloned().fold(f64::MIN, f64::max);
    let min_pivot = pivots.iter().cloned().fold(f64::MAX, f64::min);
    if min_pivot < RANK_TOLERANCE * max_pivot {
        return Err(LinalgError::RankDeficient {
            ratio: min_pivot / max_pivot,
        });
    }
    Ok(l)
}

/// Solves `L·Lᴴ·X = B` given the Cholesky factor `L`.
fn cholesky_solve(l: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = l.rows;
    let mut x = b.clone();
    for c in 0..b.cols {
        for i in 0..n {
            let mut s = x[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = x[(i, c)];
            for k in i + 1..n {
                s -= l[(k, i)].conj() * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
    }
    x
}

/// Right pseudo-inverse `Aᴴ(AAᴴ)⁻¹` of a wide matrix with full row rank.
pub fn right_pinv(a: &CMatrix) -> Result<CMatrix, LinalgError> {
    if a.rows > a.cols {
        return Err(LinalgError::TallMatrix(a.shape()));
    }
    let ah = hermitian(a);
    let gram = matmul(a, &ah)?;
    let l = cholesky(&gram)?;
    // (A⁺)ᴴ = (AAᴴ)⁻¹A because AAᴴ is Hermitian.
    let y = cholesky_solve(&l, a);
    Ok(hermitian(&y))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn matmul_identity_and_imaginary_unit() {
        let a = CMatrix::from_rows(&[[c(1.0, 2.0), c(3.0, -1.0)], [c(0.5, 0.0), c(0.0, 4.0)]]);
        assert_eq!(matmul(&CMatrix::identity(2), &a).unwrap(), a);
        let j = CMatrix::from_rows(&[[c(0.0, 1.0)]]);
        assert_eq!(matmul(&j, &j).unwrap()[(0, 0)], c(-1.0, 0.0));
    }

    #[test]
    fn matmul_rejects_bad_shapes() {
        let a = CMatrix::zeros(2, 3);
        let err = matmul(&a, &a).unwrap_err();
        assert!(matches!(err, LinalgError::DimensionMismatch { .. }));
    }

    #[test]
    fn hermitian_conjugates() {
        let a = CMatrix::from_rows(&[[c(1.0, 1.0)]]);
        assert_eq!(hermitian(&a)[(0, 0)], c(1.0, -1.0));
    }

    #[test]
    fn kron_small_cases() {
        let one = CMatrix::from_rows(&[[c(1.0, 0.0)]]);
        let b = CMatrix::from_rows(&[[c(1.0, 2.0), c(0.0, 1.0)], [c(3.0, 0.0), c(-1.0, 0.0)]]);
        assert_eq!(kron(&one, &b), b);
        let ones = CMatrix::column_vector(&[c(1.0, 0.0), c(1.0, 0.0)]);
        let k = kron(&ones, &ones);
        assert_eq!(k.shape(), (4, 1));
        assert!(k.as_slice().iter().all(|&z| z == c(1.0, 0.0)));
    }

    #[test]
    fn diag_embed_and_trace() {
        assert_eq!(diag_embed(&[c(1.0, 0.0), c(1.0, 0.0)]), CMatrix::identity(2));
        let d = diag_embed(&[c(0.0, 1.0), c(0.0, -1.0)]);
        assert_eq!(d[(0, 1)], c(0.0, 0.0));
        assert_eq!(d[(1, 0)], c(0.0, 0.0));
        assert_eq!(trace(&CMatrix::identity(4)).unwrap(), c(4.0, 0.0));
        assert_eq!(trace(&diag_embed(&[c(1.0, 1.0), c(2.0, 0.0)])).unwrap(), c(3.0, 1.0));
        assert!(matches!(trace(&CMatrix::zeros(2, 3)), Err(LinalgError::NotSquare(_))));
    }

    #[test]
    fn pinv_of_padded_identity() {
        let a = CMatrix::from_fn(2, 4, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let p = right_pinv(&a).unwrap();
        assert_eq!(p.shape(), (4, 2));
        assert_eq!(p, hermitian(&a));
    }

    #[test]
    fn pinv_of_diagonal() {
        let a = CMatrix::from_rows(&[
            [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)],
        ]);
        let expected = CMatrix::from_rows(&[
            [c(1.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.5, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0)],
        ]);
        let p = right_pinv(&a).unwrap();
        assert!(p.sub(&expected).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn pinv_rejects_rank_deficient_and_tall() {
        let a = CMatrix::from_rows(&[[c(1.0, 0.0), c(2.0, 1.0)], [c(2.0, 0.0), c(4.0, 2.0)]]);
        assert!(matches!(right_pinv(&a), Err(LinalgError::RankDeficient { .. })));
        let zero = CMatrix::zeros(2, 3);
        assert!(matches!(right_pinv(&zero), Err(LinalgError::RankDeficient { .. })));
        assert!(matches!(right_pinv(&CMatrix::zeros(3, 2)), Err(LinalgError::TallMatrix(_))));
    }

    #[test]
    fn from_vec_checks() {
        assert!(CMatrix::from_vec(2, 2, vec![c(0.0, 0.0); 3]).is_err());
        assert_eq!(
            CMatrix::from_vec(1, 1, vec![c(f64::NAN, 0.0)]).unwrap_err(),
            LinalgError::NonFinite
        );
    }
}
