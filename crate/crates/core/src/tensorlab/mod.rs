//! Dense complex linear algebra: matrices, tensor products, partial traces,
//! Hermitian eigendecompositions and spectral functions.

mod eig;
mod io;
mod span;

pub use eig::{herm_eig, herm_function, psd_function, range_projection, support_inverse, HermEig};
pub use io::{read_matrix, write_matrix, MatrixFile};
pub use span::MatrixSpan;

use std::ops::{Add, Mul, Neg, Sub};

use faer::linalg::matmul::matmul;
use faer::{Accum, MatMut, MatRef, Par};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Ordered tensor factor dimensions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FactorShape(Vec<usize>);

impl FactorShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::InvalidInput("factor dimension 0".into()));
        }
        Ok(Self(dims))
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Dense complex matrix, row-major, immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!("empty shape {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for shape {rows}x{cols}",
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(k));
        }
        Ok(Self { rows, cols, data })
    }

    pub(crate) fn from_parts(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_parts(rows, cols, vec![ZERO; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::from_parts(rows, cols, data)
    }

    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        Self::new(rows, cols, values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { ZERO })
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { C64::new(values[i], 0.0) } else { ZERO })
    }

    /// Matrix unit |i⟩⟨j| in M_{rows×cols}.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m.data[i * cols + j] = ONE;
        m
    }

    /// |u⟩⟨v|.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// Column vector as an n×1 matrix.
    pub fn column(v: &[C64]) -> Self {
        Self::from_parts(v.len(), 1, v.to_vec())
    }

    /// Reshape a row-major vector into a matrix.
    pub fn unvec(rows: usize, cols: usize, v: &[C64]) -> Result<Self> {
        Self::new(rows, cols, v.to_vec())
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

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    /// Row-major entries; doubles as the row-major vectorization.
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn col(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self::from_parts(self.rows, self.cols, self.data.iter().map(|&z| f(z)).collect())
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Hilbert–Schmidt inner product Tr(self† other).
    pub fn hs_inner(&self, other: &Self) -> C64 {
        assert_eq!(self.shape(), other.shape(), "hs_inner shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape(), "distance shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul inner dimension mismatch");
        multiply(self, other)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    pub fn kron(&self, other: &Self) -> Self {
        kron(self, other)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "apply dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// ‖A − A†‖_F / ‖A‖_F (0 for the zero matrix).
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut num = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                num += (self.get(i, j) - self.get(j, i).conj()).norm_sqr();
            }
        }
        let den = self.frobenius_norm();
        if den == 0.0 {
            0.0
        } else {
            num.sqrt() / den
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self.get(i, j) + self.get(j, i).conj()) * 0.5)
    }

    /// ‖P² − P‖_F + ‖P − P†‖_F, relative to max(1, ‖P‖_F).
    pub fn projection_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let sq = self.matmul(self);
        let scale = self.frobenius_norm().max(1.0);
        (sq.distance(self) + self.distance(&self.dagger())) / scale
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|z| **z != ZERO).count()
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.frobenius_norm() <= tol
    }

    /// Entries at the selected rows and columns.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]))
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "add shape mismatch");
        ComplexMatrix::from_parts(
            self.rows,
            self.cols,
            self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        )
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "sub shape mismatch");
        ComplexMatrix::from_parts(
            self.rows,
            self.cols,
            self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        )
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.map(|z| -z)
    }
}

/// Sum of scaled matrices Σ c_k M_k.
pub fn linear_combination(coeffs: &[C64], mats: &[&ComplexMatrix]) -> ComplexMatrix {
    assert_eq!(coeffs.len(), mats.len());
    assert!(!mats.is_empty(), "empty linear combination");
    let (r, c) = mats[0].shape();
    let mut data = vec![ZERO; r * c];
    for (coef, m) in coeffs.iter().zip(mats) {
        assert_eq!(m.shape(), (r, c));
        if *coef == ZERO {
            continue;
        }
        for (d, x) in data.iter_mut().zip(&m.data) {
            *d += coef * x;
        }
    }
    ComplexMatrix::from_parts(r, c, data)
}

fn multiply(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (m, k, n) = (a.rows, a.cols, b.cols);
    let mut out = vec![ZERO; m * n];
    let nnz_a = a.nnz();
    let nnz_b = b.nnz();
    let dense_cost = m * k * n;
    if dense_cost <= 4096 || nnz_a * n <= dense_cost / 8 {
        // Row-wise accumulation; cheap when `a` is sparse.
        for i in 0..m {
            let out_row = &mut out[i * n..(i + 1) * n];
            for p in 0..k {
                let x = a.data[i * k + p];
                if x == ZERO {
                    continue;
                }
                let b_row = &b.data[p * n..(p + 1) * n];
                for (o, y) in out_row.iter_mut().zip(b_row) {
                    *o += x * y;
                }
            }
        }
    } else if nnz_b * m <= dense_cost / 8 {
        for p in 0..k {
            let b_row = &b.data[p * n..(p + 1) * n];
            let nz: Vec<(usize, C64)> =
                b_row.iter().enumerate().filter(|(_, y)| **y != ZERO).map(|(j, y)| (j, *y)).collect();
            if nz.is_empty() {
                continue;
            }
            for i in 0..m {
                let x = a.data[i * k + p];
                if x == ZERO {
                    continue;
                }
                let out_row = &mut out[i * n..(i + 1) * n];
                for &(j, y) in &nz {
                    out_row[j] += x * y;
                }
            }
        }
    } else {
        // Row-major C is column-major Cᵀ = Bᵀ Aᵀ.
        let ar = MatRef::from_row_major_slice(&a.data, m, k);
        let br = MatRef::from_row_major_slice(&b.data, k, n);
        let ct = MatMut::from_column_major_slice_mut(&mut out, n, m);
        matmul(ct, Accum::Replace, br.transpose(), ar.transpose(), ONE, Par::Seq);
    }
    ComplexMatrix::from_parts(m, n, out)
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let rows = ar * br;
    let cols = ac * bc;
    let mut data = vec![ZERO; rows * cols];
    for i in 0..ar {
        for j in 0..ac {
            let x = a.get(i, j);
            if x == ZERO {
                continue;
            }
            for k in 0..br {
                let row = i * br + k;
                let dst = &mut data[row * cols + j * bc..row * cols + (j + 1) * bc];
                let src = &b.data[k * bc..(k + 1) * bc];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d = x * s;
                }
            }
        }
    }
    ComplexMatrix::from_parts(rows, cols, data)
}

/// Kronecker product of a list of matrices, left to right.
pub fn kron_all(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    let mut it = factors.iter();
    let first = it.next().expect("kron_all of empty list");
    it.fold((*first).clone(), |acc, m| kron(&acc, m))
}

/// Vector Kronecker product.
pub fn kron_vec(u: &[C64], v: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(u.len() * v.len());
    for a in u {
        for b in v {
            out.push(a * b);
        }
    }
    out
}

/// Partial trace keeping the factors listed in `keep` (in their original order).
pub fn partial_trace(m: &ComplexMatrix, shape: &FactorShape, keep: &[usize]) -> Result<ComplexMatrix> {
    let dims = shape.dims();
    if !m.is_square() || m.rows() != shape.total() {
        return Err(Error::DimensionMismatch(format!(
            "partial trace of {}x{} over shape {:?}",
            m.rows(),
            m.cols(),
            dims
        )));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.iter().any(|&k| k >= dims.len()) {
        return Err(Error::DimensionMismatch(format!("keep set {keep:?} out of range")));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !kept.contains(k)).collect();
    let n = dims.len();
    let mut strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let kept_dims: Vec<usize> = kept.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let dk: usize = kept_dims.iter().product();
    let kept_offsets = offsets(&kept, &kept_dims, &strides);
    let traced_offsets = offsets(&traced, &traced_dims, &strides);
    let total = m.rows();
    let mut data = vec![ZERO; dk * dk];
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = ZERO;
            for &t in &traced_offsets {
                acc += m.data[(kept_offsets[a] + t) * total + kept_offsets[b] + t];
            }
            data[a * dk + b] = acc;
        }
    }
    Ok(ComplexMatrix::from_parts(dk, dk, data))
}

/// Flat-index offsets for every multi-index over the given factors.
fn offsets(factors: &[usize], dims: &[usize], strides: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for (pos, &f) in factors.iter().enumerate() {
        let mut next = Vec::with_capacity(out.len() * dims[pos]);
        for &o in &out {
            for i in 0..dims[pos] {
                next.push(o + i * strides[f]);
            }
        }
        out = next;
    }
    out
}

/// Embed `op` acting on the factors `targets` (in the listed order) into the full space.
pub fn embed_operator(op: &ComplexMatrix, shape: &FactorShape, targets: &[usize]) -> Result<ComplexMatrix> {
    let dims = shape.dims();
    let tdims: Vec<usize> = targets.iter().map(|&t| dims[t]).collect();
    let dt: usize = tdims.iter().product();
    if op.shape() != (dt, dt) {
        return Err(Error::DimensionMismatch(format!(
            "operator {}x{} on factors {:?} of {:?}",
            op.rows(),
            op.cols(),
            targets,
            dims
        )));
    }
    let mut seen = targets.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != targets.len() || seen.iter().any(|&t| t >= dims.len()) {
        return Err(Error::DimensionMismatch(format!("invalid target factors {targets:?}")));
    }
    let n = dims.len();
    let mut strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let rest: Vec<usize> = (0..n).filter(|k| !targets.contains(k)).collect();
    let rest_dims: Vec<usize> = rest.iter().map(|&k| dims[k]).collect();
    let t_off = offsets(targets, &tdims, &strides);
    let r_off = offsets(&rest, &rest_dims, &strides);
    let total = shape.total();
    let mut data = vec![ZERO; total * total];
    for &r in &r_off {
        for a in 0..dt {
            for b in 0..dt {
                let x = op.get(a, b);
                if x != ZERO {
                    data[(t_off[a] + r) * total + t_off[b] + r] = x;
                }
            }
        }
    }
    Ok(ComplexMatrix::from_parts(total, total, data))
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// ⟨u|v⟩, conjugate-linear in `u`.
pub fn vec_inner(u: &[C64], v: &[C64]) -> C64 {
    assert_eq!(u.len(), v.len(), "inner product length mismatch");
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn vec_distance(u: &[C64], v: &[C64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
}
