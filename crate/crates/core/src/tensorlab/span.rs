use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatMut, MatRef, Par};

use super::{vec_norm, ComplexMatrix, C64, ONE, ZERO};

const CHUNK: usize = 64;

/// Hilbert–Schmidt orthonormal basis of a subspace of M_{rows×cols}.
#[derive(Clone, Debug)]
pub struct MatrixSpan {
    rows: usize,
    cols: usize,
    /// Basis vectors stored contiguously, one column of length rows·cols each.
    store: Vec<C64>,
    count: usize,
}

impl MatrixSpan {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols, store: Vec::new(), count: 0 }
    }

    /// Span of `mats`; a candidate is dropped when its residual is at most
    /// `tol·max(‖x‖, floor)`.
    pub fn spanned_by<'a>(
        rows: usize,
        cols: usize,
        mats: impl IntoIterator<Item = &'a ComplexMatrix>,
        tol: f64,
        floor: f64,
    ) -> Self {
        let mut s = Self::new(rows, cols);
        s.extend(mats.into_iter().cloned(), tol, floor);
        s
    }

    /// Adopt an already orthonormal family without checks.
    pub fn from_orthonormal(rows: usize, cols: usize, basis: &[ComplexMatrix]) -> Self {
        let mut s = Self::new(rows, cols);
        for b in basis {
            assert_eq!(b.shape(), (rows, cols));
            s.store.extend_from_slice(b.as_slice());
            s.count += 1;
        }
        s
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn dim(&self) -> usize {
        self.count
    }

    fn len(&self) -> usize {
        self.rows * self.cols
    }

    fn vector(&self, k: usize) -> &[C64] {
        let n = self.len();
        &self.store[k * n..(k + 1) * n]
    }

    pub fn element(&self, k: usize) -> ComplexMatrix {
        ComplexMatrix::from_parts(self.rows, self.cols, self.vector(k).to_vec())
    }

    pub fn basis(&self) -> Vec<ComplexMatrix> {
        (0..self.count).map(|k| self.element(k)).collect()
    }

    /// Coordinates ⟨b_k, x⟩_HS.
    pub fn coefficients(&self, x: &ComplexMatrix) -> Vec<C64> {
        assert_eq!(x.shape(), (self.rows, self.cols), "span shape mismatch");
        (0..self.count)
            .map(|k| self.vector(k).iter().zip(x.as_slice()).map(|(a, b)| a.conj() * b).sum())
            .collect()
    }

    pub fn combine(&self, coeffs: &[C64]) -> ComplexMatrix {
        assert_eq!(coeffs.len(), self.count);
        let n = self.len();
        let mut out = vec![ZERO; n];
        for (k, c) in coeffs.iter().enumerate() {
            if *c == ZERO {
                continue;
            }
            for (o, v) in out.iter_mut().zip(self.vector(k)) {
                *o += c * v;
            }
        }
        ComplexMatrix::from_parts(self.rows, self.cols, out)
    }

    pub fn project(&self, x: &ComplexMatrix) -> ComplexMatrix {
        if self.count == 0 {
            return ComplexMatrix::zeros(self.rows, self.cols);
        }
        self.combine(&self.coefficients(x))
    }

    /// ‖x − P x‖_F.
    pub fn residual(&self, x: &ComplexMatrix) -> f64 {
        x.distance(&self.project(x))
    }

    /// ‖x − P x‖_F / ‖x‖_F, zero for x = 0.
    pub fn relative_residual(&self, x: &ComplexMatrix) -> f64 {
        let n = x.frobenius_norm();
        if n == 0.0 {
            0.0
        } else {
            self.residual(x) / n
        }
    }

    pub fn contains(&self, x: &ComplexMatrix, tol: f64) -> bool {
        self.relative_residual(x) <= tol
    }

    /// Add one candidate; returns whether the dimension grew.
    pub fn insert(&mut self, x: &ComplexMatrix, tol: f64, floor: f64) -> bool {
        self.extend(std::iter::once(x.clone()), tol, floor) == 1
    }

    /// Batched Gram–Schmidt with re-orthonormalization; returns the number of
    /// basis vectors added.
    pub fn extend(&mut self, candidates: impl IntoIterator<Item = ComplexMatrix>, tol: f64, floor: f64) -> usize {
        let n = self.len();
        let before = self.count;
        let mut chunk: Vec<ComplexMatrix> = Vec::with_capacity(CHUNK);
        for c in candidates {
            assert_eq!(c.shape(), (self.rows, self.cols), "span shape mismatch");
            chunk.push(c);
            if chunk.len() == CHUNK {
                self.absorb(&chunk, tol, floor, n);
                chunk.clear();
            }
        }
        if !chunk.is_empty() {
            self.absorb(&chunk, tol, floor, n);
        }
        self.count - before
    }

    fn absorb(&mut self, chunk: &[ComplexMatrix], tol: f64, floor: f64, n: usize) {
        let m = chunk.len();
        let norms: Vec<f64> = chunk.iter().map(|c| c.frobenius_norm()).collect();
        let mut work: Vec<C64> = Vec::with_capacity(n * m);
        for c in chunk {
            work.extend_from_slice(c.as_slice());
        }
        // Two passes against the existing basis.
        for _ in 0..2 {
            if self.count == 0 {
                break;
            }
            let k = self.count;
            let q = MatRef::from_column_major_slice(&self.store, n, k);
            let mut coeff = Mat::<C64>::zeros(k, m);
            {
                let w = MatRef::from_column_major_slice(&work, n, m);
                matmul(coeff.as_mut(), Accum::Replace, q.adjoint(), w, ONE, Par::Seq);
            }
            let w = MatMut::from_column_major_slice_mut(&mut work, n, m);
            matmul(w, Accum::Add, q, coeff.as_ref(), C64::new(-1.0, 0.0), Par::Seq);
        }
        // Sequential pass inside the chunk.
        let first_new = self.count;
        for j in 0..m {
            let mut v: Vec<C64> = work[j * n..(j + 1) * n].to_vec();
            for _ in 0..2 {
                for k in first_new..self.count {
                    let b = &self.store[k * n..(k + 1) * n];
                    let c: C64 = b.iter().zip(&v).map(|(a, x)| a.conj() * x).sum();
                    if c != ZERO {
                        for (x, a) in v.iter_mut().zip(b) {
                            *x -= c * a;
                        }
                    }
                }
            }
            let r = vec_norm(&v);
            let threshold = tol * norms[j].max(floor);
            if r > threshold && r > 0.0 {
                for x in v.iter_mut() {
                    *x /= r;
                }
                self.store.extend_from_slice(&v);
                self.count += 1;
            }
        }
    }
}
