use faer::{Mat, Side};

use super::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermEig {
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns; unitary.
    pub eigenvectors: ComplexMatrix,
}

impl HermEig {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.col(k)
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    /// Σ_k f(λ_k) |v_k⟩⟨v_k|.
    pub fn apply_function(&self, f: impl Fn(usize, f64) -> C64) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let mut data = vec![ZERO; n * n];
        for k in 0..n {
            let w = f(k, self.eigenvalues[k]);
            if w == ZERO {
                continue;
            }
            let col = v.col(k);
            for i in 0..n {
                let a = col[i] * w;
                if a == ZERO {
                    continue;
                }
                let row = &mut data[i * n..(i + 1) * n];
                for (r, b) in row.iter_mut().zip(&col) {
                    *r += a * b.conj();
                }
            }
        }
        ComplexMatrix::from_parts(n, n, data)
    }

    /// Projection onto the span of the eigenvectors whose index satisfies `keep`.
    pub fn projection(&self, keep: impl Fn(usize, f64) -> bool) -> ComplexMatrix {
        self.apply_function(|k, x| if keep(k, x) { C64::new(1.0, 0.0) } else { ZERO })
    }

    /// Columns selected by `keep`, as vectors.
    pub fn vectors_where(&self, keep: impl Fn(usize, f64) -> bool) -> Vec<Vec<C64>> {
        (0..self.dim())
            .filter(|&k| keep(k, self.eigenvalues[k]))
            .map(|k| self.vector(k))
            .collect()
    }
}

/// Hermitian eigendecomposition; fails when ‖m − m†‖_F > herm_tol·‖m‖_F.
pub fn herm_eig(m: &ComplexMatrix, herm_tol: f64) -> Result<HermEig> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("eigendecomposition of {}x{}", m.rows(), m.cols())));
    }
    let defect = m.hermiticity_defect();
    if defect > herm_tol {
        return Err(Error::NotHermitian(defect));
    }
    let n = m.rows();
    let a = Mat::<faer::c64>::from_fn(n, n, |i, j| (m.get(i, j) + m.get(j, i).conj()) * 0.5);
    let evd = a.self_adjoint_eigen(Side::Lower).map_err(|_| Error::EigenFailure)?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let eigenvalues: Vec<f64> = (0..n).map(|k| s[k].re).collect();
    let mut data = vec![ZERO; n * n];
    for k in 0..n {
        // Fix the phase: largest-magnitude entry real positive (first on ties).
        let mut best = 0;
        let mut best_abs = -1.0;
        for i in 0..n {
            let x = u[(i, k)].norm();
            if x > best_abs * (1.0 + 1e-12) {
                best = i;
                best_abs = x;
            }
        }
        let pivot = u[(best, k)];
        let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            data[i * n + k] = u[(i, k)] * phase;
        }
    }
    Ok(HermEig { eigenvalues, eigenvectors: ComplexMatrix::from_parts(n, n, data) })
}

/// f(H) for Hermitian H via its eigendecomposition.
pub fn herm_function(m: &ComplexMatrix, f: impl Fn(f64) -> C64) -> Result<ComplexMatrix> {
    let e = herm_eig(m, 1e-9)?;
    Ok(e.apply_function(|_, x| f(x)))
}

/// f applied on the support of a PSD matrix; eigenvalues at or below
/// rank_tol·λ_max map to zero.
pub fn psd_function(m: &ComplexMatrix, f: impl Fn(f64) -> C64, rank_tol: f64) -> Result<ComplexMatrix> {
    let e = herm_eig(m, 1e-9)?;
    let lmax = e.max().max(0.0);
    let threshold = rank_tol * lmax;
    if e.min() < -threshold && e.min() < 0.0 {
        return Err(Error::NotPsd(e.min()));
    }
    Ok(e.apply_function(|_, x| if x > threshold { f(x) } else { ZERO }))
}

/// Range projection of a PSD matrix.
pub fn range_projection(m: &ComplexMatrix, rank_tol: f64) -> Result<ComplexMatrix> {
    psd_function(m, |_| C64::new(1.0, 0.0), rank_tol)
}

/// Moore–Penrose inverse of a PSD matrix on its support.
pub fn support_inverse(m: &ComplexMatrix, rank_tol: f64) -> Result<ComplexMatrix> {
    psd_function(m, |x| C64::new(1.0 / x, 0.0), rank_tol)
}
