//! Operator-state map, Choi matrices, reflection positivity verdicts and the
//! structure of reflection positive Hamiltonians.

use serde::Serialize;

use crate::bipartition::Bipartition;
use crate::error::{Error, Result};
use crate::tensorlab::{herm_eig, herm_function, vec_norm, ComplexMatrix, C64, ONE, ZERO};

/// Superoperator on M_d stored by its Choi matrix Σ_{ij} |i⟩⟨j| ⊗ Φ(|i⟩⟨j|).
#[derive(Clone, Debug)]
pub struct SuperOperator {
    choi: ComplexMatrix,
    dim: usize,
}

impl SuperOperator {
    pub fn from_choi(choi: ComplexMatrix) -> Result<Self> {
        let n = choi.rows();
        let d = (n as f64).sqrt().round() as usize;
        if !choi.is_square() || d * d != n {
            return Err(Error::DimensionMismatch(format!("Choi matrix {}x{}", choi.rows(), choi.cols())));
        }
        Ok(Self { choi, dim: d })
    }

    /// Choi matrix of X ↦ Σ K X K†.
    pub fn from_kraus(kraus: &[ComplexMatrix]) -> Result<Self> {
        let d = kraus.first().map(|k| k.rows()).ok_or_else(|| Error::InvalidInput("empty Kraus list".into()))?;
        let n = d * d;
        let mut data = vec![ZERO; n * n];
        for k in kraus {
            if k.shape() != (d, d) {
                return Err(Error::DimensionMismatch("Kraus operators of differing shape".into()));
            }
            // |k⟩ with k[(i,a)] = K[a,i]
            let v: Vec<C64> = (0..n).map(|r| k.get(r % d, r / d)).collect();
            for r in 0..n {
                if v[r] == ZERO {
                    continue;
                }
                for c in 0..n {
                    data[r * n + c] += v[r] * v[c].conj();
                }
            }
        }
        Ok(Self { choi: ComplexMatrix::from_parts(n, n, data), dim: d })
    }

    /// Choi matrix of an arbitrary linear map given as a closure.
    pub fn from_map(d: usize, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Self {
        let n = d * d;
        let mut data = vec![ZERO; n * n];
        for i in 0..d {
            for j in 0..d {
                let img = f(&ComplexMatrix::unit(d, d, i, j));
                for a in 0..d {
                    for c in 0..d {
                        data[(i * d + a) * n + j * d + c] = img.get(a, c);
                    }
                }
            }
        }
        Self { choi: ComplexMatrix::from_parts(n, n, data), dim: d }
    }

    /// Superoperator with transfer matrix T, vec(Φ(X)) = T·vec(X) row-major.
    pub fn from_transfer(t: &ComplexMatrix) -> Result<Self> {
        let sup = Self::from_choi(t.clone())?;
        let d = sup.dim;
        let n = d * d;
        let choi = ComplexMatrix::from_fn(n, n, |r, c| {
            let (i, a) = (r / d, r % d);
            let (j, cc) = (c / d, c % d);
            t.get(a * d + cc, i * d + j)
        });
        Ok(Self { choi, dim: d })
    }

    pub fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Φ(X)[a,c] = Σ_{ij} X[i,j]·Choi[(i,a),(j,c)].
    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dim;
        assert_eq!(x.shape(), (d, d), "superoperator argument shape");
        let n = d * d;
        let c = self.choi.as_slice();
        let mut out = vec![ZERO; n];
        for i in 0..d {
            for j in 0..d {
                let xij = x.get(i, j);
                if xij == ZERO {
                    continue;
                }
                for a in 0..d {
                    let base = (i * d + a) * n + j * d;
                    for cc in 0..d {
                        out[a * d + cc] += xij * c[base + cc];
                    }
                }
            }
        }
        ComplexMatrix::from_parts(d, d, out)
    }

    /// Transfer matrix T with vec(Φ(X)) = T·vec(X).
    pub fn transfer_matrix(&self) -> ComplexMatrix {
        let d = self.dim;
        let n = d * d;
        ComplexMatrix::from_fn(n, n, |r, col| {
            let (a, c) = (r / d, r % d);
            let (i, j) = (col / d, col % d);
            self.choi.get(i * d + a, j * d + c)
        })
    }

    /// self ∘ other.
    pub fn compose(&self, other: &SuperOperator) -> Result<SuperOperator> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch("composition of superoperators".into()));
        }
        let t = self.transfer_matrix().matmul(&other.transfer_matrix());
        Self::from_transfer(&t)
    }
}

/// Result of a complete-positivity test.
#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct CpVerdict {
    pub positive: bool,
    pub hermitian: bool,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

/// O(v) with ⟨ξ|O(v)|η⟩ = ⟨θ̂η ⊗ ξ|v⟩; equals Vᵀ·conj(U) for V[m,a] = v[m·d + a].
pub fn o_map(v: &[C64], b: &Bipartition) -> Result<ComplexMatrix> {
    b.check_full_vec(v.len())?;
    let d = b.dim_plus();
    let vt = ComplexMatrix::from_fn(d, d, |a, m| v[m * d + a]);
    if b.theta_is_identity() {
        return Ok(vt);
    }
    Ok(vt.matmul(&b.theta_unitary().conj()))
}

/// Inverse of [`o_map`]: V = U·Mᵀ.
pub fn o_inv(m: &ComplexMatrix, b: &Bipartition) -> Result<Vec<C64>> {
    b.check_plus_op(m)?;
    let mt = m.transpose();
    if b.theta_is_identity() {
        return Ok(mt.into_vec());
    }
    Ok(b.theta_unitary().matmul(&mt).into_vec())
}

/// Choi matrix of X ↦ O(t·O⁻¹(X)).
pub fn conjugate_superop(t: &ComplexMatrix, b: &Bipartition) -> Result<SuperOperator> {
    b.check_full_op(t)?;
    let d = b.dim_plus();
    let n = d * d;
    // t' = (U†⊗I) t (U⊗I); then Choi[(i,a),(j,c)] = t'[(c,a),(j,i)].
    let tp = if b.theta_is_identity() {
        t.clone()
    } else {
        let u = b.theta_unitary().kron(&ComplexMatrix::identity(d));
        u.dagger().matmul(t).matmul(&u)
    };
    let choi = ComplexMatrix::from_fn(n, n, |r, col| {
        let (i, a) = (r / d, r % d);
        let (j, c) = (col / d, col % d);
        tp.get(c * d + a, j * d + i)
    });
    Ok(SuperOperator { choi, dim: d })
}

/// λ_min(Choi) ≥ −tol·max(1, λ_max), with a Hermitian Choi matrix required.
pub fn is_completely_positive(s: &SuperOperator, tol: f64) -> CpVerdict {
    let choi = s.choi();
    let hermitian = choi.hermiticity_defect() <= tol.max(1e-12);
    let e = herm_eig(&choi.hermitian_part(), 1.0).expect("hermitian part");
    let (lmin, lmax) = (e.min(), e.max());
    CpVerdict {
        positive: hermitian && lmin >= -tol * lmax.max(1.0),
        hermitian,
        min_eigenvalue: lmin,
        max_eigenvalue: lmax,
    }
}

pub fn is_rp_operator(t: &ComplexMatrix, b: &Bipartition, tol: f64) -> Result<CpVerdict> {
    Ok(is_completely_positive(&conjugate_superop(t, b)?, tol))
}

/// Gram matrix G_{kl} = Tr(t·Θ(E_k)⊗E_l) of the reflection form over matrix
/// units, evaluated directly; Tr(t·Θ(X)⊗X) = x†Gx.
pub fn reflection_form(t: &ComplexMatrix, b: &Bipartition) -> Result<ComplexMatrix> {
    b.check_full_op(t)?;
    let d = b.dim_plus();
    let units: Vec<ComplexMatrix> =
        (0..d * d).map(|k| ComplexMatrix::unit(d, d, k / d, k % d)).collect();
    let thetas: Vec<ComplexMatrix> = units.iter().map(|e| b.big_theta(e)).collect::<Result<_>>()?;
    let n = d * d;
    let mut g = vec![ZERO; n * n];
    for k in 0..n {
        for l in 0..n {
            let y = thetas[k].kron(&units[l]);
            g[k * n + l] = t.matmul(&y).trace();
        }
    }
    Ok(ComplexMatrix::from_parts(n, n, g))
}

/// Reflection positivity of Y ↦ Tr(tY) from the directly evaluated form.
pub fn is_rp_direct(t: &ComplexMatrix, b: &Bipartition, tol: f64) -> Result<CpVerdict> {
    let g = reflection_form(t, b)?;
    let hermitian = g.hermiticity_defect() <= tol.max(1e-12);
    let e = herm_eig(&g.hermitian_part(), 1.0)?;
    Ok(CpVerdict {
        positive: hermitian && e.min() >= -tol * e.max().max(1.0),
        hermitian,
        min_eigenvalue: e.min(),
        max_eigenvalue: e.max(),
    })
}

/// O(v) PSD ⇔ ⟨v|θ̂ξ⊗ξ⟩ ≥ 0 for all ξ.
pub fn is_rp_state(v: &[C64], b: &Bipartition, tol: f64) -> Result<CpVerdict> {
    if vec_norm(v) == 0.0 {
        return Err(Error::ZeroVector);
    }
    let o = o_map(v, b)?;
    let scale = o.frobenius_norm().max(1.0);
    let hermitian = o.hermiticity_defect() <= tol;
    let e = herm_eig(&o.hermitian_part(), 1.0)?;
    Ok(CpVerdict {
        positive: hermitian && e.min() >= -tol * scale,
        hermitian,
        min_eigenvalue: e.min(),
        max_eigenvalue: e.max(),
    })
}

/// Tr_{ℋ₋}|v⟩⟨v| computed as O(v)·O(v)†.
pub fn reduced_density(v: &[C64], b: &Bipartition) -> Result<ComplexMatrix> {
    let o = o_map(v, b)?;
    Ok(o.matmul(&o.dagger()))
}

/// e^{−τH} by eigendecomposition.
pub fn semigroup_element(h: &ComplexMatrix, tau: f64) -> Result<ComplexMatrix> {
    herm_function(h, |x| C64::new((-tau * x).exp(), 0.0))
}

/// Θ(h₊)⊗I + I⊗h₊ + sign·Σ Θ(O_j)⊗O_j.
pub fn assemble_reflection_hamiltonian(
    h_plus: &ComplexMatrix,
    cross_terms: &[ComplexMatrix],
    cross_sign: f64,
    b: &Bipartition,
) -> Result<ComplexMatrix> {
    b.check_plus_op(h_plus)?;
    let d = b.dim_plus();
    let id = ComplexMatrix::identity(d);
    let mut h = &b.big_theta(h_plus)?.kron(&id) + &id.kron(h_plus);
    for o in cross_terms {
        b.check_plus_op(o)?;
        let term = b.big_theta(o)?.kron(o).scale_re(cross_sign);
        h = &h + &term;
    }
    Ok(h)
}

/// H = Θ(h₊)⊗I + I⊗h₊ − Σ_j Θ(O_j)⊗O_j.
#[derive(Clone, Debug)]
pub struct RpHamiltonian {
    pub h_plus: ComplexMatrix,
    pub cross_terms: Vec<ComplexMatrix>,
    pub assembled: ComplexMatrix,
}

impl RpHamiltonian {
    /// RP verdicts of e^{−τH} over a grid of τ.
    pub fn semigroup_verdicts(&self, b: &Bipartition, taus: &[f64], tol: f64) -> Result<Vec<CpVerdict>> {
        semigroup_verdicts(&self.assembled, b, taus, tol)
    }
}

/// RP verdict of e^{−τH} for each τ.
pub fn semigroup_verdicts(h: &ComplexMatrix, b: &Bipartition, taus: &[f64], tol: f64) -> Result<Vec<CpVerdict>> {
    let e = herm_eig(h, 1e-9)?;
    taus.iter()
        .map(|&tau| {
            let shift = e.min();
            // Shifting by the ground energy rescales e^{−τH} by a positive constant.
            let g = e.apply_function(|_, x| C64::new((-tau * (x - shift)).exp(), 0.0));
            is_rp_operator(&g, b, tol)
        })
        .collect()
}

/// Rank of a family of matrices as vectors, relative tolerance `tol`.
pub fn vector_rank(mats: &[ComplexMatrix], tol: f64) -> Result<usize> {
    if mats.is_empty() {
        return Ok(0);
    }
    let n = mats.len();
    let g = ComplexMatrix::from_fn(n, n, |i, j| mats[i].hs_inner(&mats[j]));
    let e = herm_eig(&g, 1e-9)?;
    let top = e.max();
    if top <= 0.0 {
        return Ok(0);
    }
    Ok(e.eigenvalues.iter().filter(|&&x| x > tol * top).count())
}

pub fn build_rp_hamiltonian(
    h_plus: &ComplexMatrix,
    cross_terms: &[ComplexMatrix],
    b: &Bipartition,
) -> Result<RpHamiltonian> {
    let defect = h_plus.hermiticity_defect();
    if defect > 1e-10 {
        return Err(Error::NotHermitian(defect));
    }
    let rank = vector_rank(cross_terms, 1e-9)?;
    if rank < cross_terms.len() {
        return Err(Error::LinearlyDependent { rank, count: cross_terms.len() });
    }
    let assembled = assemble_reflection_hamiltonian(h_plus, cross_terms, -1.0, b)?;
    let defect = assembled.hermiticity_defect();
    if defect > 1e-10 {
        return Err(Error::NotHermitianAssembly(defect));
    }
    Ok(RpHamiltonian { h_plus: h_plus.clone(), cross_terms: cross_terms.to_vec(), assembled })
}

/// Maximally entangled projector Σ|ii⟩⟨jj| on ℂᵈ⊗ℂᵈ.
pub fn max_entangled_projector(d: usize) -> ComplexMatrix {
    let n = d * d;
    ComplexMatrix::from_fn(n, n, |r, c| {
        if r % (d + 1) == 0 && c % (d + 1) == 0 {
            ONE
        } else {
            ZERO
        }
    })
}
