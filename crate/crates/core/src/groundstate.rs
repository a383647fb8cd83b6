//! Ground-state structure of reflection positive Hamiltonians.

use serde::Serialize;

use crate::bipartition::Bipartition;
use crate::error::{Error, Result};
use crate::rpcore::{assemble_reflection_hamiltonian, o_map};
use crate::staralg::MatrixStarAlgebra;
use crate::tensorlab::{
    herm_eig, range_projection, support_inverse, vec_distance, vec_norm, ComplexMatrix, C64, ZERO,
};

pub use crate::staralg::local_commutant;

/// Rank tolerance for entanglement supports of exactly computed projections.
pub const RANK_TOL: f64 = 1e-10;
pub const CLUSTER_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct GroundData {
    pub energy_e0: f64,
    pub projection_pi: ComplexMatrix,
    pub degeneracy: usize,
    /// Distance to the next eigenvalue; infinite when the whole space is ground.
    pub gap: f64,
    /// Spectral norm of H.
    pub norm: f64,
    /// Orthonormal basis of the ground space.
    pub ground_basis: Vec<Vec<C64>>,
}

#[derive(Clone, Debug)]
pub struct PfGroundState {
    /// Π applied to the maximally entangled vector (unnormalized).
    pub phi_pf: Vec<C64>,
    /// Ξ = O(φ_PF), PSD.
    pub xi: ComplexMatrix,
    /// Range projection of Tr₋Π.
    pub pi_hat: ComplexMatrix,
    /// ‖range(Ξ) − Π̂‖_F.
    pub range_residual: f64,
}

/// Ground energy, projection and gap; eigenvalues within cluster_tol·‖H‖ of
/// the minimum count as ground.
pub fn ground_projection(h: &ComplexMatrix, cluster_tol: f64) -> Result<GroundData> {
    let e = herm_eig(h, 1e-9)?;
    let norm = e.spectral_norm();
    let e0 = e.min();
    let threshold = cluster_tol * norm.max(f64::MIN_POSITIVE);
    let deg = e.eigenvalues.iter().take_while(|&&x| x <= e0 + threshold).count();
    let gap = if deg < e.dim() { e.eigenvalues[deg] - e0 } else { f64::INFINITY };
    if gap < 10.0 * threshold {
        return Err(Error::Gapless { gap, threshold: 10.0 * threshold });
    }
    let ground_basis = (0..deg).map(|k| e.vector(k)).collect();
    Ok(GroundData {
        energy_e0: e0,
        projection_pi: e.projection(|k, _| k < deg),
        degeneracy: deg,
        gap,
        norm,
        ground_basis,
    })
}

/// Tr₋Π computed as Σ_k O(φ_k)O(φ_k)† over the ground basis.
pub fn reduced_ground_density(g: &GroundData, b: &Bipartition) -> Result<ComplexMatrix> {
    let d = b.dim_plus();
    let mut acc = ComplexMatrix::zeros(d, d);
    for v in &g.ground_basis {
        let o = o_map(v, b)?;
        acc = &acc + &o.matmul(&o.dagger());
    }
    Ok(acc)
}

pub fn canonical_pf_ground_state(g: &GroundData, b: &Bipartition) -> Result<PfGroundState> {
    let phi_pf = g.projection_pi.apply(&b.max_entangled());
    if vec_norm(&phi_pf) <= 1e-12 * (b.dim_plus() as f64).sqrt() {
        return Err(Error::ZeroPf);
    }
    let xi = o_map(&phi_pf, b)?;
    let defect = xi.hermiticity_defect();
    if defect > 1e-8 {
        return Err(Error::NotHermitian(defect));
    }
    let xi = xi.hermitian_part();
    let pi_hat = range_projection(&reduced_ground_density(g, b)?, RANK_TOL)?;
    let range_residual = range_projection(&xi, RANK_TOL)?.distance(&pi_hat);
    Ok(PfGroundState { phi_pf, xi, pi_hat, range_residual })
}

/// W with |φ⟩ = (I⊗W)|φ_PF⟩ = (Θ(W†)⊗I)|φ_PF⟩.
#[derive(Clone, Debug)]
pub struct WData {
    pub w: ComplexMatrix,
    /// ‖(I⊗W)φ_PF − φ‖.
    pub plus_residual: f64,
    /// ‖(Θ(W†)⊗I)φ_PF − φ‖.
    pub minus_residual: f64,
    /// ‖WΠ̂ − W‖.
    pub support_residual: f64,
}

pub fn ground_state_to_w(phi: &[C64], g: &GroundData, pf: &PfGroundState, b: &Bipartition) -> Result<WData> {
    let pphi = g.projection_pi.apply(phi);
    let miss = vec_distance(&pphi, phi);
    if miss > 1e-9 * vec_norm(phi).max(1.0) {
        return Err(Error::NotGroundState(miss));
    }
    let w = support_inverse(&pf.xi, RANK_TOL)?.matmul(&o_map(phi, b)?);
    let plus = b.apply_plus(&w, &pf.phi_pf)?;
    let minus = b.apply_minus(&b.big_theta(&w.dagger())?, &pf.phi_pf)?;
    Ok(WData {
        plus_residual: vec_distance(&plus, phi),
        minus_residual: vec_distance(&minus, phi),
        support_residual: w.matmul(&pf.pi_hat).distance(&w),
        w,
    })
}

/// Comm₊(H)·Π̂.
pub fn cut_local_commutant(h: &ComplexMatrix, pi_hat: &ComplexMatrix, b: &Bipartition) -> Result<MatrixStarAlgebra> {
    local_commutant(h, b)?.cut(pi_hat)
}

/// H₋⊗I + I⊗H₊ + H₀ with H₀ = −ΣΘ(O_j)⊗O_j, after checking H₋ = Θ(H₊).
#[derive(Clone, Debug)]
pub struct RpDecomposition {
    pub h_minus: ComplexMatrix,
    pub h_plus: ComplexMatrix,
    pub cross_terms: Vec<ComplexMatrix>,
}

impl RpDecomposition {
    pub fn new(h_minus: ComplexMatrix, h_plus: ComplexMatrix, cross_terms: Vec<ComplexMatrix>, b: &Bipartition) -> Result<Self> {
        let mirrored = b.big_theta(&h_plus)?;
        if h_minus.shape() != mirrored.shape() {
            return Err(Error::DimensionMismatch("H₋ shape".into()));
        }
        let gap = h_minus.distance(&mirrored);
        if gap > 1e-9 * h_plus.frobenius_norm().max(1.0) {
            return Err(Error::NotReflectionSymmetric(format!("‖H₋ − Θ(H₊)‖ = {gap:.3e}")));
        }
        for o in &cross_terms {
            b.check_plus_op(o)?;
        }
        Ok(Self { h_minus, h_plus, cross_terms })
    }

    pub fn h0(&self, b: &Bipartition) -> Result<ComplexMatrix> {
        let zero = ComplexMatrix::zeros(b.dim_plus(), b.dim_plus());
        let h = assemble_reflection_hamiltonian(&zero, &self.cross_terms, -1.0, b)?;
        Ok(h)
    }

    /// The four dilation blocks (a,b) ∈ {(0,0),(0,1),(1,0),(1,1)}:
    /// H₀ + [b=0](H₋−E₀)⊗I + [a=0]I⊗(H₊−E₀).
    pub fn blocks(&self, b: &Bipartition) -> Result<[ComplexMatrix; 4]> {
        let d = b.dim_plus();
        let id = ComplexMatrix::identity(d);
        let e0 = herm_eig(&self.h_plus, 1e-9)?.min();
        let hm = self.h_minus.kron(&id);
        let hp = id.kron(&self.h_plus);
        let shift = ComplexMatrix::identity(d * d).scale_re(e0);
        let hm = &hm - &shift;
        let hp = &hp - &shift;
        let h0 = self.h0(b)?;
        let full = &(&h0 + &hm) + &hp;
        let upper = &h0 + &hp;
        let lower = &h0 + &hm;
        Ok([full, upper, lower, h0])
    }

    pub fn full_hamiltonian(&self, b: &Bipartition) -> Result<ComplexMatrix> {
        let id = ComplexMatrix::identity(b.dim_plus());
        Ok(&(&self.h_minus.kron(&id) + &id.kron(&self.h_plus)) + &self.h0(b)?)
    }

    /// Ground energies of the four blocks; FrustrationDetected unless equal.
    pub fn check_frustration_free(&self, b: &Bipartition) -> Result<[f64; 4]> {
        let blocks = self.blocks(b)?;
        let mut energies = [0.0; 4];
        let mut scale: f64 = 1.0;
        for (k, blk) in blocks.iter().enumerate() {
            let e = herm_eig(blk, 1e-9)?;
            energies[k] = e.min();
            scale = scale.max(e.spectral_norm());
        }
        let spread = energies.iter().cloned().fold(f64::MIN, f64::max) - energies.iter().cloned().fold(f64::MAX, f64::min);
        if spread > 1e-9 * scale {
            return Err(Error::FrustrationDetected(energies));
        }
        Ok(energies)
    }
}

/// The 2×2 dilation on (ℋ₋⊗ℂ²)⊗(ℋ₊⊗ℂ²).
#[derive(Clone, Debug)]
pub struct DilatedSystem {
    pub bipartition: Bipartition,
    pub hamiltonian: ComplexMatrix,
    pub block_energies: [f64; 4],
}

pub fn dilate(decomp: &RpDecomposition, b: &Bipartition) -> Result<DilatedSystem> {
    let block_energies = decomp.check_frustration_free(b)?;
    let b2 = b.with_ancilla(2)?;
    let d = b.dim_plus();
    let e0 = herm_eig(&decomp.h_plus, 1e-9)?.min();
    let top = ComplexMatrix::diag_real(&[1.0, 0.0]);
    let shifted = &decomp.h_plus - &ComplexMatrix::identity(d).scale_re(e0);
    let h_plus2 = shifted.kron(&top);
    let i2 = ComplexMatrix::identity(2);
    let cross2: Vec<ComplexMatrix> = decomp.cross_terms.iter().map(|o| o.kron(&i2)).collect();
    let hamiltonian = assemble_reflection_hamiltonian(&h_plus2, &cross2, -1.0, &b2)?;
    Ok(DilatedSystem { bipartition: b2, hamiltonian, block_energies })
}

impl DilatedSystem {
    /// Component |a⟩⟨b| of a dilated vector as a vector on ℋ₋⊗ℋ₊.
    pub fn component(&self, v: &[C64], a: usize, bb: usize) -> Vec<C64> {
        let d = self.bipartition.dim_plus() / 2;
        let mut out = vec![ZERO; d * d];
        for m in 0..d {
            for x in 0..d {
                out[m * d + x] = v[(m * 2 + bb) * 2 * d + x * 2 + a];
            }
        }
        out
    }
}

/// Ground basis of H₀ + I⊗H₊ and the G-matrix verdict.
#[derive(Clone, Debug, Serialize)]
pub struct LtqoReport {
    pub nondegenerate: bool,
    pub ltqo: bool,
    pub agree: bool,
    pub degeneracy_full: usize,
    pub degeneracy_partial: usize,
    pub block_energies: [f64; 4],
    /// Largest ‖G_jk‖ over j ≠ k.
    pub max_off_diagonal: f64,
    /// Largest ‖G_jj − G_00‖.
    pub diagonal_spread: f64,
    pub witness: Option<(usize, usize)>,
}

pub fn ltqo_check(decomp: &RpDecomposition, b: &Bipartition) -> Result<LtqoReport> {
    let block_energies = decomp.check_frustration_free(b)?;
    let full = ground_projection(&decomp.full_hamiltonian(b)?, CLUSTER_TOL)?;
    let blocks = decomp.blocks(b)?;
    let partial = ground_projection(&blocks[1], CLUSTER_TOL)?;
    let os: Vec<ComplexMatrix> = partial.ground_basis.iter().map(|v| o_map(v, b)).collect::<Result<_>>()?;
    let n = os.len();
    let g = |j: usize, k: usize| os[j].matmul(&os[k].dagger());
    let g00 = g(0, 0);
    let mut max_off: f64 = 0.0;
    let mut spread: f64 = 0.0;
    let mut witness = None;
    let tol = 1e-9;
    for j in 0..n {
        let s = g(j, j).distance(&g00);
        if s > spread {
            spread = s;
            if s > tol && witness.is_none() {
                witness = Some((j, j));
            }
        }
        for k in 0..n {
            if j == k {
                continue;
            }
            let off = g(j, k).frobenius_norm();
            if off > max_off {
                max_off = off;
                if off > tol && witness.is_none() {
                    witness = Some((j, k));
                }
            }
        }
    }
    let ltqo = max_off <= tol && spread <= tol;
    let nondegenerate = full.degeneracy == 1;
    Ok(LtqoReport {
        nondegenerate,
        ltqo,
        agree: nondegenerate == ltqo,
        degeneracy_full: full.degeneracy,
        degeneracy_partial: n,
        block_energies,
        max_off_diagonal: max_off,
        diagonal_spread: spread,
        witness,
    })
}

/// V = O(φ)Ξ₀⁺ with |φ⟩ = (I⊗V)|φ⁰_PF⟩; returns V and the reconstruction residual.
pub fn partial_sum_intertwiner(phi: &[C64], pf0: &PfGroundState, b: &Bipartition) -> Result<(ComplexMatrix, f64)> {
    let v = o_map(phi, b)?.matmul(&support_inverse(&pf0.xi, RANK_TOL)?);
    let rebuilt = b.apply_plus(&v, &pf0.phi_pf)?;
    Ok((v, vec_distance(&rebuilt, phi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::*;
    use crate::rpcore::is_rp_state;
    use crate::staralg::algebra_equal;
    use crate::tensorlab::{partial_trace, vec_inner};

    fn sx() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    fn sz() -> ComplexMatrix {
        ComplexMatrix::diag_real(&[1.0, -1.0])
    }

    #[test]
    fn simple_ground_projections() {
        let g = ground_projection(&ComplexMatrix::diag_real(&[0.0, 1.0, 1.0]), CLUSTER_TOL).unwrap();
        assert_eq!(g.degeneracy, 1);
        assert!((g.gap - 1.0).abs() < 1e-12);
        assert!(g.projection_pi.distance(&ComplexMatrix::diag_real(&[1.0, 0.0, 0.0])) < 1e-12);
        let ising = sz().kron(&sz()).scale_re(-1.0);
        assert_eq!(ground_projection(&ising, CLUSTER_TOL).unwrap().degeneracy, 2);
        let near = ComplexMatrix::diag_real(&[0.0, 5e-9, 1.0]);
        assert!(matches!(ground_projection(&near, CLUSTER_TOL), Err(Error::Gapless { .. })));
    }

    #[test]
    fn product_ground_state() {
        let b = Bipartition::mirrored(&[2]).unwrap();
        // −|00⟩⟨00| has the product ground state θ̂|0⟩⊗|0⟩.
        let p0 = ComplexMatrix::diag_real(&[1.0, 0.0]);
        let h = p0.kron(&p0).scale_re(-1.0);
        let g = ground_projection(&h, CLUSTER_TOL).unwrap();
        let pf = canonical_pf_ground_state(&g, &b).unwrap();
        assert!(pf.pi_hat.distance(&p0) < 1e-12);
        assert!(pf.xi.distance(&p0) < 1e-12);
        let w = ground_state_to_w(&pf.phi_pf, &g, &pf, &b).unwrap();
        assert!(w.w.distance(&pf.pi_hat) < 1e-10);
    }

    #[test]
    fn zero_pf_detected() {
        let b = Bipartition::mirrored(&[2]).unwrap();
        // Singlet-like ground state orthogonal to Σ|ii⟩.
        let v = [ZERO, C64::new(1.0, 0.0), C64::new(-1.0, 0.0), ZERO];
        let h = ComplexMatrix::outer(&v, &v).scale_re(-0.5);
        let g = ground_projection(&h, CLUSTER_TOL).unwrap();
        assert!(matches!(canonical_pf_ground_state(&g, &b), Err(Error::ZeroPf)));
    }

    #[test]
    fn ground_state_bijection() {
        let mut rng = seeded(7);
        for _ in 0..4 {
            let (b, h) = random_symmetric_rp_hamiltonian(&mut rng, 2, 2).unwrap();
            let h = h.assembled;
            let g = ground_projection(&h, CLUSTER_TOL).unwrap();
            let pf = canonical_pf_ground_state(&g, &b).unwrap();
            assert!(pf.range_residual < 1e-8);
            assert!(is_rp_state(&pf.phi_pf, &b, 1e-9).unwrap().positive);
            let cut = cut_local_commutant(&h, &pf.pi_hat, &b).unwrap();
            assert_eq!(g.degeneracy, cut.dim());
            for phi in &g.ground_basis {
                let w = ground_state_to_w(phi, &g, &pf, &b).unwrap();
                assert!(w.plus_residual < 1e-8 && w.minus_residual < 1e-8 && w.support_residual < 1e-8);
                assert!(cut.contains(&w.w, 1e-8));
            }
            // Comm₊(H)Π̂ = Comm₊(Π)Π̂.
            let cut_pi = cut_local_commutant(&g.projection_pi, &pf.pi_hat, &b).unwrap();
            assert!(algebra_equal(&cut, &cut_pi));
        }
    }

    #[test]
    fn reduced_density_matches_partial_trace() {
        let mut rng = seeded(8);
        let (b, h) = random_symmetric_rp_hamiltonian(&mut rng, 2, 2).unwrap();
        let h = h.assembled;
        let g = ground_projection(&h, CLUSTER_TOL).unwrap();
        let pt = partial_trace(&g.projection_pi, &b.full_shape(), &[1]).unwrap();
        assert!(reduced_ground_density(&g, &b).unwrap().distance(&pt) < 1e-10);
    }

    #[test]
    fn not_a_ground_state() {
        let b = Bipartition::mirrored(&[2]).unwrap();
        let h = sz().kron(&sz());
        let g = ground_projection(&h, CLUSTER_TOL).unwrap();
        let pf = canonical_pf_ground_state(&g, &b);
        let v = vec![C64::new(1.0, 0.0), ZERO, ZERO, ZERO];
        if let Ok(pf) = pf {
            assert!(matches!(ground_state_to_w(&v, &g, &pf, &b), Err(Error::NotGroundState(_))));
        }
    }

    #[test]
    fn trivial_dilation() {
        let b = Bipartition::mirrored(&[2]).unwrap();
        let z = ComplexMatrix::zeros(2, 2);
        let dec = RpDecomposition::new(z.clone(), z, vec![], &b).unwrap();
        let dil = dilate(&dec, &b).unwrap();
        assert!(dil.block_energies.iter().all(|e| e.abs() < 1e-12));
        let g = ground_projection(&dil.hamiltonian, CLUSTER_TOL).unwrap();
        let pf = canonical_pf_ground_state(&g, &dil.bipartition).unwrap();
        for (a, bb) in [(0, 0), (1, 1)] {
            let c = dil.component(&pf.phi_pf, a, bb);
            assert!(vec_distance(&c, &b.max_entangled()) < 1e-12);
        }
        assert!(vec_norm(&dil.component(&pf.phi_pf, 0, 1)) < 1e-12);
    }

    #[test]
    fn dilation_pf_blocks() {
        // H₊ = −P for a projection P, cross terms P A P.
        let mut rng = seeded(9);
        let b = random_twisted_bipartition(&mut rng, 3).unwrap();
        let v = random_unitary(&mut rng, 3);
        let p = v.matmul(&ComplexMatrix::diag_real(&[1.0, 1.0, 0.0])).matmul(&v.dagger());
        let a = random_matrix(&mut rng, 3, 3);
        let o = p.matmul(&a).matmul(&p);
        let dec = RpDecomposition::new(b.big_theta(&p.scale_re(-1.0)).unwrap(), p.scale_re(-1.0), vec![o.clone(), o.dagger()], &b).unwrap();
        let dil = dilate(&dec, &b).unwrap();
        let g = ground_projection(&dil.hamiltonian, CLUSTER_TOL).unwrap();
        let pf = canonical_pf_ground_state(&g, &dil.bipartition).unwrap();
        let blocks = dec.blocks(&b).unwrap();
        let pf_full = canonical_pf_ground_state(&ground_projection(&blocks[0], CLUSTER_TOL).unwrap(), &b).unwrap();
        let pf_h0 = canonical_pf_ground_state(&ground_projection(&blocks[3], CLUSTER_TOL).unwrap(), &b).unwrap();
        assert!(vec_distance(&dil.component(&pf.phi_pf, 0, 0), &pf_full.phi_pf) < 1e-9);
        assert!(vec_distance(&dil.component(&pf.phi_pf, 1, 1), &pf_h0.phi_pf) < 1e-9);
        assert!(vec_norm(&dil.component(&pf.phi_pf, 1, 0)) < 1e-9);
        // Ground states of H₀ + I⊗H₊ are (I⊗V)|φ⁰_PF⟩.
        let partial = ground_projection(&blocks[1], CLUSTER_TOL).unwrap();
        for phi in &partial.ground_basis {
            let (_, r) = partial_sum_intertwiner(phi, &pf_h0, &b).unwrap();
            assert!(r < 1e-8);
        }
    }

    #[test]
    fn frustration_and_symmetry_errors() {
        let b = Bipartition::mirrored(&[2]).unwrap();
        let hp = sz();
        assert!(matches!(
            RpDecomposition::new(sx(), hp.clone(), vec![], &b),
            Err(Error::NotReflectionSymmetric(_))
        ));
        // −σˣ⊗σˣ competes with σᶻ fields.
        let dec = RpDecomposition::new(hp.clone(), hp, vec![sx()], &b).unwrap();
        assert!(matches!(dec.check_frustration_free(&b), Err(Error::FrustrationDetected(_))));
    }

    #[test]
    fn ltqo_zero_hamiltonian() {
        let b = Bipartition::mirrored(&[2, 2]).unwrap();
        let z = ComplexMatrix::zeros(4, 4);
        let dec = RpDecomposition::new(z.clone(), z, vec![], &b).unwrap();
        let r = ltqo_check(&dec, &b).unwrap();
        assert!(!r.nondegenerate && !r.ltqo && r.agree);
        assert!(r.witness.is_some());
    }

    #[test]
    fn g_matrix_matches_sampled_reduced_densities() {
        // Reduced density of Σ c_j φ_j equals Σ c_j conj(c_k) G_jk.
        let b = Bipartition::mirrored(&[2]).unwrap();
        let p = ComplexMatrix::diag_real(&[1.0, 0.0]);
        let dec = RpDecomposition::new(p.scale_re(-1.0), p.scale_re(-1.0), vec![], &b).unwrap();
        let blocks = dec.blocks(&b).unwrap();
        let partial = ground_projection(&blocks[1], CLUSTER_TOL).unwrap();
        let mut rng = seeded(10);
        let c = random_state(&mut rng, partial.degeneracy);
        let mut phi = vec![ZERO; 4];
        for (cj, v) in c.iter().zip(&partial.ground_basis) {
            for (x, y) in phi.iter_mut().zip(v) {
                *x += cj * y;
            }
        }
        let rho = crate::rpcore::reduced_density(&phi, &b).unwrap();
        let os: Vec<ComplexMatrix> = partial.ground_basis.iter().map(|v| o_map(v, &b).unwrap()).collect();
        let mut acc = ComplexMatrix::zeros(2, 2);
        for j in 0..c.len() {
            for k in 0..c.len() {
                acc = &acc + &os[j].matmul(&os[k].dagger()).scale(c[j] * c[k].conj());
            }
        }
        assert!(rho.distance(&acc) < 1e-12);
        let _ = vec_inner(&phi, &phi);
    }
}
