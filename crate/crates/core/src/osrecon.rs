//! Osterwalder–Schrader reconstruction from a reflection positive projection.
//!
//! The physical Hilbert space ℌ is realized in coordinates: for the Gram
//! matrix G of the form ⟨Y,X⟩₀ = Tr(ℰ(Y†)X) with eigenpairs (λ_k, v_k) above
//! the rank threshold, ψ(X)_k = √λ_k·⟨v_k, X⟩.

use serde::Serialize;

use crate::bipartition::Bipartition;
use crate::error::{Error, Result};
use crate::rpcore::{is_rp_operator, o_map, vector_rank};
use crate::staralg::{interaction_algebra, MatrixStarAlgebra, SPAN_TOL};
use crate::tensorlab::{
    herm_eig, psd_function, range_projection, support_inverse, ComplexMatrix, MatrixSpan, C64, ONE, ZERO,
};

pub const RANK_TOL: f64 = 1e-10;
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Above this many entries of 𝔄₊ the Gram matrix is built on the range of ℰ.
pub const FULL_GRAM_LIMIT: usize = 4096;

/// Orthonormal basis of the ground space of a projection.
pub fn projection_basis(pi: &ComplexMatrix) -> Result<Vec<Vec<C64>>> {
    let defect = pi.projection_defect();
    if defect > 1e-9 {
        return Err(Error::NotProjection(defect));
    }
    let e = herm_eig(pi, 1e-9)?;
    Ok(e.vectors_where(|_, x| x > 0.5))
}

/// ℰ(X) = (1/TrΠ)·Σ O(φ_i) X O(φ_i)†.
#[derive(Clone, Debug)]
pub struct EMap {
    /// O(φ_i)/√TrΠ.
    kraus: Vec<ComplexMatrix>,
    trace_pi: f64,
}

impl EMap {
    pub fn new(pi: &ComplexMatrix, b: &Bipartition) -> Result<Self> {
        b.check_full_op(pi)?;
        let basis = projection_basis(pi)?;
        if basis.is_empty() {
            return Err(Error::NotProjection(0.0));
        }
        Self::from_ground_basis(&basis, b)
    }

    pub fn from_ground_basis(basis: &[Vec<C64>], b: &Bipartition) -> Result<Self> {
        let trace_pi = basis.len() as f64;
        let s = 1.0 / trace_pi.sqrt();
        let kraus = basis.iter().map(|v| Ok(o_map(v, b)?.scale_re(s))).collect::<Result<_>>()?;
        Ok(Self { kraus, trace_pi })
    }

    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let d = x.rows();
        let mut acc = ComplexMatrix::zeros(d, d);
        for k in &self.kraus {
            acc = &acc + &k.matmul(x).matmul(&k.dagger());
        }
        acc
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn trace_pi(&self) -> f64 {
        self.trace_pi
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].rows()
    }

    /// Gram of the form on matrix units in row-major order: Σ K†⊗Kᵀ.
    pub fn full_gram(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut g = ComplexMatrix::zeros(d * d, d * d);
        for k in &self.kraus {
            g = &g + &k.dagger().kron(&k.transpose());
        }
        g
    }

    /// Orthonormal basis of the range of ℰ, from the images of matrix units.
    pub fn range_span(&self) -> MatrixSpan {
        let d = self.dim();
        let mut span = MatrixSpan::new(d, d);
        for a in 0..d {
            for c in 0..d {
                let mut img = ComplexMatrix::zeros(d, d);
                for k in &self.kraus {
                    let col_a = k.col(a);
                    let col_c = k.col(c);
                    img = &img + &ComplexMatrix::outer(&col_a, &col_c);
                }
                span.insert(&img, SPAN_TOL, 1e-12);
            }
        }
        span
    }
}

pub fn e_map(x: &ComplexMatrix, pi: &ComplexMatrix, b: &Bipartition) -> Result<ComplexMatrix> {
    b.check_plus_op(x)?;
    Ok(EMap::new(pi, b)?.apply(x))
}

/// The Gram matrix of the form together with the generating set it is built on.
#[derive(Clone, Debug)]
pub struct OsForm {
    pub gram: ComplexMatrix,
    /// None when the generating set is the matrix-unit basis of 𝔄₊.
    pub generating_set: Option<Vec<ComplexMatrix>>,
}

pub fn os_form(pi: &ComplexMatrix, b: &Bipartition, generating_set: Option<&[ComplexMatrix]>) -> Result<OsForm> {
    let e = EMap::new(pi, b)?;
    Ok(os_form_of(&e, generating_set))
}

fn os_form_of(e: &EMap, generating_set: Option<&[ComplexMatrix]>) -> OsForm {
    let d = e.dim();
    let set: Option<Vec<ComplexMatrix>> = match generating_set {
        Some(s) => Some(s.to_vec()),
        None if d * d >= FULL_GRAM_LIMIT => Some(e.range_span().basis()),
        None => None,
    };
    match set {
        None => OsForm { gram: e.full_gram(), generating_set: None },
        Some(s) => {
            let images: Vec<ComplexMatrix> = s.iter().map(|x| e.apply(x)).collect();
            let n = s.len();
            // ⟨Y,X⟩₀ = Tr(ℰ(Y†)X) = ⟨ℰ(Y), X⟩_HS.
            let gram = ComplexMatrix::from_fn(n, n, |i, j| images[i].hs_inner(&s[j]));
            OsForm { gram, generating_set: Some(s) }
        }
    }
}

/// Coordinates of ℌ: weights √λ_k and the matching HS-orthonormal matrices V_k.
#[derive(Clone, Debug)]
pub struct PhysicalSpace {
    pub weights: Vec<f64>,
    pub vectors: Vec<ComplexMatrix>,
}

impl PhysicalSpace {
    fn from_form(form: &OsForm, d: usize) -> Result<Self> {
        let e = herm_eig(&form.gram, 1e-8)?;
        let top = e.max().max(0.0);
        let keep: Vec<usize> = (0..e.dim()).rev().filter(|&k| e.eigenvalues[k] > RANK_TOL * top && top > 0.0).collect();
        let mut weights = Vec::with_capacity(keep.len());
        let mut vectors = Vec::with_capacity(keep.len());
        for k in keep {
            weights.push(e.eigenvalues[k].sqrt());
            let v = e.vector(k);
            let m = match &form.generating_set {
                None => ComplexMatrix::unvec(d, d, &v)?,
                Some(set) => {
                    let mut acc = ComplexMatrix::zeros(d, d);
                    for (c, x) in v.iter().zip(set) {
                        acc = &acc + &x.scale(*c);
                    }
                    acc
                }
            };
            vectors.push(m);
        }
        Ok(Self { weights, vectors })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// ψ(X) in the orthonormal coordinates of ℌ.
    pub fn psi(&self, x: &ComplexMatrix) -> Vec<C64> {
        self.vectors.iter().zip(&self.weights).map(|(v, w)| v.hs_inner(x) * *w).collect()
    }

    /// Matrix of X ↦ TX on ℌ (meaningful only when T preserves the kernel).
    pub fn compress(&self, t: &ComplexMatrix) -> ComplexMatrix {
        let n = self.dim();
        let moved: Vec<ComplexMatrix> = self.vectors.iter().map(|v| t.matmul(v)).collect();
        ComplexMatrix::from_fn(n, n, |k, l| self.vectors[k].hs_inner(&moved[l]) * (self.weights[k] / self.weights[l]))
    }
}

/// Residuals of the map ρ(A) = Φ(Ξ^{-1/2}AΞ^{1/2}) from 𝒜₊(Π)Π̂ onto the field algebra.
#[derive(Clone, Debug, Default, Serialize)]
pub struct IsoResiduals {
    pub multiplicative: f64,
    pub unital: f64,
    pub star: f64,
    pub image_rank: usize,
    pub algebra_dim: usize,
    pub vacuum: f64,
}

impl IsoResiduals {
    pub fn passes(&self, tol: f64) -> bool {
        self.multiplicative < tol
            && self.unital < tol
            && self.star < tol
            && self.vacuum < tol
            && self.image_rank == self.algebra_dim
    }
}

#[derive(Clone, Debug)]
pub struct OsrResult {
    pub trace_pi: f64,
    pub e_map: EMap,
    pub form: OsForm,
    pub phys: PhysicalSpace,
    pub xi: ComplexMatrix,
    pub pi_hat: ComplexMatrix,
    pub f_central: ComplexMatrix,
    /// Presentation 𝒜₊(Π)Π̂.
    pub field_algebra: MatrixStarAlgebra,
    /// (1/TrΠ)·Tr₋Π = Ξ²F/TrΠ.
    pub vacuum_density: ComplexMatrix,
    pub iso: IsoResiduals,
    xi_sqrt: ComplexMatrix,
    xi_inv_sqrt: ComplexMatrix,
    xi_inv: ComplexMatrix,
}

pub fn field_algebra(pi: &ComplexMatrix, b: &Bipartition) -> Result<OsrResult> {
    let verdict = is_rp_operator(pi, b, 1e-9)?;
    if !verdict.positive {
        return Err(Error::NotReflectionPositive(verdict.min_eigenvalue));
    }
    let basis = projection_basis(pi)?;
    if basis.is_empty() {
        return Err(Error::NotProjection(0.0));
    }
    let d = b.dim_plus();
    let e = EMap::from_ground_basis(&basis, b)?;
    let form = os_form_of(&e, None);
    let phys = PhysicalSpace::from_form(&form, d)?;

    let phi_pf = pi.apply(&b.max_entangled());
    if phi_pf.iter().all(|z| z.norm() < 1e-12) {
        return Err(Error::ZeroPf);
    }
    let xi = o_map(&phi_pf, b)?.hermitian_part();
    let vacuum_density = e.apply(&ComplexMatrix::identity(d));
    let pi_hat = range_projection(&vacuum_density, RANK_TOL)?;
    let xi_inv = support_inverse(&xi, RANK_TOL)?;
    let xi_sqrt = psd_function(&xi, |x| C64::new(x.sqrt(), 0.0), RANK_TOL)?;
    let xi_inv_sqrt = psd_function(&xi, |x| C64::new(1.0 / x.sqrt(), 0.0), RANK_TOL)?;
    let mut f_central = ComplexMatrix::zeros(d, d);
    for v in &basis {
        let w = xi_inv.matmul(&o_map(v, b)?);
        f_central = &f_central + &w.matmul(&w.dagger());
    }
    let field_algebra = interaction_algebra(pi, b)?.cut(&pi_hat)?;

    let mut out = OsrResult {
        trace_pi: e.trace_pi(),
        e_map: e,
        form,
        phys,
        xi,
        pi_hat,
        f_central,
        field_algebra,
        vacuum_density,
        iso: IsoResiduals::default(),
        xi_sqrt,
        xi_inv_sqrt,
        xi_inv,
    };
    out.iso = out.iso_residuals()?;
    Ok(out)
}

impl OsrResult {
    pub fn phys_dim(&self) -> usize {
        self.phys.dim()
    }

    pub fn xi_inverse(&self) -> &ComplexMatrix {
        &self.xi_inv
    }

    /// Ω = ψ(I).
    pub fn vacuum_vector(&self) -> Vec<C64> {
        self.phys.psi(&ComplexMatrix::identity(self.xi.rows()))
    }

    /// Φ(T) = Φ(Π̂TΠ̂) after the field-operator criterion.
    pub fn field_operator(&self, t: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.xi.rows();
        if t.shape() != (d, d) {
            return Err(Error::DimensionMismatch("field operator shape".into()));
        }
        let scale = t.frobenius_norm().max(1.0);
        let comp = ComplexMatrix::identity(d);
        let off = self.pi_hat.matmul(t).matmul(&(&comp - &self.pi_hat));
        if off.frobenius_norm() > RESIDUAL_TOL * scale {
            return Err(Error::NotAFieldOperator(format!(
                "Π̂T(I−Π̂) ≠ 0 (residual {:.3e})",
                off.frobenius_norm()
            )));
        }
        let inner = self.pi_hat.matmul(t).matmul(&self.pi_hat);
        let r = self.field_algebra.span().residual(&inner);
        if r > RESIDUAL_TOL * scale {
            return Err(Error::NotAFieldOperator(format!("Π̂TΠ̂ ∉ 𝒜₊(Π)Π̂ (residual {r:.3e})")));
        }
        Ok(self.phys.compress(&inner))
    }

    /// ρ(A) = Φ(Ξ^{-1/2}AΞ^{1/2}).
    pub fn rho(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.field_operator(&self.xi_inv_sqrt.matmul(a).matmul(&self.xi_sqrt))
    }

    /// ω(A) = ⟨Ω, ρ(A)Ω⟩ on the algebra presentation.
    pub fn vacuum_expectation(&self, a: &ComplexMatrix) -> Result<C64> {
        let omega = self.vacuum_vector();
        let m = self.rho(a)?;
        Ok(inner(&omega, &m.apply(&omega)))
    }

    fn iso_residuals(&self) -> Result<IsoResiduals> {
        let alg = &self.field_algebra;
        let basis = alg.basis();
        let images: Vec<ComplexMatrix> = basis.iter().map(|a| self.rho(a)).collect::<Result<_>>()?;
        let mut multiplicative: f64 = 0.0;
        for g in alg.generators() {
            let rg = self.rho(g)?;
            for (a, ra) in basis.iter().zip(&images) {
                let lhs = self.rho(&g.matmul(a))?;
                let scale = g.frobenius_norm() * a.frobenius_norm();
                multiplicative = multiplicative.max(lhs.distance(&rg.matmul(ra)) / scale.max(1e-300));
            }
        }
        let n = self.phys_dim();
        let unital = self.rho(&self.pi_hat)?.distance(&ComplexMatrix::identity(n));
        let mut star: f64 = 0.0;
        for (a, ra) in basis.iter().zip(&images) {
            star = star.max(self.rho(&a.dagger())?.distance(&ra.dagger()));
        }
        let image_rank = vector_rank(&images, 1e-9)?;
        let omega = self.vacuum_vector();
        let mut vacuum: f64 = 0.0;
        for x in &basis {
            let via_h = inner(&omega, &self.field_operator(x)?.apply(&omega));
            let via_trace = self.vacuum_density.hs_inner(x);
            vacuum = vacuum.max((via_h - via_trace).norm());
        }
        Ok(IsoResiduals { multiplicative, unital, star, image_rank, algebra_dim: alg.dim(), vacuum })
    }
}

fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).fold(ZERO, |acc, (a, b)| acc + a.conj() * b)
}

/// σ_t(A) = Ξ^{2it}AΞ^{−2it}, with Ξ^{2it} acting as zero off the support.
#[derive(Clone, Debug)]
pub struct ModularFlow {
    pub t: f64,
    u: ComplexMatrix,
    u_inv: ComplexMatrix,
}

impl ModularFlow {
    pub fn apply(&self, a: &ComplexMatrix) -> ComplexMatrix {
        self.u.matmul(a).matmul(&self.u_inv)
    }
}

pub fn modular_flow(osr: &OsrResult, t: f64) -> Result<ModularFlow> {
    modular_flow_of(&osr.xi, t)
}

pub fn modular_flow_of(xi: &ComplexMatrix, t: f64) -> Result<ModularFlow> {
    let u = psd_function(xi, |x| C64::new(0.0, 2.0 * t * x.ln()).exp(), RANK_TOL)?;
    let u_inv = psd_function(xi, |x| C64::new(0.0, -2.0 * t * x.ln()).exp(), RANK_TOL)?;
    Ok(ModularFlow { t, u, u_inv })
}

/// Largest ‖σ_t(A) − A‖ over the field algebra basis and the given times.
pub fn modular_deviation(osr: &OsrResult, times: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &t in times {
        let flow = modular_flow(osr, t)?;
        for a in osr.field_algebra.basis() {
            worst = worst.max(flow.apply(&a).distance(&a));
        }
    }
    Ok(worst)
}

/// Serializable summary of a reconstruction.
#[derive(Clone, Debug, Serialize)]
pub struct OsrSummary {
    pub phys_dim: usize,
    pub gram_rank: usize,
    pub algebra_dim: usize,
    pub block_signature: Vec<usize>,
    pub trace_pi: f64,
    pub xi_is_identity: bool,
    pub pi_hat_is_identity: bool,
    pub modular_trivial: bool,
    pub iso: IsoResiduals,
}

pub fn summarize(osr: &OsrResult) -> Result<OsrSummary> {
    let d = osr.xi.rows();
    let id = ComplexMatrix::identity(d);
    let modular = modular_deviation(osr, &[0.3, 1.0, 2.7])?;
    Ok(OsrSummary {
        phys_dim: osr.phys_dim(),
        gram_rank: osr.phys_dim(),
        algebra_dim: osr.field_algebra.dim(),
        block_signature: osr.field_algebra.signature()?,
        trace_pi: osr.trace_pi,
        xi_is_identity: osr.xi.distance(&id) < RESIDUAL_TOL,
        pi_hat_is_identity: osr.pi_hat.distance(&id) < RESIDUAL_TOL,
        modular_trivial: modular < RESIDUAL_TOL,
        iso: osr.iso.clone(),
    })
}

/// Unit element Π̂ as the ω-normalization check: ω(Π̂) = 1.
pub fn vacuum_normalization(osr: &OsrResult) -> Result<f64> {
    Ok((osr.vacuum_expectation(&osr.pi_hat)? - ONE).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::*;
    use crate::groundstate::{ground_projection, CLUSTER_TOL};
    use crate::rpcore::is_completely_positive;
    use crate::rpcore::SuperOperator;
    use crate::staralg::{center, local_commutant};
    use crate::tensorlab::partial_trace;

    fn random_instance(seed: u64, p: usize, q: usize) -> (Bipartition, ComplexMatrix) {
        let mut rng = seeded(seed);
        let (b, h) = random_symmetric_rp_hamiltonian(&mut rng, p, q).unwrap();
        let g = ground_projection(&h.assembled, CLUSTER_TOL).unwrap();
        (b, g.projection_pi)
    }

    fn trace_oracle(x: &ComplexMatrix, pi: &ComplexMatrix, b: &Bipartition) -> ComplexMatrix {
        let d = b.dim_plus();
        let lifted = b.big_theta(&x.dagger()).unwrap().kron(&ComplexMatrix::identity(d));
        let pt = partial_trace(&pi.matmul(&lifted), &b.full_shape(), &[1]).unwrap();
        pt.scale_re(1.0 / pi.trace().re)
    }

    #[test]
    fn e_map_on_maximally_entangled_state() {
        let b = Bipartition::mirrored(&[2]).unwrap();
        let v: Vec<C64> = b.max_entangled().iter().map(|z| z / 2f64.sqrt()).collect();
        let pi = ComplexMatrix::outer(&v, &v);
        let e = e_map(&ComplexMatrix::identity(2), &pi, &b).unwrap();
        assert!(e.distance(&ComplexMatrix::identity(2).scale_re(0.5)) < 1e-12);
    }

    #[test]
    fn e_map_on_whole_space() {
        let mut rng = seeded(1);
        let b = random_twisted_bipartition(&mut rng, 3).unwrap();
        let x = random_matrix(&mut rng, 3, 3);
        let e = e_map(&x, &ComplexMatrix::identity(9), &b).unwrap();
        let expected = ComplexMatrix::identity(3).scale(x.trace() / 9.0);
        assert!(e.distance(&expected) < 1e-12);
    }

    #[test]
    fn e_map_matches_partial_trace_and_is_symmetric_cp() {
        for seed in 0..4 {
            let (b, pi) = random_instance(seed, 2, 2);
            let mut rng = seeded(100 + seed);
            let e = EMap::new(&pi, &b).unwrap();
            let x = random_matrix(&mut rng, 4, 4);
            let y = random_matrix(&mut rng, 4, 4);
            assert!(e.apply(&x).distance(&trace_oracle(&x, &pi, &b)) < 1e-10);
            let lhs = e.apply(&x).matmul(&y).trace();
            let rhs = x.matmul(&e.apply(&y)).trace();
            assert!((lhs - rhs).norm() < 1e-10);
            let s = SuperOperator::from_map(4, |m| e.apply(m));
            assert!(is_completely_positive(&s, 1e-10).positive);
            // ℰ acts invertibly on its range.
            let once = e.apply(&x);
            let span = e.range_span();
            assert!(span.residual(&e.apply(&once)) < 1e-9 * once.frobenius_norm().max(1.0));
        }
    }

    #[test]
    fn product_state_has_rank_one_form() {
        let b = Bipartition::mirrored(&[2]).unwrap();
        let p0 = ComplexMatrix::diag_real(&[1.0, 0.0]);
        let pi = p0.kron(&p0);
        let form = os_form(&pi, &b, None).unwrap();
        let e = herm_eig(&form.gram, 1e-9).unwrap();
        assert_eq!(e.eigenvalues.iter().filter(|&&x| x > 1e-10).count(), 1);
        let osr = field_algebra(&pi, &b).unwrap();
        assert_eq!(osr.phys_dim(), 1);
        assert_eq!(osr.field_algebra.signature().unwrap(), vec![1]);
    }

    #[test]
    fn reduced_generating_set_gives_the_same_rank() {
        let (b, pi) = random_instance(5, 2, 2);
        let e = EMap::new(&pi, &b).unwrap();
        let full = os_form_of(&e, None);
        let range = e.range_span().basis();
        let reduced = os_form_of(&e, Some(&range));
        let r_full = PhysicalSpace::from_form(&full, 4).unwrap().dim();
        let r_red = PhysicalSpace::from_form(&reduced, 4).unwrap().dim();
        assert_eq!(r_full, r_red);
    }

    #[test]
    fn random_reconstructions() {
        for (seed, p, q) in [(11, 2, 1), (12, 2, 2), (13, 3, 1), (14, 3, 1)] {
            let (b, pi) = random_instance(seed, p, q);
            let osr = field_algebra(&pi, &b).unwrap();
            let gram_e = herm_eig(&osr.form.gram, 1e-9).unwrap();
            assert!(gram_e.min() >= -1e-10 * gram_e.max());
            assert_eq!(osr.phys_dim(), osr.field_algebra.dim());
            assert!(osr.iso.passes(1e-8), "{:?}", osr.iso);
            // Vacuum density equals Ξ²F/TrΠ and the partial trace.
            let pt = partial_trace(&pi, &b.full_shape(), &[1]).unwrap().scale_re(1.0 / osr.trace_pi);
            assert!(osr.vacuum_density.distance(&pt) < 1e-10);
            let xf = osr.xi.matmul(&osr.xi).matmul(&osr.f_central).scale_re(1.0 / osr.trace_pi);
            assert!(osr.vacuum_density.distance(&xf) < 1e-8);
            assert!(vacuum_normalization(&osr).unwrap() < 1e-9);
            // Faithfulness on the unit.
            let e = herm_eig(&osr.pi_hat.matmul(&osr.vacuum_density).matmul(&osr.pi_hat), 1e-9).unwrap();
            let rank = osr.pi_hat.trace().re.round() as usize;
            assert!(e.eigenvalues[e.dim() - rank] > 1e-10);
        }
    }

    #[test]
    fn gram_rank_matches_independent_commutant() {
        for seed in 20..23 {
            let (b, pi) = random_instance(seed, 2, 2);
            let osr = field_algebra(&pi, &b).unwrap();
            let comm = local_commutant(&pi, &b).unwrap();
            let dual = crate::staralg::commutant(&comm).unwrap();
            let cut = dual.times_projection(&osr.pi_hat);
            assert_eq!(osr.phys_dim(), cut.dim());
        }
    }

    #[test]
    fn f_is_central_in_cut_commutant() {
        let (b, pi) = random_instance(30, 2, 2);
        let osr = field_algebra(&pi, &b).unwrap();
        let cut = local_commutant(&pi, &b).unwrap().cut(&osr.pi_hat).unwrap();
        let z = center(&cut).unwrap();
        assert!(z.contains(&osr.f_central, 1e-8));
        // Invertible on Π̂.
        let inv = support_inverse(&osr.f_central, RANK_TOL).unwrap();
        assert!(inv.matmul(&osr.f_central).distance(&osr.pi_hat) < 1e-8);
    }

    #[test]
    fn field_operator_rules() {
        let (b, pi) = random_instance(40, 2, 2);
        let osr = field_algebra(&pi, &b).unwrap();
        let n = osr.phys_dim();
        let id = ComplexMatrix::identity(4);
        assert!(osr.field_operator(&id).unwrap().distance(&ComplexMatrix::identity(n)) < 1e-9);
        let comp = &id - &osr.pi_hat;
        assert!(osr.field_operator(&comp).unwrap().frobenius_norm() < 1e-9);
        let mut rng = seeded(41);
        let coeffs = random_vector(&mut rng, osr.field_algebra.dim());
        let a = osr.field_algebra.span().combine(&coeffs);
        let lhs = osr.field_operator(&a).unwrap().dagger();
        let mapped = osr.xi_inverse().matmul(&a.dagger()).matmul(&osr.xi);
        let rhs = osr.field_operator(&mapped).unwrap();
        assert!(lhs.distance(&rhs) < 1e-8);
        let generic = random_matrix(&mut rng, 4, 4);
        assert!(matches!(osr.field_operator(&generic), Err(Error::NotAFieldOperator(_))));
    }

    #[test]
    fn modular_flow_properties() {
        let (b, pi) = random_instance(50, 2, 2);
        let osr = field_algebra(&pi, &b).unwrap();
        let flow0 = modular_flow(&osr, 0.0).unwrap();
        let mut rng = seeded(51);
        let a = osr.field_algebra.span().combine(&random_vector(&mut rng, osr.field_algebra.dim()));
        assert!(flow0.apply(&a).distance(&a) < 1e-12);
        for t in [0.3, 1.0, 2.7] {
            let flow = modular_flow(&osr, t).unwrap();
            let moved = flow.apply(&a);
            assert!(osr.field_algebra.contains(&moved, 1e-8));
            let w0 = osr.vacuum_expectation(&a).unwrap();
            let wt = osr.vacuum_expectation(&moved).unwrap();
            assert!((w0 - wt).norm() < 1e-9);
            let prod = flow.apply(&a.matmul(&a.dagger()));
            assert!(prod.distance(&moved.matmul(&moved.dagger())) < 1e-9);
        }
    }

    #[test]
    fn rejects_non_rp_projection() {
        let b = Bipartition::mirrored(&[2]).unwrap();
        let v = [ZERO, ONE, ONE.scale(-1.0), ZERO];
        let pi = ComplexMatrix::outer(&v, &v).scale_re(0.5);
        assert!(matches!(field_algebra(&pi, &b), Err(Error::NotReflectionPositive(_))));
    }
}
