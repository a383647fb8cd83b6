//! Perron–Frobenius analysis of symmetric completely positive maps.

use crate::error::{Error, Result};
use crate::rpcore::SuperOperator;
use crate::staralg::{commutant_of_set, MatrixStarAlgebra};
use crate::tensorlab::{herm_eig, psd_function, range_projection, ComplexMatrix, MatrixSpan, C64};

/// Ψ(X) = Σ K X K† with Tr(Ψ(X)Y) = Tr(XΨ(Y)).
#[derive(Clone, Debug)]
pub struct SymmetricCpMap {
    kraus: Vec<ComplexMatrix>,
    dim: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct PfOptions {
    pub max_iters: usize,
    /// Stop when successive averages differ by less than tol·‖average‖_F.
    pub tol: f64,
    pub rank_tol: f64,
    /// Eigenvalues within cluster_tol·ρ of ρ belong to the PF eigenspace.
    pub cluster_tol: f64,
}

impl Default for PfOptions {
    fn default() -> Self {
        Self { max_iters: 200_000, tol: 1e-13, rank_tol: 1e-8, cluster_tol: 1e-8 }
    }
}

#[derive(Clone, Debug)]
pub struct PfResult {
    pub rho: f64,
    pub xi: ComplexMatrix,
    pub p_max: ComplexMatrix,
    pub cesaro_iterations: usize,
    /// ‖Ψ(Ξ) − ρΞ‖_F / ‖ρΞ‖_F.
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct EigenspaceReport {
    pub rho: f64,
    pub eigenspace_dim: usize,
    pub bim_pmax_dim: usize,
    /// Largest relative distance of Ξ^{1/2}XΞ^{1/2} from E over a basis of Bim(Ψ)p_max.
    pub embedding_residual: f64,
    pub dims_match: bool,
}

impl SymmetricCpMap {
    /// Accepts any Kraus family whose map is symmetric (transfer matrix Hermitian).
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = kraus.first().map(|k| k.rows()).ok_or_else(|| Error::InvalidInput("empty Kraus list".into()))?;
        for k in &kraus {
            if k.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch("Kraus operators of differing shape".into()));
            }
        }
        let map = Self { kraus, dim };
        if map.transfer_matrix().hermiticity_defect() > 1e-10 {
            return Err(Error::NotAdjointClosed);
        }
        Ok(map)
    }

    /// Kraus family from the Choi matrix of a superoperator.
    pub fn from_superoperator(s: &SuperOperator) -> Result<Self> {
        let d = s.dim();
        let e = herm_eig(&s.choi().hermitian_part(), 1e-8)?;
        let top = e.spectral_norm();
        if e.min() < -1e-9 * top.max(1.0) {
            return Err(Error::NotPsd(e.min()));
        }
        let kraus: Vec<ComplexMatrix> = (0..e.dim())
            .filter(|&k| e.eigenvalues[k] > 1e-12 * top)
            .map(|k| {
                let v = e.vector(k);
                let w = e.eigenvalues[k].sqrt();
                ComplexMatrix::from_fn(d, d, |a, i| v[i * d + a] * w)
            })
            .collect();
        if kraus.is_empty() {
            return Self::new(vec![ComplexMatrix::zeros(d, d)]);
        }
        Self::new(kraus)
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            out = &out + &k.matmul(x).matmul(&k.dagger());
        }
        out
    }

    /// Σ K ⊗ conj(K), so that vec(Ψ(X)) = T·vec(X) row-major.
    pub fn transfer_matrix(&self) -> ComplexMatrix {
        let n = self.dim * self.dim;
        let mut t = ComplexMatrix::zeros(n, n);
        for k in &self.kraus {
            t = &t + &k.kron(&k.conj());
        }
        t
    }

    pub fn superoperator(&self) -> SuperOperator {
        SuperOperator::from_kraus(&self.kraus).expect("nonempty Kraus list")
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        if s < 0.0 {
            return Err(Error::InvalidInput("negative scale of a CP map".into()));
        }
        Self::new(self.kraus.iter().map(|k| k.scale_re(s.sqrt())).collect())
    }
}

pub fn spectral_radius(psi: &SymmetricCpMap) -> Result<f64> {
    Ok(herm_eig(&psi.transfer_matrix(), 1e-9)?.spectral_norm())
}

/// Eigenspace of Ψ at ρ(Ψ), as an orthonormal basis of matrices.
pub fn pf_eigenspace(psi: &SymmetricCpMap, cluster_tol: f64) -> Result<MatrixSpan> {
    let d = psi.dim();
    let e = herm_eig(&psi.transfer_matrix(), 1e-9)?;
    let rho = e.spectral_norm();
    let vecs: Vec<ComplexMatrix> = (0..e.dim())
        .filter(|&k| (e.eigenvalues[k] - rho).abs() <= cluster_tol * rho)
        .map(|k| ComplexMatrix::from_parts(d, d, e.vector(k)))
        .collect();
    Ok(MatrixSpan::from_orthonormal(d, d, &vecs))
}

/// Cesàro limit of Ψⁿ(I)/ρⁿ. Symmetric maps have peripheral spectrum {±ρ};
/// averaging consecutive iterates removes the −ρ component, and the windowed
/// means converge to the same limit as the running mean.
pub fn canonical_pf(psi: &SymmetricCpMap, opts: &PfOptions) -> Result<PfResult> {
    let rho = spectral_radius(psi)?;
    if rho <= 0.0 {
        return Err(Error::ZeroSpectralRadius);
    }
    let d = psi.dim();
    let mut x = ComplexMatrix::identity(d);
    let mut prev: Option<ComplexMatrix> = None;
    let mut last_gap = f64::INFINITY;
    for n in 1..=opts.max_iters {
        let next = psi.apply(&x).scale_re(1.0 / rho);
        let avg = (&x + &next).scale_re(0.5);
        if let Some(p) = &prev {
            last_gap = avg.distance(p);
            if last_gap <= opts.tol * avg.frobenius_norm().max(1e-300) {
                return finish(psi, rho, avg.hermitian_part(), n, opts);
            }
        }
        prev = Some(avg);
        x = next;
    }
    Err(Error::NoConvergence { iterations: opts.max_iters, residual: last_gap })
}

fn finish(psi: &SymmetricCpMap, rho: f64, xi: ComplexMatrix, iterations: usize, opts: &PfOptions) -> Result<PfResult> {
    let p_max = range_projection(&xi, opts.rank_tol)?;
    let residual = psi.apply(&xi).distance(&xi.scale_re(rho)) / (rho * xi.frobenius_norm()).max(1e-300);
    Ok(PfResult { rho, xi, p_max, cesaro_iterations: iterations, residual })
}

/// Ψ₀(X) = Ψ(pXp), Kraus family {K·p}.
pub fn truncate(psi: &SymmetricCpMap, p: &ComplexMatrix) -> Result<SymmetricCpMap> {
    if p.shape() != (psi.dim(), psi.dim()) {
        return Err(Error::DimensionMismatch("truncation projection".into()));
    }
    let defect = p.projection_defect();
    if defect > 1e-9 {
        return Err(Error::NotProjection(defect));
    }
    SymmetricCpMap::new(psi.kraus().iter().map(|k| k.matmul(p)).collect())
}

/// Bim(Ψ), the commutant of {K_i, K_i†}.
pub fn bim(psi: &SymmetricCpMap) -> Result<MatrixStarAlgebra> {
    commutant_of_set(psi.kraus(), &ComplexMatrix::identity(psi.dim()))
}

/// max over Y in `probes`, X in the algebra basis of ‖Ψ(YX) − Ψ(Y)X‖ and
/// ‖Ψ(YX†) − Ψ(Y)X†‖, relative to ‖Y‖·‖X‖.
pub fn bimodule_residual(psi: &SymmetricCpMap, alg: &MatrixStarAlgebra, probes: &[ComplexMatrix]) -> f64 {
    let mut worst: f64 = 0.0;
    for x in alg.basis() {
        let xd = x.dagger();
        for y in probes {
            let py = psi.apply(y);
            let scale = (y.frobenius_norm() * x.frobenius_norm()).max(1e-300);
            worst = worst.max(psi.apply(&y.matmul(&x)).distance(&py.matmul(&x)) / scale);
            worst = worst.max(psi.apply(&y.matmul(&xd)).distance(&py.matmul(&xd)) / scale);
        }
    }
    worst
}

/// Compare E with Ξ^{1/2}·Bim(Ψ)p_max·Ξ^{1/2}.
pub fn verify_eigenspace_structure(psi: &SymmetricCpMap, opts: &PfOptions) -> Result<EigenspaceReport> {
    let pf = canonical_pf(psi, opts)?;
    let e = pf_eigenspace(psi, opts.cluster_tol)?;
    let b = bim(psi)?;
    let bp = b.times_projection(&pf.p_max);
    let root = psd_function(&pf.xi, |x| C64::new(x.sqrt(), 0.0), opts.rank_tol)?;
    let embedding_residual = bp
        .basis()
        .iter()
        .map(|x| e.relative_residual(&root.matmul(x).matmul(&root)))
        .fold(0.0, f64::max);
    Ok(EigenspaceReport {
        rho: pf.rho,
        eigenspace_dim: e.dim(),
        bim_pmax_dim: bp.dim(),
        embedding_residual,
        dims_match: e.dim() == bp.dim(),
    })
}

/// Largest ‖(1 − p_max)X‖ + ‖X(1 − p_max)‖ over a basis of E.
pub fn range_domination_residual(psi: &SymmetricCpMap, pf: &PfResult, cluster_tol: f64) -> Result<f64> {
    let d = psi.dim();
    let q = &ComplexMatrix::identity(d) - &pf.p_max;
    let e = pf_eigenspace(psi, cluster_tol)?;
    Ok(e.basis()
        .iter()
        .map(|x| q.matmul(x).frobenius_norm() + x.matmul(&q).frobenius_norm())
        .fold(0.0, f64::max))
}

/// For a unital Ψ with faithful invariant state ρ, checks that every fixed
/// point x satisfies Ψ(x†x) = Ψ(x)†Ψ(x); returns the largest residual.
pub fn fixed_points_multiplicative(psi: &SymmetricCpMap, state: &ComplexMatrix) -> Result<f64> {
    let d = psi.dim();
    let id = ComplexMatrix::identity(d);
    let unital = psi.apply(&id).distance(&id);
    if unital > 1e-9 {
        return Err(Error::InvalidInput(format!("map is not unital (residual {unital:.3e})")));
    }
    let e = herm_eig(state, 1e-9)?;
    if e.min() <= 0.0 {
        return Err(Error::InvalidInput("invariant state is not faithful".into()));
    }
    let invariant = psi.apply(state).distance(state);
    if invariant > 1e-9 {
        return Err(Error::InvalidInput(format!("state is not invariant (residual {invariant:.3e})")));
    }
    let fix = pf_eigenspace(psi, 1e-8)?;
    let mut worst: f64 = 0.0;
    for x in fix.basis() {
        let px = psi.apply(&x);
        let lhs = psi.apply(&x.dagger().matmul(&x));
        let rhs = px.dagger().matmul(&px);
        worst = worst.max(lhs.distance(&rhs));
    }
    Ok(worst)
}

/// Ξ from the spectral projection of the transfer matrix at ρ applied to I.
pub fn spectral_pf_vector(psi: &SymmetricCpMap, cluster_tol: f64) -> Result<ComplexMatrix> {
    let d = psi.dim();
    let e = pf_eigenspace(psi, cluster_tol)?;
    let id = ComplexMatrix::identity(d);
    let mut out = ComplexMatrix::zeros(d, d);
    for k in 0..e.dim() {
        let v = e.element(k);
        out = &out + &v.scale(v.hs_inner(&id));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::*;
    use crate::staralg::algebra_equal;
    use crate::tensorlab::ZERO;
    use proptest::prelude::*;

    fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    fn random_symmetric(rng: &mut SeededRng, d: usize, r: usize) -> SymmetricCpMap {
        let mut ks = Vec::new();
        for _ in 0..r {
            let a = random_matrix(rng, d, d).scale_re(std::f64::consts::FRAC_1_SQRT_2);
            ks.push(a.dagger());
            ks.push(a);
        }
        SymmetricCpMap::new(ks).unwrap()
    }

    #[test]
    fn unitary_channel_and_scaling() {
        let mut rng = seeded(1);
        let u = random_unitary(&mut rng, 3);
        let half = std::f64::consts::FRAC_1_SQRT_2;
        let psi = SymmetricCpMap::new(vec![u.scale_re(half), u.dagger().scale_re(half)]).unwrap();
        assert!((spectral_radius(&psi).unwrap() - 1.0).abs() < 1e-10);
        let two = SymmetricCpMap::new(vec![ComplexMatrix::identity(3).scale_re(2f64.sqrt())]).unwrap();
        assert!((spectral_radius(&two).unwrap() - 2.0).abs() < 1e-12);
        let pf = canonical_pf(&two, &PfOptions::default()).unwrap();
        assert!(pf.xi.distance(&ComplexMatrix::identity(3)) < 1e-10);
    }

    #[test]
    fn non_symmetric_rejected() {
        let k = ComplexMatrix::unit(2, 2, 0, 1);
        assert!(matches!(SymmetricCpMap::new(vec![k]), Err(Error::NotAdjointClosed)));
    }

    #[test]
    fn unitary_conjugation_eigenspace_is_commutant() {
        let mut rng = seeded(2);
        let h = ComplexMatrix::diag_real(&[0.1, 0.7, 1.9]);
        let v = random_unitary(&mut rng, 3);
        let u = v.matmul(&crate::tensorlab::herm_function(&h, |x| C64::new(0.0, x).exp()).unwrap()).matmul(&v.dagger());
        let half = std::f64::consts::FRAC_1_SQRT_2;
        let psi = SymmetricCpMap::new(vec![u.scale_re(half), u.dagger().scale_re(half)]).unwrap();
        let e = pf_eigenspace(&psi, 1e-8).unwrap();
        assert_eq!(e.dim(), 3);
        assert!(e.contains(&u, 1e-9));
        let r = verify_eigenspace_structure(&psi, &PfOptions::default()).unwrap();
        assert!(r.dims_match && r.embedding_residual < 1e-8);
        assert_eq!(r.eigenspace_dim, 3);
    }

    #[test]
    fn bim_of_sigma_x() {
        let psi = SymmetricCpMap::new(vec![sigma_x(), ComplexMatrix::identity(2)]).unwrap();
        let b = bim(&psi).unwrap();
        assert_eq!(b.dim(), 2);
        assert!(b.contains(&sigma_x(), 1e-12));
        let id = SymmetricCpMap::new(vec![ComplexMatrix::identity(3)]).unwrap();
        assert_eq!(bim(&id).unwrap().dim(), 9);
    }

    #[test]
    fn idempotent_map_pf_is_image_of_identity() {
        // F(X) = P X P for a projection P: F∘F = F and Ξ = F(I) = P.
        let mut rng = seeded(3);
        let v = random_unitary(&mut rng, 4);
        let p = v.matmul(&ComplexMatrix::diag_real(&[1.0, 1.0, 0.0, 0.0])).matmul(&v.dagger());
        let f = SymmetricCpMap::new(vec![p.clone()]).unwrap();
        let pf = canonical_pf(&f, &PfOptions::default()).unwrap();
        assert!(pf.xi.distance(&p) < 1e-10);
        assert!(pf.cesaro_iterations <= 3);
        assert!(pf.p_max.distance(&p) < 1e-10);
    }

    #[test]
    fn truncation_preserves_pf_data() {
        let mut rng = seeded(4);
        // Block-diagonal Kraus with a dominant block so p_max is rank deficient.
        let a = random_matrix(&mut rng, 2, 2);
        let b = random_matrix(&mut rng, 2, 2).scale_re(0.1);
        let embed = |x: &ComplexMatrix, off: usize| {
            ComplexMatrix::from_fn(4, 4, |i, j| {
                if i >= off && i < off + 2 && j >= off && j < off + 2 {
                    x.get(i - off, j - off)
                } else {
                    ZERO
                }
            })
        };
        let k1 = &embed(&a, 0) + &embed(&b, 2);
        let psi = SymmetricCpMap::new(vec![k1.clone(), k1.dagger()]).unwrap();
        let opts = PfOptions::default();
        let pf = canonical_pf(&psi, &opts).unwrap();
        assert_eq!(pf.p_max.trace().re.round() as usize, 2);
        let t = truncate(&psi, &pf.p_max).unwrap();
        let pf0 = canonical_pf(&t, &opts).unwrap();
        assert!(pf0.xi.distance(&pf.xi) < 1e-8 * pf.xi.frobenius_norm());
        let e = pf_eigenspace(&psi, 1e-8).unwrap();
        let e0 = pf_eigenspace(&t, 1e-8).unwrap();
        assert_eq!(e.dim(), e0.dim());
        assert!(e.basis().iter().all(|x| e0.contains(x, 1e-8)));
        let same = truncate(&psi, &ComplexMatrix::identity(4)).unwrap();
        assert!(same.transfer_matrix().distance(&psi.transfer_matrix()) < 1e-14);
    }

    #[test]
    fn fixed_points_of_unital_map() {
        let mut rng = seeded(5);
        let u = random_unitary(&mut rng, 3);
        let half = std::f64::consts::FRAC_1_SQRT_2;
        let psi = SymmetricCpMap::new(vec![u.scale_re(half), u.dagger().scale_re(half)]).unwrap();
        let state = ComplexMatrix::identity(3).scale_re(1.0 / 3.0);
        assert!(fixed_points_multiplicative(&psi, &state).unwrap() < 1e-9);
    }

    #[test]
    fn superoperator_round_trip() {
        let mut rng = seeded(6);
        let psi = random_symmetric(&mut rng, 3, 2);
        let back = SymmetricCpMap::from_superoperator(&psi.superoperator()).unwrap();
        assert!(back.transfer_matrix().distance(&psi.transfer_matrix()) < 1e-10);
        assert!(algebra_equal(&bim(&psi).unwrap(), &bim(&back).unwrap()));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn pf_vector_matches_spectral_projection(seed in any::<u64>(), d in 2usize..5) {
            let mut rng = seeded(seed);
            let psi = random_symmetric(&mut rng, d, 2);
            let opts = PfOptions::default();
            let pf = canonical_pf(&psi, &opts).unwrap();
            let oracle = spectral_pf_vector(&psi, 1e-8).unwrap();
            prop_assert!(pf.xi.distance(&oracle) < 1e-8 * oracle.frobenius_norm());
            prop_assert!(pf.residual < 1e-8);
            // Power iteration from I.
            let mut x = ComplexMatrix::identity(d);
            let mut ratio = 0.0;
            for _ in 0..400 {
                let y = psi.apply(&x);
                ratio = y.frobenius_norm() / x.frobenius_norm();
                x = y.scale_re(1.0 / y.frobenius_norm());
            }
            prop_assert!((ratio - pf.rho).abs() < 1e-8 * pf.rho);
        }

        #[test]
        fn bim_is_a_bimodule_algebra(seed in any::<u64>(), d in 2usize..5) {
            let mut rng = seeded(seed);
            let psi = random_symmetric(&mut rng, d, 1);
            let b = bim(&psi).unwrap();
            let probes: Vec<ComplexMatrix> = (0..4).map(|_| random_matrix(&mut rng, d, d)).collect();
            prop_assert!(bimodule_residual(&psi, &b, &probes) < 1e-10);
            prop_assert!(b.contains(&ComplexMatrix::identity(d), 1e-10));
        }
    }
}
