//! Finite-dimensional *-algebras of matrices: generated algebras, commutants,
//! centers and Wedderburn block signatures.

use std::sync::OnceLock;

use rand::Rng;

use crate::bipartition::Bipartition;
use crate::ensembles::{gaussian, seeded};
use crate::error::{Error, Result};
use crate::tensorlab::{herm_eig, ComplexMatrix, MatrixSpan, C64, ZERO};

/// Relative tolerance for span membership and closure.
pub const SPAN_TOL: f64 = 1e-9;
const NULL_TOL: f64 = 1e-9;
const CENTER_SEED: u64 = 0x00c3_47e2;
const CENTER_ATTEMPTS: usize = 8;

/// A unital *-subalgebra of p·M_d·p.
#[derive(Debug)]
pub struct MatrixStarAlgebra {
    unit: ComplexMatrix,
    span: MatrixSpan,
    generators: Vec<ComplexMatrix>,
    signature: OnceLock<Vec<usize>>,
}

impl Clone for MatrixStarAlgebra {
    fn clone(&self) -> Self {
        let signature = OnceLock::new();
        if let Some(s) = self.signature.get() {
            let _ = signature.set(s.clone());
        }
        Self { unit: self.unit.clone(), span: self.span.clone(), generators: self.generators.clone(), signature }
    }
}

/// Center of an algebra with its minimal central projections.
#[derive(Clone, Debug)]
pub struct CenterDecomposition {
    pub center: MatrixStarAlgebra,
    pub projections: Vec<ComplexMatrix>,
    /// Block size of each projection, in the same order.
    pub block_sizes: Vec<usize>,
    /// Block sizes sorted in descending order.
    pub signature: Vec<usize>,
}

impl MatrixStarAlgebra {
    fn from_parts(unit: ComplexMatrix, span: MatrixSpan, generators: Vec<ComplexMatrix>) -> Self {
        Self { unit, span, generators, signature: OnceLock::new() }
    }

    /// All of M_d.
    pub fn full(d: usize) -> Self {
        let units: Vec<ComplexMatrix> =
            (0..d * d).map(|k| ComplexMatrix::unit(d, d, k / d, k % d)).collect();
        let span = MatrixSpan::from_orthonormal(d, d, &units);
        let mut gens = Vec::new();
        for i in 0..d.saturating_sub(1) {
            gens.push(ComplexMatrix::unit(d, d, i, i + 1));
        }
        gens.push(ComplexMatrix::unit(d, d, 0, 0));
        let alg = Self::from_parts(ComplexMatrix::identity(d), span, gens);
        let _ = alg.signature.set(vec![d]);
        alg
    }

    /// ℂ·p.
    pub fn scalars(unit: &ComplexMatrix) -> Self {
        let d = unit.rows();
        let span = MatrixSpan::spanned_by(d, d, [unit], SPAN_TOL, 1.0);
        Self::from_parts(unit.clone(), span, Vec::new())
    }

    pub fn ambient_dim(&self) -> usize {
        self.unit.rows()
    }

    pub fn unit(&self) -> &ComplexMatrix {
        &self.unit
    }

    pub fn dim(&self) -> usize {
        self.span.dim()
    }

    pub fn span(&self) -> &MatrixSpan {
        &self.span
    }

    pub fn basis(&self) -> Vec<ComplexMatrix> {
        self.span.basis()
    }

    pub fn element(&self, k: usize) -> ComplexMatrix {
        self.span.element(k)
    }

    /// A generating set; commutants are computed from it.
    pub fn generators(&self) -> &[ComplexMatrix] {
        &self.generators
    }

    pub fn contains(&self, x: &ComplexMatrix, tol: f64) -> bool {
        self.span.contains(x, tol)
    }

    pub fn project(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.span.project(x)
    }

    /// Largest relative residual of products of `samples` random basis pairs.
    pub fn closure_residual(&self, rng: &mut impl Rng, samples: usize) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let a = self.element(rng.random_range(0..n));
            let b = self.element(rng.random_range(0..n));
            worst = worst.max(self.span.relative_residual(&a.matmul(&b)));
            worst = worst.max(self.span.relative_residual(&a.dagger()));
        }
        worst
    }

    /// Largest deviation of the unit from a two-sided identity on the basis.
    pub fn unit_residual(&self) -> f64 {
        (0..self.dim())
            .map(|k| {
                let x = self.element(k);
                x.distance(&self.unit.matmul(&x)).max(x.distance(&x.matmul(&self.unit)))
            })
            .fold(0.0, f64::max)
    }

    pub fn center_and_blocks(&self) -> Result<CenterDecomposition> {
        center_and_blocks(self)
    }

    /// Wedderburn block sizes, descending; computed once.
    pub fn signature(&self) -> Result<Vec<usize>> {
        if let Some(s) = self.signature.get() {
            return Ok(s.clone());
        }
        let s = center_and_blocks(self)?.signature;
        let _ = self.signature.set(s.clone());
        Ok(s)
    }

    /// {x·p : x ∈ A} as an algebra with unit p; p must commute with A.
    pub fn cut(&self, p: &ComplexMatrix) -> Result<MatrixStarAlgebra> {
        let d = self.ambient_dim();
        if p.shape() != (d, d) {
            return Err(Error::DimensionMismatch("cut projection".into()));
        }
        let defect = p.projection_defect();
        if defect > 1e-9 {
            return Err(Error::NotProjection(defect));
        }
        let basis = self.basis();
        let worst = basis.iter().map(|x| x.commutator(p).frobenius_norm()).fold(0.0, f64::max);
        if worst > 1e-8 {
            return Err(Error::CommutationFailure(worst));
        }
        let span = MatrixSpan::spanned_by(d, d, basis.iter().map(|x| x.matmul(p)).collect::<Vec<_>>().iter(), SPAN_TOL, 1.0);
        let gens = self.generators.iter().map(|g| g.matmul(p)).collect();
        Ok(Self::from_parts(self.unit.matmul(p), span, gens))
    }

    /// The linear space {x·p : x ∈ A}.
    pub fn times_projection(&self, p: &ComplexMatrix) -> MatrixSpan {
        let d = self.ambient_dim();
        let prods: Vec<ComplexMatrix> = self.basis().iter().map(|x| x.matmul(p)).collect();
        MatrixSpan::spanned_by(d, d, prods.iter(), SPAN_TOL, 1.0)
    }
}

fn check_unit(unit: &ComplexMatrix) -> Result<()> {
    if !unit.is_square() {
        return Err(Error::DimensionMismatch("algebra unit must be square".into()));
    }
    let defect = unit.projection_defect();
    if defect > 1e-9 {
        return Err(Error::NotProjection(defect));
    }
    Ok(())
}

/// Orthonormal basis of span(gens ∪ gens†), ignoring negligible inputs.
fn adjoint_closed_span(d: usize, gens: &[ComplexMatrix]) -> MatrixSpan {
    let scale = gens.iter().map(|g| g.frobenius_norm()).fold(0.0, f64::max);
    let cands: Vec<ComplexMatrix> = gens
        .iter()
        .filter(|g| g.frobenius_norm() > 1e-14 * scale)
        .flat_map(|g| {
            let n = g.frobenius_norm();
            [g.scale_re(1.0 / n), g.dagger().scale_re(1.0 / n)]
        })
        .collect();
    MatrixSpan::spanned_by(d, d, cands.iter(), SPAN_TOL, 1.0)
}

/// Smallest unital *-algebra in p·M_d·p containing `gens`.
pub fn generated_algebra(gens: &[ComplexMatrix], unit: &ComplexMatrix) -> Result<MatrixStarAlgebra> {
    check_unit(unit)?;
    let d = unit.rows();
    for g in gens {
        if g.shape() != (d, d) {
            return Err(Error::DimensionMismatch("generator shape".into()));
        }
        let inside = unit.matmul(g).matmul(unit);
        if inside.distance(g) > 1e-9 * g.frobenius_norm().max(1.0) {
            return Err(Error::InvalidInput("generator not supported on the unit".into()));
        }
    }
    let gspan = adjoint_closed_span(d, gens);
    let glist = gspan.basis();
    let rank = unit.trace().re.round() as usize;
    let mut span = MatrixSpan::new(d, d);
    span.insert(&unit.scale_re(1.0 / unit.frobenius_norm().max(1e-300)), SPAN_TOL, 1.0);
    let mut frontier_start = 0;
    while frontier_start < span.dim() && span.dim() < rank * rank {
        let frontier_end = span.dim();
        let cands: Vec<ComplexMatrix> = (frontier_start..frontier_end)
            .flat_map(|k| {
                let f = span.element(k);
                glist.iter().map(move |g| g.matmul(&f)).collect::<Vec<_>>()
            })
            .collect();
        span.extend(cands, SPAN_TOL, 1.0);
        frontier_start = frontier_end;
    }
    Ok(MatrixStarAlgebra::from_parts(unit.clone(), span, glist))
}

/// Orthonormal isometry onto the range of a projection.
fn range_isometry(p: &ComplexMatrix) -> Result<ComplexMatrix> {
    let e = herm_eig(p, 1e-9)?;
    let cols: Vec<usize> = (0..e.dim()).filter(|&k| e.eigenvalues[k] > 0.5).collect();
    Ok(e.eigenvectors.submatrix(&(0..p.rows()).collect::<Vec<_>>(), &cols))
}

/// {X ∈ p·M_d·p : [X, g] = 0 for all g in `set`}; `set` should be †-closed
/// for the result to be an algebra.
pub fn commutant_of_set(set: &[ComplexMatrix], unit: &ComplexMatrix) -> Result<MatrixStarAlgebra> {
    check_unit(unit)?;
    let d = unit.rows();
    let is_identity = unit.distance(&ComplexMatrix::identity(d)) < 1e-12;
    let v = if is_identity { None } else { Some(range_isometry(unit)?) };
    let compress = |x: &ComplexMatrix| match &v {
        None => x.clone(),
        Some(v) => v.dagger().matmul(x).matmul(v),
    };
    let r = v.as_ref().map_or(d, |v| v.cols());
    if r == 0 {
        return Ok(MatrixStarAlgebra::from_parts(unit.clone(), MatrixSpan::new(d, d), Vec::new()));
    }
    let gens: Vec<ComplexMatrix> = adjoint_closed_span(d, set).basis().iter().map(compress).collect();
    let nullspace: Vec<ComplexMatrix> = if gens.is_empty() {
        (0..r * r).map(|k| ComplexMatrix::unit(r, r, k / r, k % r)).collect()
    } else {
        // Σ L_g†L_g with L_g = g⊗I − I⊗gᵀ acting on row-major vec(X).
        let id = ComplexMatrix::identity(r);
        let mut a = ComplexMatrix::zeros(r, r);
        let mut b = ComplexMatrix::zeros(r, r);
        let n = r * r;
        let mut m = vec![ZERO; n * n];
        for g in &gens {
            a = &a + &g.dagger().matmul(g);
            b = &b + &g.conj().matmul(&g.transpose());
            let gd = g.dagger();
            let gt = g.transpose();
            let gc = g.conj();
            for i in 0..r {
                for j in 0..r {
                    let x = gd.get(i, j);
                    let y = g.get(i, j);
                    for k in 0..r {
                        for l in 0..r {
                            let idx = (i * r + k) * n + j * r + l;
                            m[idx] -= x * gt.get(k, l) + y * gc.get(k, l);
                        }
                    }
                }
            }
        }
        let m = &(&ComplexMatrix::from_parts(n, n, m) + &a.kron(&id)) + &id.kron(&b);
        let e = herm_eig(&m, 1e-9)?;
        // Generators are HS-normalized, so a vanishing top eigenvalue means they are scalars.
        let threshold = if e.max() <= 1e-12 { f64::INFINITY } else { NULL_TOL * e.max() };
        (0..n)
            .filter(|&k| e.eigenvalues[k] <= threshold)
            .map(|k| ComplexMatrix::from_parts(r, r, e.vector(k)))
            .collect()
    };
    let lifted: Vec<ComplexMatrix> = match &v {
        None => nullspace,
        Some(v) => nullspace.iter().map(|y| v.matmul(y).matmul(&v.dagger())).collect(),
    };
    let span = MatrixSpan::from_orthonormal(d, d, &lifted);
    Ok(MatrixStarAlgebra::from_parts(unit.clone(), span, lifted))
}

/// Commutant of `a` inside unit·M_d·unit.
pub fn commutant(a: &MatrixStarAlgebra) -> Result<MatrixStarAlgebra> {
    let gens = if !a.generators.is_empty() && a.generators.len() < a.dim() { a.generators.clone() } else { a.basis() };
    commutant_of_set(&gens, &a.unit)
}

fn random_hermitian_element(rng: &mut impl Rng, a: &MatrixStarAlgebra) -> ComplexMatrix {
    let coeffs: Vec<C64> = (0..a.dim()).map(|_| gaussian(rng)).collect();
    a.span.combine(&coeffs).hermitian_part()
}

/// Center of `a`, computed inside `a` as the joint kernel of ad(h₁), ad(h₂)
/// for two random Hermitian elements and then certified on the full basis.
pub fn center(a: &MatrixStarAlgebra) -> Result<MatrixStarAlgebra> {
    let d = a.ambient_dim();
    let n = a.dim();
    let basis = a.basis();
    if n <= 1 {
        return Ok(a.clone());
    }
    for attempt in 0..CENTER_ATTEMPTS {
        let mut rng = seeded(CENTER_SEED + attempt as u64);
        let hs = [random_hermitian_element(&mut rng, a), random_hermitian_element(&mut rng, a)];
        let mut rows = Vec::with_capacity(n * 2 * d * d);
        for b in &basis {
            for h in &hs {
                rows.extend_from_slice(b.commutator(h).as_slice());
            }
        }
        let r = ComplexMatrix::from_parts(n, 2 * d * d, rows);
        let gram = r.conj().matmul(&r.transpose());
        let e = herm_eig(&gram.hermitian_part(), 1.0)?;
        // Generators are HS-normalized, so a vanishing top eigenvalue means they are scalars.
        let threshold = if e.max() <= 1e-12 { f64::INFINITY } else { NULL_TOL * e.max() };
        let elems: Vec<ComplexMatrix> = (0..n)
            .filter(|&k| e.eigenvalues[k] <= threshold)
            .map(|k| a.span.combine(&e.vector(k)))
            .collect();
        let certified = elems.iter().all(|z| {
            let zn = z.frobenius_norm();
            basis.iter().all(|b| z.commutator(b).frobenius_norm() <= 1e-8 * zn.max(1.0))
        });
        if certified && !elems.is_empty() {
            let span = MatrixSpan::spanned_by(d, d, elems.iter(), SPAN_TOL, 1.0);
            return Ok(MatrixStarAlgebra::from_parts(a.unit.clone(), span, elems));
        }
    }
    Err(Error::CenterSplitFailed(CENTER_ATTEMPTS))
}

/// Minimal central projections from the spectrum of a random Hermitian
/// central element; block size n_k from n_k² = dim(A·p_k).
pub fn center_and_blocks(a: &MatrixStarAlgebra) -> Result<CenterDecomposition> {
    let z = center(a)?;
    let d = a.ambient_dim();
    let is_identity = a.unit.distance(&ComplexMatrix::identity(d)) < 1e-12;
    let v = if is_identity { ComplexMatrix::identity(d) } else { range_isometry(&a.unit)? };
    let basis = a.basis();
    for attempt in 0..CENTER_ATTEMPTS {
        let mut rng = seeded(CENTER_SEED ^ 0x9e37 ^ attempt as u64);
        let h = random_hermitian_element(&mut rng, &z);
        let hc = v.dagger().matmul(&h).matmul(&v);
        let e = herm_eig(&hc, 1e-8)?;
        let scale = e.spectral_norm().max(1e-300);
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        for k in 0..e.dim() {
            match clusters.last_mut() {
                Some(c) if e.eigenvalues[k] - e.eigenvalues[*c.last().unwrap()] <= 1e-7 * scale => c.push(k),
                _ => clusters.push(vec![k]),
            }
        }
        if clusters.len() != z.dim() {
            continue;
        }
        let mut projections = Vec::with_capacity(clusters.len());
        let mut block_sizes = Vec::with_capacity(clusters.len());
        for c in &clusters {
            let w = v.matmul(&e.eigenvectors.submatrix(&(0..v.cols()).collect::<Vec<_>>(), c));
            let p = w.matmul(&w.dagger());
            let s: f64 = basis.iter().map(|b| b.hs_inner(&b.matmul(&p)).re).sum();
            let k = s.max(0.0).sqrt().round();
            if (s - k * k).abs() > 1e-6 {
                return Err(Error::NonIntegerBlock(s));
            }
            projections.push(p);
            block_sizes.push(k as usize);
        }
        let mut signature = block_sizes.clone();
        signature.sort_unstable_by(|x, y| y.cmp(x));
        let total: usize = signature.iter().map(|k| k * k).sum();
        if total != a.dim() {
            return Err(Error::NonIntegerBlock(total as f64));
        }
        let _ = a.signature.set(signature.clone());
        return Ok(CenterDecomposition { center: z, projections, block_sizes, signature });
    }
    Err(Error::CenterSplitFailed(CENTER_ATTEMPTS))
}

/// The d×d blocks B_mn of an operator on ℋ₋⊗ℋ₊, O = Σ |m⟩⟨n| ⊗ B_mn.
pub fn plus_blocks(o: &ComplexMatrix, b: &Bipartition) -> Result<Vec<ComplexMatrix>> {
    b.check_full_op(o)?;
    let d = b.dim_plus();
    let dm = b.dim_minus();
    let mut out = Vec::new();
    for m in 0..dm {
        for n in 0..dm {
            let blk = ComplexMatrix::from_fn(d, d, |a, c| o.get(m * d + a, n * d + c));
            if blk.max_abs() > 0.0 {
                out.push(blk);
            }
        }
    }
    Ok(out)
}

/// Comm₊(O) = {X : [I⊗X, O] = [I⊗X, O†] = 0}.
pub fn local_commutant(o: &ComplexMatrix, b: &Bipartition) -> Result<MatrixStarAlgebra> {
    let blocks = plus_blocks(o, b)?;
    commutant_of_set(&blocks, &ComplexMatrix::identity(b.dim_plus()))
}

/// 𝒜₊(O), generated by the partial contractions Tr₋((Q⊗I)O); checked
/// against the commutant of the local commutant.
pub fn interaction_algebra(o: &ComplexMatrix, b: &Bipartition) -> Result<MatrixStarAlgebra> {
    let blocks = plus_blocks(o, b)?;
    let unit = ComplexMatrix::identity(b.dim_plus());
    let alg = generated_algebra(&blocks, &unit)?;
    let other = commutant(&commutant_of_set(&blocks, &unit)?)?;
    let gap = algebra_distance(&alg, &other);
    if gap > 1e-8 {
        return Err(Error::InteractionAlgebraMismatch(gap));
    }
    Ok(alg)
}

/// Largest relative residual of either basis projected onto the other span;
/// infinite when the dimensions differ.
pub fn algebra_distance(a: &MatrixStarAlgebra, b: &MatrixStarAlgebra) -> f64 {
    if a.ambient_dim() != b.ambient_dim() || a.dim() != b.dim() {
        return f64::INFINITY;
    }
    let ab = (0..a.dim()).map(|k| b.span.residual(&a.element(k))).fold(0.0, f64::max);
    let ba = (0..b.dim()).map(|k| a.span.residual(&b.element(k))).fold(0.0, f64::max);
    ab.max(ba)
}

pub fn algebra_equal(a: &MatrixStarAlgebra, b: &MatrixStarAlgebra) -> bool {
    algebra_distance(a, b) < SPAN_TOL
}

/// *-isomorphism of finite-dimensional C*-algebras via block signatures.
pub fn iso_signature_equal(a: &MatrixStarAlgebra, b: &MatrixStarAlgebra) -> Result<bool> {
    Ok(a.signature()? == b.signature()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{random_hermitian, random_matrix};
    use proptest::prelude::*;
    use rand::Rng;

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::diag_real(&[1.0, -1.0])
    }

    fn brute_commutant_dim(gens: &[ComplexMatrix], d: usize) -> usize {
        // Rank of the stacked commutator map on matrix units.
        let n = d * d;
        let mut rows = Vec::new();
        for g in gens {
            for r in 0..n {
                let row: Vec<C64> = (0..n)
                    .map(|k| {
                        let e = ComplexMatrix::unit(d, d, k / d, k % d);
                        e.commutator(g).as_slice()[r]
                    })
                    .collect();
                rows.push(row);
            }
        }
        let m = ComplexMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
        let gram = m.dagger().matmul(&m);
        let e = herm_eig(&gram, 1e-9).unwrap();
        let top = e.max().max(1e-300);
        e.eigenvalues.iter().filter(|&&x| x <= 1e-9 * top).count()
    }

    #[test]
    fn empty_generators_give_scalars() {
        let a = generated_algebra(&[], &ComplexMatrix::identity(3)).unwrap();
        assert_eq!(a.dim(), 1);
        assert_eq!(a.signature().unwrap(), vec![1]);
    }

    #[test]
    fn paulis_on_first_factor() {
        let i2 = ComplexMatrix::identity(2);
        let a = generated_algebra(&[pauli_x().kron(&i2), pauli_z().kron(&i2)], &ComplexMatrix::identity(4)).unwrap();
        assert_eq!(a.dim(), 4);
        assert_eq!(a.signature().unwrap(), vec![2]);
        let c = commutant(&a).unwrap();
        assert_eq!(c.dim(), 4);
        assert!(c.contains(&i2.kron(&pauli_x()), 1e-10));
        let other = generated_algebra(&[i2.kron(&pauli_x()), i2.kron(&pauli_z())], &ComplexMatrix::identity(4)).unwrap();
        assert!(!algebra_equal(&a, &other));
        assert!(algebra_equal(&c, &other));
    }

    #[test]
    fn direct_sum_signature() {
        // M₂ ⊕ ℂ inside M₃.
        let mut gens = Vec::new();
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            gens.push(ComplexMatrix::unit(3, 3, i, j));
        }
        let a = generated_algebra(&gens, &ComplexMatrix::identity(3)).unwrap();
        assert_eq!(a.dim(), 5);
        let cb = a.center_and_blocks().unwrap();
        assert_eq!(cb.signature, vec![2, 1]);
        assert_eq!(cb.center.dim(), 2);
        let sum = cb.projections.iter().fold(ComplexMatrix::zeros(3, 3), |acc, p| &acc + p);
        assert!(sum.distance(&ComplexMatrix::identity(3)) < 1e-10);
    }

    #[test]
    fn full_and_diagonal_commutants() {
        let c = commutant(&MatrixStarAlgebra::full(3)).unwrap();
        assert_eq!(c.dim(), 1);
        let diag = generated_algebra(&[ComplexMatrix::diag_real(&[1.0, 2.0, 3.0])], &ComplexMatrix::identity(3)).unwrap();
        assert_eq!(diag.dim(), 3);
        assert!(algebra_equal(&commutant(&diag).unwrap(), &diag));
        assert_eq!(diag.signature().unwrap(), vec![1, 1, 1]);
    }

    #[test]
    fn commutant_matches_brute_force() {
        let x = pauli_x();
        let c = commutant_of_set(&[x.clone(), ComplexMatrix::identity(2)], &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(c.dim(), brute_commutant_dim(std::slice::from_ref(&x), 2));
        assert!(c.contains(&x, 1e-12));
    }

    #[test]
    fn compressed_unit() {
        let p = ComplexMatrix::diag_real(&[1.0, 1.0, 0.0]);
        let g = ComplexMatrix::unit(3, 3, 0, 1);
        let a = generated_algebra(&[g], &p).unwrap();
        assert_eq!(a.dim(), 4);
        assert!(a.unit_residual() < 1e-12);
        let c = commutant(&a).unwrap();
        assert_eq!(c.dim(), 1);
        assert!(c.contains(&p, 1e-12));
        assert!(generated_algebra(&[ComplexMatrix::unit(3, 3, 0, 2)], &p).is_err());
    }

    #[test]
    fn toric_pair_generates_m2() {
        // σˣ₁σˣ₂ and σᶻ₂σᶻ₃ on three qubits.
        let (x, z, i) = (pauli_x(), pauli_z(), ComplexMatrix::identity(2));
        let a1 = x.kron(&x).kron(&i);
        let a2 = i.kron(&z).kron(&z);
        let a = generated_algebra(&[a1.clone(), a2.clone()], &ComplexMatrix::identity(8)).unwrap();
        assert_eq!(a.dim(), 4);
        assert_eq!(a.signature().unwrap(), vec![2]);
        let e = (&ComplexMatrix::identity(8) + &a2).scale_re(0.5);
        assert_eq!(e.matmul(&a1).matmul(&e).max_abs(), 0.0);
    }

    #[test]
    fn interaction_algebra_of_product_and_cross_terms() {
        let b = Bipartition::mirrored(&[3]).unwrap();
        let mut rng = seeded(3);
        let a = random_matrix(&mut rng, 3, 3);
        let bm = random_hermitian(&mut rng, 3);
        let alg = interaction_algebra(&a.kron(&bm), &b).unwrap();
        let expect = generated_algebra(std::slice::from_ref(&bm), &ComplexMatrix::identity(3)).unwrap();
        assert!(algebra_equal(&alg, &expect));
        let os = [random_hermitian(&mut rng, 3)];
        let h = b.big_theta(&os[0]).unwrap().kron(&os[0]);
        let alg = interaction_algebra(&h, &b).unwrap();
        assert!(algebra_equal(&alg, &generated_algebra(&os, &ComplexMatrix::identity(3)).unwrap()));
        assert_eq!(local_commutant(&ComplexMatrix::identity(9), &b).unwrap().dim(), 9);
    }

    #[test]
    fn signature_comparison() {
        let a = MatrixStarAlgebra::full(4);
        let i2 = ComplexMatrix::identity(2);
        let b = generated_algebra(
            &[pauli_x().kron(&i2), pauli_z().kron(&i2), i2.kron(&pauli_z())],
            &ComplexMatrix::identity(4),
        )
        .unwrap();
        assert_eq!(b.signature().unwrap(), vec![2, 2]);
        assert!(!iso_signature_equal(&a, &b).unwrap());
        assert!(iso_signature_equal(&b, &b.clone()).unwrap());
    }

    /// Block-diagonal algebra ⊕_k M_{n_k} ⊗ 1_{m_k}, conjugated by a random unitary.
    fn random_block_algebra(rng: &mut impl Rng, blocks: &[(usize, usize)]) -> (MatrixStarAlgebra, Vec<usize>) {
        let d: usize = blocks.iter().map(|(n, m)| n * m).sum();
        let u = crate::ensembles::random_unitary(rng, d);
        let mut gens = Vec::new();
        let mut offset = 0;
        for &(n, m) in blocks {
            for _ in 0..2 {
                let g = random_matrix(rng, n, n).kron(&ComplexMatrix::identity(m));
                let full = ComplexMatrix::from_fn(d, d, |i, j| {
                    if i >= offset && i < offset + n * m && j >= offset && j < offset + n * m {
                        g.get(i - offset, j - offset)
                    } else {
                        ZERO
                    }
                });
                gens.push(u.matmul(&full).matmul(&u.dagger()));
            }
            offset += n * m;
        }
        let mut sig: Vec<usize> = blocks.iter().map(|b| b.0).collect();
        sig.sort_unstable_by(|x, y| y.cmp(x));
        (generated_algebra(&gens, &ComplexMatrix::identity(d)).unwrap(), sig)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn bicommutant_and_bookkeeping(seed in any::<u64>()) {
            let mut rng = seeded(seed);
            let choices = [vec![(2, 2), (1, 4)], vec![(2, 1), (3, 2)], vec![(1, 1), (1, 3), (2, 2)], vec![(2, 4)]];
            let blocks = &choices[rng.random_range(0..choices.len())];
            let (a, sig) = random_block_algebra(&mut rng, blocks);
            prop_assert_eq!(a.signature().unwrap(), sig.clone());
            prop_assert_eq!(sig.iter().map(|k| k * k).sum::<usize>(), a.dim());
            let c = commutant(&a).unwrap();
            let cc = commutant(&c).unwrap();
            prop_assert!(algebra_equal(&a, &cc));
            prop_assert!(a.closure_residual(&mut rng, 20) < 1e-9);
            prop_assert!(c.closure_residual(&mut rng, 20) < 1e-9);
        }
    }
}
