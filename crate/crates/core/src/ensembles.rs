//! Seeded random instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bipartition::Bipartition;
use crate::error::{Error, Result};
use crate::groundstate::RpDecomposition;
use crate::localnet::{InteractionSpec, LocalTerm, RegionFamily, SitePair, TermKind};
use crate::models::pauli::PauliString;
use crate::pfengine::SymmetricCpMap;
use crate::rpcore::{build_rp_hamiltonian, RpHamiltonian};
use crate::tensorlab::{herm_function, vec_norm, ComplexMatrix, C64};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| gaussian(rng)).collect();
    ComplexMatrix::new(rows, cols, data).expect("finite gaussian sample")
}

pub fn random_real_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| C64::new(rng.sample(StandardNormal), 0.0)).collect();
    ComplexMatrix::new(rows, cols, data).expect("finite gaussian sample")
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    random_matrix(rng, n, n).hermitian_part()
}

pub fn random_vector(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| gaussian(rng)).collect()
}

pub fn random_state(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    let v = random_vector(rng, n);
    let norm = vec_norm(&v);
    v.into_iter().map(|x| x / norm).collect()
}

/// PSD matrix B·B† of the given rank.
pub fn random_psd(rng: &mut impl Rng, n: usize, rank: usize) -> ComplexMatrix {
    let b = random_matrix(rng, n, rank);
    b.matmul(&b.dagger())
}

/// e^{iH} for a random Hermitian H of spectral scale π.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let h = random_hermitian(rng, n).scale_re(std::f64::consts::PI);
    herm_function(&h, |x| C64::new(0.0, x).exp()).expect("hermitian generator")
}

/// Symmetric unitary W·Wᵀ, so that U·conj(U) = 1.
pub fn random_symmetric_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let w = random_unitary(rng, n);
    w.matmul(&w.transpose())
}

/// Single-site bipartition with a random basis-independent θ̂.
pub fn random_twisted_bipartition(rng: &mut impl Rng, d: usize) -> Result<Bipartition> {
    Bipartition::with_theta_unitary(random_symmetric_unitary(rng, d))
}

/// t = Σ c_kl Θ(A_k)⊗A_l with Hermitian A_k and real symmetric c; RP iff c ⪰ 0.
/// `positive` selects c = RRᵀ, otherwise c = RRᵀ − mean(spec)·1.
pub fn reflection_symmetric_operator(rng: &mut impl Rng, b: &Bipartition, positive: bool) -> Result<ComplexMatrix> {
    let d = b.dim_plus();
    let n = d * d;
    let basis: Vec<ComplexMatrix> = (0..n).map(|_| random_hermitian(rng, d)).collect();
    let r = random_real_matrix(rng, n, n);
    let mut c = r.matmul(&r.transpose());
    if !positive {
        let mean = c.trace().re / n as f64;
        c = &c - &ComplexMatrix::identity(n).scale_re(mean);
    }
    let thetas: Vec<ComplexMatrix> = basis.iter().map(|a| b.big_theta(a)).collect::<Result<_>>()?;
    let mut t = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        for l in 0..n {
            let ckl = c.get(k, l);
            if ckl.norm() == 0.0 {
                continue;
            }
            t = &t + &thetas[k].kron(&basis[l]).scale(ckl);
        }
    }
    Ok(t.hermitian_part())
}

/// RP Hamiltonian on ℂᵖ⊗ℂ^q per side whose terms act as X⊗I_q after a random
/// unitary rotation of ℋ₊, so Comm₊(H) contains a copy of M_q.
pub fn random_symmetric_rp_hamiltonian(rng: &mut impl Rng, p: usize, q: usize) -> Result<(Bipartition, RpHamiltonian)> {
    let d = p * q;
    let b = random_twisted_bipartition(rng, d)?;
    let v = random_unitary(rng, d);
    let iq = ComplexMatrix::identity(q);
    let conj = |x: &ComplexMatrix| v.matmul(&x.kron(&iq)).matmul(&v.dagger());
    let h_plus = conj(&random_hermitian(rng, p));
    let a = random_matrix(rng, p, p);
    let cross = vec![conj(&a), conj(&a.dagger()), conj(&random_hermitian(rng, p))];
    let h = build_rp_hamiltonian(&h_plus, &cross, &b)?;
    Ok((b, h))
}

/// Random symmetric CP map on M_d. `shape` 0 is generic; 1 acts as A⊗I₂ after a
/// rotation (nontrivial bimodule, d even); 2 is block diagonal with a dominant
/// block, so p_max is rank deficient.
pub fn random_symmetric_cp(rng: &mut impl Rng, d: usize, shape: usize) -> Result<SymmetricCpMap> {
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let v = random_unitary(rng, d);
    let d1 = if d >= 2 { rng.random_range(1..d) } else { 1 };
    let mut ks = Vec::new();
    for _ in 0..2 {
        let a = match shape {
            1 if d.is_multiple_of(2) => {
                v.matmul(&random_matrix(rng, d / 2, d / 2).kron(&ComplexMatrix::identity(2))).matmul(&v.dagger())
            }
            2 if d >= 2 => {
                let top = random_matrix(rng, d1, d1);
                let bottom = random_matrix(rng, d - d1, d - d1).scale_re(0.2);
                ComplexMatrix::from_fn(d, d, |i, j| match (i < d1, j < d1) {
                    (true, true) => top.get(i, j),
                    (false, false) => bottom.get(i - d1, j - d1),
                    _ => C64::new(0.0, 0.0),
                })
            }
            _ => random_matrix(rng, d, d),
        }
        .scale_re(half);
        ks.push(a.dagger());
        ks.push(a);
    }
    SymmetricCpMap::new(ks)
}

fn random_pauli(rng: &mut impl Rng, n: usize) -> PauliString {
    loop {
        let mut p = PauliString::identity(n);
        for q in 0..n {
            match rng.random_range(0..3) {
                1 => p.x |= 1 << q,
                2 => p.z |= 1 << q,
                _ => {}
            }
        }
        if p.weight() > 0 {
            return p;
        }
    }
}

/// Frustration-free RP Hamiltonian on n qubits per side: commuting real Pauli
/// terms −w·P (mirrored) and −w·Θ(Q)⊗Q, rotated by Θ(V)⊗V.
pub fn random_frustration_free_rp(rng: &mut impl Rng, n: usize) -> Result<(Bipartition, RpDecomposition)> {
    let b = Bipartition::mirrored(&vec![2; n])?;
    for _ in 0..1000 {
        let mut plus: Vec<PauliString> = Vec::new();
        let mut cross: Vec<PauliString> = Vec::new();
        let (n_plus, n_cross) = (rng.random_range(0..=n), rng.random_range(1..=n + 1));
        for _ in 0..8 * n {
            let p = random_pauli(rng, n);
            let fits_plus = plus.iter().chain(&cross).all(|q| q.commutes(&p) && *q != p);
            let fits_cross = plus.iter().all(|q| q.commutes(&p)) && !cross.contains(&p);
            if plus.len() < n_plus && fits_plus {
                plus.push(p);
            } else if cross.len() < n_cross && fits_cross {
                cross.push(p);
            }
        }
        let v = random_unitary(rng, 1 << n);
        let rotate = |p: &PauliString| v.matmul(&p.to_matrix()).matmul(&v.dagger());
        let d = 1 << n;
        let mut h_plus = ComplexMatrix::zeros(d, d);
        for p in &plus {
            let w = rng.random_range(0.5..1.5);
            h_plus = &h_plus - &rotate(p).scale_re(w);
        }
        let cross_ops: Vec<ComplexMatrix> =
            cross.iter().map(|q| rotate(q).scale_re(rng.random_range(0.5f64..1.5).sqrt())).collect();
        let decomp = RpDecomposition::new(b.big_theta(&h_plus)?, h_plus, cross_ops, &b)?;
        if decomp.check_frustration_free(&b).is_ok() {
            return Ok((b, decomp));
        }
    }
    Err(Error::InvalidInput("no frustration-free instance found".into()))
}

/// Randomly rotated orthonormal Hermitian basis of M_n with weights in [0.5, 1.5].
/// Σ Θ(O)⊗O over it is close to the maximally entangled projector.
fn weighted_hermitian_basis(rng: &mut impl Rng, n: usize) -> Vec<ComplexMatrix> {
    let w = random_unitary(rng, n);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in i..n {
            let e = ComplexMatrix::unit(n, n, i, j);
            let mats = if i == j {
                vec![e]
            } else {
                let et = e.transpose();
                vec![(&e + &et).scale_re(s), (&e - &et).scale(C64::new(0.0, s))]
            };
            for m in mats {
                let weight: f64 = rng.random_range(0.5..1.5);
                out.push(w.matmul(&m).matmul(&w.dagger()).scale_re(weight.sqrt()));
            }
        }
    }
    out
}

/// Regions X = {a} ⊂ Y = {a, b} with dim a = p·q, dim b = 2. H_X acts on the
/// p-factor of a after a random rotation; Y adds terms on (q-factor of a) ⊗ b.
/// The family is extendable and Ξ is not a multiple of the identity.
pub fn random_extendable_family(rng: &mut impl Rng, p: usize, q: usize) -> Result<RegionFamily> {
    let spec = random_extendable_spec(rng, p, q)?;
    let x = spec.region_of_plus(&["a+"])?;
    let y = spec.full_region();
    RegionFamily::build(spec, vec![("X".into(), x), ("Y".into(), y)], "two sites a, b")
}

pub fn random_extendable_spec(rng: &mut impl Rng, p: usize, q: usize) -> Result<InteractionSpec> {
    let da = p * q;
    let v = random_unitary(rng, da);
    let vb = v.kron(&ComplexMatrix::identity(2));
    let on_p = |x: &ComplexMatrix| v.matmul(&x.kron(&ComplexMatrix::identity(q))).matmul(&v.dagger());
    let on_qb = |x: &ComplexMatrix| vb.matmul(&ComplexMatrix::identity(p).kron(x)).matmul(&vb.dagger());
    let pairs = vec![
        SitePair { plus: "a+".into(), minus: "a-".into(), dim: da, distance: 1 },
        SitePair { plus: "b+".into(), minus: "b-".into(), dim: 2, distance: 2 },
    ];
    let a = vec!["a+".to_string()];
    let ab = vec!["a+".to_string(), "b+".to_string()];
    let plus = vec![
        LocalTerm { kind: TermKind::Plus, sites: a.clone(), op: on_p(&random_hermitian(rng, p).scale_re(0.2)) },
        LocalTerm { kind: TermKind::Plus, sites: ab.clone(), op: on_qb(&random_hermitian(rng, 2 * q).scale_re(0.2)) },
    ];
    let mut cross = Vec::new();
    for o in weighted_hermitian_basis(rng, p) {
        cross.push(LocalTerm { kind: TermKind::Cross, sites: a.clone(), op: on_p(&o) });
    }
    for o in weighted_hermitian_basis(rng, 2 * q) {
        cross.push(LocalTerm { kind: TermKind::Cross, sites: ab.clone(), op: on_qb(&o) });
    }
    InteractionSpec::with_mirrors(pairs, plus, cross, 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groundstate::ltqo_check;
    use crate::localnet::{extendability_check, modular_consistency_check, MODULAR_TIMES};
    use crate::osrecon::summarize;

    #[test]
    fn frustration_free_instances_agree() {
        let mut rng = seeded(5);
        let (mut nondegenerate, mut degenerate) = (0, 0);
        for k in 0..12 {
            let (b, d) = random_frustration_free_rp(&mut rng, 1 + k % 3).unwrap();
            let r = ltqo_check(&d, &b).unwrap();
            assert!(r.agree, "{r:?}");
            if r.nondegenerate {
                nondegenerate += 1;
            } else {
                degenerate += 1;
            }
        }
        assert!(nondegenerate > 0 && degenerate > 0, "{nondegenerate} {degenerate}");
    }

    #[test]
    fn extendable_family_has_nontrivial_flow() {
        let mut rng = seeded(9);
        let fam = random_extendable_family(&mut rng, 2, 2).unwrap();
        assert!(extendability_check(&fam, "X", "Y").unwrap().extendable);
        assert!(!summarize(&fam.get("Y").unwrap().osr).unwrap().modular_trivial);
        let m = modular_consistency_check(&fam, &MODULAR_TIMES).unwrap();
        assert!(m.passed, "{}", m.max_residual);
    }
}
