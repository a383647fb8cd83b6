//! Toric code on the 45°-rotated square lattice, reflected across the diagonal.
//!
//! Upper edges are labelled (layer j ≥ 1, position p ≥ 1). Layer 1 touches the
//! axis; positions run left to right along it, so the axis-crossing stars and
//! plaquettes act on (1,2k−1),(1,2k) and (1,2k),(1,2k+1).

use std::collections::BTreeSet;

use serde::Serialize;

use super::pauli::{stabilizer_degeneracy, PauliString};
use crate::bipartition::Region;
use crate::error::{Error, Result};
use crate::localnet::{InteractionSpec, LocalTerm, RegionSystem, SitePair, TermKind};
use crate::staralg::{algebra_equal, center_and_blocks, generated_algebra, MatrixStarAlgebra};
use crate::tensorlab::ComplexMatrix;

pub const MAX_QUBITS: usize = 14;
pub const MAX_BOUNDARY_LENGTH: usize = 8;
/// Interaction range in layers.
pub const TORIC_RANGE: usize = 1;

pub type Edge = (usize, usize);

pub fn plus_id(e: Edge) -> String {
    format!("u{}_{}", e.0, e.1)
}

pub fn minus_id(e: Edge) -> String {
    format!("l{}_{}", e.0, e.1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Upper,
    Lower,
}

/// Lattice edge from (x, y) going right (horizontal) or up.
#[derive(Clone, Copy)]
struct LatticeEdge {
    x: i64,
    y: i64,
    horizontal: bool,
}

impl LatticeEdge {
    fn classify(self) -> (Side, i64, i64) {
        let LatticeEdge { x, y, horizontal } = self;
        match (horizontal, horizontal && y > x || !horizontal && y >= x) {
            (true, true) => (Side::Upper, y - x, 2 * x + 1),
            (false, true) => (Side::Upper, y - x + 1, 2 * x),
            (true, false) => (Side::Lower, x - y + 1, 2 * y),
            (false, false) => (Side::Lower, x - y, 2 * y + 1),
        }
    }

    fn of_upper(e: Edge) -> Self {
        let (j, p) = (e.0 as i64, e.1 as i64);
        if p % 2 == 1 {
            let x = (p - 1) / 2;
            LatticeEdge { x, y: x + j, horizontal: true }
        } else {
            let x = p / 2;
            LatticeEdge { x, y: x + j - 1, horizontal: false }
        }
    }
}

fn star(x: i64, y: i64) -> [LatticeEdge; 4] {
    [
        LatticeEdge { x: x - 1, y, horizontal: true },
        LatticeEdge { x, y, horizontal: true },
        LatticeEdge { x, y: y - 1, horizontal: false },
        LatticeEdge { x, y, horizontal: false },
    ]
}

fn plaquette(a: i64, b: i64) -> [LatticeEdge; 4] {
    [
        LatticeEdge { x: a, y: b, horizontal: true },
        LatticeEdge { x: a, y: b + 1, horizontal: true },
        LatticeEdge { x: a, y: b, horizontal: false },
        LatticeEdge { x: a + 1, y: b, horizontal: false },
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Keep only terms that fit inside the patch.
    Slab,
    /// Also keep stars truncated to the patch.
    Closed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilizerKind {
    Star,
    Plaquette,
}

/// A stabilizer term restricted to the patch, split by side.
#[derive(Clone, Debug, Serialize)]
pub struct ToricTerm {
    pub kind: StabilizerKind,
    pub upper: Vec<Edge>,
    pub lower: Vec<Edge>,
}

impl ToricTerm {
    pub fn crosses_axis(&self) -> bool {
        !self.upper.is_empty() && !self.lower.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct ToricPatch {
    pub edges: Vec<Edge>,
    pub boundary: Boundary,
    pub terms: Vec<ToricTerm>,
    pub spec: InteractionSpec,
}

impl ToricPatch {
    /// Edges (j, p) with 1 ≤ j ≤ depth, 1 ≤ p ≤ length.
    pub fn slab(length: usize, depth: usize) -> Result<Self> {
        Self::new(&slab_edges(length, depth), Boundary::Slab)
    }

    pub fn closed(length: usize, depth: usize) -> Result<Self> {
        Self::new(&slab_edges(length, depth), Boundary::Closed)
    }

    pub fn new(edges: &[Edge], boundary: Boundary) -> Result<Self> {
        let edges: Vec<Edge> = edges.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        if edges.is_empty() || edges.iter().any(|&(j, p)| j == 0 || p == 0) {
            return Err(Error::InvalidInput("patch edges need layer ≥ 1 and position ≥ 1".into()));
        }
        if 2 * edges.len() > MAX_QUBITS {
            return Err(Error::TooLarge(format!("{} qubits exceeds {MAX_QUBITS}", 2 * edges.len())));
        }
        let inside: BTreeSet<Edge> = edges.iter().copied().collect();
        let mut vertices = BTreeSet::new();
        let mut plaquettes = BTreeSet::new();
        for &e in &edges {
            let l = LatticeEdge::of_upper(e);
            if l.horizontal {
                vertices.insert((l.x, l.y));
                vertices.insert((l.x + 1, l.y));
                plaquettes.insert((l.x, l.y));
                plaquettes.insert((l.x, l.y - 1));
            } else {
                vertices.insert((l.x, l.y));
                vertices.insert((l.x, l.y + 1));
                plaquettes.insert((l.x, l.y));
                plaquettes.insert((l.x - 1, l.y));
            }
        }
        let mut terms = Vec::new();
        let candidates = vertices
            .iter()
            .map(|&(x, y)| (StabilizerKind::Star, star(x, y)))
            .chain(plaquettes.iter().map(|&(a, b)| (StabilizerKind::Plaquette, plaquette(a, b))));
        for (kind, lattice) in candidates {
            let mut upper = Vec::new();
            let mut lower = Vec::new();
            let mut complete = true;
            for le in lattice {
                let (side, j, p) = le.classify();
                let e = (j.max(0) as usize, p.max(0) as usize);
                if j < 1 || p < 1 || !inside.contains(&e) {
                    complete = false;
                    continue;
                }
                match side {
                    Side::Upper => upper.push(e),
                    Side::Lower => lower.push(e),
                }
            }
            let keep = match (boundary, kind) {
                (_, _) if complete => true,
                (Boundary::Closed, StabilizerKind::Star) => !upper.is_empty() || !lower.is_empty(),
                _ => false,
            };
            // Terms entirely below the axis enter as mirrors of upper ones.
            if keep && !upper.is_empty() {
                upper.sort();
                lower.sort();
                terms.push(ToricTerm { kind, upper, lower });
            }
        }
        let spec = build_spec(&edges, &terms)?;
        Ok(Self { edges, boundary, terms, spec })
    }

    pub fn qubits(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn region(&self, edges: &[Edge]) -> Result<Region> {
        let ids: Vec<String> = edges.iter().map(|&e| plus_id(e)).collect();
        self.spec.region_of_plus(&ids)
    }

    pub fn full_region(&self) -> Region {
        self.spec.full_region()
    }

    pub fn system(&self) -> Result<RegionSystem> {
        self.spec.region_system(&self.full_region())
    }

    pub fn axis_terms(&self) -> impl Iterator<Item = &ToricTerm> {
        self.terms.iter().filter(|t| t.crosses_axis())
    }

    /// Stabilizers on the full patch; qubits ordered minus edges then plus edges.
    pub fn stabilizers(&self) -> Vec<PauliString> {
        let n = self.qubits();
        let m = self.edges.len();
        let index = |e: &Edge| self.edges.iter().position(|f| f == e).expect("patch edge");
        let mut out = Vec::new();
        for t in &self.terms {
            let plus: Vec<usize> = t.upper.iter().map(|e| m + index(e)).collect();
            let mut both = plus.clone();
            both.extend(t.lower.iter().map(index));
            let minus: Vec<usize> = t.upper.iter().map(index).collect();
            let make = |q: &[usize]| match t.kind {
                StabilizerKind::Star => PauliString::x_on(n, q),
                StabilizerKind::Plaquette => PauliString::z_on(n, q),
            };
            if t.crosses_axis() {
                out.push(make(&both));
            } else {
                out.push(make(&plus));
                out.push(make(&minus));
            }
        }
        out
    }

    /// Ground degeneracy from the GF(2) rank of the stabilizers.
    pub fn stabilizer_degeneracy(&self) -> u128 {
        stabilizer_degeneracy(self.qubits(), &self.stabilizers())
    }
}

pub fn slab_edges(length: usize, depth: usize) -> Vec<Edge> {
    (1..=depth).flat_map(|j| (1..=length).map(move |p| (j, p))).collect()
}

fn pauli_product(kind: StabilizerKind, n: usize) -> ComplexMatrix {
    let all: Vec<usize> = (0..n).collect();
    match kind {
        StabilizerKind::Star => PauliString::x_on(n, &all).to_matrix(),
        StabilizerKind::Plaquette => PauliString::z_on(n, &all).to_matrix(),
    }
}

fn build_spec(edges: &[Edge], terms: &[ToricTerm]) -> Result<InteractionSpec> {
    let pairs = edges
        .iter()
        .map(|&e| SitePair { plus: plus_id(e), minus: minus_id(e), dim: 2, distance: e.0 })
        .collect();
    let mut plus = Vec::new();
    let mut cross = Vec::new();
    for t in terms {
        let sites: Vec<String> = t.upper.iter().map(|&e| plus_id(e)).collect();
        let p = pauli_product(t.kind, sites.len());
        if t.crosses_axis() {
            // Θ = complex conjugation leaves X and Z strings fixed, so −A = −Θ(O)⊗O.
            cross.push(LocalTerm { kind: TermKind::Cross, sites, op: p });
        } else {
            plus.push(LocalTerm { kind: TermKind::Plus, sites, op: p.scale_re(-1.0) });
        }
    }
    InteractionSpec::with_mirrors(pairs, plus, cross, TORIC_RANGE)
}

/// Generators σˣ_{2k+1}σˣ_{2k+2}, σᶻ_{2k+2}σᶻ_{2k+3} on `n ≥ length` qubits (1-based).
pub fn boundary_generators(length: usize, n: usize) -> Vec<ComplexMatrix> {
    let mut gens = Vec::new();
    for k in 0.. {
        if 2 * k + 2 > length {
            break;
        }
        gens.push(PauliString::x_on(n, &[2 * k, 2 * k + 1]).to_matrix());
        if 2 * k + 3 <= length {
            gens.push(PauliString::z_on(n, &[2 * k + 1, 2 * k + 2]).to_matrix());
        }
    }
    gens
}

fn boundary_on(length: usize, n: usize) -> Result<MatrixStarAlgebra> {
    let unit = ComplexMatrix::identity(1 << n);
    let gens = boundary_generators(length, n);
    if gens.is_empty() {
        return Ok(MatrixStarAlgebra::scalars(&unit));
    }
    generated_algebra(&gens, &unit)
}

/// dim 𝒜_L without the block decomposition.
pub fn toric_boundary_dim(length: usize) -> Result<usize> {
    if !(2..=MAX_BOUNDARY_LENGTH).contains(&length) {
        return Err(Error::TooLarge(format!("boundary length {length} outside 2..={MAX_BOUNDARY_LENGTH}")));
    }
    Ok(boundary_on(length, length)?.dim())
}

pub fn expected_boundary_signature(length: usize) -> Vec<usize> {
    if length % 2 == 1 {
        vec![1 << ((length - 1) / 2)]
    } else {
        vec![1 << (length / 2 - 1); 2]
    }
}

#[derive(Clone, Debug)]
pub struct BoundaryAlgebra {
    pub length: usize,
    pub algebra: MatrixStarAlgebra,
    pub signature: Vec<usize>,
    pub expected_signature: Vec<usize>,
    pub center_dim: usize,
    /// S_L = σˣ₁…σˣ_L lies in the center (checked for even L).
    pub center_has_string: bool,
}

/// 𝒜_L on L qubits.
pub fn toric_boundary_algebra(length: usize) -> Result<BoundaryAlgebra> {
    if !(2..=MAX_BOUNDARY_LENGTH).contains(&length) {
        return Err(Error::TooLarge(format!("boundary length {length} outside 2..={MAX_BOUNDARY_LENGTH}")));
    }
    let algebra = boundary_on(length, length)?;
    let dec = center_and_blocks(&algebra)?;
    let all: Vec<usize> = (0..length).collect();
    let s = PauliString::x_on(length, &all).to_matrix();
    let center_has_string = length % 2 == 1 || dec.center.contains(&s, 1e-9);
    Ok(BoundaryAlgebra {
        length,
        signature: dec.signature.clone(),
        expected_signature: expected_boundary_signature(length),
        center_dim: dec.center.dim(),
        center_has_string,
        algebra,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct JonesReport {
    pub length: usize,
    /// max ‖e·a·e − E(a)·e‖ over a basis of 𝒜_L.
    pub basic_construction_residual: f64,
    pub projection_defect: f64,
    /// ‖e·σˣ₁σˣ₂·e‖.
    pub seed_residual: f64,
    pub dims: [usize; 3],
    pub dimension_law: bool,
    /// 𝒜_{L+1} is generated by 𝒜_L and e.
    pub generated_by_projection: bool,
}

/// Basic construction 𝒜_{L−1} ⊂ 𝒜_L ⊂ 𝒜_{L+1} with Jones projection e_{L+1}.
pub fn toric_jones_tower_check(length: usize) -> Result<JonesReport> {
    if !(2..MAX_BOUNDARY_LENGTH).contains(&length) {
        return Err(Error::TooLarge(format!("tower length {length} outside 2..{MAX_BOUNDARY_LENGTH}")));
    }
    let n = length + 1;
    let lower = boundary_on(length - 1, n)?;
    let middle = boundary_on(length, n)?;
    let upper = boundary_on(length + 1, n)?;
    let pair = [length - 1, length];
    let p = if length.is_multiple_of(2) { PauliString::z_on(n, &pair) } else { PauliString::x_on(n, &pair) };
    let id = ComplexMatrix::identity(1 << n);
    let e = (&id + &p.to_matrix()).scale_re(0.5);
    let mut residual: f64 = 0.0;
    for a in middle.basis() {
        let lhs = e.matmul(&a).matmul(&e);
        let rhs = lower.project(&a).matmul(&e);
        residual = residual.max(lhs.distance(&rhs));
    }
    let projection_defect = e.matmul(&e).distance(&e).max(e.hermiticity_defect());
    let seed = PauliString::x_on(n, &[0, 1]).to_matrix();
    let seed_residual = e.matmul(&seed).matmul(&e).max_abs();
    let mut gens = middle.generators().to_vec();
    gens.push(e.clone());
    let generated = generated_algebra(&gens, &id)?;
    let dims = [lower.dim(), middle.dim(), upper.dim()];
    Ok(JonesReport {
        length,
        basic_construction_residual: residual,
        projection_defect,
        seed_residual,
        dims,
        dimension_law: dims[2] == 4 * dims[0],
        generated_by_projection: algebra_equal(&generated, &upper),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groundstate::{ground_projection, CLUSTER_TOL};
    use crate::rpcore::semigroup_verdicts;

    #[test]
    fn edge_labels_round_trip() {
        for j in 1..4 {
            for p in 1..7 {
                let (side, jj, pp) = LatticeEdge::of_upper((j, p)).classify();
                assert_eq!((side, jj as usize, pp as usize), (Side::Upper, j, p));
            }
        }
    }

    #[test]
    fn smallest_slab_has_one_axis_star() {
        let patch = ToricPatch::slab(2, 1).unwrap();
        assert_eq!(patch.terms.len(), 1);
        let t = &patch.terms[0];
        assert_eq!((t.kind, t.upper.clone(), t.lower.clone()), (StabilizerKind::Star, vec![(1, 1), (1, 2)], vec![(1, 1), (1, 2)]));
        assert_eq!(patch.stabilizer_degeneracy(), 8);
    }

    #[test]
    fn axis_terms_follow_generator_indexing() {
        let patch = ToricPatch::slab(5, 1).unwrap();
        let axis: Vec<(StabilizerKind, Vec<Edge>)> = patch.axis_terms().map(|t| (t.kind, t.upper.clone())).collect();
        assert!(axis.contains(&(StabilizerKind::Star, vec![(1, 1), (1, 2)])));
        assert!(axis.contains(&(StabilizerKind::Star, vec![(1, 3), (1, 4)])));
        assert!(axis.contains(&(StabilizerKind::Plaquette, vec![(1, 2), (1, 3)])));
        assert!(axis.contains(&(StabilizerKind::Plaquette, vec![(1, 4), (1, 5)])));
        assert_eq!(axis.len(), 4);
    }

    #[test]
    fn stabilizers_commute_and_match_exact_degeneracy() {
        for patch in [
            ToricPatch::slab(4, 1).unwrap(),
            ToricPatch::new(&[(1, 1), (1, 2), (1, 3), (2, 1), (2, 2)], Boundary::Slab).unwrap(),
            ToricPatch::closed(4, 1).unwrap(),
            ToricPatch::closed(2, 2).unwrap(),
        ] {
            let s = patch.stabilizers();
            for a in &s {
                for b in &s {
                    assert!(a.commutes(b));
                }
            }
            let sys = patch.system().unwrap();
            let g = ground_projection(&sys.hamiltonian, CLUSTER_TOL).unwrap();
            assert_eq!(g.degeneracy as u128, patch.stabilizer_degeneracy());
            sys.decomposition.check_frustration_free(&sys.bipartition).unwrap();
        }
        assert_eq!(ToricPatch::closed(4, 1).unwrap().stabilizer_degeneracy(), 1);
    }

    #[test]
    fn slab_semigroup_is_rp() {
        let patch = ToricPatch::slab(3, 1).unwrap();
        let sys = patch.system().unwrap();
        for v in semigroup_verdicts(&sys.hamiltonian, &sys.bipartition, &[0.5, 1.0], 1e-9).unwrap() {
            assert!(v.positive && v.hermitian);
        }
    }

    #[test]
    fn too_large_patch() {
        assert!(matches!(ToricPatch::slab(4, 2), Err(Error::TooLarge(_))));
    }

    #[test]
    fn boundary_signatures() {
        for l in 2..=6 {
            let a = toric_boundary_algebra(l).unwrap();
            assert_eq!(a.signature, a.expected_signature, "L = {l}");
            assert_eq!(a.algebra.dim(), 1 << (l - 1));
            assert!(a.center_has_string);
            assert_eq!(a.center_dim, if l % 2 == 0 { 2 } else { 1 });
        }
    }

    #[test]
    fn jones_tower() {
        for l in 2..=5 {
            let r = toric_jones_tower_check(l).unwrap();
            assert!(r.basic_construction_residual < 1e-12, "{r:?}");
            assert!(r.projection_defect < 1e-15 && r.dimension_law && r.generated_by_projection);
        }
        assert_eq!(toric_jones_tower_check(2).unwrap().seed_residual, 0.0);
    }
}
