//! Local nets of field algebras over families of symmetric regions.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bipartition::{Bipartition, Region, Site};
use crate::error::{Error, Result};
use crate::groundstate::{ground_projection, GroundData, RpDecomposition, CLUSTER_TOL};
use crate::osrecon::{field_algebra, modular_flow, OsrResult, RANK_TOL};
use crate::rpcore::{o_inv, o_map, vector_rank};
use crate::tensorlab::{embed_operator, partial_trace, range_projection, ComplexMatrix, FactorShape, MatrixFile};

pub const MODULAR_TIMES: [f64; 3] = [0.3, 1.0, 2.7];
const COMMUTATION_TOL: f64 = 1e-9;
const RESIDUAL_TOL: f64 = 1e-8;

/// A mirrored pair of sites; `distance` counts layers from the reflection plane.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SitePair {
    pub plus: String,
    pub minus: String,
    pub dim: usize,
    #[serde(default)]
    pub distance: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermKind {
    /// Acts on plus sites.
    Plus,
    /// Acts on minus sites.
    Minus,
    /// Stands for −Θ(O)⊗O with O on the listed plus sites.
    Cross,
}

#[derive(Clone, Debug)]
pub struct LocalTerm {
    pub kind: TermKind,
    pub sites: Vec<String>,
    pub op: ComplexMatrix,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermFile {
    pub kind: TermKind,
    pub sites: Vec<String>,
    pub matrix: MatrixFile,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InteractionFile {
    pub sites: Vec<SitePair>,
    pub terms: Vec<TermFile>,
    pub range: usize,
}

/// Interaction on mirrored sites with θ₀ = complex conjugation on every site.
#[derive(Clone, Debug)]
pub struct InteractionSpec {
    pairs: Vec<SitePair>,
    terms: Vec<LocalTerm>,
    range: usize,
}

impl InteractionSpec {
    pub fn new(pairs: Vec<SitePair>, terms: Vec<LocalTerm>, range: usize) -> Result<Self> {
        let spec = Self { pairs, terms, range };
        spec.validate()?;
        Ok(spec)
    }

    /// Adds the mirror image Θ(T) of every plus term as a minus term.
    pub fn with_mirrors(pairs: Vec<SitePair>, plus: Vec<LocalTerm>, cross: Vec<LocalTerm>, range: usize) -> Result<Self> {
        let mirror: HashMap<&str, &str> = pairs.iter().map(|p| (p.plus.as_str(), p.minus.as_str())).collect();
        let mut terms = Vec::with_capacity(2 * plus.len() + cross.len());
        for t in &plus {
            let sites = t
                .sites
                .iter()
                .map(|s| mirror.get(s.as_str()).map(|m| m.to_string()))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::InvalidInput(format!("plus term on unknown sites {:?}", t.sites)))?;
            terms.push(LocalTerm { kind: TermKind::Minus, sites, op: t.op.conj() });
        }
        terms.extend(plus);
        terms.extend(cross);
        Self::new(pairs, terms, range)
    }

    fn validate(&self) -> Result<()> {
        let mut plus_ids = HashMap::new();
        let mut minus_ids = HashMap::new();
        for p in &self.pairs {
            if p.dim == 0 || plus_ids.insert(p.plus.as_str(), p).is_some() || minus_ids.insert(p.minus.as_str(), p).is_some() {
                return Err(Error::InvalidInput(format!("bad or duplicate site pair {}/{}", p.plus, p.minus)));
            }
        }
        for t in &self.terms {
            let table = if t.kind == TermKind::Minus { &minus_ids } else { &plus_ids };
            let mut dim = 1usize;
            let mut seen = BTreeSet::new();
            for s in &t.sites {
                let p = table.get(s.as_str()).ok_or_else(|| Error::InvalidInput(format!("term on unknown site {s}")))?;
                if !seen.insert(s) {
                    return Err(Error::InvalidInput(format!("repeated site {s} in a term")));
                }
                dim *= p.dim;
            }
            if t.op.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch(format!("term on {:?} must be {dim}x{dim}", t.sites)));
            }
            if t.kind == TermKind::Cross {
                if let Some(s) = t.sites.iter().find(|s| plus_ids[s.as_str()].distance > self.range) {
                    return Err(Error::InvalidInput(format!("cross term reaches {s} beyond range {}", self.range)));
                }
            }
            if t.kind != TermKind::Cross && !t.op.is_hermitian(1e-10) {
                return Err(Error::NotHermitian(t.op.hermiticity_defect()));
            }
        }
        // Θ(Φ(X)) = Φ(θX): every plus term has its mirror among the minus terms.
        let mirror: HashMap<&str, &str> = self.pairs.iter().map(|p| (p.plus.as_str(), p.minus.as_str())).collect();
        let minus_terms: Vec<&LocalTerm> = self.terms.iter().filter(|t| t.kind == TermKind::Minus).collect();
        let plus_terms: Vec<&LocalTerm> = self.terms.iter().filter(|t| t.kind == TermKind::Plus).collect();
        if minus_terms.len() != plus_terms.len() {
            return Err(Error::NotReflectionSymmetric(format!(
                "{} plus terms vs {} minus terms",
                plus_terms.len(),
                minus_terms.len()
            )));
        }
        let mut used = vec![false; minus_terms.len()];
        for t in plus_terms {
            let sites: Vec<&str> = t.sites.iter().map(|s| mirror[s.as_str()]).collect();
            let image = t.op.conj();
            let hit = minus_terms.iter().enumerate().position(|(k, m)| {
                !used[k]
                    && m.sites.iter().map(String::as_str).eq(sites.iter().copied())
                    && m.op.distance(&image) <= 1e-10 * image.frobenius_norm().max(1.0)
            });
            match hit {
                Some(k) => used[k] = true,
                None => return Err(Error::NotReflectionSymmetric(format!("no mirror for plus term on {:?}", t.sites))),
            }
        }
        Ok(())
    }

    pub fn pairs(&self) -> &[SitePair] {
        &self.pairs
    }

    pub fn terms(&self) -> &[LocalTerm] {
        &self.terms
    }

    pub fn range(&self) -> usize {
        self.range
    }

    /// Symmetric region generated by a set of plus sites.
    pub fn region_of_plus<S: AsRef<str>>(&self, plus: &[S]) -> Result<Region> {
        let mut ids = Vec::new();
        for s in plus {
            let p = self
                .pairs
                .iter()
                .find(|p| p.plus == s.as_ref())
                .ok_or_else(|| Error::InvalidInput(format!("unknown plus site {}", s.as_ref())))?;
            ids.push(p.plus.clone());
            ids.push(p.minus.clone());
        }
        Ok(Region::new(ids))
    }

    pub fn full_region(&self) -> Region {
        Region::new(self.pairs.iter().flat_map(|p| [p.plus.clone(), p.minus.clone()]))
    }

    fn term_support(&self, t: &LocalTerm) -> Vec<String> {
        match t.kind {
            TermKind::Plus | TermKind::Minus => t.sites.clone(),
            TermKind::Cross => {
                let mut s = t.sites.clone();
                for id in &t.sites {
                    let p = self.pairs.iter().find(|p| &p.plus == id).expect("validated site");
                    s.push(p.minus.clone());
                }
                s
            }
        }
    }

    /// H_X with its reflection decomposition.
    pub fn region_system(&self, region: &Region) -> Result<RegionSystem> {
        let pairs: Vec<(String, String)> = self.pairs.iter().map(|p| (p.plus.clone(), p.minus.clone())).collect();
        if !region.is_symmetric(&pairs) {
            return Err(Error::InvalidInput("region is not reflection symmetric".into()));
        }
        let inside: Vec<&SitePair> = self.pairs.iter().filter(|p| region.contains(&p.plus)).collect();
        if inside.is_empty() {
            return Err(Error::InvalidInput("empty region".into()));
        }
        let plus_sites: Vec<Site> = inside.iter().map(|p| Site::new(p.plus.clone(), p.dim)).collect();
        let minus_sites: Vec<Site> = inside.iter().map(|p| Site::new(p.minus.clone(), p.dim)).collect();
        let map = inside.iter().map(|p| (p.plus.clone(), p.minus.clone())).collect();
        let b = Bipartition::new(plus_sites, minus_sites, map, &HashMap::new())?;
        let shape = FactorShape::new(inside.iter().map(|p| p.dim).collect())?;
        let plus_pos: HashMap<&str, usize> = inside.iter().enumerate().map(|(k, p)| (p.plus.as_str(), k)).collect();
        let minus_pos: HashMap<&str, usize> = inside.iter().enumerate().map(|(k, p)| (p.minus.as_str(), k)).collect();
        let d = b.dim_plus();
        let mut h_plus = ComplexMatrix::zeros(d, d);
        let mut h_minus = ComplexMatrix::zeros(d, d);
        let mut cross = Vec::new();
        for t in &self.terms {
            if !self.term_support(t).iter().all(|s| region.contains(s)) {
                continue;
            }
            let table = if t.kind == TermKind::Minus { &minus_pos } else { &plus_pos };
            let targets: Vec<usize> = t.sites.iter().map(|s| table[s.as_str()]).collect();
            let op = embed_operator(&t.op, &shape, &targets)?;
            match t.kind {
                TermKind::Plus => h_plus = &h_plus + &op,
                TermKind::Minus => h_minus = &h_minus + &op,
                TermKind::Cross => cross.push(op),
            }
        }
        let decomposition = RpDecomposition::new(h_minus, h_plus, cross, &b)?;
        let hamiltonian = decomposition.full_hamiltonian(&b)?;
        let defect = hamiltonian.hermiticity_defect();
        if defect > 1e-10 {
            return Err(Error::NotHermitianAssembly(defect));
        }
        Ok(RegionSystem {
            region: region.clone(),
            plus_ids: inside.iter().map(|p| p.plus.clone()).collect(),
            distances: inside.iter().map(|p| p.distance).collect(),
            bipartition: b,
            decomposition,
            hamiltonian,
        })
    }

    pub fn to_file(&self) -> InteractionFile {
        InteractionFile {
            sites: self.pairs.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| TermFile { kind: t.kind, sites: t.sites.clone(), matrix: MatrixFile::from(&t.op) })
                .collect(),
            range: self.range,
        }
    }

    pub fn from_file(f: InteractionFile) -> Result<Self> {
        let terms = f
            .terms
            .into_iter()
            .map(|t| Ok(LocalTerm { kind: t.kind, sites: t.sites, op: ComplexMatrix::try_from(t.matrix)? }))
            .collect::<Result<_>>()?;
        Self::new(f.sites, terms, f.range)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let f: InteractionFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
            context: format!("{} line {} column {}", path.display(), e.line(), e.column()),
            message: e.to_string(),
        })?;
        Self::from_file(f)
    }
}

#[derive(Clone, Debug)]
pub struct RegionSystem {
    pub region: Region,
    /// Plus sites in interaction order; the tensor order of ℋ_{X₊}.
    pub plus_ids: Vec<String>,
    pub distances: Vec<usize>,
    pub bipartition: Bipartition,
    pub decomposition: RpDecomposition,
    pub hamiltonian: ComplexMatrix,
}

#[derive(Clone, Debug)]
pub struct RegionData {
    pub name: String,
    pub system: RegionSystem,
    pub ground: GroundData,
    pub osr: OsrResult,
}

impl RegionData {
    pub fn compute(spec: &InteractionSpec, name: &str, region: &Region) -> Result<Self> {
        let system = spec.region_system(region)?;
        let ground = ground_projection(&system.hamiltonian, CLUSTER_TOL)?;
        let osr = field_algebra(&ground.projection_pi, &system.bipartition)?;
        Ok(Self { name: name.to_string(), system, ground, osr })
    }
}

/// Regions with their ground and reconstruction data, computed once.
#[derive(Clone, Debug)]
pub struct RegionFamily {
    pub spec: InteractionSpec,
    pub regions: Vec<RegionData>,
    /// Window description recorded in reports.
    pub window: String,
}

impl RegionFamily {
    pub fn build(spec: InteractionSpec, regions: Vec<(String, Region)>, window: impl Into<String>) -> Result<Self> {
        let mut names = BTreeSet::new();
        for (n, _) in &regions {
            if !names.insert(n.clone()) {
                return Err(Error::InvalidInput(format!("duplicate region name {n}")));
            }
        }
        let data: Vec<RegionData> =
            regions.par_iter().map(|(n, r)| RegionData::compute(&spec, n, r)).collect::<Result<_>>()?;
        Ok(Self { spec, regions: data, window: window.into() })
    }

    pub fn get(&self, name: &str) -> Result<&RegionData> {
        self.regions
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| Error::InvalidInput(format!("unknown region {name}")))
    }

    /// Ordered pairs (X, Y) with X ⊆ Y, X ≠ Y.
    pub fn nested_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, x) in self.regions.iter().enumerate() {
            for (j, y) in self.regions.iter().enumerate() {
                if i != j && x.system.region.is_subset(&y.system.region) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Positions of X₊ inside Y₊.
fn plus_targets(x: &RegionData, y: &RegionData) -> Result<Vec<usize>> {
    x.system
        .plus_ids
        .iter()
        .map(|id| {
            y.system
                .plus_ids
                .iter()
                .position(|s| s == id)
                .ok_or_else(|| Error::InvalidInput(format!("{} is not inside {}", x.name, y.name)))
        })
        .collect()
}

fn plus_shape(r: &RegionData) -> FactorShape {
    r.system.bipartition.plus_shape().clone()
}

/// x ↦ (x⊗I)·Π̂(Y) with the commutation check.
pub struct InclusionMap<'a> {
    targets: Vec<usize>,
    shape: FactorShape,
    pi_hat_y: &'a ComplexMatrix,
}

impl<'a> InclusionMap<'a> {
    pub fn new(x: &RegionData, y: &'a RegionData) -> Result<Self> {
        if !x.system.region.is_subset(&y.system.region) {
            return Err(Error::InvalidInput(format!("{} is not contained in {}", x.name, y.name)));
        }
        Ok(Self { targets: plus_targets(x, y)?, shape: plus_shape(y), pi_hat_y: &y.osr.pi_hat })
    }

    pub fn lift(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        embed_operator(x, &self.shape, &self.targets)
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        Ok(self.lift(x)?.matmul(self.pi_hat_y))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InclusionReport {
    pub x: String,
    pub y: String,
    pub source_dim: usize,
    pub target_dim: usize,
    pub image_dim: usize,
    pub commutation_residual: f64,
    pub multiplicative_residual: f64,
    pub star_residual: f64,
    pub membership_residual: f64,
    pub injective: bool,
    pub surjective: bool,
}

pub fn inclusion(family: &RegionFamily, x: &str, y: &str) -> Result<InclusionReport> {
    let xd = family.get(x)?;
    let yd = family.get(y)?;
    inclusion_of(xd, yd)
}

pub fn inclusion_of(xd: &RegionData, yd: &RegionData) -> Result<InclusionReport> {
    let map = InclusionMap::new(xd, yd)?;
    let basis = xd.osr.field_algebra.basis();
    let mut commutation: f64 = 0.0;
    let mut images = Vec::with_capacity(basis.len());
    for b in &basis {
        let lifted = map.lift(b)?;
        commutation = commutation.max(lifted.commutator(map.pi_hat_y).frobenius_norm());
        images.push(lifted.matmul(map.pi_hat_y));
    }
    if commutation > COMMUTATION_TOL {
        return Err(Error::CommutationFailure(commutation));
    }
    let mut multiplicative: f64 = 0.0;
    for g in xd.osr.field_algebra.generators() {
        let ag = map.apply(g)?;
        for (b, ab) in basis.iter().zip(&images) {
            let lhs = map.apply(&g.matmul(b))?;
            multiplicative = multiplicative.max(lhs.distance(&ag.matmul(ab)));
        }
    }
    let mut star: f64 = 0.0;
    for (b, ab) in basis.iter().zip(&images) {
        star = star.max(map.apply(&b.dagger())?.distance(&ab.dagger()));
    }
    let membership = images.iter().map(|m| yd.osr.field_algebra.span().residual(m)).fold(0.0, f64::max);
    let image_dim = vector_rank(&images, 1e-9)?;
    Ok(InclusionReport {
        x: xd.name.clone(),
        y: yd.name.clone(),
        source_dim: basis.len(),
        target_dim: yd.osr.field_algebra.dim(),
        image_dim,
        commutation_residual: commutation,
        multiplicative_residual: multiplicative,
        star_residual: star,
        membership_residual: membership,
        injective: image_dim == basis.len(),
        surjective: image_dim == yd.osr.field_algebra.dim(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtendabilityReport {
    pub x: String,
    pub y: String,
    pub extendable: bool,
    /// ‖range(Tr_{X̄₊}Π̂(Y)) − Π̂(X)‖.
    pub residual: f64,
    pub reduced_rank: usize,
    pub support_rank: usize,
    /// Largest |ω_Y(α(x)) − Tr(x·Tr_{X̄₊}Tr₋Π(Y))/TrΠ(Y)| over the basis.
    pub pullback_residual: f64,
    /// Pullback of ω_Y is faithful on ℳ_X.
    pub pullback_faithful: bool,
    pub injective: bool,
}

pub fn extendability_check(family: &RegionFamily, x: &str, y: &str) -> Result<ExtendabilityReport> {
    extendability_of(family.get(x)?, family.get(y)?)
}

pub fn extendability_of(xd: &RegionData, yd: &RegionData) -> Result<ExtendabilityReport> {
    let targets = plus_targets(xd, yd)?;
    let shape = plus_shape(yd);
    let reduced = partial_trace(&yd.osr.pi_hat, &shape, &targets)?;
    let range = range_projection(&reduced, RANK_TOL)?;
    let residual = range.distance(&xd.osr.pi_hat);
    let reduced_rank = range.trace().re.round() as usize;
    let support_rank = xd.osr.pi_hat.trace().re.round() as usize;

    // Pullback state, once through ω_Y and once through the reduced density.
    let map = InclusionMap::new(xd, yd)?;
    let rho_x = partial_trace(&yd.osr.vacuum_density, &shape, &targets)?;
    let basis = xd.osr.field_algebra.basis();
    let mut pullback: f64 = 0.0;
    for b in &basis {
        let via_y = yd.osr.vacuum_density.hs_inner(&map.apply(b)?);
        let via_x = rho_x.hs_inner(b);
        pullback = pullback.max((via_y - via_x).norm());
    }
    let n = basis.len();
    let gram = ComplexMatrix::from_fn(n, n, |k, l| rho_x.hs_inner(&basis[k].dagger().matmul(&basis[l])));
    let e = crate::tensorlab::herm_eig(&gram.hermitian_part(), 1e-8)?;
    let pullback_faithful = e.min() > 1e-10 * e.max().max(1e-300);
    let incl = inclusion_of(xd, yd)?;
    Ok(ExtendabilityReport {
        x: xd.name.clone(),
        y: yd.name.clone(),
        extendable: residual < 1e-9 && reduced_rank == support_rank,
        residual,
        reduced_rank,
        support_rank,
        pullback_residual: pullback,
        pullback_faithful,
        injective: incl.injective,
    })
}

/// ‖F_Y∘F_X − F_Y‖ and ‖F_X∘F_Y − F_Y‖ on probes, with F = OΠO⁻¹ on 𝔄_{Y₊}.
pub fn nested_idempotent_residual(xd: &RegionData, yd: &RegionData, probes: &[ComplexMatrix]) -> Result<f64> {
    let b = &yd.system.bipartition;
    let n_y = yd.system.plus_ids.len();
    let mut full_dims = b.minus_shape().dims().to_vec();
    full_dims.extend_from_slice(b.plus_shape().dims());
    let full = FactorShape::new(full_dims)?;
    let plus_t = plus_targets(xd, yd)?;
    let targets: Vec<usize> = plus_t.iter().copied().chain(plus_t.iter().map(|t| t + n_y)).collect();
    let pi_x = embed_operator(&xd.ground.projection_pi, &full, &targets)?;
    let pi_y = &yd.ground.projection_pi;
    let f = |p: &ComplexMatrix, m: &ComplexMatrix| -> Result<ComplexMatrix> { o_map(&p.apply(&o_inv(m, b)?), b) };
    let mut worst: f64 = 0.0;
    for m in probes {
        let fy = f(pi_y, m)?;
        worst = worst.max(f(pi_y, &f(&pi_x, m)?)?.distance(&fy));
        worst = worst.max(f(&pi_x, &fy)?.distance(&fy));
    }
    Ok(worst)
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainEntry {
    pub x: String,
    pub y: String,
    pub z: String,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NetAxiomsReport {
    pub window: String,
    pub chains: Vec<ChainEntry>,
    pub disjoint: Vec<ChainEntry>,
    pub max_composition_residual: f64,
    pub max_commutation_residual: f64,
    pub passed: bool,
}

pub fn net_axioms_check(family: &RegionFamily) -> Result<NetAxiomsReport> {
    let regs = &family.regions;
    let n = regs.len();
    let sub = |i: usize, j: usize| regs[i].system.region.is_subset(&regs[j].system.region);
    let mut chains = Vec::new();
    let mut disjoint = Vec::new();
    for z in 0..n {
        for y in 0..n {
            if y == z || !sub(y, z) {
                continue;
            }
            for x in 0..n {
                if x == y || x == z || !sub(x, y) {
                    continue;
                }
                let zy = InclusionMap::new(&regs[y], &regs[z])?;
                let yx = InclusionMap::new(&regs[x], &regs[y])?;
                let zx = InclusionMap::new(&regs[x], &regs[z])?;
                let mut worst: f64 = 0.0;
                for b in regs[x].osr.field_algebra.basis() {
                    let two = zy.apply(&yx.apply(&b)?)?;
                    worst = worst.max(two.distance(&zx.apply(&b)?));
                }
                chains.push(ChainEntry { x: regs[x].name.clone(), y: regs[y].name.clone(), z: regs[z].name.clone(), residual: worst });
            }
        }
        for x in 0..n {
            for y in (x + 1)..n {
                if x == z || y == z || !sub(x, z) || !sub(y, z) {
                    continue;
                }
                if !regs[x].system.region.is_disjoint(&regs[y].system.region) {
                    continue;
                }
                let zx = InclusionMap::new(&regs[x], &regs[z])?;
                let zy = InclusionMap::new(&regs[y], &regs[z])?;
                let bx: Vec<ComplexMatrix> =
                    regs[x].osr.field_algebra.basis().iter().map(|b| zx.apply(b)).collect::<Result<_>>()?;
                let by: Vec<ComplexMatrix> =
                    regs[y].osr.field_algebra.basis().iter().map(|b| zy.apply(b)).collect::<Result<_>>()?;
                let mut worst: f64 = 0.0;
                for a in &bx {
                    for c in &by {
                        worst = worst.max(a.commutator(c).frobenius_norm());
                    }
                }
                disjoint.push(ChainEntry { x: regs[x].name.clone(), y: regs[y].name.clone(), z: regs[z].name.clone(), residual: worst });
            }
        }
    }
    let max_composition_residual = chains.iter().map(|c| c.residual).fold(0.0, f64::max);
    let max_commutation_residual = disjoint.iter().map(|c| c.residual).fold(0.0, f64::max);
    Ok(NetAxiomsReport {
        window: family.window.clone(),
        chains,
        disjoint,
        max_composition_residual,
        max_commutation_residual,
        passed: max_composition_residual < RESIDUAL_TOL && max_commutation_residual < RESIDUAL_TOL,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ModularEntry {
    pub x: String,
    pub y: String,
    pub t: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModularReport {
    pub entries: Vec<ModularEntry>,
    pub max_residual: f64,
    pub passed: bool,
}

/// ‖σ^Y_t(ι(x)) − ι(σ^X_t(x))‖ over nested pairs, basis elements and times.
pub fn modular_consistency_check(family: &RegionFamily, times: &[f64]) -> Result<ModularReport> {
    let mut entries = Vec::new();
    for (i, j) in family.nested_pairs() {
        let (xd, yd) = (&family.regions[i], &family.regions[j]);
        let map = InclusionMap::new(xd, yd)?;
        for &t in times {
            let fx = modular_flow(&xd.osr, t)?;
            let fy = modular_flow(&yd.osr, t)?;
            let mut worst: f64 = 0.0;
            for b in xd.osr.field_algebra.basis() {
                let lhs = fy.apply(&map.apply(&b)?);
                let rhs = map.apply(&fx.apply(&b))?;
                worst = worst.max(lhs.distance(&rhs));
            }
            entries.push(ModularEntry { x: xd.name.clone(), y: yd.name.clone(), t, residual: worst });
        }
    }
    let max_residual = entries.iter().map(|e| e.residual).fold(0.0, f64::max);
    Ok(ModularReport { entries, max_residual, passed: max_residual < RESIDUAL_TOL })
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryEntry {
    pub x: String,
    pub y: String,
    /// Y₊∖X₊ stays farther than R from the reflection plane.
    pub qualifying: bool,
    pub source_dim: usize,
    pub target_dim: usize,
    pub source_signature: Vec<usize>,
    pub target_signature: Vec<usize>,
    pub iso: bool,
    pub surjective: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryReport {
    pub range: usize,
    pub entries: Vec<BoundaryEntry>,
    /// Every qualifying pair is an isomorphism onto ℳ_Y.
    pub passed: bool,
}

pub fn boundary_reduction_check(family: &RegionFamily, range: usize) -> Result<BoundaryReport> {
    let mut entries = Vec::new();
    for (i, j) in family.nested_pairs() {
        let (xd, yd) = (&family.regions[i], &family.regions[j]);
        let qualifying = yd
            .system
            .plus_ids
            .iter()
            .zip(&yd.system.distances)
            .filter(|(id, _)| !xd.system.plus_ids.contains(id))
            .all(|(_, &dist)| dist > range);
        let incl = inclusion_of(xd, yd)?;
        let source_signature = xd.osr.field_algebra.signature()?;
        let target_signature = yd.osr.field_algebra.signature()?;
        entries.push(BoundaryEntry {
            x: xd.name.clone(),
            y: yd.name.clone(),
            qualifying,
            source_dim: incl.source_dim,
            target_dim: incl.target_dim,
            iso: source_signature == target_signature,
            source_signature,
            target_signature,
            surjective: incl.surjective,
        });
    }
    let passed = entries.iter().filter(|e| e.qualifying).all(|e| e.iso && e.surjective);
    Ok(BoundaryReport { range, entries, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::*;

    fn z() -> ComplexMatrix {
        ComplexMatrix::diag_real(&[1.0, -1.0])
    }

    fn pair(k: usize, dim: usize, distance: usize) -> SitePair {
        SitePair { plus: format!("a{k}"), minus: format!("b{k}"), dim, distance }
    }

    /// X = {0}: −Θ(Z)⊗Z. Y = {0,1} adds the plus term |1⟩⟨1|₀⊗I₁, which
    /// collapses the support on site 0.
    fn collapsing_family() -> RegionFamily {
        let pairs = vec![pair(0, 2, 1), pair(1, 2, 2)];
        let p1 = ComplexMatrix::diag_real(&[0.0, 1.0]).kron(&ComplexMatrix::identity(2));
        let plus = vec![LocalTerm { kind: TermKind::Plus, sites: vec!["a0".into(), "a1".into()], op: p1 }];
        let cross = vec![LocalTerm { kind: TermKind::Cross, sites: vec!["a0".into()], op: z() }];
        let spec = InteractionSpec::with_mirrors(pairs, plus, cross, 1).unwrap();
        let x = spec.region_of_plus(&["a0"]).unwrap();
        let y = spec.region_of_plus(&["a0", "a1"]).unwrap();
        RegionFamily::build(spec, vec![("X".into(), x), ("Y".into(), y)], "test").unwrap()
    }

    #[test]
    fn spec_validation() {
        let pairs = vec![pair(0, 2, 1)];
        let plus = LocalTerm { kind: TermKind::Plus, sites: vec!["a0".into()], op: z() };
        assert!(matches!(
            InteractionSpec::new(pairs.clone(), vec![plus.clone()], 1),
            Err(Error::NotReflectionSymmetric(_))
        ));
        let bad_minus = LocalTerm { kind: TermKind::Minus, sites: vec!["b0".into()], op: z().scale_re(2.0) };
        assert!(InteractionSpec::new(pairs.clone(), vec![plus.clone(), bad_minus], 1).is_err());
        let far = vec![SitePair { distance: 2, ..pairs[0].clone() }];
        let cross = LocalTerm { kind: TermKind::Cross, sites: vec!["a0".into()], op: z() };
        assert!(matches!(InteractionSpec::with_mirrors(far, vec![], vec![cross], 1), Err(Error::InvalidInput(_))));
        let spec = InteractionSpec::with_mirrors(pairs, vec![plus], vec![], 1).unwrap();
        let back = InteractionSpec::from_file(serde_json::from_str(&serde_json::to_string(&spec.to_file()).unwrap()).unwrap()).unwrap();
        assert_eq!(back.terms().len(), 2);
    }

    #[test]
    fn identity_inclusion_and_single_region() {
        let fam = collapsing_family();
        let r = inclusion(&fam, "X", "X").unwrap();
        assert!(r.injective && r.surjective && r.multiplicative_residual < 1e-12);
        let single = RegionFamily::build(fam.spec.clone(), vec![("X".into(), fam.get("X").unwrap().system.region.clone())], "one").unwrap();
        let axioms = net_axioms_check(&single).unwrap();
        assert!(axioms.passed && axioms.chains.is_empty() && axioms.disjoint.is_empty());
        let e = extendability_check(&fam, "X", "X").unwrap();
        assert!(e.extendable);
    }

    #[test]
    fn support_collapse_breaks_extendability() {
        let fam = collapsing_family();
        let e = extendability_check(&fam, "X", "Y").unwrap();
        assert!(!e.extendable);
        assert!(!e.injective);
        assert!(!e.pullback_faithful);
        assert!(e.pullback_residual < 1e-12);
        let probes: Vec<ComplexMatrix> = (0..3).map(|k| random_matrix(&mut seeded(k), 4, 4)).collect();
        let r = nested_idempotent_residual(fam.get("X").unwrap(), fam.get("Y").unwrap(), &probes).unwrap();
        assert!(r < 1e-9);
    }

    #[test]
    fn trivial_region_maps_scalars() {
        let pairs = vec![pair(0, 2, 1), pair(1, 2, 1)];
        let cross = vec![LocalTerm { kind: TermKind::Cross, sites: vec!["a0".into(), "a1".into()], op: z().kron(&z()) }];
        let spec = InteractionSpec::with_mirrors(pairs, vec![], cross, 1).unwrap();
        let x = spec.region_of_plus(&["a0"]).unwrap();
        let y = spec.full_region();
        let fam = RegionFamily::build(spec, vec![("X".into(), x), ("Y".into(), y)], "test").unwrap();
        let xd = fam.get("X").unwrap();
        assert_eq!(xd.osr.field_algebra.dim(), 1);
        let r = inclusion(&fam, "X", "Y").unwrap();
        assert!(r.injective && r.image_dim == 1);
    }
}
