//! The split ℋ = ℋ₋ ⊗ ℋ₊ with its reflection antiunitary θ̂ = U·conj.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensorlab::{kron_vec, ComplexMatrix, FactorShape, MatrixFile, C64, ONE, ZERO};

const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Site {
    pub id: String,
    pub dim: usize,
}

impl Site {
    pub fn new(id: impl Into<String>, dim: usize) -> Self {
        Self { id: id.into(), dim }
    }
}

#[derive(Clone, Debug)]
pub struct Bipartition {
    plus_sites: Vec<Site>,
    minus_sites: Vec<Site>,
    /// (plus id, minus id) pairs realizing θ.
    site_map: Vec<(String, String)>,
    plus_shape: FactorShape,
    minus_shape: FactorShape,
    theta_unitary: ComplexMatrix,
}

impl Bipartition {
    /// Build from site lists and the reflection pairing. `twists` holds optional
    /// on-site unitaries U₀ (keyed by plus site) with θ₀ = U₀·conj.
    pub fn new(
        plus_sites: Vec<Site>,
        minus_sites: Vec<Site>,
        site_map: Vec<(String, String)>,
        twists: &HashMap<String, ComplexMatrix>,
    ) -> Result<Self> {
        if plus_sites.is_empty() || plus_sites.len() != minus_sites.len() {
            return Err(Error::InvalidBipartition(format!(
                "{} plus sites vs {} minus sites",
                plus_sites.len(),
                minus_sites.len()
            )));
        }
        let plus_index: HashMap<&str, usize> =
            plus_sites.iter().enumerate().map(|(k, s)| (s.id.as_str(), k)).collect();
        let minus_index: HashMap<&str, usize> =
            minus_sites.iter().enumerate().map(|(k, s)| (s.id.as_str(), k)).collect();
        if plus_index.len() != plus_sites.len() || minus_index.len() != minus_sites.len() {
            return Err(Error::InvalidBipartition("duplicate site identifiers".into()));
        }
        if plus_sites.iter().any(|s| s.dim == 0) || minus_sites.iter().any(|s| s.dim == 0) {
            return Err(Error::InvalidBipartition("site of dimension 0".into()));
        }
        // minus position -> plus position
        let mut preimage = vec![usize::MAX; minus_sites.len()];
        let mut used = vec![false; plus_sites.len()];
        for (p, m) in &site_map {
            let pi = *plus_index
                .get(p.as_str())
                .ok_or_else(|| Error::InvalidBipartition(format!("unknown plus site {p}")))?;
            let mi = *minus_index
                .get(m.as_str())
                .ok_or_else(|| Error::InvalidBipartition(format!("unknown minus site {m}")))?;
            if used[pi] || preimage[mi] != usize::MAX {
                return Err(Error::InvalidBipartition("site map is not a bijection".into()));
            }
            if plus_sites[pi].dim != minus_sites[mi].dim {
                return Err(Error::InvalidBipartition(format!("dimension mismatch between {p} and {m}")));
            }
            used[pi] = true;
            preimage[mi] = pi;
        }
        if used.iter().any(|u| !u) {
            return Err(Error::InvalidBipartition("site map does not cover every site".into()));
        }
        for (id, u0) in twists {
            let pi = *plus_index
                .get(id.as_str())
                .ok_or_else(|| Error::InvalidBipartition(format!("twist on unknown site {id}")))?;
            let d = plus_sites[pi].dim;
            if u0.shape() != (d, d) {
                return Err(Error::InvalidBipartition(format!("twist on {id} has wrong shape")));
            }
            check_unitary(u0)?;
            let sq = u0.matmul(&u0.conj());
            if sq.distance(&ComplexMatrix::identity(d)) > UNITARY_TOL * d as f64 {
                return Err(Error::InvalidBipartition(format!("twist on {id} violates θ₀² = 1")));
            }
        }
        let plus_shape = FactorShape::new(plus_sites.iter().map(|s| s.dim).collect())?;
        let minus_shape = FactorShape::new(minus_sites.iter().map(|s| s.dim).collect())?;
        let d = plus_shape.total();
        let twist_of: Vec<Option<&ComplexMatrix>> =
            plus_sites.iter().map(|s| twists.get(&s.id)).collect();
        let plus_dims = plus_shape.dims().to_vec();
        let mut data = vec![ZERO; d * d];
        let mut digits = vec![0usize; plus_dims.len()];
        for col in 0..d {
            decompose(col, &plus_dims, &mut digits);
            let mut image = vec![ONE];
            for &pi in &preimage {
                let dim = plus_dims[pi];
                let local: Vec<C64> = match twist_of[pi] {
                    Some(u0) => u0.col(digits[pi]),
                    None => (0..dim).map(|k| if k == digits[pi] { ONE } else { ZERO }).collect(),
                };
                image = kron_vec(&image, &local);
            }
            for (row, z) in image.into_iter().enumerate() {
                data[row * d + col] = z;
            }
        }
        let theta_unitary = ComplexMatrix::from_parts(d, d, data);
        Ok(Self { plus_sites, minus_sites, site_map, plus_shape, minus_shape, theta_unitary })
    }

    /// One plus site per entry of `dims`, mirrored in the same order, θ₀ = conj.
    pub fn mirrored(dims: &[usize]) -> Result<Self> {
        let plus: Vec<Site> = dims.iter().enumerate().map(|(k, &d)| Site::new(format!("p{k}"), d)).collect();
        let minus: Vec<Site> = dims.iter().enumerate().map(|(k, &d)| Site::new(format!("m{k}"), d)).collect();
        let map = (0..dims.len()).map(|k| (format!("p{k}"), format!("m{k}"))).collect();
        Self::new(plus, minus, map, &HashMap::new())
    }

    /// Single site of dimension d on each side with θ̂ = U·conj.
    pub fn with_theta_unitary(u: ComplexMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::InvalidBipartition("theta unitary must be square".into()));
        }
        check_unitary(&u)?;
        let d = u.rows();
        let sq = u.matmul(&u.conj());
        if sq.distance(&ComplexMatrix::identity(d)) > UNITARY_TOL * d as f64 {
            return Err(Error::InvalidBipartition("theta unitary violates θ̂² = 1".into()));
        }
        Ok(Self {
            plus_sites: vec![Site::new("p0", d)],
            minus_sites: vec![Site::new("m0", d)],
            site_map: vec![("p0".into(), "m0".into())],
            plus_shape: FactorShape::new(vec![d])?,
            minus_shape: FactorShape::new(vec![d])?,
            theta_unitary: u,
        })
    }

    /// ℋ₊ ⊗ ℂᵏ with θ̂ extended by conjugation on the ancilla.
    pub fn with_ancilla(&self, k: usize) -> Result<Self> {
        let mut plus = self.plus_sites.clone();
        let mut minus = self.minus_sites.clone();
        let mut map = self.site_map.clone();
        let pid = unique_id(&plus, "ancilla+");
        let mid = unique_id(&minus, "ancilla-");
        plus.push(Site::new(pid.clone(), k));
        minus.push(Site::new(mid.clone(), k));
        map.push((pid, mid));
        let u = self.theta_unitary.kron(&ComplexMatrix::identity(k));
        Ok(Self {
            plus_shape: FactorShape::new(plus.iter().map(|s| s.dim).collect())?,
            minus_shape: FactorShape::new(minus.iter().map(|s| s.dim).collect())?,
            plus_sites: plus,
            minus_sites: minus,
            site_map: map,
            theta_unitary: u,
        })
    }

    pub fn dim_plus(&self) -> usize {
        self.plus_shape.total()
    }

    pub fn dim_minus(&self) -> usize {
        self.minus_shape.total()
    }

    pub fn total_dim(&self) -> usize {
        self.dim_plus() * self.dim_minus()
    }

    pub fn plus_shape(&self) -> &FactorShape {
        &self.plus_shape
    }

    pub fn minus_shape(&self) -> &FactorShape {
        &self.minus_shape
    }

    /// Factor shape of ℋ₋ ⊗ ℋ₊ (minus factors first).
    pub fn full_shape(&self) -> FactorShape {
        let mut dims = self.minus_shape.dims().to_vec();
        dims.extend_from_slice(self.plus_shape.dims());
        FactorShape::new(dims).expect("nonzero dims")
    }

    pub fn plus_sites(&self) -> &[Site] {
        &self.plus_sites
    }

    pub fn minus_sites(&self) -> &[Site] {
        &self.minus_sites
    }

    pub fn site_map(&self) -> &[(String, String)] {
        &self.site_map
    }

    pub fn theta_unitary(&self) -> &ComplexMatrix {
        &self.theta_unitary
    }

    /// θ̂(v) = U·conj(v).
    pub fn theta_hat(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.check_plus_len(v.len())?;
        let c: Vec<C64> = v.iter().map(|z| z.conj()).collect();
        Ok(self.theta_unitary.apply(&c))
    }

    /// θ̂⁻¹(w) = conj(U†·w).
    pub fn theta_hat_inv(&self, w: &[C64]) -> Result<Vec<C64>> {
        self.check_plus_len(w.len())?;
        let x = self.theta_unitary.dagger().apply(w);
        Ok(x.into_iter().map(|z| z.conj()).collect())
    }

    /// Θ(X) = θ̂Xθ̂⁻¹ = U·conj(X)·U†.
    pub fn big_theta(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_plus_op(x)?;
        if self.theta_is_identity() {
            return Ok(x.conj());
        }
        Ok(self.theta_unitary.matmul(&x.conj()).matmul(&self.theta_unitary.dagger()))
    }

    /// Θ⁻¹(Y) = conj(U†·Y·U).
    pub fn big_theta_inv(&self, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_plus_op(y)?;
        if self.theta_is_identity() {
            return Ok(y.conj());
        }
        Ok(self.theta_unitary.dagger().matmul(y).matmul(&self.theta_unitary).conj())
    }

    /// Σᵢ θ̂|i⟩ ⊗ |i⟩, indexed as (minus, plus) row-major.
    pub fn max_entangled(&self) -> Vec<C64> {
        self.theta_unitary.as_slice().to_vec()
    }

    pub fn theta_is_identity(&self) -> bool {
        let u = &self.theta_unitary;
        let d = u.rows();
        (0..d).all(|i| (0..d).all(|j| u.get(i, j) == if i == j { ONE } else { ZERO }))
    }

    /// a ⊗ b on ℋ₋ ⊗ ℋ₊.
    pub fn product(&self, minus_op: &ComplexMatrix, plus_op: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_plus_op(plus_op)?;
        if minus_op.shape() != (self.dim_minus(), self.dim_minus()) {
            return Err(Error::DimensionMismatch("operator on ℋ₋".into()));
        }
        Ok(minus_op.kron(plus_op))
    }

    /// (I ⊗ w)·v without forming the Kronecker product.
    pub fn apply_plus(&self, w: &ComplexMatrix, v: &[C64]) -> Result<Vec<C64>> {
        self.check_plus_op(w)?;
        self.check_full_vec(v.len())?;
        let vm = ComplexMatrix::from_parts(self.dim_minus(), self.dim_plus(), v.to_vec());
        Ok(vm.matmul(&w.transpose()).into_vec())
    }

    /// (a ⊗ I)·v without forming the Kronecker product.
    pub fn apply_minus(&self, a: &ComplexMatrix, v: &[C64]) -> Result<Vec<C64>> {
        if a.shape() != (self.dim_minus(), self.dim_minus()) {
            return Err(Error::DimensionMismatch("operator on ℋ₋".into()));
        }
        self.check_full_vec(v.len())?;
        let vm = ComplexMatrix::from_parts(self.dim_minus(), self.dim_plus(), v.to_vec());
        Ok(a.matmul(&vm).into_vec())
    }

    pub fn check_plus_op(&self, x: &ComplexMatrix) -> Result<()> {
        let d = self.dim_plus();
        if x.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "expected {d}x{d} operator on ℋ₊, got {}x{}",
                x.rows(),
                x.cols()
            )));
        }
        Ok(())
    }

    pub fn check_full_op(&self, x: &ComplexMatrix) -> Result<()> {
        let d = self.total_dim();
        if x.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "expected {d}x{d} operator on ℋ₋⊗ℋ₊, got {}x{}",
                x.rows(),
                x.cols()
            )));
        }
        Ok(())
    }

    pub fn check_full_vec(&self, len: usize) -> Result<()> {
        if len != self.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "expected vector of length {}, got {len}",
                self.total_dim()
            )));
        }
        Ok(())
    }

    fn check_plus_len(&self, len: usize) -> Result<()> {
        if len != self.dim_plus() {
            return Err(Error::DimensionMismatch(format!(
                "expected vector of length {}, got {len}",
                self.dim_plus()
            )));
        }
        Ok(())
    }

    pub fn to_file(&self) -> BipartitionFile {
        BipartitionFile {
            plus_sites: self.plus_sites.clone(),
            minus_sites: self.minus_sites.clone(),
            site_map: self.site_map.clone(),
            twists: BTreeMap::new(),
        }
    }

    pub fn from_file(f: BipartitionFile) -> Result<Self> {
        let mut twists = HashMap::new();
        for (id, m) in f.twists {
            twists.insert(id, ComplexMatrix::try_from(m)?);
        }
        Self::new(f.plus_sites, f.minus_sites, f.site_map, &twists)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let f: BipartitionFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
            context: format!("{} line {} column {}", path.display(), e.line(), e.column()),
            message: e.to_string(),
        })?;
        Self::from_file(f)
    }
}

/// Bipartition descriptor on disk.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BipartitionFile {
    pub plus_sites: Vec<Site>,
    pub minus_sites: Vec<Site>,
    pub site_map: Vec<(String, String)>,
    #[serde(default)]
    pub twists: BTreeMap<String, MatrixFile>,
}

/// A finite set of sites, split by the reflection into its two halves.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Region {
    sites: BTreeSet<String>,
}

impl Region {
    pub fn new<S: Into<String>>(sites: impl IntoIterator<Item = S>) -> Self {
        Self { sites: sites.into_iter().map(Into::into).collect() }
    }

    pub fn sites(&self) -> &BTreeSet<String> {
        &self.sites
    }

    pub fn contains(&self, id: &str) -> bool {
        self.sites.contains(id)
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        self.sites.is_subset(&other.sites)
    }

    pub fn is_disjoint(&self, other: &Region) -> bool {
        self.sites.is_disjoint(&other.sites)
    }

    /// Plus-side sites in the order of `pairs`.
    pub fn plus_part(&self, pairs: &[(String, String)]) -> Vec<String> {
        pairs.iter().filter(|(p, _)| self.sites.contains(p)).map(|(p, _)| p.clone()).collect()
    }

    /// Minus-side sites in the order of `pairs`.
    pub fn minus_part(&self, pairs: &[(String, String)]) -> Vec<String> {
        pairs.iter().filter(|(_, m)| self.sites.contains(m)).map(|(_, m)| m.clone()).collect()
    }

    /// θ(X) = X and every site lies on one side.
    pub fn is_symmetric(&self, pairs: &[(String, String)]) -> bool {
        let covered = pairs.iter().all(|(p, m)| self.sites.contains(p) == self.sites.contains(m));
        let known = self.sites.iter().all(|s| pairs.iter().any(|(p, m)| p == s || m == s));
        covered && known
    }
}

fn check_unitary(u: &ComplexMatrix) -> Result<()> {
    let d = u.rows();
    let residual = u.dagger().matmul(u).distance(&ComplexMatrix::identity(d));
    if residual > UNITARY_TOL * (d as f64).sqrt().max(1.0) {
        return Err(Error::InvalidBipartition(format!("matrix is not unitary (residual {residual:.3e})")));
    }
    Ok(())
}

fn decompose(mut index: usize, dims: &[usize], digits: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        digits[k] = index % dims[k];
        index /= dims[k];
    }
}

fn unique_id(sites: &[Site], base: &str) -> String {
    let mut id = base.to_string();
    let mut n = 0;
    while sites.iter().any(|s| s.id == id) {
        n += 1;
        id = format!("{base}{n}");
    }
    id
}
