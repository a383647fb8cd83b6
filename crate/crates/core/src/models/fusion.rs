//! Fusion rules, quantum dimensions and fusion-path counting.

use serde::Serialize;

use crate::error::{Error, Result};

pub const MAX_PATH_LENGTH: usize = 12;

#[derive(Clone, Debug, Serialize)]
pub struct FusionData {
    pub name: String,
    /// Label 0 is the unit.
    pub labels: Vec<String>,
    pub dual: Vec<usize>,
    /// fusion[i][j][k] = N_{ij}^k.
    pub fusion: Vec<Vec<Vec<u32>>>,
    pub qdim: Vec<f64>,
    pub global_dim: f64,
}

impl FusionData {
    pub fn new(name: &str, labels: &[&str], dual: Vec<usize>, fusion: Vec<Vec<Vec<u32>>>) -> Result<Self> {
        let n = labels.len();
        let shape_ok = n > 0
            && dual.len() == n
            && fusion.len() == n
            && fusion.iter().all(|r| r.len() == n && r.iter().all(|c| c.len() == n));
        if !shape_ok || dual.iter().any(|&x| x >= n) {
            return Err(Error::InvalidInput(format!("{name}: malformed fusion tables")));
        }
        for i in 0..n {
            if dual[dual[i]] != i {
                return Err(Error::InvalidInput(format!("{name}: dual is not an involution")));
            }
            for j in 0..n {
                for k in 0..n {
                    let unit = u32::from(i == 0 && j == k);
                    if i == 0 && fusion[0][j][k] != unit {
                        return Err(Error::InvalidInput(format!("{name}: label 0 is not the unit")));
                    }
                    if fusion[i][j][k] != fusion[dual[j]][dual[i]][dual[k]] {
                        return Err(Error::InvalidInput(format!("{name}: N is not dual-symmetric")));
                    }
                }
                if fusion[i][j][0] != u32::from(j == dual[i]) {
                    return Err(Error::InvalidInput(format!("{name}: unit channel must pair duals")));
                }
            }
        }
        let qdim = perron_vector(&total_matrix(&fusion));
        let global_dim = qdim.iter().map(|d| d * d).sum();
        Ok(Self { name: name.to_string(), labels: labels.iter().map(|s| s.to_string()).collect(), dual, fusion, qdim, global_dim })
    }

    pub fn trivial() -> Self {
        Self::new("trivial", &["1"], vec![0], vec![vec![vec![1]]]).expect("built-in")
    }

    pub fn vec_z2() -> Self {
        let f = vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![1, 0]]];
        Self::new("vec_z2", &["0", "1"], vec![0, 1], f).expect("built-in")
    }

    pub fn fibonacci() -> Self {
        let f = vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![1, 1]]];
        Self::new("fibonacci", &["1", "tau"], vec![0, 1], f).expect("built-in")
    }

    pub fn ising() -> Self {
        let f = vec![
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]],
            vec![vec![0, 1, 0], vec![1, 0, 1], vec![0, 1, 0]],
            vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]],
        ];
        Self::new("ising", &["1", "sigma", "psi"], vec![0, 1, 2], f).expect("built-in")
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "trivial" => Ok(Self::trivial()),
            "vec_z2" | "vecz2" | "z2" => Ok(Self::vec_z2()),
            "fibonacci" | "fib" => Ok(Self::fibonacci()),
            "ising" => Ok(Self::ising()),
            other => Err(Error::InvalidInput(format!("unknown category {other}"))),
        }
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, name: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == name)
            .ok_or_else(|| Error::InvalidInput(format!("{}: unknown label {name}", self.name)))
    }

    /// max |d(i)d(j) − Σ_k N_{ij}^k d(k)| and max |d(i⁻) − d(i)|.
    pub fn consistency_residual(&self) -> f64 {
        let n = self.rank();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            worst = worst.max((self.qdim[self.dual[i]] - self.qdim[i]).abs());
            for j in 0..n {
                let sum: f64 = (0..n).map(|k| f64::from(self.fusion[i][j][k]) * self.qdim[k]).sum();
                worst = worst.max((self.qdim[i] * self.qdim[j] - sum).abs());
            }
        }
        worst
    }
}

/// M_{jk} = Σ_i N_{ij}^k: fusion with A = ⊕_i i.
fn total_matrix(fusion: &[Vec<Vec<u32>>]) -> Vec<Vec<u32>> {
    let n = fusion.len();
    (0..n).map(|j| (0..n).map(|k| (0..n).map(|i| fusion[i][j][k]).sum()).collect()).collect()
}

/// Perron vector of M normalized to 1 on the unit; equals the quantum dimensions.
fn perron_vector(m: &[Vec<u32>]) -> Vec<f64> {
    let n = m.len();
    let mut v = vec![1.0; n];
    for _ in 0..10_000 {
        let w: Vec<f64> = (0..n).map(|j| (0..n).map(|k| f64::from(m[j][k]) * v[k]).sum()).collect();
        let scale = w[0];
        let next: Vec<f64> = w.iter().map(|x| x / scale).collect();
        let change = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if change < 1e-16 {
            break;
        }
    }
    v
}

/// Multiplicity of each total charge in A^m.
pub fn path_multiplicities(data: &FusionData, m: usize) -> Result<Vec<u128>> {
    if m > MAX_PATH_LENGTH {
        return Err(Error::TooLarge(format!("path length {m} exceeds {MAX_PATH_LENGTH}")));
    }
    let t = total_matrix(&data.fusion);
    let n = data.rank();
    let mut v = vec![0u128; n];
    v[0] = 1;
    for _ in 0..m {
        let mut next = vec![0u128; n];
        for j in 0..n {
            for k in 0..n {
                let add = v[j]
                    .checked_mul(u128::from(t[j][k]))
                    .and_then(|x| x.checked_add(next[k]))
                    .ok_or_else(|| Error::Overflow(format!("path count at length {m}")))?;
                next[k] = add;
            }
        }
        v = next;
    }
    Ok(v)
}

/// dim hom(A^m, A^n) = Σ_k mult_m(k)·mult_n(k).
pub fn fusion_hom_dims(data: &FusionData, m: usize, n: usize) -> Result<u128> {
    let a = path_multiplicities(data, m)?;
    let b = path_multiplicities(data, n)?;
    a.iter().zip(&b).try_fold(0u128, |acc, (x, y)| {
        x.checked_mul(*y)
            .and_then(|p| acc.checked_add(p))
            .ok_or_else(|| Error::Overflow(format!("hom({m},{n})")))
    })
}

/// Block sizes of End(A^m), descending.
pub fn fusion_signature(data: &FusionData, m: usize) -> Result<Vec<u128>> {
    let mut s: Vec<u128> = path_multiplicities(data, m)?.into_iter().filter(|&x| x > 0).collect();
    s.sort_unstable_by(|a, b| b.cmp(a));
    Ok(s)
}

/// One boundary step (i_l, i'_l, k_l, k'_l).
pub type StepLabels = [usize; 4];

/// log(d(i_L)∏d(k_l)) − log(d(k'₁)∏d(i'_l)); the flow eigenvalue is e^{it·exponent}.
pub fn stringnet_modular_spectrum(data: &FusionData, steps: &[StepLabels]) -> Result<f64> {
    if steps.is_empty() {
        return Err(Error::Inadmissible("empty label sequence".into()));
    }
    for (l, s) in steps.iter().enumerate() {
        if s.iter().any(|&x| x >= data.rank()) {
            return Err(Error::Inadmissible(format!("step {} has an unknown label", l + 1)));
        }
        if l > 0 && s[3] != steps[l - 1][0] {
            return Err(Error::Inadmissible(format!("k'_{} must equal i_{}", l + 1, l)));
        }
    }
    let d = |x: usize| data.qdim[x].ln();
    let last = steps[steps.len() - 1][0];
    let top: f64 = d(last) + steps.iter().map(|s| d(s[2])).sum::<f64>();
    let bottom: f64 = d(steps[0][3]) + steps.iter().map(|s| d(s[1])).sum::<f64>();
    Ok(top - bottom)
}

pub fn parse_steps(data: &FusionData, names: &[[String; 4]]) -> Result<Vec<StepLabels>> {
    names
        .iter()
        .map(|s| Ok([data.label(&s[0])?, data.label(&s[1])?, data.label(&s[2])?, data.label(&s[3])?]))
        .collect()
}
