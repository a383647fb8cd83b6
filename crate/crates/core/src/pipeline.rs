//! Run configuration, JSON reports and the built-in verification suite.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bipartition::Bipartition;
use crate::ensembles::*;
use crate::error::{Error, Result};
use crate::groundstate::{canonical_pf_ground_state, cut_local_commutant, ground_projection, ground_state_to_w, ltqo_check};
use crate::localnet::*;
use crate::models::fusion::{fusion_hom_dims, stringnet_modular_spectrum, FusionData};
use crate::models::toric::*;
use crate::models::vec_z2_toric_match;
use crate::osrecon::summarize;
use crate::pfengine::{canonical_pf, verify_eigenspace_structure, PfOptions};
use crate::rpcore::{assemble_reflection_hamiltonian, build_rp_hamiltonian, is_rp_direct, is_rp_operator, semigroup_verdicts};
use crate::staralg::algebra_equal;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub rank_tol: f64,
    pub residual_tol: f64,
    pub cluster_tol: f64,
    pub tau_grid: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { seed: 0, rank_tol: 1e-10, residual_tol: 1e-8, cluster_tol: 1e-9, tau_grid: vec![0.1, 0.5, 1.0, 2.0] }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let tols = [self.rank_tol, self.residual_tol, self.cluster_tol];
        if tols.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        if self.tau_grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::InvalidInput("τ values must be positive".into()));
        }
        Ok(())
    }

    /// Independent stream per check, so results do not depend on check order.
    pub fn rng(&self, check: &str) -> SeededRng {
        let tag = check.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3));
        seeded(self.seed ^ tag)
    }
}

/// Numeric evidence behind one verdict.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct CheckEntry {
    pub name: String,
    pub verdict: bool,
    pub residuals: BTreeMap<String, f64>,
    pub counts: BTreeMap<String, u64>,
    pub flags: BTreeMap<String, bool>,
    pub signatures: BTreeMap<String, Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

impl CheckEntry {
    pub fn new(name: &str) -> Self {
        Self { name: name.to_string(), ..Default::default() }
    }

    pub fn residual(&mut self, key: &str, v: f64) -> &mut Self {
        self.residuals.insert(key.to_string(), v);
        self
    }

    pub fn count(&mut self, key: &str, v: u64) -> &mut Self {
        self.counts.insert(key.to_string(), v);
        self
    }

    pub fn flag(&mut self, key: &str, v: bool) -> &mut Self {
        self.flags.insert(key.to_string(), v);
        self
    }

    pub fn signature(&mut self, key: &str, v: Vec<usize>) -> &mut Self {
        self.signatures.insert(key.to_string(), v);
        self
    }

    pub fn detail(&mut self, v: impl Serialize) -> &mut Self {
        self.detail = Some(serde_json::to_value(v).expect("serializable detail"));
        self
    }

    /// Verdict = every flag holds.
    pub fn conclude(&mut self) -> Self {
        self.verdict = self.flags.values().all(|&f| f);
        self.clone()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportBody<'a> {
    pub tool_version: &'a str,
    pub header: &'a BTreeMap<String, String>,
    pub config: &'a RunConfig,
    pub entries: &'a [CheckEntry],
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub tool_version: String,
    pub header: BTreeMap<String, String>,
    pub config: RunConfig,
    pub entries: Vec<CheckEntry>,
    /// Wall-clock seconds per check; excluded from the body.
    pub timings: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(config: &RunConfig) -> Self {
        Self {
            tool_version: TOOL_VERSION.to_string(),
            header: BTreeMap::new(),
            config: config.clone(),
            entries: Vec::new(),
            timings: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, entry: CheckEntry, seconds: f64) {
        self.timings.insert(entry.name.clone(), seconds);
        self.entries.push(entry);
    }

    /// Run a check, timing it; errors become failing entries.
    pub fn run(&mut self, name: &str, check: impl FnOnce() -> Result<CheckEntry>) {
        let (entry, seconds) = timed(name, check);
        self.push(entry, seconds);
    }

    pub fn sort(&mut self) {
        self.entries.sort_by(|a, b| a.name.cmp(&b.name));
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.verdict)
    }

    pub fn body_json(&self) -> String {
        let body = ReportBody { tool_version: &self.tool_version, header: &self.header, config: &self.config, entries: &self.entries };
        serde_json::to_string_pretty(&body).expect("report serialization")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

fn timed(name: &str, check: impl FnOnce() -> Result<CheckEntry>) -> (CheckEntry, f64) {
    let start = Instant::now();
    let entry = check().unwrap_or_else(|e| {
        let mut entry = CheckEntry::new(name);
        entry.detail(e.to_string());
        entry
    });
    (entry, start.elapsed().as_secs_f64())
}

pub const SUITE: [&str; 9] = [
    "rp_cp_equivalence",
    "rp_semigroup_structure",
    "pf_structure",
    "ground_state_bijection",
    "ltqo_equivalence",
    "toric_boundary_algebra",
    "net_axioms",
    "boundary_reduction",
    "stringnet_spectrum",
];

pub fn run_check(name: &str, config: &RunConfig) -> Result<CheckEntry> {
    match name {
        "rp_cp_equivalence" => rp_cp_equivalence(config),
        "rp_semigroup_structure" => rp_semigroup_structure(config),
        "pf_structure" => pf_structure(config),
        "ground_state_bijection" => ground_state_bijection(config),
        "ltqo_equivalence" => ltqo_equivalence(config),
        "toric_boundary_algebra" => toric_boundary_check(config),
        "net_axioms" => net_axioms_suite(config),
        "boundary_reduction" => boundary_reduction_suite(config),
        "stringnet_spectrum" => stringnet_spectrum(config),
        other => Err(Error::InvalidInput(format!("unknown check {other}"))),
    }
}

/// Runs the selected checks concurrently; entries are assembled in name order.
pub fn run_pipeline(config: &RunConfig, checks: &[&str]) -> Result<Report> {
    config.validate()?;
    let mut names: Vec<&str> = checks.to_vec();
    names.sort_unstable();
    names.dedup();
    if let Some(bad) = names.iter().find(|n| !SUITE.contains(n)) {
        return Err(Error::InvalidInput(format!("unknown check {bad}")));
    }
    let results: Vec<(CheckEntry, f64)> = names.par_iter().map(|&name| timed(name, || run_check(name, config))).collect();
    let mut report = Report::new(config);
    for (entry, seconds) in results {
        report.push(entry, seconds);
    }
    Ok(report)
}

pub fn suite(config: &RunConfig) -> Result<Report> {
    run_pipeline(config, &SUITE)
}

pub fn rp_cp_equivalence(config: &RunConfig) -> Result<CheckEntry> {
    let mut rng = config.rng("rp_cp_equivalence");
    let mut e = CheckEntry::new("rp_cp_equivalence");
    let mut disagreements = 0;
    for d in [2usize, 3] {
        let b = if d == 2 { Bipartition::mirrored(&[2])? } else { random_twisted_bipartition(&mut rng, 3)? };
        let mut rp = 0;
        for k in 0..100 {
            let t = match k % 4 {
                0 => reflection_symmetric_operator(&mut rng, &b, true)?,
                1 => reflection_symmetric_operator(&mut rng, &b, false)?,
                _ => random_hermitian(&mut rng, d * d),
            };
            let choi = is_rp_operator(&t, &b, 1e-9)?;
            let direct = is_rp_direct(&t, &b, 1e-9)?;
            disagreements += u64::from(choi.positive != direct.positive);
            rp += u64::from(choi.positive);
        }
        e.count(&format!("rp_{d}x{d}"), rp);
    }
    e.count("disagreements", disagreements).flag("no_disagreements", disagreements == 0);
    Ok(e.conclude())
}

pub fn rp_semigroup_structure(config: &RunConfig) -> Result<CheckEntry> {
    let mut rng = config.rng("rp_semigroup_structure");
    let mut e = CheckEntry::new("rp_semigroup_structure");
    let (mut rp_failures, mut controls_without_failure) = (0u64, 0u64);
    let mut min_eig: f64 = f64::INFINITY;
    for k in 0..50 {
        let d = 2 + k % 3;
        let b = random_twisted_bipartition(&mut rng, d)?;
        let h_plus = random_hermitian(&mut rng, d);
        let a = random_matrix(&mut rng, d, d);
        let cross = vec![a.clone(), a.dagger(), random_hermitian(&mut rng, d)];
        let h = build_rp_hamiltonian(&h_plus, &cross, &b)?;
        for v in h.semigroup_verdicts(&b, &config.tau_grid, 1e-9)? {
            rp_failures += u64::from(!v.positive);
            min_eig = min_eig.min(v.min_eigenvalue / v.max_eigenvalue.max(1e-300));
        }
        let flipped = assemble_reflection_hamiltonian(&h_plus, &cross, 1.0, &b)?;
        let verdicts = semigroup_verdicts(&flipped, &b, &config.tau_grid, 1e-9)?;
        controls_without_failure += u64::from(verdicts.iter().all(|v| v.positive));
    }
    e.count("rp_failures", rp_failures)
        .count("controls_without_failure", controls_without_failure)
        .residual("min_relative_choi_eigenvalue", min_eig)
        .flag("all_rp", rp_failures == 0)
        .flag("all_controls_fail", controls_without_failure == 0);
    Ok(e.conclude())
}

pub fn pf_structure(config: &RunConfig) -> Result<CheckEntry> {
    let mut rng = config.rng("pf_structure");
    let mut e = CheckEntry::new("pf_structure");
    let opts = PfOptions::default();
    let (mut bimodule, mut embedding): (f64, f64) = (0.0, 0.0);
    let (mut mismatches, mut rank_deficient, mut nontrivial_eigenspace) = (0u64, 0u64, 0u64);
    for k in 0..25 {
        let d = 2 + k % 5;
        let psi = random_symmetric_cp(&mut rng, d, k % 3)?;
        let pf = canonical_pf(&psi, &opts)?;
        let rep = verify_eigenspace_structure(&psi, &opts)?;
        for _ in 0..3 {
            let x = random_matrix(&mut rng, d, d);
            let lhs = psi.apply(&x.matmul(&pf.p_max));
            let rhs = psi.apply(&x).matmul(&pf.p_max);
            bimodule = bimodule.max(lhs.distance(&rhs) / (pf.rho * x.frobenius_norm()));
        }
        embedding = embedding.max(rep.embedding_residual);
        mismatches += u64::from(!rep.dims_match);
        rank_deficient += u64::from((pf.p_max.trace().re.round() as usize) < d);
        nontrivial_eigenspace += u64::from(rep.eigenspace_dim > 1);
    }
    e.residual("bimodule", bimodule)
        .residual("embedding", embedding)
        .count("dimension_mismatches", mismatches)
        .count("rank_deficient_p_max", rank_deficient)
        .count("eigenspace_dim_above_one", nontrivial_eigenspace)
        .flag("bimodule_below_1e-9", bimodule < 1e-9)
        .flag("embedding_below_1e-8", embedding < 1e-8)
        .flag("dimensions_match", mismatches == 0);
    Ok(e.conclude())
}

pub fn ground_state_bijection(config: &RunConfig) -> Result<CheckEntry> {
    let mut rng = config.rng("ground_state_bijection");
    let mut e = CheckEntry::new("ground_state_bijection");
    let (mut w_residual, mut mismatches, mut max_degeneracy): (f64, u64, u64) = (0.0, 0, 0);
    for k in 0..25 {
        let (p, q) = [(2, 2), (3, 2), (2, 3)][k % 3];
        let (b, h) = random_symmetric_rp_hamiltonian(&mut rng, p, q)?;
        let g = ground_projection(&h.assembled, config.cluster_tol)?;
        let pf = canonical_pf_ground_state(&g, &b)?;
        let comm = cut_local_commutant(&h.assembled, &pf.pi_hat, &b)?;
        mismatches += u64::from(comm.dim() != g.degeneracy);
        max_degeneracy = max_degeneracy.max(g.degeneracy as u64);
        for phi in &g.ground_basis {
            let w = ground_state_to_w(phi, &g, &pf, &b)?;
            w_residual = w_residual.max(w.plus_residual).max(w.minus_residual);
        }
    }
    e.residual("w_reconstruction", w_residual)
        .count("degeneracy_mismatches", mismatches)
        .count("max_degeneracy", max_degeneracy)
        .flag("degeneracy_matches_commutant", mismatches == 0)
        .flag("w_below_1e-8", w_residual < 1e-8);
    Ok(e.conclude())
}

pub fn ltqo_equivalence(config: &RunConfig) -> Result<CheckEntry> {
    let mut rng = config.rng("ltqo_equivalence");
    let mut e = CheckEntry::new("ltqo_equivalence");
    let (mut agree, mut nondegenerate) = (0u64, 0u64);
    for k in 0..100 {
        let (b, d) = random_frustration_free_rp(&mut rng, 1 + k % 3)?;
        let r = ltqo_check(&d, &b)?;
        agree += u64::from(r.agree);
        nondegenerate += u64::from(r.nondegenerate);
    }
    let closed = ToricPatch::closed(4, 1)?.system()?;
    let closed = ltqo_check(&closed.decomposition, &closed.bipartition)?;
    let degenerate = ToricPatch::slab(2, 1)?.system()?;
    let degenerate = ltqo_check(&degenerate.decomposition, &degenerate.bipartition)?;
    e.count("random_agree", agree)
        .count("random_nondegenerate", nondegenerate)
        .count("random_degenerate", 100 - nondegenerate)
        .flag("random_all_agree", agree == 100)
        .flag("toric_closed_both_true", closed.nondegenerate && closed.ltqo)
        .flag("engineered_degenerate_both_false", !degenerate.nondegenerate && !degenerate.ltqo);
    Ok(e.conclude())
}

pub fn toric_boundary_check(_config: &RunConfig) -> Result<CheckEntry> {
    let mut e = CheckEntry::new("toric_boundary_algebra");
    for l in 2..=5 {
        let a = toric_boundary_algebra(l)?;
        e.signature(&format!("A{l}"), a.signature.clone()).flag(&format!("A{l}_signature"), a.signature == a.expected_signature);
        if l == 4 {
            e.flag("A4_center_is_span_I_S4", a.center_dim == 2 && a.center_has_string);
        }
    }
    for l in 2..=MAX_BOUNDARY_LENGTH {
        let dim = toric_boundary_dim(l)?;
        e.count(&format!("dim_A{l}"), dim as u64).flag(&format!("dim_A{l}_is_2^{}", l - 1), dim == 1 << (l - 1));
    }
    let seed = toric_jones_tower_check(2)?;
    e.residual("jones_seed", seed.seed_residual).flag("jones_seed_exact", seed.seed_residual == 0.0);
    let mut tower: f64 = 0.0;
    for l in 2..=5 {
        let r = toric_jones_tower_check(l)?;
        tower = tower.max(r.basic_construction_residual);
        e.flag(&format!("jones_L{l}_dimension_law"), r.dimension_law && r.generated_by_projection);
    }
    e.residual("jones_basic_construction", tower).flag("jones_basic_construction_exact", tower < 1e-12);
    let patch = ToricPatch::slab(4, 1)?;
    let data = RegionData::compute(&patch.spec, "slab_L4", &patch.full_region())?;
    let s = summarize(&data.osr)?;
    let reference = toric_boundary_algebra(4)?;
    e.signature("slab_L4_field_algebra", s.block_signature.clone())
        .flag("slab_L4_signature", s.block_signature == vec![2, 2])
        .flag("slab_L4_xi_identity", s.xi_is_identity)
        .flag("slab_L4_pi_hat_identity", s.pi_hat_is_identity)
        .flag("slab_L4_modular_trivial", s.modular_trivial)
        .flag("slab_L4_equals_A4", algebra_equal(&data.osr.field_algebra, &reference.algebra));
    Ok(e.conclude())
}

pub fn toric_nested_family() -> Result<RegionFamily> {
    let window = ToricPatch::slab(4, 1)?;
    let regions = vec![
        ("slab_L2".to_string(), window.region(&slab_edges(2, 1))?),
        ("slab_L3".to_string(), window.region(&slab_edges(3, 1))?),
        ("slab_L4".to_string(), window.region(&slab_edges(4, 1))?),
        ("right_pair".to_string(), window.region(&[(1, 3), (1, 4)])?),
    ];
    RegionFamily::build(window.spec.clone(), regions, "toric rectangular window: layers 1..=1, positions 1..=4")
}

fn family_residuals(fam: &RegionFamily) -> Result<(f64, f64, f64, bool)> {
    let axioms = net_axioms_check(fam)?;
    let modular = modular_consistency_check(fam, &MODULAR_TIMES)?;
    let mut extendable = true;
    for (i, j) in fam.nested_pairs() {
        extendable &= extendability_of(&fam.regions[i], &fam.regions[j])?.extendable;
    }
    Ok((axioms.max_composition_residual, axioms.max_commutation_residual, modular.max_residual, extendable))
}

pub fn net_axioms_suite(config: &RunConfig) -> Result<CheckEntry> {
    let mut rng = config.rng("net_axioms");
    let mut e = CheckEntry::new("net_axioms");
    let toric = toric_nested_family()?;
    let (c, d, m, ext) = family_residuals(&toric)?;
    let chains = net_axioms_check(&toric)?;
    e.residual("toric_composition", c)
        .residual("toric_disjoint_commutation", d)
        .residual("toric_modular", m)
        .count("toric_chains", chains.chains.len() as u64)
        .count("toric_disjoint_pairs", chains.disjoint.len() as u64)
        .flag("toric_extendable", ext)
        .flag("toric_below_tol", c.max(d).max(m) < config.residual_tol);
    let (mut worst, mut all_ext, mut nontrivial) = (0.0f64, true, 0u64);
    for _ in 0..10 {
        let fam = random_extendable_family(&mut rng, 2, 2)?;
        let (c, d, m, ext) = family_residuals(&fam)?;
        worst = worst.max(c).max(d).max(m);
        all_ext &= ext;
        nontrivial += u64::from(!summarize(&fam.regions[1].osr)?.modular_trivial);
    }
    e.residual("random_max", worst)
        .count("random_nontrivial_flows", nontrivial)
        .flag("random_extendable", all_ext)
        .flag("random_below_tol", worst < config.residual_tol);
    Ok(e.conclude())
}

pub fn boundary_reduction_suite(_config: &RunConfig) -> Result<CheckEntry> {
    let mut e = CheckEntry::new("boundary_reduction");
    let wide = ToricPatch::new(&[(1, 1), (1, 2), (1, 3), (2, 1), (2, 2)], Boundary::Slab)?;
    let fam = RegionFamily::build(
        wide.spec.clone(),
        vec![("slab_L3".into(), wide.region(&slab_edges(3, 1))?), ("widened".into(), wide.full_region())],
        "toric window: layer 1 positions 1..=3 plus layer 2 positions 1..=2",
    )?;
    let r = boundary_reduction_check(&fam, TORIC_RANGE)?;
    let w = &r.entries[0];
    e.signature("widened_source", w.source_signature.clone())
        .signature("widened_target", w.target_signature.clone())
        .flag("widened_qualifies", w.qualifying)
        .flag("widened_iso", w.iso)
        .flag("widened_surjective", w.surjective);
    let long = ToricPatch::slab(5, 1)?;
    let fam = RegionFamily::build(
        long.spec.clone(),
        vec![("slab_L3".into(), long.region(&slab_edges(3, 1))?), ("slab_L5".into(), long.full_region())],
        "toric rectangular window: layers 1..=1, positions 1..=5",
    )?;
    let r = boundary_reduction_check(&fam, TORIC_RANGE)?;
    let l = &r.entries[0];
    e.count("lengthened_source_dim", l.source_dim as u64)
        .count("lengthened_target_dim", l.target_dim as u64)
        .signature("lengthened_target", l.target_signature.clone())
        .flag("lengthened_is_control", !l.qualifying)
        .flag("lengthened_dims_4_to_16", l.source_dim == 4 && l.target_dim == 16);
    Ok(e.conclude())
}

pub fn stringnet_spectrum(_config: &RunConfig) -> Result<CheckEntry> {
    let mut e = CheckEntry::new("stringnet_spectrum");
    let z2 = FusionData::vec_z2();
    let mut worst: f64 = 0.0;
    let mut sequences = 0u64;
    for len in 1..=3usize {
        for code in 0..(1u32 << (4 * len)) {
            let mut steps: Vec<[usize; 4]> = (0..len)
                .map(|l| {
                    let bits = (code >> (4 * l)) & 0xf;
                    [0, 1, 2, 3].map(|k| ((bits >> k) & 1) as usize)
                })
                .collect();
            for l in 1..len {
                steps[l][3] = steps[l - 1][0];
            }
            worst = worst.max(stringnet_modular_spectrum(&z2, &steps)?.abs());
            sequences += 1;
        }
    }
    e.count("vec_z2_sequences", sequences).residual("vec_z2_max_exponent", worst).flag("vec_z2_exponents_zero", worst == 0.0);
    let fib = FusionData::fibonacci();
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let exponent = stringnet_modular_spectrum(&fib, &[[1, 0, 1, 1]])?;
    let rel = ((exponent - phi.ln()) / phi.ln()).abs();
    e.residual("fibonacci_relative_error", rel).flag("fibonacci_log_phi", rel < 1e-12);
    for l in [2usize, 4, 6] {
        let m = vec_z2_toric_match(l)?;
        e.signature(&format!("vec_z2_paths_{}", m.path_length), m.fusion_signature.iter().map(|&x| x as usize).collect())
            .flag(&format!("vec_z2_matches_A{l}"), m.matches);
    }
    e.count("vec_z2_hom_2_2", fusion_hom_dims(&z2, 2, 2)? as u64);
    let consistency = [FusionData::trivial(), z2, fib, FusionData::ising()]
        .iter()
        .map(FusionData::consistency_residual)
        .fold(0.0, f64::max);
    e.residual("fusion_consistency", consistency).flag("fusion_consistency_below_1e-12", consistency < 1e-12);
    Ok(e.conclude())
}

/// Two suite runs with one seed; compares report bodies byte for byte.
pub fn determinism_check(config: &RunConfig) -> Result<(bool, Report)> {
    let first = suite(config)?;
    let second = suite(config)?;
    Ok((first.body_json() == second.body_json(), first))
}
