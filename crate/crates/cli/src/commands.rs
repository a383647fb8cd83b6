use std::fs;
use std::path::Path;

use serde::Deserialize;

use rpkit_core::bipartition::Bipartition;
use rpkit_core::groundstate::{canonical_pf_ground_state, cut_local_commutant, ground_projection, ground_state_to_w, ltqo_check};
use rpkit_core::localnet::{
    boundary_reduction_check, extendability_of, modular_consistency_check, net_axioms_check, InteractionSpec, RegionData,
    RegionFamily, MODULAR_TIMES,
};
use rpkit_core::models::fusion::{fusion_hom_dims, parse_steps, stringnet_modular_spectrum, FusionData};
use rpkit_core::models::toric::{toric_boundary_algebra, toric_jones_tower_check, ToricPatch, MAX_BOUNDARY_LENGTH};
use rpkit_core::osrecon::{field_algebra, summarize, OsrResult};
use rpkit_core::pfengine::{canonical_pf, verify_eigenspace_structure, PfOptions, SymmetricCpMap};
use rpkit_core::pipeline::{run_pipeline, CheckEntry, Report, RunConfig, SUITE};
use rpkit_core::rpcore::{is_rp_direct, is_rp_operator};
use rpkit_core::tensorlab::{read_matrix, ComplexMatrix, MatrixFile};
use rpkit_core::{Error, Result};

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        context: format!("{} line {} column {}", path.display(), e.line(), e.column()),
        message: e.to_string(),
    })
}

fn report(config: &RunConfig, command: &str, inputs: &[(&str, &Path)]) -> Report {
    let mut r = Report::new(config);
    r.header.insert("command".into(), command.into());
    for (key, path) in inputs {
        r.header.insert((*key).into(), path.display().to_string());
    }
    r
}

pub fn rp_check(config: &RunConfig, operator: &Path, bipartition: &Path) -> Result<Report> {
    let t = read_matrix(operator)?;
    let b = Bipartition::read(bipartition)?;
    let mut r = report(config, "rp-check", &[("operator", operator), ("bipartition", bipartition)]);
    r.run("rp_check", || {
        let choi = is_rp_operator(&t, &b, config.residual_tol)?;
        let direct = is_rp_direct(&t, &b, config.residual_tol)?;
        let mut e = CheckEntry::new("rp_check");
        e.residual("choi_min_eigenvalue", choi.min_eigenvalue)
            .residual("choi_max_eigenvalue", choi.max_eigenvalue)
            .residual("direct_min_eigenvalue", direct.min_eigenvalue)
            .flag("hermitian", choi.hermitian)
            .flag("reflection_positive", choi.positive)
            .flag("direct_agrees", choi.positive == direct.positive);
        Ok(e.conclude())
    });
    Ok(r)
}

pub fn pf(config: &RunConfig, kraus: &Path) -> Result<Report> {
    let files: Vec<MatrixFile> = read_json(kraus)?;
    let ops = files.into_iter().map(ComplexMatrix::try_from).collect::<Result<Vec<_>>>()?;
    let psi = SymmetricCpMap::new(ops)?;
    let opts = PfOptions { rank_tol: PfOptions::default().rank_tol.max(config.rank_tol), ..PfOptions::default() };
    let mut r = report(config, "pf", &[("kraus", kraus)]);
    r.run("pf_structure", || {
        let pf = canonical_pf(&psi, &opts)?;
        let rep = verify_eigenspace_structure(&psi, &opts)?;
        let mut e = CheckEntry::new("pf_structure");
        e.residual("spectral_radius", pf.rho)
            .residual("fixed_point", pf.residual)
            .residual("embedding", rep.embedding_residual)
            .count("cesaro_iterations", pf.cesaro_iterations as u64)
            .count("p_max_rank", pf.p_max.trace().re.round() as u64)
            .count("eigenspace_dim", rep.eigenspace_dim as u64)
            .count("bim_p_max_dim", rep.bim_pmax_dim as u64)
            .flag("dimensions_match", rep.dims_match)
            .flag("embedding_below_tol", rep.embedding_residual < config.residual_tol);
        Ok(e.conclude())
    });
    Ok(r)
}

pub fn ground(config: &RunConfig, hamiltonian: &Path, bipartition: &Path) -> Result<Report> {
    let h = read_matrix(hamiltonian)?;
    let b = Bipartition::read(bipartition)?;
    let mut r = report(config, "ground", &[("hamiltonian", hamiltonian), ("bipartition", bipartition)]);
    r.run("ground_state_bijection", || {
        let g = ground_projection(&h, config.cluster_tol)?;
        let pf = canonical_pf_ground_state(&g, &b)?;
        let comm = cut_local_commutant(&h, &pf.pi_hat, &b)?;
        let mut w_residual: f64 = 0.0;
        for phi in &g.ground_basis {
            let w = ground_state_to_w(phi, &g, &pf, &b)?;
            w_residual = w_residual.max(w.plus_residual).max(w.minus_residual);
        }
        let mut e = CheckEntry::new("ground_state_bijection");
        e.residual("ground_energy", g.energy_e0)
            .residual("gap", g.gap)
            .residual("pi_hat_range", pf.range_residual)
            .residual("w_reconstruction", w_residual)
            .count("degeneracy", g.degeneracy as u64)
            .count("commutant_dim", comm.dim() as u64)
            .flag("degeneracy_matches_commutant", comm.dim() == g.degeneracy)
            .flag("w_below_tol", w_residual < config.residual_tol);
        Ok(e.conclude())
    });
    Ok(r)
}

pub fn ltqo(config: &RunConfig, interaction: &Path) -> Result<Report> {
    let spec = InteractionSpec::read(interaction)?;
    let mut r = report(config, "ltqo", &[("interaction", interaction)]);
    r.run("ltqo_equivalence", || {
        let system = spec.region_system(&spec.full_region())?;
        let rep = ltqo_check(&system.decomposition, &system.bipartition)?;
        let mut e = CheckEntry::new("ltqo_equivalence");
        e.residual("max_off_diagonal", rep.max_off_diagonal)
            .residual("diagonal_spread", rep.diagonal_spread)
            .count("degeneracy_full", rep.degeneracy_full as u64)
            .count("degeneracy_partial", rep.degeneracy_partial as u64)
            .flag("criteria_agree", rep.agree)
            .detail(&rep);
        Ok(e.conclude())
    });
    Ok(r)
}

fn osr_entry(name: &str, osr: &OsrResult, tol: f64) -> Result<CheckEntry> {
    let s = summarize(osr)?;
    let mut e = CheckEntry::new(name);
    e.signature("field_algebra", s.block_signature.clone())
        .residual("trace_pi", s.trace_pi)
        .residual("multiplicative", s.iso.multiplicative)
        .residual("unital", s.iso.unital)
        .residual("star", s.iso.star)
        .residual("vacuum", s.iso.vacuum)
        .count("phys_dim", s.phys_dim as u64)
        .count("algebra_dim", s.algebra_dim as u64)
        .flag("iso", s.iso.passes(tol))
        .detail(serde_json::json!({
            "xi_is_identity": s.xi_is_identity,
            "pi_hat_is_identity": s.pi_hat_is_identity,
            "modular_trivial": s.modular_trivial,
        }));
    Ok(e)
}

pub fn osr(config: &RunConfig, interaction: Option<&Path>, projection: Option<(&Path, &Path)>) -> Result<Report> {
    match (interaction, projection) {
        (Some(path), None) => {
            let spec = InteractionSpec::read(path)?;
            let mut r = report(config, "osr", &[("interaction", path)]);
            r.run("osr", || {
                let data = RegionData::compute(&spec, "full", &spec.full_region())?;
                let mut e = osr_entry("osr", &data.osr, config.residual_tol)?;
                e.count("degeneracy", data.ground.degeneracy as u64);
                Ok(e.conclude())
            });
            Ok(r)
        }
        (None, Some((pi, bip))) => {
            let pi_m = read_matrix(pi)?;
            let b = Bipartition::read(bip)?;
            let mut r = report(config, "osr", &[("projection", pi), ("bipartition", bip)]);
            r.run("osr", || Ok(osr_entry("osr", &field_algebra(&pi_m, &b)?, config.residual_tol)?.conclude()));
            Ok(r)
        }
        _ => Err(Error::InvalidInput("osr needs --interaction or --projection with --bipartition".into())),
    }
}

#[derive(Deserialize)]
struct RegionsFile {
    #[serde(default)]
    window: String,
    regions: Vec<RegionEntry>,
}

#[derive(Deserialize)]
struct RegionEntry {
    name: String,
    /// Plus sites; their mirrors join automatically.
    plus: Vec<String>,
}

pub fn net(config: &RunConfig, interaction: &Path, regions: &Path, checks: &[String]) -> Result<Report> {
    const KNOWN: [&str; 4] = ["axioms", "modular", "extendability", "boundary"];
    if let Some(bad) = checks.iter().find(|c| !KNOWN.contains(&c.as_str())) {
        return Err(Error::InvalidInput(format!("unknown net check {bad}")));
    }
    let spec = InteractionSpec::read(interaction)?;
    let file: RegionsFile = read_json(regions)?;
    let named = file
        .regions
        .iter()
        .map(|r| Ok((r.name.clone(), spec.region_of_plus(&r.plus)?)))
        .collect::<Result<Vec<_>>>()?;
    let range = spec.range();
    let family = RegionFamily::build(spec, named, file.window)?;
    let mut r = report(config, "net", &[("interaction", interaction), ("regions", regions)]);
    r.header.insert("window".into(), family.window.clone());
    let want = |c: &str| checks.iter().any(|x| x == c);
    if want("axioms") {
        r.run("net_axioms", || {
            let a = net_axioms_check(&family)?;
            let mut e = CheckEntry::new("net_axioms");
            e.residual("composition", a.max_composition_residual)
                .residual("disjoint_commutation", a.max_commutation_residual)
                .count("chains", a.chains.len() as u64)
                .count("disjoint_pairs", a.disjoint.len() as u64)
                .flag("below_tol", a.max_composition_residual.max(a.max_commutation_residual) < config.residual_tol);
            Ok(e.conclude())
        });
    }
    if want("modular") {
        r.run("modular_consistency", || {
            let m = modular_consistency_check(&family, &MODULAR_TIMES)?;
            let mut e = CheckEntry::new("modular_consistency");
            e.residual("intertwining", m.max_residual)
                .count("evaluations", m.entries.len() as u64)
                .flag("below_tol", m.max_residual < config.residual_tol);
            Ok(e.conclude())
        });
    }
    if want("extendability") {
        r.run("extendability", || {
            let mut e = CheckEntry::new("extendability");
            let mut reports = Vec::new();
            for (i, j) in family.nested_pairs() {
                let x = extendability_of(&family.regions[i], &family.regions[j])?;
                e.flag(&format!("{}_in_{}_injective_iff_faithful", x.x, x.y), x.injective == x.pullback_faithful);
                reports.push(x);
            }
            e.count("pairs", reports.len() as u64)
                .count("extendable_pairs", reports.iter().filter(|x| x.extendable).count() as u64)
                .detail(&reports);
            Ok(e.conclude())
        });
    }
    if want("boundary") {
        r.run("boundary_reduction", || {
            let b = boundary_reduction_check(&family, range)?;
            let mut e = CheckEntry::new("boundary_reduction");
            for x in &b.entries {
                if x.qualifying {
                    e.flag(&format!("{}_to_{}_iso_onto", x.x, x.y), x.iso && x.surjective);
                }
            }
            e.count("range", b.range as u64)
                .count("qualifying_pairs", b.entries.iter().filter(|x| x.qualifying).count() as u64)
                .detail(&b.entries);
            Ok(e.conclude())
        });
    }
    Ok(r)
}

pub fn toric(config: &RunConfig, length: usize, depth: usize, closed: bool, full: bool, jones: bool) -> Result<Report> {
    let mut r = report(config, "toric", &[]);
    r.header.insert("length".into(), length.to_string());
    r.header.insert("depth".into(), depth.to_string());
    r.header.insert("boundary".into(), if closed { "closed" } else { "slab" }.into());
    let algebra = (2..=MAX_BOUNDARY_LENGTH).contains(&length).then(|| toric_boundary_algebra(length)).transpose()?;
    if let Some(a) = &algebra {
        r.run("boundary_algebra", || {
            let mut e = CheckEntry::new("boundary_algebra");
            e.signature("signature", a.signature.clone())
                .count("dim", a.algebra.dim() as u64)
                .count("center_dim", a.center_dim as u64)
                .flag("signature_expected", a.signature == a.expected_signature)
                .flag("dim_is_power_of_two", a.algebra.dim() == 1 << (length - 1))
                .flag("string_central", a.center_has_string);
            Ok(e.conclude())
        });
    }
    if jones {
        r.run("jones_tower", || {
            let j = toric_jones_tower_check(length)?;
            let mut e = CheckEntry::new("jones_tower");
            e.residual("basic_construction", j.basic_construction_residual)
                .residual("projection_defect", j.projection_defect)
                .residual("seed", j.seed_residual)
                .flag("dimension_law", j.dimension_law)
                .flag("generated_by_projection", j.generated_by_projection)
                .flag("basic_construction_exact", j.basic_construction_residual < 1e-12);
            Ok(e.conclude())
        });
    }
    if full {
        r.run("patch_reconstruction", || {
            let patch = if closed { ToricPatch::closed(length, depth)? } else { ToricPatch::slab(length, depth)? };
            let data = RegionData::compute(&patch.spec, "patch", &patch.full_region())?;
            let s = summarize(&data.osr)?;
            let mut e = osr_entry("patch_reconstruction", &data.osr, config.residual_tol)?;
            let stabilizer = patch.stabilizer_degeneracy();
            e.count("qubits", patch.qubits() as u64)
                .count("degeneracy", data.ground.degeneracy as u64)
                .flag("degeneracy_matches_stabilizers", data.ground.degeneracy as u128 == stabilizer)
                .flag("modular_trivial", s.modular_trivial);
            if !closed && depth == 1 {
                if let Some(a) = &algebra {
                    e.flag("signature_matches_boundary_algebra", s.block_signature == a.signature)
                        .flag("xi_identity", s.xi_is_identity)
                        .flag("pi_hat_identity", s.pi_hat_is_identity);
                }
            }
            Ok(e.conclude())
        });
    }
    Ok(r)
}

pub fn fusion(config: &RunConfig, category: &str, hom: Option<(usize, usize)>, spectrum: Option<&Path>) -> Result<Report> {
    let data = FusionData::by_name(category)?;
    let steps = spectrum.map(|p| read_json::<Vec<[String; 4]>>(p).and_then(|names| parse_steps(&data, &names))).transpose()?;
    let mut r = report(config, "fusion", &spectrum.map(|p| ("modular_spectrum", p)).into_iter().collect::<Vec<_>>());
    r.header.insert("category".into(), data.name.clone());
    r.run("fusion_data", || {
        let consistency = data.consistency_residual();
        let mut e = CheckEntry::new("fusion_data");
        e.residual("consistency", consistency)
            .residual("global_dim", data.global_dim)
            .count("rank", data.rank() as u64)
            .flag("consistent", consistency < 1e-12)
            .detail(serde_json::json!({ "labels": data.labels, "qdim": data.qdim }));
        if let Some((m, n)) = hom {
            let dim = fusion_hom_dims(&data, m, n)?;
            e.count(&format!("hom_{m}_{n}"), u64::try_from(dim).map_err(|_| Error::Overflow(format!("hom({m},{n})")))?);
        }
        Ok(e.conclude())
    });
    if let Some(steps) = steps {
        r.run("modular_spectrum", || {
            let exponent = stringnet_modular_spectrum(&data, &steps)?;
            let mut e = CheckEntry::new("modular_spectrum");
            e.residual("exponent", exponent).count("steps", steps.len() as u64).flag("finite", exponent.is_finite());
            Ok(e.conclude())
        });
    }
    Ok(r)
}

pub fn suite(config: &RunConfig, checks: Option<Vec<String>>, determinism: bool) -> Result<Report> {
    let names: Vec<String> = match checks {
        Some(v) => v.into_iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
        None => SUITE.iter().map(|s| s.to_string()).collect(),
    };
    let selection: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut r = run_pipeline(config, &selection)?;
    r.header.insert("command".into(), "suite".into());
    if determinism {
        let again = run_pipeline(config, &selection)?;
        let mut e = CheckEntry::new("determinism");
        e.flag("bodies_identical", again.body_json() == r.body_json());
        r.push(e.conclude(), 0.0);
        r.sort();
    }
    Ok(r)
}
