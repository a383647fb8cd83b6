//! Acceptance gate: one line per criterion, non-zero exit if any fails.

use std::time::Instant;

use rpkit_core::pipeline::{self, CheckEntry, RunConfig};
use rpkit_core::Result;

struct Outcome {
    passed: bool,
    summary: String,
}

fn flag(e: &CheckEntry, key: &str) -> bool {
    e.flags.get(key).copied().unwrap_or(false)
}

fn count(e: &CheckEntry, key: &str) -> u64 {
    e.counts.get(key).copied().unwrap_or(u64::MAX)
}

fn residual(e: &CheckEntry, key: &str) -> f64 {
    e.residuals.get(key).copied().unwrap_or(f64::INFINITY)
}

fn signature(e: &CheckEntry, key: &str) -> Vec<usize> {
    e.signatures.get(key).cloned().unwrap_or_default()
}

fn rp_cp(config: &RunConfig) -> Result<Outcome> {
    let e = pipeline::rp_cp_equivalence(config)?;
    let d = count(&e, "disagreements");
    Ok(Outcome { passed: d == 0, summary: format!("{d} disagreements over 200 operators") })
}

fn semigroup(config: &RunConfig) -> Result<Outcome> {
    let e = pipeline::rp_semigroup_structure(config)?;
    let (f, c) = (count(&e, "rp_failures"), count(&e, "controls_without_failure"));
    Ok(Outcome {
        passed: f == 0 && c == 0 && config.tau_grid == [0.1, 0.5, 1.0, 2.0],
        summary: format!("{f} RP failures, {c} controls without a failure"),
    })
}

fn pf(config: &RunConfig) -> Result<Outcome> {
    let e = pipeline::pf_structure(config)?;
    let (b, m, emb) = (residual(&e, "bimodule"), count(&e, "dimension_mismatches"), residual(&e, "embedding"));
    Ok(Outcome {
        passed: b < 1e-9 && m == 0 && emb < 1e-8,
        summary: format!("bimodule {b:.1e}, embedding {emb:.1e}, {m} dimension mismatches"),
    })
}

fn ground(config: &RunConfig) -> Result<Outcome> {
    let e = pipeline::ground_state_bijection(config)?;
    let (m, w, deg) = (count(&e, "degeneracy_mismatches"), residual(&e, "w_reconstruction"), count(&e, "max_degeneracy"));
    Ok(Outcome {
        passed: m == 0 && w < 1e-8 && deg > 1,
        summary: format!("{m} degeneracy mismatches, W residual {w:.1e}, max degeneracy {deg}"),
    })
}

fn ltqo(config: &RunConfig) -> Result<Outcome> {
    let e = pipeline::ltqo_equivalence(config)?;
    let agree = count(&e, "random_agree");
    let toric = flag(&e, "toric_closed_both_true");
    let degenerate = flag(&e, "engineered_degenerate_both_false");
    Ok(Outcome {
        passed: agree == 100 && toric && degenerate,
        summary: format!(
            "{agree}/100 agree ({} nondegenerate), closed toric both true: {toric}, degenerate control both false: {degenerate}",
            count(&e, "random_nondegenerate")
        ),
    })
}

fn toric(config: &RunConfig) -> Result<Outcome> {
    let e = pipeline::toric_boundary_check(config)?;
    let sigs = [("A2", vec![1, 1]), ("A3", vec![2]), ("A4", vec![2, 2]), ("A5", vec![4])];
    let signatures_ok = sigs.iter().all(|(k, s)| signature(&e, k) == *s);
    let dims_ok = (2..=8).all(|l| count(&e, &format!("dim_A{l}")) == 1 << (l - 1));
    let seed = residual(&e, "jones_seed");
    let pipeline_ok = signature(&e, "slab_L4_field_algebra") == [2, 2]
        && ["slab_L4_xi_identity", "slab_L4_pi_hat_identity", "slab_L4_modular_trivial"].iter().all(|k| flag(&e, k));
    Ok(Outcome {
        passed: signatures_ok && dims_ok && flag(&e, "A4_center_is_span_I_S4") && seed <= f64::EPSILON && pipeline_ok,
        summary: format!(
            "signatures {signatures_ok}, dims 2^(L-1) to L=8 {dims_ok}, center {{I, S4}} {}, Jones seed {seed:.1e}, L=4 slab reconstruction {pipeline_ok}",
            flag(&e, "A4_center_is_span_I_S4")
        ),
    })
}

fn net(config: &RunConfig) -> Result<Outcome> {
    let e = pipeline::net_axioms_suite(config)?;
    let keys = ["toric_composition", "toric_disjoint_commutation", "toric_modular", "random_max"];
    let worst = keys.iter().map(|k| residual(&e, k)).fold(0.0, f64::max);
    Ok(Outcome {
        passed: worst < 1e-8 && count(&e, "toric_chains") >= 1,
        summary: format!(
            "max residual {worst:.1e} over toric chains and 10 random families ({} with nontrivial flow)",
            count(&e, "random_nontrivial_flows")
        ),
    })
}

fn boundary(config: &RunConfig) -> Result<Outcome> {
    let e = pipeline::boundary_reduction_suite(config)?;
    let widened = flag(&e, "widened_iso") && flag(&e, "widened_surjective");
    let (s, t) = (count(&e, "lengthened_source_dim"), count(&e, "lengthened_target_dim"));
    Ok(Outcome {
        passed: widened && flag(&e, "widened_qualifies") && s == 4 && t == 16,
        summary: format!("widened iso and surjective: {widened}; lengthened L=3 to 5: {s} to {t}"),
    })
}

fn stringnet(config: &RunConfig) -> Result<Outcome> {
    let e = pipeline::stringnet_spectrum(config)?;
    let z2 = residual(&e, "vec_z2_max_exponent");
    let fib = residual(&e, "fibonacci_relative_error");
    let matches = ["vec_z2_matches_A2", "vec_z2_matches_A4", "vec_z2_matches_A6"].iter().all(|k| flag(&e, k));
    Ok(Outcome {
        passed: z2 == 0.0 && fib < 1e-12 && matches,
        summary: format!("Vec(Z2) max exponent {z2}, Fibonacci relative error {fib:.1e}, path signatures match: {matches}"),
    })
}

fn determinism(config: &RunConfig) -> Result<Outcome> {
    let (same, report) = pipeline::determinism_check(config)?;
    Ok(Outcome {
        passed: same && report.entries.len() == pipeline::SUITE.len(),
        summary: format!("{} entries, report bodies identical: {same}", report.entries.len()),
    })
}

type Criterion = (usize, &'static str, Option<f64>, fn(&RunConfig) -> Result<Outcome>);

fn main() {
    let config = RunConfig::default();
    let criteria: [Criterion; 10] = [
        (1, "RP iff CP", Some(10.0), rp_cp),
        (2, "semigroup structure", Some(30.0), semigroup),
        (3, "PF structure", Some(60.0), pf),
        (4, "ground-state bijection", Some(60.0), ground),
        (5, "LTQO equivalence", Some(120.0), ltqo),
        (6, "toric boundary algebra", Some(60.0), toric),
        (7, "net axioms and modular consistency", Some(120.0), net),
        (8, "boundary reduction", Some(60.0), boundary),
        (9, "string-net spectrum", None, stringnet),
        (10, "determinism", None, determinism),
    ];
    let mut failures = 0;
    for (n, title, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run(&config).unwrap_or_else(|e| Outcome { passed: false, summary: format!("error: {e}") });
        let seconds = start.elapsed().as_secs_f64();
        let in_time = budget.is_none_or(|b| seconds < b);
        let passed = outcome.passed && in_time;
        failures += usize::from(!passed);
        let timing = match budget {
            Some(b) => format!("{seconds:.1}s of {b:.0}s"),
            None => format!("{seconds:.1}s"),
        };
        println!("criterion {n:>2} {} {title} [{timing}]: {}", if passed { "PASS" } else { "FAIL" }, outcome.summary);
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
