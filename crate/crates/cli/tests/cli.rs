use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn rpkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rpkit")).args(args).output().expect("rpkit runs")
}

fn json_report(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.push("--json");
    let out = rpkit(&all);
    let report = serde_json::from_slice(&out.stdout).expect("JSON report on stdout");
    (out.status.code().expect("exit code"), report)
}

fn entry<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["entries"].as_array().unwrap().iter().find(|e| e["name"] == name).unwrap_or_else(|| panic!("no entry {name}"))
}

#[test]
fn toric_full_pipeline() {
    let (code, r) = json_report(&["toric", "--L", "4", "--depth", "1", "--full-pipeline"]);
    assert_eq!(code, 0);
    let patch = entry(&r, "patch_reconstruction");
    assert_eq!(patch["signatures"]["field_algebra"], serde_json::json!([2, 2]));
    assert_eq!(patch["flags"]["modular_trivial"], true);
    assert_eq!(patch["flags"]["xi_identity"], true);
    assert_eq!(r["header"]["boundary"], "slab");
}

#[test]
fn empty_selection_is_empty_report() {
    let (code, r) = json_report(&["suite", "--checks", ""]);
    assert_eq!(code, 0);
    assert_eq!(r["entries"].as_array().unwrap().len(), 0);
}

#[test]
fn exit_code_follows_verdicts() {
    let bip = data("bipartition.json");
    let (ok, _) = json_report(&["rp-check", "--operator", &data("rp_operator.json"), "--bipartition", &bip]);
    assert_eq!(ok, 0);
    let (bad, r) = json_report(&["rp-check", "--operator", &data("non_rp_operator.json"), "--bipartition", &bip]);
    assert_eq!(bad, 1);
    assert_eq!(entry(&r, "rp_check")["flags"]["direct_agrees"], true);
    let (frustrated, r) = json_report(&["ltqo", "--interaction", &data("frustrated_interaction.json")]);
    assert_eq!(frustrated, 1);
    assert!(entry(&r, "ltqo_equivalence")["detail"].as_str().unwrap().contains("frustration"));
}

#[test]
fn parse_errors_name_the_file() {
    let out = rpkit(&["rp-check", "--operator", &data("malformed.json"), "--bipartition", &data("bipartition.json")]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("malformed.json") && err.contains("line 2"), "{err}");
}

#[test]
fn fusion_counts_and_spectrum() {
    let (code, r) = json_report(&["fusion", "--category", "fibonacci", "--hom", "3", "3", "--modular-spectrum", &data("fibonacci_steps.json")]);
    assert_eq!(code, 0);
    // Multiplicities at length 3 are (5, 8).
    assert_eq!(entry(&r, "fusion_data")["counts"]["hom_3_3"], 25 + 64);
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let exponent = entry(&r, "modular_spectrum")["residuals"]["exponent"].as_f64().unwrap();
    assert!((exponent - phi.ln()).abs() < 1e-12 * phi.ln());
}

#[test]
fn small_inputs_pass() {
    let [bip, interaction, kraus, h, regions] =
        ["bipartition.json", "interaction.json", "kraus.json", "zz_hamiltonian.json", "regions.json"].map(data);
    let runs: [Vec<&str>; 5] = [
        vec!["pf", "--kraus", &kraus],
        vec!["ground", "--hamiltonian", &h, "--bipartition", &bip],
        vec!["ltqo", "--interaction", &interaction],
        vec!["osr", "--interaction", &interaction],
        vec!["net", "--interaction", &interaction, "--regions", &regions],
    ];
    for args in runs {
        let (code, r) = json_report(&args);
        assert_eq!(code, 0, "{args:?}: {r}");
    }
    let (_, r) = json_report(&["ground", "--hamiltonian", &h, "--bipartition", &bip]);
    assert_eq!(entry(&r, "ground_state_bijection")["counts"]["degeneracy"], 2);
}

#[test]
fn out_file_and_thread_variable() {
    let dir = std::env::temp_dir().join(format!("rpkit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = rpkit(&["fusion", "--category", "ising", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(r["timings"]["fusion_data"].is_number());
    std::fs::remove_dir_all(&dir).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_rpkit")).env("RPKIT_THREADS", "0").args(["suite", "--checks", ""]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_rpkit")).env("RPKIT_THREADS", "2").args(["suite", "--checks", "stringnet_spectrum"]).output().unwrap();
    assert!(out.status.success());
}
