//! `rpkit`: reflection-positivity checks from the command line.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rpkit_core::pipeline::{Report, RunConfig};

#[derive(Parser)]
#[command(name = "rpkit", version, about = "Reflection positivity, Perron-Frobenius and Osterwalder-Schrader checks")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct GlobalOpts {
    /// Residual tolerance.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,

    /// Numerical rank tolerance.
    #[arg(long = "rank-tol", global = true, default_value_t = 1e-10)]
    rank_tol: f64,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write the full report (with timings) here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Print the report as JSON instead of one line per check.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Test an operator for reflection positivity.
    RpCheck {
        #[arg(long)]
        operator: PathBuf,
        #[arg(long)]
        bipartition: PathBuf,
    },
    /// Perron-Frobenius data of a symmetric CP map given by Kraus operators.
    Pf {
        /// JSON array of matrices.
        #[arg(long)]
        kraus: PathBuf,
    },
    /// Ground space, PF ground state and commutant of a Hamiltonian.
    Ground {
        #[arg(long)]
        hamiltonian: PathBuf,
        #[arg(long)]
        bipartition: PathBuf,
    },
    /// Non-degeneracy against the exact G-matrix criterion.
    Ltqo {
        #[arg(long)]
        interaction: PathBuf,
    },
    /// Reconstruction of the field algebra.
    Osr {
        /// Interaction file; the ground projection of its full region is used.
        #[arg(long, conflicts_with_all = ["projection", "bipartition"])]
        interaction: Option<PathBuf>,
        #[arg(long, requires = "bipartition")]
        projection: Option<PathBuf>,
        #[arg(long, requires = "projection")]
        bipartition: Option<PathBuf>,
    },
    /// Net axioms, modular consistency, extendability and boundary reduction.
    Net {
        #[arg(long)]
        interaction: PathBuf,
        #[arg(long)]
        regions: PathBuf,
        /// Subset of axioms, modular, extendability, boundary.
        #[arg(long, value_delimiter = ',', default_value = "axioms,modular,extendability,boundary")]
        checks: Vec<String>,
    },
    /// Toric-code boundary algebra and patch reconstruction.
    Toric {
        #[arg(long = "L")]
        length: usize,
        #[arg(long, default_value_t = 1)]
        depth: usize,
        /// Use the closed patch with truncated stars.
        #[arg(long)]
        closed: bool,
        /// Run ground state and reconstruction on the patch.
        #[arg(long = "full-pipeline")]
        full_pipeline: bool,
        /// Also check the basic construction at this length.
        #[arg(long)]
        jones: bool,
    },
    /// Fusion data, hom dimensions and string-net modular exponents.
    Fusion {
        #[arg(long)]
        category: String,
        #[arg(long, num_args = 2, value_names = ["M", "N"])]
        hom: Option<Vec<usize>>,
        /// JSON array of label quadruples [i, i', k, k'].
        #[arg(long = "modular-spectrum")]
        modular_spectrum: Option<PathBuf>,
    },
    /// Built-in verification suite.
    Suite {
        /// Comma-separated check names; defaults to all.
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
        /// Run the suite twice and compare report bodies.
        #[arg(long)]
        determinism: bool,
    },
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("RPKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = value.parse().map_err(|_| format!("RPKIT_THREADS must be a positive integer, got {value:?}"))?;
    if n == 0 {
        return Err("RPKIT_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn dispatch(command: Command, config: &RunConfig) -> rpkit_core::Result<Report> {
    match command {
        Command::RpCheck { operator, bipartition } => commands::rp_check(config, &operator, &bipartition),
        Command::Pf { kraus } => commands::pf(config, &kraus),
        Command::Ground { hamiltonian, bipartition } => commands::ground(config, &hamiltonian, &bipartition),
        Command::Ltqo { interaction } => commands::ltqo(config, &interaction),
        Command::Osr { interaction, projection, bipartition } => {
            commands::osr(config, interaction.as_deref(), projection.as_deref().zip(bipartition.as_deref()))
        }
        Command::Net { interaction, regions, checks } => commands::net(config, &interaction, &regions, &checks),
        Command::Toric { length, depth, closed, full_pipeline, jones } => {
            commands::toric(config, length, depth, closed, full_pipeline, jones)
        }
        Command::Fusion { category, hom, modular_spectrum } => {
            commands::fusion(config, &category, hom.map(|v| (v[0], v[1])), modular_spectrum.as_deref())
        }
        Command::Suite { checks, determinism } => commands::suite(config, checks, determinism),
    }
}

fn print_report(report: &Report, json: bool) -> std::io::Result<()> {
    let mut out = std::io::stdout().lock();
    if json {
        return writeln!(out, "{}", report.to_json());
    }
    for entry in &report.entries {
        let seconds = report.timings.get(&entry.name).copied().unwrap_or(0.0);
        writeln!(out, "{} {} ({seconds:.2}s)", if entry.verdict { "PASS" } else { "FAIL" }, entry.name)?;
        for (k, v) in entry.flags.iter().filter(|(_, v)| !**v) {
            writeln!(out, "    {k} = {v}")?;
        }
        if let Some(serde_json::Value::String(msg)) = &entry.detail {
            writeln!(out, "    {msg}")?;
        }
    }
    let status = if report.passed() { "all passed" } else { "failures present" };
    writeln!(out, "{} checks, {status}", report.entries.len())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("rpkit: {e}");
        return ExitCode::from(2);
    }
    let config = RunConfig { seed: cli.global.seed, rank_tol: cli.global.rank_tol, residual_tol: cli.global.tol, ..RunConfig::default() };
    let report = match config.validate().and_then(|()| dispatch(cli.command, &config)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("rpkit: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(path) = &cli.global.out {
        if let Err(e) = std::fs::write(path, report.to_json()) {
            eprintln!("rpkit: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    // A closed stdout does not affect the exit code.
    let _ = print_report(&report, cli.global.json);
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
