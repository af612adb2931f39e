use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use quadfield::output::{
    EnsembleManifest, Manifest, create_in, write_basis, write_ensemble, write_ermakov, write_invariants,
    write_manifest, write_observables,
};
use quadfield::{InvariantReport, Scenario, Thresholds, bundled_scenario, bundled_scenarios, run_checks, run_ensemble};

const BUILD: &str = env!("QUADFIELD_BUILD");

#[derive(Parser)]
#[command(name = "quadfield", version, about = "Solve nonautonomous quadratic Hamiltonians and write field observables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the deterministic pipeline and every invariant suite for one scenario.
    Run {
        #[command(flatten)]
        target: Target,
    },
    /// Run the invariant suites over all bundled scenarios.
    Verify {
        /// Threshold for closed-form vs direct-integration agreement.
        #[arg(long, default_value_t = Thresholds::default().oracle)]
        tol: f64,
    },
    /// Run a Monte Carlo ensemble over noisy medium realizations.
    Ensemble {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write the characteristic basis (mu0, mu1, lambda, Wronskian) as CSV to stdout.
    DumpBasis {
        /// Scenario JSON file, or the name of a bundled scenario.
        config: String,
    },
}

#[derive(Args)]
struct Target {
    /// Scenario JSON file, or the name of a bundled scenario.
    config: String,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long, short, env = "QUADFIELD_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,
}

/// Exit statuses beyond 0 (success).
const CHECKS_FAILED: u8 = 1;
const INPUT_ERROR: u8 = 2;
const NUMERICAL_ERROR: u8 = 3;

fn load(config: &str) -> quadfield::Result<Scenario> {
    let path = Path::new(config);
    if !path.exists() && !config.ends_with(".json") {
        return bundled_scenario(config);
    }
    Scenario::from_path(path).map_err(|e| match e {
        quadfield::Error::Io(io) => quadfield::Error::Config {
            field: "config".into(),
            message: format!("cannot read {}: {io}", path.display()),
        },
        other => other,
    })
}

fn output_dir(target: &Target, scenario: &Scenario) -> PathBuf {
    target
        .output_dir
        .clone()
        .or_else(|| scenario.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&scenario.name))
}

fn print_report(report: &InvariantReport) {
    for c in &report.checks {
        println!(
            "  {} {:<20} {:>10.3e}  (threshold {:.0e})",
            if c.passed { "ok  " } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        );
    }
}

fn run(target: &Target) -> Result<u8> {
    let scenario = load(&target.config)?;
    let pipeline = scenario.run()?;
    let report = run_checks(&scenario, &pipeline, &Thresholds::default())?;
    let dir = output_dir(target, &scenario);

    let mut files = Vec::new();
    let (path, file) = create_in(&dir, "ermakov.csv")?;
    write_ermakov(BufWriter::new(file), &pipeline.states)?;
    files.push(path);
    let (path, file) = create_in(&dir, "observables.csv")?;
    write_observables(BufWriter::new(file), &pipeline.observables)?;
    files.push(path);
    let (path, file) = create_in(&dir, "invariants.csv")?;
    write_invariants(BufWriter::new(file), &report)?;
    files.push(path);
    write_manifest(
        &dir.join("manifest.json"),
        &Manifest {
            scenario: &scenario,
            build: BUILD,
            command: "run",
            files: file_names(&files),
            checks: Some(&report),
            ensemble: None,
        },
    )?;

    println!("{}: {} points written to {}", scenario.name, pipeline.states.len(), dir.display());
    print_report(&report);
    Ok(if report.passed() { 0 } else { CHECKS_FAILED })
}

fn verify(tol: f64) -> Result<u8> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(quadfield::Error::Config {
            field: "--tol".into(),
            message: "must be positive".into(),
        }
        .into());
    }
    let thresholds = Thresholds { oracle: tol, ..Thresholds::default() };
    let mut failed = 0;
    for scenario in bundled_scenarios()? {
        let pipeline = scenario.run().with_context(|| format!("scenario {}", scenario.name))?;
        let report = run_checks(&scenario, &pipeline, &thresholds)
            .with_context(|| format!("scenario {}", scenario.name))?;
        println!("{} {}", if report.passed() { "PASS" } else { "FAIL" }, scenario.name);
        print_report(&report);
        if !report.passed() {
            failed += 1;
        }
    }
    Ok(if failed == 0 { 0 } else { CHECKS_FAILED })
}

fn ensemble(target: &Target, paths: Option<usize>, seed: Option<u64>) -> Result<u8> {
    let scenario = load(&target.config)?;
    let (Some(mut spec), Some(base)) = (scenario.noise, scenario.medium()) else {
        return Err(quadfield::Error::Config {
            field: "noise".into(),
            message: "ensemble needs a medium scenario with a `noise` block".into(),
        }
        .into());
    };
    spec.paths = paths.unwrap_or(spec.paths);
    spec.seed = seed.unwrap_or(spec.seed);
    let grid = scenario.grid.build()?;
    let summary = run_ensemble(&spec, base, &scenario.init, scenario.fock_index, &grid, scenario.pipeline_options())?;

    let dir = output_dir(target, &scenario);
    let (path, file) = create_in(&dir, "ensemble.csv")?;
    write_ensemble(BufWriter::new(file), &summary)?;
    let mut recorded = scenario.clone();
    recorded.noise = Some(spec);
    write_manifest(
        &dir.join("manifest.json"),
        &Manifest {
            scenario: &recorded,
            build: BUILD,
            command: "ensemble",
            files: file_names(&[path]),
            checks: None,
            ensemble: Some(EnsembleManifest {
                seed: spec.seed,
                paths: spec.paths,
                failed: summary.failed,
                min_product: summary.min_product,
                linear_gap: summary.linear_gap,
            }),
        },
    )?;

    let bound_holds = summary.min_product >= 0.25 - Thresholds::default().uncertainty;
    println!(
        "{}: {} paths ({} failed), seed {}, written to {}",
        scenario.name,
        spec.paths,
        summary.failed,
        spec.seed,
        dir.display()
    );
    println!(
        "  {} min uncertainty product {:.12}",
        if bound_holds { "ok  " } else { "FAIL" },
        summary.min_product
    );
    println!(
        "  gap between ensemble-mean and noise-free linear observables: x {:.3e}, p {:.3e}",
        summary.linear_gap.0, summary.linear_gap.1
    );
    Ok(if bound_holds { 0 } else { CHECKS_FAILED })
}

fn dump_basis(config: &str) -> Result<u8> {
    let scenario = load(config)?;
    let pipeline = scenario.run()?;
    let mut csv = Vec::new();
    write_basis(&mut csv, &pipeline.basis)?;
    match io::stdout().lock().write_all(&csv) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(0),
    }
}

fn file_names(paths: &[PathBuf]) -> Vec<String> {
    paths
        .iter()
        .filter_map(|p| p.file_name())
        .map(|n| n.to_string_lossy().into_owned())
        .collect()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let lib = err.chain().find_map(|e| e.downcast_ref::<quadfield::Error>());
    match lib {
        Some(e) if e.is_input_error() => INPUT_ERROR,
        _ => NUMERICAL_ERROR,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { target } => run(target),
        Command::Verify { tol } => verify(*tol),
        Command::Ensemble { target, paths, seed } => ensemble(target, *paths, *seed),
        Command::DumpBasis { config } => dump_basis(config),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
