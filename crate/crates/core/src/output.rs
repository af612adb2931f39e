//! CSV and JSON artifacts. Floats are written with 17 significant digits so
//! that files round-trip exactly and diff cleanly between runs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::characteristic::CharacteristicBasis;
use crate::checks::InvariantReport;
use crate::ermakov::ErmakovState;
use crate::error::Result;
use crate::observables::FockObservables;
use crate::scenario::Scenario;
use crate::stochastic::{EnsembleSummary, ObservableSeries};

pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_table<W: Write>(out: W, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| fmt_float(*v)))?;
    }
    w.flush()?;
    Ok(())
}

pub const ERMAKOV_HEADER: [&str; 7] = ["t", "alpha", "beta", "gamma", "delta", "eps", "kappa"];

pub fn write_ermakov<W: Write>(out: W, states: &[ErmakovState]) -> Result<()> {
    write_table(
        out,
        &ERMAKOV_HEADER,
        states.iter().map(|s| {
            vec![s.t, s.alpha, s.beta, s.gamma, s.delta, s.eps, s.kappa]
        }),
    )
}

pub const OBSERVABLES_HEADER: [&str; 11] = [
    "t", "xbar", "pbar", "var_x", "var_p", "product", "h_expect", "phase_dyn", "phase_geo",
    "d_amp", "b_amp",
];

pub fn write_observables<W: Write>(out: W, obs: &[FockObservables]) -> Result<()> {
    write_table(
        out,
        &OBSERVABLES_HEADER,
        obs.iter().map(|o| {
            vec![
                o.t, o.xbar, o.pbar, o.var_x, o.var_p, o.product, o.h_expect, o.phase_dyn,
                o.phase_geo, o.d_amp, o.b_amp,
            ]
        }),
    )
}

pub const INVARIANTS_HEADER: [&str; 9] = [
    "t",
    "oracle_dev",
    "commutator_err",
    "product_margin",
    "wronskian_drift",
    "quasi_alpha",
    "quasi_linear",
    "quasi_quadratic",
    "quasi_kappa",
];

pub fn write_invariants<W: Write>(out: W, report: &InvariantReport) -> Result<()> {
    write_table(
        out,
        &INVARIANTS_HEADER,
        report.rows.iter().map(|r| {
            vec![
                r.t,
                r.oracle_dev,
                r.commutator_err,
                r.product_margin,
                r.wronskian_drift,
                r.quasi[0],
                r.quasi[1],
                r.quasi[2],
                r.quasi[3],
            ]
        }),
    )
}

pub const BASIS_HEADER: [&str; 7] = ["t", "mu0", "mu0p", "mu1", "mu1p", "lambda", "wronskian"];

pub fn write_basis<W: Write>(out: W, basis: &CharacteristicBasis) -> Result<()> {
    write_table(
        out,
        &BASIS_HEADER,
        (0..basis.len()).map(|i| {
            vec![
                basis.times()[i],
                basis.mu0[i],
                basis.mu0p[i],
                basis.mu1[i],
                basis.mu1p[i],
                basis.lambda[i],
                basis.wronskian(i),
            ]
        }),
    )
}

pub fn ensemble_header() -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for name in ObservableSeries::NAMES {
        h.push(format!("mean_{name}"));
        h.push(format!("stderr_{name}"));
    }
    h
}

pub fn write_ensemble<W: Write>(out: W, summary: &EnsembleSummary) -> Result<()> {
    let header = ensemble_header();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let means = summary.mean.columns();
    let errs = summary.stderr.columns();
    write_table(
        out,
        &header,
        summary.times.iter().enumerate().map(|(i, &t)| {
            let mut row = vec![t];
            for k in 0..means.len() {
                row.push(means[k][i]);
                row.push(errs[k][i]);
            }
            row
        }),
    )
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub scenario: &'a Scenario,
    pub build: &'a str,
    pub command: &'a str,
    pub files: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks: Option<&'a InvariantReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleManifest>,
}

#[derive(Debug, Serialize)]
pub struct EnsembleManifest {
    pub seed: u64,
    pub paths: usize,
    pub failed: usize,
    pub min_product: f64,
    pub linear_gap: (f64, f64),
}

pub fn write_manifest(path: &Path, manifest: &Manifest<'_>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Creates `dir` and returns `dir/name` opened for writing.
pub fn create_in(dir: &Path, name: &str) -> Result<(PathBuf, fs::File)> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let file = fs::File::create(&path)?;
    Ok((path, file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, std::f64::consts::PI] {
            assert_eq!(fmt_float(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_float(0.25), "2.5000000000000000e-1");
    }

    #[test]
    fn ermakov_csv_layout() {
        let mut buf = Vec::new();
        write_ermakov(&mut buf, &[ErmakovState { beta: 1.0, ..Default::default() }]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,alpha,beta,gamma,delta,eps,kappa");
        assert!(lines.next().unwrap().starts_with("0.0000000000000000e0,0.0000000000000000e0,1.0000000000000000e0"));
    }
}
