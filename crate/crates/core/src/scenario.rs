//! JSON scenario configuration and the bundled scenario gallery.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coefficients::{CoefficientSet, MediumProfile, Profile, medium_to_hamiltonian};
use crate::ermakov::ErmakovInit;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::ode::Tolerances;
use crate::pipeline::{Pipeline, PipelineOptions};
use crate::spline::CubicSpline;
use crate::stochastic::{NoiseSpec, sample_path};

/// Analytic or tabulated profiles for the six coefficients; unspecified ones are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetCoefficients {
    pub a: Profile,
    #[serde(default = "Profile::zero")]
    pub b: Profile,
    #[serde(default = "Profile::zero")]
    pub c: Profile,
    #[serde(default = "Profile::zero")]
    pub d: Profile,
    #[serde(default = "Profile::zero")]
    pub f: Profile,
    #[serde(default = "Profile::zero")]
    pub g: Profile,
}

impl From<PresetCoefficients> for CoefficientSet {
    fn from(p: PresetCoefficients) -> Self {
        CoefficientSet::oscillator(p.a, p.b)
            .with_c(p.c)
            .with_d(p.d)
            .with_f(p.f)
            .with_g(p.g)
    }
}

/// Exactly one way of specifying the Hamiltonian coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientSource {
    Preset(PresetCoefficients),
    Medium(MediumProfile),
    /// CSV with header `t,a,b,c,d,f,g`; relative paths resolve against the config file.
    TableFile(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_max: f64,
    pub dt: f64,
}

impl GridSpec {
    pub fn build(&self) -> Result<TimeGrid> {
        TimeGrid::with_spacing(self.t_max, self.dt)
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub coefficients: CoefficientSource,
    pub init: ErmakovInit,
    #[serde(default)]
    pub fock_index: u32,
    pub grid: GridSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "one")]
    pub mu1_init: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Directory used to resolve relative table paths; not part of the file format.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

/// A scenario with its coefficients materialized on the grid.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub grid: TimeGrid,
    pub set: CoefficientSet,
    /// The medium actually used (for noisy scenarios, realization 0).
    pub medium: Option<MediumProfile>,
}

#[derive(Deserialize)]
struct TableRow {
    t: f64,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    f: f64,
    g: f64,
}

/// Reads a coefficient table CSV into six splines.
pub fn load_coefficient_table(path: &Path) -> Result<CoefficientSet> {
    let mut reader = csv::Reader::from_path(path)?;
    let rows = reader
        .deserialize::<TableRow>()
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let times: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let column = |get: fn(&TableRow) -> f64| -> Result<Profile> {
        Ok(Profile::Table(CubicSpline::new(
            times.clone(),
            rows.iter().map(get).collect(),
        )?))
    };
    Ok(CoefficientSet::oscillator(column(|r| r.a)?, column(|r| r.b)?)
        .with_c(column(|r| r.c)?)
        .with_d(column(|r| r.d)?)
        .with_f(column(|r| r.f)?)
        .with_g(column(|r| r.g)?))
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let scenario: Scenario = serde_json::from_str(text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut scenario = Self::from_json(&text)?;
        scenario.base_dir = path.parent().map(Path::to_path_buf);
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::config("name", "must not be empty"));
        }
        if !(self.grid.t_max.is_finite() && self.grid.t_max > 0.0) {
            return Err(Error::config("grid.t_max", "must be positive"));
        }
        if !(self.grid.dt.is_finite() && self.grid.dt > 0.0 && self.grid.dt <= self.grid.t_max) {
            return Err(Error::config("grid.dt", "must be positive and at most t_max"));
        }
        let tol = self.tolerances;
        if !(tol.rtol > 0.0 && tol.atol > 0.0) {
            return Err(Error::config("tolerances", "rtol and atol must be positive"));
        }
        if !(self.mu1_init.is_finite() && self.mu1_init != 0.0) {
            return Err(Error::config("mu1_init", "must be finite and nonzero"));
        }
        self.init
            .validate()
            .map_err(|e| Error::config("init", e.to_string()))?;
        if let Some(noise) = &self.noise {
            if !matches!(self.coefficients, CoefficientSource::Medium(_)) {
                return Err(Error::config("noise", "requires a medium coefficient source"));
            }
            noise.validate()?;
        }
        Ok(())
    }

    pub fn pipeline_options(&self) -> PipelineOptions {
        PipelineOptions {
            tol: self.tolerances,
            mu1_init: self.mu1_init,
            ..PipelineOptions::default()
        }
    }

    /// The base medium, if the scenario is medium-driven.
    pub fn medium(&self) -> Option<&MediumProfile> {
        match &self.coefficients {
            CoefficientSource::Medium(m) => Some(m),
            _ => None,
        }
    }

    /// Coefficients on `grid`; a noisy medium uses realization 0.
    pub fn resolve_on(&self, grid: TimeGrid) -> Result<Resolved> {
        let (set, medium) = match &self.coefficients {
            CoefficientSource::Preset(p) => (CoefficientSet::from(p.clone()), None),
            CoefficientSource::TableFile(path) => {
                let full = match &self.base_dir {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                (load_coefficient_table(&full)?, None)
            }
            CoefficientSource::Medium(base) => {
                let medium = match &self.noise {
                    Some(noise) => sample_path(noise, base, &grid, 0)?,
                    None => base.clone(),
                };
                (medium_to_hamiltonian(&medium, &grid)?, Some(medium))
            }
        };
        Ok(Resolved { grid, set, medium })
    }

    pub fn resolve(&self) -> Result<Resolved> {
        self.resolve_on(self.grid.build()?)
    }

    /// Runs the deterministic pipeline on the scenario grid.
    pub fn run(&self) -> Result<Pipeline> {
        let r = self.resolve().map_err(|e| e.in_stage("coefficients"))?;
        Pipeline::run(
            r.set,
            r.medium,
            &r.grid,
            self.init,
            self.fock_index,
            self.pipeline_options(),
        )
    }
}

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        /// Scenario files shipped with the library, as `(name, json)`.
        pub const BUNDLED: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../scenarios/", $name, ".json"))),)*
        ];
    };
}

bundled!(
    "static_oscillator",
    "squeezed_vacuum",
    "caldirola_kanai",
    "driven_oscillator",
    "parametric_modulation",
    "lossy_medium",
    "noisy_lossy_medium",
);

pub fn bundled_scenarios() -> Result<Vec<Scenario>> {
    BUNDLED
        .iter()
        .map(|(name, text)| {
            Scenario::from_json(text).map_err(|e| Error::config(*name, e.to_string()))
        })
        .collect()
}

pub fn bundled_scenario(name: &str) -> Result<Scenario> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::config("name", format!("no bundled scenario `{name}`")))?;
    Scenario::from_json(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_scenarios_parse() {
        let all = bundled_scenarios().unwrap();
        assert_eq!(all.len(), 7);
        for (s, (name, _)) in all.iter().zip(BUNDLED) {
            assert_eq!(&s.name, name);
        }
    }

    #[test]
    fn missing_init_field_is_named() {
        let text = r#"{
            "name": "x",
            "coefficients": {"preset": {"a": {"constant": 0.5}, "b": {"constant": 0.5}}},
            "init": {"alpha0": 0, "gamma0": 0, "delta0": 0, "eps0": 0, "kappa0": 0},
            "grid": {"t_max": 1, "dt": 0.1}
        }"#;
        let err = Scenario::from_json(text).unwrap_err().to_string();
        assert!(err.contains("beta0"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn unknown_fields_and_two_sources_are_rejected() {
        let text = r#"{
            "name": "x",
            "coefficients": {"preset": {"a": {"constant": 0.5}}, "medium": {}},
            "init": {"alpha0": 0, "beta0": 1, "gamma0": 0, "delta0": 0, "eps0": 0, "kappa0": 0},
            "grid": {"t_max": 1, "dt": 0.1}
        }"#;
        assert!(Scenario::from_json(text).is_err());
        let text = text.replace(r#", "medium": {}"#, "").replace(r#""name""#, r#""nmae""#);
        assert!(Scenario::from_json(&text).is_err());
    }

    #[test]
    fn negative_beta0_is_a_config_error() {
        let text = r#"{
            "name": "x",
            "coefficients": {"preset": {"a": {"constant": 0.5}}},
            "init": {"alpha0": 0, "beta0": -1, "gamma0": 0, "delta0": 0, "eps0": 0, "kappa0": 0},
            "grid": {"t_max": 1, "dt": 0.1}
        }"#;
        assert!(matches!(Scenario::from_json(text), Err(Error::Config { .. })));
    }
}
