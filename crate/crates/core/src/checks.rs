//! Invariant suites run against a scenario: oracle agreement, commutator,
//! uncertainty bound, Heisenberg residual, quasi-invariants, Wronskian law and,
//! for media, the classical mode equation.

use num_complex::Complex64;
use serde::Serialize;

use crate::characteristic::{CharacteristicOptions, classical_mode_equivalence, integrate_characteristic};
use crate::coefficients::{CoefficientSet, MediumProfile, medium_to_hamiltonian};
use crate::ermakov::{ErmakovInit, ErmakovState, build_frame, quasi_invariant_residuals, solve_path};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::observables::FockObservables;
use crate::ode::{Dopri5, Tolerances};
use crate::pipeline::Pipeline;
use crate::scenario::{CoefficientSource, Scenario};
use crate::verify::{ansatz_coefficients, heisenberg_residual, path_deviation, riccati_oracle};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub oracle: f64,
    pub commutator: f64,
    pub uncertainty: f64,
    pub heisenberg: f64,
    pub heisenberg_dt: f64,
    pub quasi_invariants: f64,
    pub quasi_t_min: f64,
    pub wronskian: f64,
    pub wronskian_window: f64,
    pub classical_mode: f64,
    pub mode_amplitude: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            oracle: 1e-7,
            commutator: 1e-12,
            uncertainty: 1e-12,
            heisenberg: 1e-6,
            heisenberg_dt: 1e-3,
            quasi_invariants: 1e-7,
            quasi_t_min: 0.1,
            wronskian: 1e-8,
            wronskian_window: 20.0,
            classical_mode: 1e-8,
            mode_amplitude: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl CheckOutcome {
    /// Passes when `value < threshold`.
    pub fn below(name: &'static str, value: f64, threshold: f64) -> Self {
        CheckOutcome {
            name,
            value,
            threshold,
            passed: value < threshold,
        }
    }
}

/// Per-node diagnostics on the scenario grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantRow {
    pub t: f64,
    pub oracle_dev: f64,
    pub commutator_err: f64,
    pub product_margin: f64,
    pub wronskian_drift: f64,
    pub quasi: [f64; 4],
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantReport {
    pub scenario: String,
    pub checks: Vec<CheckOutcome>,
    #[serde(skip)]
    pub rows: Vec<InvariantRow>,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// `|u v̄ − ū v + i|` for the ladder operator built from `state`.
pub fn commutator_error(state: &ErmakovState) -> Result<f64> {
    Ok((ansatz_coefficients(state)?.commutator() + Complex64::i()).norm())
}

/// Smallest `product − 1/4` along a path.
pub fn uncertainty_margin(obs: &[FockObservables]) -> f64 {
    obs.iter().map(|o| o.product - 0.25).fold(f64::INFINITY, f64::min)
}

/// Largest `|product − 1/4|` over instants flagged as minimum uncertainty.
pub fn minimum_uncertainty_gap(obs: &[FockObservables]) -> Option<f64> {
    obs.iter()
        .filter(|o| o.minimum_uncertainty)
        .map(|o| (o.product - 0.25).abs())
        .reduce(f64::max)
}

/// Coefficients on another grid for the same realization: media are re-mapped
/// (their profiles, including noise tables, are kept), other sets are reused.
fn coefficients_on(set: &CoefficientSet, medium: Option<&MediumProfile>, grid: &TimeGrid) -> Result<CoefficientSet> {
    match medium {
        Some(m) => medium_to_hamiltonian(m, grid),
        None => Ok(set.clone()),
    }
}

/// Max finite-difference Heisenberg residual of the closed-form ansatz path on
/// a grid of spacing `dt` over `[0, t_max]`.
pub fn heisenberg_check(
    set: &CoefficientSet,
    medium: Option<&MediumProfile>,
    init: &ErmakovInit,
    t_max: f64,
    dt: f64,
    tol: Tolerances,
    mu1_init: f64,
) -> Result<f64> {
    let grid = TimeGrid::with_spacing(t_max, dt)?;
    let set = coefficients_on(set, medium, &grid)?;
    let basis = integrate_characteristic(&set, &grid, &CharacteristicOptions { tol, mu1_init })?;
    let frame = build_frame(init, &basis, &set, tol)?;
    let states = solve_path(init, &frame, &basis, &set)?;
    let path = states
        .iter()
        .map(ansatz_coefficients)
        .collect::<Result<Vec<_>>>()?;
    heisenberg_residual(&set, grid.times(), &path)
}

/// Wronskian drift of a fresh basis over `[0, window]`.
pub fn wronskian_check(set: &CoefficientSet, grid: &TimeGrid, tol: Tolerances, mu1_init: f64) -> Result<f64> {
    integrate_characteristic(set, grid, &CharacteristicOptions { tol, mu1_init })?.wronskian_drift(set)
}

/// Compares the mean fields with a direct solution of the classical mode
/// equation `q'' + ((ξ' + χ)/ξ) q' + (υ²/(ξη)) q = 0` started from the same
/// mean position and velocity. Returns the largest mismatch of
/// `b_amp` against `ω q` and of `d_amp` against `ϖ q'/(2a)`.
pub fn mode_amplitude_check(p: &Pipeline, tol: Tolerances) -> Result<Option<f64>> {
    let Some(m) = &p.medium else {
        return Ok(None);
    };
    let o0 = &p.observables[0];
    let a0 = p.set.eval(0.0)?.a;
    let u2 = m.upsilon * m.upsilon;
    let sol = Dopri5::new(tol).solve(
        |t, y: &[f64; 2]| {
            let (xi, xi_p) = m.xi.eval(t);
            let chi = m.chi.value(t);
            let eta = m.eta.value(t);
            let rate = -((xi_p + chi) / xi) * y[1] - u2 / (xi * eta) * y[0];
            if !rate.is_finite() {
                return Err(Error::CoefficientEval { name: "xi", t });
            }
            Ok([y[1], rate])
        },
        [o0.lambda * o0.xbar, 2.0 * a0 * o0.lambda * o0.pbar],
        p.grid().times(),
    )?;
    let mut worst: f64 = 0.0;
    for (o, q) in p.observables.iter().zip(&sol) {
        let a = p.set.eval(o.t)?.a;
        worst = worst
            .max((o.b_amp - m.field_scale_omega * q[0]).abs())
            .max((o.d_amp - m.field_scale_varpi * q[1] / (2.0 * a)).abs());
    }
    Ok(Some(worst))
}

/// Runs every suite for a scenario.
pub fn run_checks(scenario: &Scenario, pipeline: &Pipeline, th: &Thresholds) -> Result<InvariantReport> {
    let tol = scenario.tolerances;
    let grid = pipeline.grid();
    let oracle = riccati_oracle(&pipeline.init, &pipeline.set, grid, tol).map_err(|e| e.in_stage("verify"))?;
    let drift = pipeline
        .basis
        .wronskian_drift_series(&pipeline.set)
        .map_err(|e| e.in_stage("characteristic"))?;

    let mut rows = Vec::with_capacity(grid.len());
    for (i, (state, orc)) in pipeline.states.iter().zip(&oracle).enumerate() {
        let quasi = quasi_invariant_residuals(
            orc,
            &pipeline.init,
            &pipeline.frame,
            &pipeline.basis,
            &pipeline.set,
            i,
        )?;
        rows.push(InvariantRow {
            t: state.t,
            oracle_dev: state.max_abs_diff(orc),
            commutator_err: commutator_error(state)?,
            product_margin: pipeline.observables[i].product - 0.25,
            wronskian_drift: drift[i],
            quasi,
        });
    }

    let mut checks = Vec::new();
    let max_dev = path_deviation(&pipeline.states, &oracle)
        .iter()
        .fold(0.0f64, |m, v| m.max(*v));
    checks.push(CheckOutcome::below("oracle_agreement", max_dev, th.oracle));
    let comm_closed = rows.iter().map(|r| r.commutator_err).fold(0.0, f64::max);
    let comm_oracle = oracle
        .iter()
        .map(commutator_error)
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(CheckOutcome::below(
        "commutator",
        comm_closed.max(comm_oracle),
        th.commutator,
    ));
    let margin = uncertainty_margin(&pipeline.observables);
    checks.push(CheckOutcome {
        name: "uncertainty_bound",
        value: margin,
        threshold: -th.uncertainty,
        passed: margin >= -th.uncertainty,
    });
    let quasi_max = rows
        .iter()
        .filter(|r| r.t >= th.quasi_t_min)
        .flat_map(|r| r.quasi.map(f64::abs))
        .fold(0.0, f64::max);
    checks.push(CheckOutcome::below("quasi_invariants", quasi_max, th.quasi_invariants));

    let heis = heisenberg_check(
        &pipeline.set,
        pipeline.medium.as_ref(),
        &pipeline.init,
        grid.t_max(),
        th.heisenberg_dt,
        tol,
        scenario.mu1_init,
    )
    .map_err(|e| e.in_stage("verify"))?;
    checks.push(CheckOutcome::below("heisenberg_residual", heis, th.heisenberg));

    let window = match scenario.coefficients {
        CoefficientSource::TableFile(_) => grid.t_max(),
        _ => th.wronskian_window,
    };
    let long = TimeGrid::with_spacing(window, scenario.grid.dt)?;
    let long_set = scenario.resolve_on(long.clone())?.set;
    let w = wronskian_check(&long_set, &long, tol, scenario.mu1_init).map_err(|e| e.in_stage("characteristic"))?;
    checks.push(CheckOutcome::below("wronskian", w, th.wronskian));

    if let Some(m) = &pipeline.medium {
        let r = classical_mode_equivalence(m, grid)?;
        checks.push(CheckOutcome::below("classical_mode", r, th.classical_mode));
        if let Some(amp) = mode_amplitude_check(pipeline, tol)? {
            checks.push(CheckOutcome::below("mode_amplitudes", amp, th.mode_amplitude));
        }
    }

    Ok(InvariantReport {
        scenario: scenario.name.clone(),
        checks,
        rows,
    })
}
