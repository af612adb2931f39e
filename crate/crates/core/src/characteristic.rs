//! Standard solutions of the linear characteristic equation
//! `μ'' − τ μ' + 4 σ μ = 0` and the norm factor `λ(t)`.

use std::sync::Arc;

use crate::coefficients::{CoefficientJet, CoefficientSet, MediumProfile, medium_to_hamiltonian};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::ode::{Dopri5, Tolerances};
use crate::quadrature::CumulativeIntegral;

/// `τ = a'/a − 2c + 4d` and `σ = ab − cd + d² + (d/2)(a'/a) − d'/2`.
///
/// The `(d/2)(d'/d)` term of the usual form is written as `d'/2`, which is the
/// same function and stays finite where `d` crosses zero.
pub fn tau_sigma(jet: &CoefficientJet) -> (f64, f64) {
    let v = &jet.value;
    let log_a_rate = jet.slope.a / v.a;
    let tau = log_a_rate - 2.0 * v.c + 4.0 * v.d;
    let sigma = v.a * v.b - v.c * v.d + v.d * v.d + 0.5 * v.d * log_a_rate - 0.5 * jet.slope.d;
    (tau, sigma)
}

fn checked_tau_sigma(set: &CoefficientSet, t: f64) -> Result<(f64, f64)> {
    let jet = set.eval_jet(t)?;
    if jet.value.a == 0.0 {
        return Err(Error::InvalidCoefficient(format!("a vanishes at t = {t}")));
    }
    Ok(tau_sigma(&jet))
}

/// Errors if `a` vanishes at a node or changes sign between adjacent nodes.
fn check_a_sign(set: &CoefficientSet, grid: &TimeGrid) -> Result<()> {
    let mut prev: Option<(f64, f64)> = None;
    for &t in grid.times() {
        let a = set.eval(t)?.a;
        if let Some((t0, a0)) = prev {
            if a0.signum() != a.signum() {
                return Err(Error::InvalidCoefficient(format!(
                    "a changes sign between t = {t0} and t = {t}"
                )));
            }
        }
        prev = Some((t, a));
    }
    Ok(())
}

pub fn build_tau_sigma(set: &CoefficientSet, grid: &TimeGrid) -> Result<(Vec<f64>, Vec<f64>)> {
    check_a_sign(set, grid)?;
    grid.times().iter().map(|&t| checked_tau_sigma(set, t)).collect::<Result<Vec<_>>>().map(
        |pairs| pairs.into_iter().unzip(),
    )
}

/// `ln λ(t) = −∫_0^t (c − 2d) ds` as a cached cumulative integral.
pub fn log_lambda(set: &CoefficientSet, grid: &TimeGrid) -> Result<CumulativeIntegral> {
    for &t in grid.times() {
        set.eval(t)?;
    }
    let (c, d) = (set.c.clone(), set.d.clone());
    Ok(CumulativeIntegral::new(
        grid,
        Arc::new(move |t| -(c.eval(t).0 - 2.0 * d.eval(t).0)),
    ))
}

pub fn compute_lambda(set: &CoefficientSet, grid: &TimeGrid) -> Result<Vec<f64>> {
    let log = log_lambda(set, grid)?;
    Ok(log.node_values().iter().map(|v| v.exp()).collect())
}

#[derive(Debug, Clone, Copy)]
pub struct CharacteristicOptions {
    pub tol: Tolerances,
    /// `μ₁(0)`; any nonzero value.
    pub mu1_init: f64,
}

impl Default for CharacteristicOptions {
    fn default() -> Self {
        CharacteristicOptions {
            tol: Tolerances::default(),
            mu1_init: 1.0,
        }
    }
}

/// Integrates two solutions `(μ_a, μ_a', μ_b, μ_b')` of the characteristic
/// equation from arbitrary initial data, sampled on `grid`.
pub fn solve_characteristic(
    set: &CoefficientSet,
    grid: &TimeGrid,
    tol: Tolerances,
    initial: [f64; 4],
) -> Result<Vec<[f64; 4]>> {
    Dopri5::new(tol).solve(
        |t, y: &[f64; 4]| {
            let (tau, sigma) = checked_tau_sigma(set, t)?;
            Ok([
                y[1],
                tau * y[1] - 4.0 * sigma * y[0],
                y[3],
                tau * y[3] - 4.0 * sigma * y[2],
            ])
        },
        initial,
        grid.times(),
    )
}

/// Standard solutions `μ₀` (`μ₀(0)=0, μ₀'(0)=2a(0)`) and `μ₁` (`μ₁(0)≠0, μ₁'(0)=0`)
/// sampled on the master grid.
#[derive(Debug, Clone)]
pub struct CharacteristicBasis {
    pub grid: TimeGrid,
    pub mu0: Vec<f64>,
    pub mu0p: Vec<f64>,
    pub mu1: Vec<f64>,
    pub mu1p: Vec<f64>,
    pub lambda: Vec<f64>,
    pub tau: Vec<f64>,
    pub sigma: Vec<f64>,
    pub mu1_init: f64,
}

pub fn integrate_characteristic(
    set: &CoefficientSet,
    grid: &TimeGrid,
    opts: &CharacteristicOptions,
) -> Result<CharacteristicBasis> {
    let c0 = set.eval(0.0)?;
    if c0.a == 0.0 {
        return Err(Error::InvalidCoefficient("a(0) must be nonzero".into()));
    }
    if !(opts.mu1_init.is_finite() && opts.mu1_init != 0.0) {
        return Err(Error::InvalidInit(format!(
            "mu1(0) must be finite and nonzero, got {}",
            opts.mu1_init
        )));
    }
    let (tau, sigma) = build_tau_sigma(set, grid)?;
    let lambda = compute_lambda(set, grid)?;
    let sol = solve_characteristic(set, grid, opts.tol, [0.0, 2.0 * c0.a, opts.mu1_init, 0.0])?;
    let column = |k: usize| sol.iter().map(|y| y[k]).collect::<Vec<_>>();
    Ok(CharacteristicBasis {
        grid: grid.clone(),
        mu0: column(0),
        mu0p: column(1),
        mu1: column(2),
        mu1p: column(3),
        lambda,
        tau,
        sigma,
        mu1_init: opts.mu1_init,
    })
}

impl CharacteristicBasis {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        self.grid.times()
    }

    /// `W = μ₀'μ₁ − μ₀μ₁'` at grid index `i`.
    pub fn wronskian(&self, i: usize) -> f64 {
        self.mu0p[i] * self.mu1[i] - self.mu0[i] * self.mu1p[i]
    }

    /// `W(t) / (W(0) exp(∫τ)) − 1` at every node, with `∫τ` from an independent
    /// quadrature of `τ`.
    pub fn wronskian_drift_series(&self, set: &CoefficientSet) -> Result<Vec<f64>> {
        let set = set.clone();
        let integral = CumulativeIntegral::new(
            &self.grid,
            Arc::new(move |t| {
                checked_tau_sigma(&set, t)
                    .map(|(tau, _)| tau)
                    .unwrap_or(f64::NAN)
            }),
        );
        let w0 = self.wronskian(0);
        integral
            .node_values()
            .iter()
            .enumerate()
            .map(|(i, int_tau)| {
                let drift = self.wronskian(i) / (w0 * int_tau.exp()) - 1.0;
                if drift.is_finite() {
                    Ok(drift)
                } else {
                    Err(Error::CoefficientEval {
                        name: "tau",
                        t: self.grid.times()[i],
                    })
                }
            })
            .collect()
    }

    /// `max_t |W(t) / (W(0) exp(∫τ)) − 1|`.
    pub fn wronskian_drift(&self, set: &CoefficientSet) -> Result<f64> {
        Ok(self
            .wronskian_drift_series(set)?
            .iter()
            .fold(0.0, |m, d| m.max(d.abs())))
    }
}

fn derivative_4th_order<F: Fn(f64) -> f64>(f: &F, t: f64, h: f64) -> f64 {
    let centered = (f(t - 2.0 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2.0 * h)) / (12.0 * h);
    if centered.is_finite() {
        return centered;
    }
    let forward = (-25.0 * f(t) + 48.0 * f(t + h) - 36.0 * f(t + 2.0 * h) + 16.0 * f(t + 3.0 * h)
        - 3.0 * f(t + 4.0 * h))
        / (12.0 * h);
    if forward.is_finite() {
        return forward;
    }
    -(-25.0 * f(t) + 48.0 * f(t - h) - 36.0 * f(t - 2.0 * h) + 16.0 * f(t - 3.0 * h)
        - 3.0 * f(t - 4.0 * h))
        / (12.0 * h)
}

/// Largest deviation on `grid` between the characteristic equation built from the
/// medium-derived coefficients and the classical mode equation
/// `q'' + ((ξ'+χ)/ξ) q' + (υ²/(ξη)) q = 0`.
///
/// `ξ'` is taken by fourth-order finite differences, independently of the
/// analytic slopes used inside the coefficient set.
pub fn classical_mode_equivalence(profile: &MediumProfile, grid: &TimeGrid) -> Result<f64> {
    let set = medium_to_hamiltonian(profile, grid)?;
    let xi = |t: f64| profile.xi.value(t);
    let mut worst: f64 = 0.0;
    for &t in grid.times() {
        let (tau, sigma) = checked_tau_sigma(&set, t)?;
        let xi_t = xi(t);
        let damping = (derivative_4th_order(&xi, t, 1e-3) + profile.chi.value(t)) / xi_t;
        let stiffness = profile.upsilon.powi(2) / (xi_t * profile.eta.value(t));
        worst = worst.max((-tau - damping).abs()).max((4.0 * sigma - stiffness).abs());
    }
    Ok(worst)
}
