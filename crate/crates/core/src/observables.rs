//! Fock-state matrix elements expressed through the Ermakov state.
//!
//! Means and `h_expect` are normalized (divided by `⟨Ψₙ, Ψₙ⟩ = 1/λ`); the raw
//! matrix elements are `λ` times larger and are available separately.

use serde::Serialize;

use crate::coefficients::{CoefficientSet, Coefficients, MediumProfile};
use crate::ermakov::{ErmakovState, ermakov_rhs};
use crate::error::{Error, Result};

fn level(n: u32) -> f64 {
    n as f64 + 0.5
}

/// `(x̄, p̄) = (−ε/β, δ − 2αε/β)`.
pub fn means(state: &ErmakovState) -> (f64, f64) {
    let r = state.eps / state.beta;
    (-r, state.delta - 2.0 * state.alpha * r)
}

/// Means multiplied by `λ`.
pub fn raw_means(state: &ErmakovState, lambda: f64) -> (f64, f64) {
    let (x, p) = means(state);
    (lambda * x, lambda * p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Variances {
    pub var_x: f64,
    pub var_p: f64,
    pub product: f64,
    /// `n = 0` and `|α| < alpha_tol`.
    pub minimum_uncertainty: bool,
}

pub fn variances(state: &ErmakovState, n: u32, alpha_tol: f64) -> Variances {
    let nn = level(n);
    let b2 = state.beta * state.beta;
    let a2 = state.alpha * state.alpha;
    Variances {
        var_x: nn / b2,
        var_p: nn * (b2 + 4.0 * a2 / b2),
        product: nn * nn * (1.0 + 4.0 * a2 / (b2 * b2)),
        minimum_uncertainty: n == 0 && state.alpha.abs() < alpha_tol,
    }
}

/// Normalized expectation of `H` in the `n`-th Fock state.
pub fn hamiltonian_expectation(state: &ErmakovState, c: &Coefficients, n: u32) -> f64 {
    let ErmakovState {
        alpha,
        beta,
        delta,
        eps,
        ..
    } = *state;
    let b2 = beta * beta;
    let r = eps / beta;
    let shifted = delta - 2.0 * alpha * r;
    level(n) * (c.a * (b2 + 4.0 * alpha * alpha / b2) + (c.b + 2.0 * c.c * alpha) / b2)
        + c.a * shifted * shifted
        + r * (c.f + c.b * r)
        - shifted * (c.g + c.c * r)
}

/// Dynamical rate `(2n+1)aβ²` and geometric rate `⟨H⟩ − (2n+1)aβ²`.
pub fn phase_rates(state: &ErmakovState, c: &Coefficients, n: u32) -> (f64, f64) {
    let dynamic = 2.0 * level(n) * c.a * state.beta * state.beta;
    (dynamic, hamiltonian_expectation(state, c, n) - dynamic)
}

/// Same rates, with the geometric part assembled from `α'`, `δ'`, `κ'`:
/// `−κ' − (ε² + n + ½)α'/β² + (ε/β)δ'`.
pub fn phase_rates_via_transport(state: &ErmakovState, c: &Coefficients, n: u32) -> (f64, f64) {
    let rates = ermakov_rhs(c, &state.to_array());
    let (da, dd, dk) = (rates[0], rates[3], rates[5]);
    let b = state.beta;
    let dynamic = 2.0 * level(n) * c.a * b * b;
    let geometric = -dk - (state.eps * state.eps + level(n)) * da / (b * b) + state.eps / b * dd;
    (dynamic, geometric)
}

/// Time factors of the mean displacement and induction fields:
/// `(ϖ λ p̄, ω λ x̄)`.
pub fn mode_amplitudes(state: &ErmakovState, lambda: f64, omega: f64, varpi: f64) -> (f64, f64) {
    let (x, p) = raw_means(state, lambda);
    (varpi * p, omega * x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FockObservables {
    pub t: f64,
    pub n: u32,
    pub xbar: f64,
    pub pbar: f64,
    pub var_x: f64,
    pub var_p: f64,
    pub product: f64,
    pub h_expect: f64,
    pub phase_dyn_rate: f64,
    pub phase_geo_rate: f64,
    /// Cumulative phases, trapezoid-accumulated from the rates.
    pub phase_dyn: f64,
    pub phase_geo: f64,
    pub d_amp: f64,
    pub b_amp: f64,
    pub lambda: f64,
    pub minimum_uncertainty: bool,
}

impl FockObservables {
    /// `λ · h_expect`.
    pub fn raw_h_expect(&self) -> f64 {
        self.lambda * self.h_expect
    }
}

/// Field scales `(ω, ϖ)`; both 1 unless a medium supplies them.
pub fn field_scales(medium: Option<&MediumProfile>) -> (f64, f64) {
    medium.map_or((1.0, 1.0), |m| {
        (m.field_scale_omega, m.field_scale_varpi)
    })
}

/// Observables along a state path with cumulative phases.
pub fn observe_path(
    states: &[ErmakovState],
    lambda: &[f64],
    set: &CoefficientSet,
    n: u32,
    scales: (f64, f64),
    alpha_tol: f64,
) -> Result<Vec<FockObservables>> {
    let mut out: Vec<FockObservables> = Vec::with_capacity(states.len());
    for (state, &lam) in states.iter().zip(lambda) {
        if !(state.beta.is_finite() && state.beta != 0.0) {
            return Err(Error::InvalidState {
                t: state.t,
                reason: "beta must be finite and nonzero",
            });
        }
        let c = set.eval(state.t)?;
        let (xbar, pbar) = means(state);
        let v = variances(state, n, alpha_tol);
        let h = hamiltonian_expectation(state, &c, n);
        let (dyn_rate, geo_rate) = phase_rates(state, &c, n);
        let (d_amp, b_amp) = mode_amplitudes(state, lam, scales.0, scales.1);
        let (phase_dyn, phase_geo) = match out.last() {
            None => (0.0, 0.0),
            Some(prev) => {
                let dt = state.t - prev.t;
                (
                    prev.phase_dyn + 0.5 * dt * (prev.phase_dyn_rate + dyn_rate),
                    prev.phase_geo + 0.5 * dt * (prev.phase_geo_rate + geo_rate),
                )
            }
        };
        out.push(FockObservables {
            t: state.t,
            n,
            xbar,
            pbar,
            var_x: v.var_x,
            var_p: v.var_p,
            product: v.product,
            h_expect: h,
            phase_dyn_rate: dyn_rate,
            phase_geo_rate: geo_rate,
            phase_dyn,
            phase_geo,
            d_amp,
            b_amp,
            lambda: lam,
            minimum_uncertainty: v.minimum_uncertainty,
        });
    }
    Ok(out)
}
