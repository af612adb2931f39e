//! Independent oracles: direct integration of the Ermakov-type system and the
//! Heisenberg evolution of the ladder operator `b̂ = u x + v p + w`.

use std::cmp::Ordering;

use num_complex::Complex64;

use crate::coefficients::{CoefficientSet, Coefficients};
use crate::ermakov::{ErmakovInit, ErmakovState, ermakov_rhs};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::ode::{Dopri5, Tolerances};

/// Integrates the six coupled Ermakov-type equations directly.
///
/// `β` leaving the positive branch or any non-finite component aborts with
/// [`Error::BlowUp`].
pub fn riccati_oracle(
    init: &ErmakovInit,
    set: &CoefficientSet,
    grid: &TimeGrid,
    tol: Tolerances,
) -> Result<Vec<ErmakovState>> {
    init.validate()?;
    let mut last_good = 0.0;
    let sol = Dopri5::new(tol).solve(
        |t, y: &[f64; 6]| {
            if y[1].partial_cmp(&0.0) != Some(Ordering::Greater) || y.iter().any(|v| !v.is_finite()) {
                return Err(Error::BlowUp { t: last_good });
            }
            last_good = t;
            Ok(ermakov_rhs(&set.eval(t)?, y))
        },
        init.state().to_array(),
        grid.times(),
    )?;
    Ok(grid
        .times()
        .iter()
        .zip(&sol)
        .map(|(&t, y)| ErmakovState::from_array(t, y))
        .collect())
}

/// Per-component maxima of `|a − b|` over two paths on the same grid, in the
/// order `(α, β, γ, δ, ε, κ)`.
pub fn path_deviation(a: &[ErmakovState], b: &[ErmakovState]) -> [f64; 6] {
    let mut worst = [0.0f64; 6];
    for (x, y) in a.iter().zip(b) {
        for (k, (p, q)) in x.to_array().iter().zip(y.to_array()).enumerate() {
            worst[k] = worst[k].max((p - q).abs());
        }
    }
    worst
}

/// Coefficients of `b̂ = u x + v p + w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorCoefficients {
    pub u: Complex64,
    pub v: Complex64,
    pub w: Complex64,
}

impl OperatorCoefficients {
    /// `u v̄ − ū v`, equal to `−i` when `[b̂, b̂†] = 1`.
    pub fn commutator(&self) -> Complex64 {
        self.u * self.v.conj() - self.u.conj() * self.v
    }

    /// Time derivative under `db̂/dt = i[b̂, H]`.
    pub fn rates(&self, c: &Coefficients) -> OperatorCoefficients {
        OperatorCoefficients {
            u: -c.c * self.u + 2.0 * c.b * self.v,
            v: -2.0 * c.a * self.u + c.c * self.v,
            w: c.g * self.u - c.f * self.v,
        }
    }

    fn to_array(self) -> [f64; 6] {
        [self.u.re, self.u.im, self.v.re, self.v.im, self.w.re, self.w.im]
    }

    fn from_array(y: &[f64; 6]) -> Self {
        OperatorCoefficients {
            u: Complex64::new(y[0], y[1]),
            v: Complex64::new(y[2], y[3]),
            w: Complex64::new(y[4], y[5]),
        }
    }
}

/// `(u, v, w)` of the ladder operator built from an Ermakov state.
pub fn ansatz_coefficients(state: &ErmakovState) -> Result<OperatorCoefficients> {
    let beta = state.beta;
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::InvalidState {
            t: state.t,
            reason: "beta must be finite and nonzero",
        });
    }
    let phase = Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, -2.0 * state.gamma);
    Ok(OperatorCoefficients {
        u: phase * Complex64::new(beta, -2.0 * state.alpha / beta),
        v: phase * Complex64::new(0.0, 1.0 / beta),
        w: phase * Complex64::new(state.eps, -state.delta / beta),
    })
}

/// Integrates the linear Heisenberg system for `(u, v, w)` directly.
pub fn integrate_operator_coefficients(
    start: OperatorCoefficients,
    set: &CoefficientSet,
    grid: &TimeGrid,
    tol: Tolerances,
) -> Result<Vec<OperatorCoefficients>> {
    let sol = Dopri5::new(tol).solve(
        |t, y: &[f64; 6]| {
            let c = set.eval(t)?;
            Ok(OperatorCoefficients::from_array(y).rates(&c).to_array())
        },
        start.to_array(),
        grid.times(),
    )?;
    Ok(sol.iter().map(OperatorCoefficients::from_array).collect())
}

/// Centered finite-difference residuals `(t, |Δu|, |Δv|, |Δw|)` of the Heisenberg
/// system at interior nodes of a sampled path.
pub fn heisenberg_residuals(
    set: &CoefficientSet,
    times: &[f64],
    path: &[OperatorCoefficients],
) -> Result<Vec<[f64; 4]>> {
    let mut rows = Vec::with_capacity(times.len().saturating_sub(2));
    for i in 1..times.len().saturating_sub(1) {
        let h = times[i + 1] - times[i - 1];
        let c = set.eval(times[i])?;
        let expected = path[i].rates(&c);
        let du = (path[i + 1].u - path[i - 1].u) / h;
        let dv = (path[i + 1].v - path[i - 1].v) / h;
        let dw = (path[i + 1].w - path[i - 1].w) / h;
        rows.push([
            times[i],
            (du - expected.u).norm(),
            (dv - expected.v).norm(),
            (dw - expected.w).norm(),
        ]);
    }
    Ok(rows)
}

/// Largest finite-difference residual of the Heisenberg system along `path`.
pub fn heisenberg_residual(
    set: &CoefficientSet,
    times: &[f64],
    path: &[OperatorCoefficients],
) -> Result<f64> {
    Ok(heisenberg_residuals(set, times, path)?
        .iter()
        .map(|r| r[1].max(r[2]).max(r[3]))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::Profile;
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    #[test]
    fn ground_state_is_fixed_point() {
        let g = TimeGrid::with_spacing(10.0, 0.01).unwrap();
        let path = riccati_oracle(
            &ErmakovInit::ground(),
            &CoefficientSet::static_oscillator(),
            &g,
            Tolerances::default(),
        )
        .unwrap();
        let last = path.last().unwrap();
        assert!(last.alpha.abs() < 1e-9 && (last.beta - 1.0).abs() < 1e-9);
        assert!((last.gamma + 5.0).abs() < 1e-9);
        assert!(last.delta == 0.0 && last.eps == 0.0 && last.kappa == 0.0);
    }

    #[test]
    fn ansatz_examples() {
        let c = ansatz_coefficients(&ErmakovInit::ground().state()).unwrap();
        assert!((c.u - FRAC_1_SQRT_2).norm() < 1e-16);
        assert!((c.v - Complex64::new(0.0, FRAC_1_SQRT_2)).norm() < 1e-16);
        assert_eq!(c.w, Complex64::new(0.0, 0.0));

        let t = 1.7;
        let mut s = ErmakovInit::ground().state();
        s.gamma = -t / 2.0;
        let c = ansatz_coefficients(&s).unwrap();
        assert!((c.u - Complex64::from_polar(FRAC_1_SQRT_2, t)).norm() < 1e-15);
        assert!((c.v - Complex64::new(0.0, 1.0) * Complex64::from_polar(FRAC_1_SQRT_2, t)).norm() < 1e-15);

        s.beta = 0.0;
        assert!(ansatz_coefficients(&s).is_err());
    }

    #[test]
    fn heisenberg_residual_of_constant_path_is_zero() {
        let set = CoefficientSet::oscillator(Profile::zero(), Profile::zero());
        let times: Vec<f64> = (0..100).map(|k| k as f64 * 1e-3).collect();
        let c = ansatz_coefficients(&ErmakovInit::squeezed(SQRT_2).state()).unwrap();
        let path = vec![c; times.len()];
        assert!(heisenberg_residual(&set, &times, &path).unwrap() < 1e-15);
    }

    #[test]
    fn direct_operator_evolution_preserves_commutator() {
        let set = CoefficientSet::static_oscillator()
            .with_c(Profile::Constant(0.3))
            .with_f(Profile::Constant(1.0));
        let g = TimeGrid::with_spacing(10.0, 0.01).unwrap();
        let start = ansatz_coefficients(&ErmakovInit::squeezed(1.4).state()).unwrap();
        let path = integrate_operator_coefficients(start, &set, &g, Tolerances::default()).unwrap();
        for p in &path {
            assert!((p.commutator() + Complex64::i()).norm() < 1e-9);
        }
    }

    #[test]
    fn invalid_initial_branch_is_rejected() {
        let g = TimeGrid::uniform(1.0, 10).unwrap();
        let r = riccati_oracle(
            &ErmakovInit::squeezed(-1.0),
            &CoefficientSet::static_oscillator(),
            &g,
            Tolerances::default(),
        );
        assert!(matches!(r, Err(Error::InvalidInit(_))));
    }
}
