//! Closed-form solution of the Ermakov-type system
//!
//! ```text
//! α' = aβ⁴ − b − 2cα − 4aα²        β' = −(c + 4aα)β       γ' = −aβ²
//! δ' = −(c + 4aα)δ + f + 2gα + 2aβ³ε
//! ε' = (g − 2aδ)β                  κ' = gδ − aδ² + aβ²ε²
//! ```
//!
//! through the complex function `z = (2α(0) + d(0)/a(0))μ₀ + μ₁/μ₁(0) + iβ(0)²μ₀`.
//!
//! The driven parts use three running integrals instead of the `1/μ₀`,
//! `1/μ₀'` forms:
//!
//! ```text
//! P' = [(f − dg/a)μ₀ + gμ₀'/(2a)] / λ
//! S' = [(f − dg/a)μ₁ + gμ₁'/(2a)] / (μ₁(0)λ)
//! T' = P S'
//! ```
//!
//! with `P(0) = S(0) = T(0) = 0`, so that `δ₀ = λP/μ₀`, `ε₀ = S − P μ₁/(μ₁(0)μ₀)`
//! and `κ₀ = P² μ₁/(2μ₁(0)μ₀) − T`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::characteristic::{CharacteristicBasis, log_lambda, tau_sigma};
use crate::coefficients::{CoefficientSet, Coefficients};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::ode::{Dopri5, Tolerances};

/// Relative size of `|μ₀|` below which the `1/μ₀` forms are not evaluated.
pub const SINGULARITY_GUARD: f64 = 1e-8;

/// Values of `(α, β, γ, δ, ε, κ)` at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErmakovInit {
    pub alpha0: f64,
    pub beta0: f64,
    pub gamma0: f64,
    pub delta0: f64,
    pub eps0: f64,
    pub kappa0: f64,
}

impl ErmakovInit {
    /// `(0, 1, 0, 0, 0, 0)`
    pub fn ground() -> Self {
        Self::squeezed(1.0)
    }

    pub fn squeezed(beta0: f64) -> Self {
        ErmakovInit {
            alpha0: 0.0,
            beta0,
            gamma0: 0.0,
            delta0: 0.0,
            eps0: 0.0,
            kappa0: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let values = [
            self.alpha0,
            self.beta0,
            self.gamma0,
            self.delta0,
            self.eps0,
            self.kappa0,
        ];
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInit("all initial values must be finite".into()));
        }
        if self.beta0 <= 0.0 {
            return Err(Error::InvalidInit(format!(
                "beta0 must be positive, got {}",
                self.beta0
            )));
        }
        Ok(())
    }

    pub fn state(&self) -> ErmakovState {
        ErmakovState {
            t: 0.0,
            alpha: self.alpha0,
            beta: self.beta0,
            gamma: self.gamma0,
            delta: self.delta0,
            eps: self.eps0,
            kappa: self.kappa0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ErmakovState {
    pub t: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub eps: f64,
    pub kappa: f64,
}

impl ErmakovState {
    pub fn to_array(&self) -> [f64; 6] {
        [
            self.alpha, self.beta, self.gamma, self.delta, self.eps, self.kappa,
        ]
    }

    pub fn from_array(t: f64, y: &[f64; 6]) -> Self {
        ErmakovState {
            t,
            alpha: y[0],
            beta: y[1],
            gamma: y[2],
            delta: y[3],
            eps: y[4],
            kappa: y[5],
        }
    }

    /// Right-hand side of the Ermakov-type system at this state.
    pub fn rates(&self, c: &Coefficients) -> [f64; 6] {
        ermakov_rhs(c, &self.to_array())
    }

    /// Largest absolute component-wise difference.
    pub fn max_abs_diff(&self, other: &ErmakovState) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Right-hand side of the Ermakov-type system for `(α, β, γ, δ, ε, κ)`.
pub fn ermakov_rhs(c: &Coefficients, y: &[f64; 6]) -> [f64; 6] {
    let [alpha, beta, _, delta, eps, _] = *y;
    let drift = c.c + 4.0 * c.a * alpha;
    let b2 = beta * beta;
    [
        c.a * b2 * b2 - c.b - 2.0 * c.c * alpha - 4.0 * c.a * alpha * alpha,
        -drift * beta,
        -c.a * b2,
        -drift * delta + c.f + 2.0 * c.g * alpha + 2.0 * c.a * b2 * beta * eps,
        (c.g - 2.0 * c.a * delta) * beta,
        c.g * delta - c.a * delta * delta + c.a * b2 * eps * eps,
    ]
}

/// Homogeneous solutions of the driven equations on the master grid.
#[derive(Debug, Clone)]
pub struct DrivenPieces {
    pub p: Vec<f64>,
    pub s: Vec<f64>,
    pub t_int: Vec<f64>,
    /// `δ₀, ε₀, κ₀`; NaN where `|μ₀|` is below the guard (except `t = 0`, which holds the limits).
    pub delta0: Vec<f64>,
    pub eps0: Vec<f64>,
    pub kappa0: Vec<f64>,
}

fn guard_level(mu0: &[f64]) -> f64 {
    SINGULARITY_GUARD * mu0.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `δ₀, ε₀, κ₀` by integrating the running integrals `P, S, T` alongside the
/// characteristic equation.
pub fn homogeneous_driven(
    basis: &CharacteristicBasis,
    set: &CoefficientSet,
    tol: Tolerances,
) -> Result<DrivenPieces> {
    let n = basis.len();
    let c0 = set.eval(0.0)?;
    let mut pieces = DrivenPieces {
        p: vec![0.0; n],
        s: vec![0.0; n],
        t_int: vec![0.0; n],
        delta0: vec![0.0; n],
        eps0: vec![0.0; n],
        kappa0: vec![0.0; n],
    };
    if !set.has_drive() {
        return Ok(pieces);
    }
    let log_lam = log_lambda(set, &basis.grid)?;
    let mu1_init = basis.mu1_init;
    let sol = Dopri5::new(tol).solve(
        |t, y: &[f64; 7]| {
            let jet = set.eval_jet(t)?;
            let v = &jet.value;
            let (tau, sigma) = tau_sigma(&jet);
            let lam = log_lam.value(t).exp();
            let h = v.f - v.d * v.g / v.a;
            let q = v.g / (2.0 * v.a);
            let sp = (h * y[2] + q * y[3]) / (mu1_init * lam);
            Ok([
                y[1],
                tau * y[1] - 4.0 * sigma * y[0],
                y[3],
                tau * y[3] - 4.0 * sigma * y[2],
                (h * y[0] + q * y[1]) / lam,
                sp,
                y[4] * sp,
            ])
        },
        [0.0, 2.0 * c0.a, mu1_init, 0.0, 0.0, 0.0, 0.0],
        basis.times(),
    )?;
    let guard = guard_level(&basis.mu0);
    for (i, y) in sol.iter().enumerate() {
        pieces.p[i] = y[4];
        pieces.s[i] = y[5];
        pieces.t_int[i] = y[6];
        let mu0 = basis.mu0[i];
        if i == 0 {
            pieces.delta0[0] = c0.g / (2.0 * c0.a);
            pieces.eps0[0] = -pieces.delta0[0];
        } else if mu0.abs() > guard {
            let m = basis.mu1[i] / mu1_init;
            pieces.delta0[i] = basis.lambda[i] * y[4] / mu0;
            pieces.eps0[i] = y[5] - y[4] * m / mu0;
            pieces.kappa0[i] = y[4] * y[4] * m / (2.0 * mu0) - y[6];
        } else {
            pieces.delta0[i] = f64::NAN;
            pieces.eps0[i] = f64::NAN;
            pieces.kappa0[i] = f64::NAN;
        }
    }
    Ok(pieces)
}

/// `δ₀, ε₀, κ₀` through the quadrature forms with `1/μ₀'` and `1/μ₀'²` kernels.
///
/// Valid only while `μ₀'` keeps its initial sign; a zero crossing inside the
/// grid is reported as a turning point. Index 0 holds the limits at `t = 0`.
pub fn homogeneous_driven_quadrature(
    set: &CoefficientSet,
    grid: &TimeGrid,
    tol: Tolerances,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let c0 = set.eval(0.0)?;
    if c0.a == 0.0 {
        return Err(Error::InvalidCoefficient("a(0) must be nonzero".into()));
    }
    let sign0 = c0.a.signum();
    let log_lam = log_lambda(set, grid)?;
    let sol = Dopri5::new(tol).solve(
        |t, y: &[f64; 7]| {
            let jet = set.eval_jet(t)?;
            let v = &jet.value;
            let (tau, sigma) = tau_sigma(&jet);
            let mu0p = y[1];
            if mu0p * sign0 <= 0.0 {
                return Err(Error::TurningPoint { t });
            }
            let lam = log_lam.value(t).exp();
            let h = v.f - v.d * v.g / v.a;
            // μ₀δ₀ = λP
            let md = lam * y[2];
            Ok([
                mu0p,
                tau * mu0p - 4.0 * sigma * y[0],
                (h * y[0] + v.g * mu0p / (2.0 * v.a)) / lam,
                8.0 * v.a * sigma * lam * md / (mu0p * mu0p),
                2.0 * v.a * lam * h / mu0p,
                4.0 * v.a * sigma * md * md / (mu0p * mu0p),
                2.0 * v.a * md * h / mu0p,
            ])
        },
        [0.0, 2.0 * c0.a, 0.0, 0.0, 0.0, 0.0, 0.0],
        grid.times(),
    )
    .map_err(|e| match e {
        // the kernels blow up as μ₀' → 0, so step-size collapse means a turning point
        Error::Stiffness { t, .. } | Error::TooManySteps { t, .. } => Error::TurningPoint { t },
        other => other,
    })?;
    let n = grid.len();
    let (mut delta0, mut eps0, mut kappa0) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    delta0[0] = c0.g / (2.0 * c0.a);
    eps0[0] = -delta0[0];
    for (i, y) in sol.iter().enumerate().skip(1) {
        let t = grid.times()[i];
        let a = set.eval(t)?.a;
        let lam = log_lam.node_values()[i].exp();
        let (mu0, mu0p) = (y[0], y[1]);
        if mu0p * sign0 <= 0.0 {
            return Err(Error::TurningPoint { t });
        }
        delta0[i] = lam * y[2] / mu0;
        eps0[i] = -2.0 * a * lam * delta0[i] / mu0p + y[3] + y[4];
        kappa0[i] = a * mu0 * delta0[i] * delta0[i] / mu0p - y[5] - y[6];
    }
    Ok((delta0, eps0, kappa0))
}

/// `(α₀, β₀, γ₀)` at grid index `i`.
pub fn homogeneous_state(
    basis: &CharacteristicBasis,
    set: &CoefficientSet,
    i: usize,
) -> Result<(f64, f64, f64)> {
    let t = basis.times()[i];
    let mu0 = basis.mu0[i];
    if mu0.abs() <= guard_level(&basis.mu0) {
        return Err(Error::Singularity { t, mu0 });
    }
    let c = set.eval(t)?;
    let c0 = set.eval(0.0)?;
    let alpha0 = basis.mu0p[i] / (4.0 * c.a * mu0) - c.d / (2.0 * c.a);
    let beta0 = -basis.lambda[i] / mu0;
    let gamma0 = basis.mu1[i] / (2.0 * basis.mu1_init * mu0) + c0.d / (2.0 * c0.a);
    Ok((alpha0, beta0, gamma0))
}

/// Complex parametrization of the solution on the master grid.
#[derive(Debug, Clone)]
pub struct ComplexFrame {
    pub c1: Complex64,
    pub c2: Complex64,
    pub c3: Complex64,
    pub z: Vec<Complex64>,
    pub zp: Vec<Complex64>,
    /// `ζ = c₃ + iε₀`; NaN where `ε₀` is guarded.
    pub zeta: Vec<Complex64>,
    pub e: Vec<Complex64>,
    pub estar: Vec<Complex64>,
    /// `arg z`, unwrapped along the grid.
    pub arg_z: Vec<f64>,
    pub driven: DrivenPieces,
    // 2α(0) + d(0)/a(0)
    shift: f64,
}

pub fn build_frame(
    init: &ErmakovInit,
    basis: &CharacteristicBasis,
    set: &CoefficientSet,
    tol: Tolerances,
) -> Result<ComplexFrame> {
    init.validate()?;
    let c0 = set.eval(0.0)?;
    if c0.a == 0.0 {
        return Err(Error::InvalidCoefficient("a(0) must be nonzero".into()));
    }
    let b2 = init.beta0 * init.beta0;
    let im = init.alpha0 + c0.d / (2.0 * c0.a);
    let c1 = Complex64::new((1.0 + b2) / 2.0, -im);
    let c2 = Complex64::new((1.0 - b2) / 2.0, im);
    let c3 = Complex64::new(init.eps0 * init.beta0, init.delta0);
    let shift = 2.0 * init.alpha0 + c0.d / c0.a;

    let n = basis.len();
    let mut z = Vec::with_capacity(n);
    let mut zp = Vec::with_capacity(n);
    let mut e = Vec::with_capacity(n);
    let mut estar = Vec::with_capacity(n);
    for i in 0..n {
        let m = basis.mu1[i] / basis.mu1_init;
        let mp = basis.mu1p[i] / basis.mu1_init;
        z.push(Complex64::new(m + shift * basis.mu0[i], b2 * basis.mu0[i]));
        zp.push(Complex64::new(mp + shift * basis.mu0p[i], b2 * basis.mu0p[i]));
        e.push(Complex64::new(m, basis.mu0[i]));
        estar.push(Complex64::new(m, -basis.mu0[i]));
    }

    let mut arg_z = Vec::with_capacity(n);
    let mut prev = 0.0;
    for (i, zi) in z.iter().enumerate() {
        let raw = zi.arg();
        let unwrapped = if i == 0 {
            raw
        } else {
            let k = ((prev - raw) / std::f64::consts::TAU).round();
            raw + k * std::f64::consts::TAU
        };
        arg_z.push(unwrapped);
        prev = unwrapped;
    }

    let driven = homogeneous_driven(basis, set, tol)?;
    let zeta = driven
        .eps0
        .iter()
        .map(|eps0| c3 + Complex64::new(0.0, *eps0))
        .collect();
    Ok(ComplexFrame {
        c1,
        c2,
        c3,
        z,
        zp,
        zeta,
        e,
        estar,
        arg_z,
        driven,
        shift,
    })
}

impl ComplexFrame {
    /// `β(0)² = |c₁|² − |c₂|²`.
    pub fn beta0_squared(&self) -> f64 {
        self.c1.norm_sqr() - self.c2.norm_sqr()
    }

    /// `E` recovered from `z`: `(c₁* z − c₂ z*) / (|c₁|² − |c₂|²)`.
    pub fn e_from_z(&self, i: usize) -> Complex64 {
        (self.c1.conj() * self.z[i] - self.c2 * self.z[i].conj()) / self.beta0_squared()
    }

    /// `μ₀` recovered from `z`: `(z − z*) / (2i(c₁ − c₂*))`.
    pub fn mu0_from_z(&self, i: usize) -> f64 {
        let num = self.z[i] - self.z[i].conj();
        (num / (Complex64::new(0.0, 2.0) * (self.c1 - self.c2.conj()))).re
    }
}

/// Closed-form state at grid index `i`, evaluated through forms that stay
/// regular at the zeros of `μ₀`.
pub fn solve_ermakov(
    init: &ErmakovInit,
    frame: &ComplexFrame,
    basis: &CharacteristicBasis,
    set: &CoefficientSet,
    i: usize,
) -> Result<ErmakovState> {
    let t = basis.times()[i];
    let c = set.eval(t)?;
    let z = frame.z[i];
    let zn2 = z.norm_sqr();
    let zn = zn2.sqrt();
    let b = init.beta0;
    let b2 = b * b;
    let lam = basis.lambda[i];
    let mu0 = basis.mu0[i];
    let m = basis.mu1[i] / basis.mu1_init;
    let (p, s, tt) = (frame.driven.p[i], frame.driven.s[i], frame.driven.t_int[i]);
    let c3 = frame.c3;
    // A X + B⁴ μ₀
    let weight = frame.shift * z.re + b2 * b2 * mu0;
    let zeta_r = c3 + Complex64::new(0.0, s);

    let alpha = (z.conj() * frame.zp[i]).re / (4.0 * c.a * zn2) - c.d / (2.0 * c.a);
    let beta = b * lam / zn;
    let gamma = init.gamma0 - 0.5 * frame.arg_z[i];
    let delta = lam * (p * weight + s * z.re + (c3 * z).im) / zn2;
    let eps = ((c3 * z).re + b2 * (p * m - s * mu0)) / (b * zn);
    let kappa = init.kappa0 - tt
        + (p * p * m * weight + (zeta_r * zeta_r * z).re * mu0 + 2.0 * p * m * (zeta_r * z).im)
            / (2.0 * zn2);
    let state = ErmakovState {
        t,
        alpha,
        beta,
        gamma,
        delta,
        eps,
        kappa,
    };
    if state.to_array().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidState {
            t,
            reason: "closed form produced a non-finite value",
        });
    }
    Ok(state)
}

/// Closed-form states at every grid node.
pub fn solve_path(
    init: &ErmakovInit,
    frame: &ComplexFrame,
    basis: &CharacteristicBasis,
    set: &CoefficientSet,
) -> Result<Vec<ErmakovState>> {
    (0..basis.len())
        .map(|i| solve_ermakov(init, frame, basis, set, i))
        .collect()
}

/// The closed form written with the homogeneous pieces `α₀, δ₀, ε₀, κ₀` and
/// `ζ = c₃ + iε₀`. Returns `None` where `μ₀` is inside the singularity guard.
pub fn solve_ermakov_literal(
    init: &ErmakovInit,
    frame: &ComplexFrame,
    basis: &CharacteristicBasis,
    set: &CoefficientSet,
    i: usize,
) -> Result<Option<ErmakovState>> {
    let (alpha0, _, _) = match homogeneous_state(basis, set, i) {
        Ok(h) => h,
        Err(Error::Singularity { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let t = basis.times()[i];
    let z = frame.z[i];
    let zn2 = z.norm_sqr();
    let lam = basis.lambda[i];
    let b = init.beta0;
    let zeta = frame.zeta[i];
    let cc = frame.c1 - frame.c2.conj();
    let two_i = Complex64::new(0.0, 2.0);
    let alpha = alpha0 + (lam * lam * cc / (two_i * zn2) * (z + z.conj()) / (z - z.conj())).re;
    let beta = lam * frame.beta0_squared().sqrt() / zn2.sqrt();
    let gamma = init.gamma0 - 0.5 * frame.arg_z[i];
    let delta = frame.driven.delta0[i] + lam * (zeta * z).im / zn2;
    let eps = (zeta * z).re / (zn2.sqrt() * b);
    let kappa = init.kappa0
        + frame.driven.kappa0[i]
        + ((zeta * zeta * z + (zeta * zeta * z).conj()) * (z - z.conj())
            / (Complex64::new(0.0, 8.0) * cc * zn2))
            .re;
    Ok(Some(ErmakovState {
        t,
        alpha,
        beta,
        gamma,
        delta,
        eps,
        kappa,
    }))
}

/// Residuals of the quasi-invariant identities at one grid node, each
/// multiplied by `w = Im z / |z|` (or `w²` for the quadratic one) so that the
/// `1/μ₀` poles of the homogeneous pieces cancel:
///
/// 0. `2(α − α₀)/β² + Re z / Im z`
/// 1. `|ε + i(δ − δ₀)/β − ζz/(β(0)|z|)|`
/// 2. `ε² + ((δ − δ₀)/β)² − ε(0)² − ((δ(0) + ε₀)/β(0))²`
/// 3. `κ − κ(0) − κ₀ − (δ − δ₀)ε/(2β) + (ε₀ + δ(0))ε(0)/(2β(0))`
pub fn quasi_invariant_residuals(
    state: &ErmakovState,
    init: &ErmakovInit,
    frame: &ComplexFrame,
    basis: &CharacteristicBasis,
    set: &CoefficientSet,
    i: usize,
) -> Result<[f64; 4]> {
    let c = set.eval(basis.times()[i])?;
    let z = frame.z[i];
    let zn = z.norm();
    let b = init.beta0;
    let b2 = b * b;
    let mu0 = basis.mu0[i];
    let m = basis.mu1[i] / basis.mu1_init;
    let (p, s, tt) = (frame.driven.p[i], frame.driven.s[i], frame.driven.t_int[i]);
    let w = b2 * mu0 / zn;
    let k = b2 / zn;

    let shifted_alpha = k * ((state.alpha + c.d / (2.0 * c.a)) * mu0 - basis.mu0p[i] / (4.0 * c.a));
    let r37 = 2.0 * shifted_alpha / (state.beta * state.beta) + z.re / zn;

    let w_delta0 = k * basis.lambda[i] * p;
    let w_eps0 = k * (mu0 * s - p * m);
    let w_zeta = Complex64::new(k * mu0 * frame.c3.re, k * mu0 * frame.c3.im + w_eps0);
    let w_dd = w * state.delta - w_delta0;
    let r39 = (Complex64::new(w * state.eps, w_dd / state.beta) - w_zeta * z / (b * zn)).norm();

    let r40 = (w * state.eps).powi(2) + (w_dd / state.beta).powi(2)
        - (w * init.eps0).powi(2)
        - ((w * init.delta0 + w_eps0) / b).powi(2);

    let w_kappa0 = k * (0.5 * p * p * m - mu0 * tt);
    let r41 = w * (state.kappa - init.kappa0) - w_kappa0 - w_dd * state.eps / (2.0 * state.beta)
        + (w_eps0 + w * init.delta0) * init.eps0 / (2.0 * b);
    Ok([r37, r39, r40, r41])
}

/// Largest quasi-invariant residuals over grid nodes with `t >= t_min`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct QuasiInvariantReport {
    pub alpha_ratio: f64,
    pub linear: f64,
    pub quadratic: f64,
    pub kappa: f64,
    pub points: usize,
}

impl QuasiInvariantReport {
    pub fn max(&self) -> f64 {
        self.alpha_ratio
            .max(self.linear)
            .max(self.quadratic)
            .max(self.kappa)
    }
}

pub fn quasi_invariants(
    states: &[ErmakovState],
    init: &ErmakovInit,
    frame: &ComplexFrame,
    basis: &CharacteristicBasis,
    set: &CoefficientSet,
    t_min: f64,
) -> Result<QuasiInvariantReport> {
    let mut report = QuasiInvariantReport::default();
    for (i, state) in states.iter().enumerate() {
        if basis.times()[i] < t_min {
            continue;
        }
        let r = quasi_invariant_residuals(state, init, frame, basis, set, i)?;
        report.alpha_ratio = report.alpha_ratio.max(r[0].abs());
        report.linear = report.linear.max(r[1].abs());
        report.quadratic = report.quadratic.max(r[2].abs());
        report.kappa = report.kappa.max(r[3].abs());
        report.points += 1;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characteristic::{CharacteristicOptions, integrate_characteristic};
    use crate::coefficients::Profile;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

    fn setup(
        set: &CoefficientSet,
        init: &ErmakovInit,
        grid: &TimeGrid,
    ) -> (CharacteristicBasis, ComplexFrame, Vec<ErmakovState>) {
        let basis = integrate_characteristic(set, grid, &CharacteristicOptions::default()).unwrap();
        let frame = build_frame(init, &basis, set, Tolerances::default()).unwrap();
        let states = solve_path(init, &frame, &basis, set).unwrap();
        (basis, frame, states)
    }

    #[test]
    fn frame_constants() {
        let g = TimeGrid::uniform(PI, 400).unwrap();
        let set = CoefficientSet::static_oscillator();
        let (_, frame, _) = setup(&set, &ErmakovInit::ground(), &g);
        assert_eq!(frame.c1, Complex64::new(1.0, 0.0));
        assert_eq!(frame.c2, Complex64::new(0.0, 0.0));
        for (k, &t) in g.times().iter().enumerate() {
            assert!((frame.z[k] - Complex64::from_polar(1.0, t)).norm() < 1e-9);
        }

        let (_, frame, _) = setup(&set, &ErmakovInit::squeezed(SQRT_2), &g);
        assert!((frame.c1 - Complex64::new(1.5, 0.0)).norm() < 1e-15);
        assert!((frame.c2 - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
        for (k, &t) in g.times().iter().enumerate() {
            assert!((frame.z[k].norm_sqr() - (2.5 - 1.5 * (2.0 * t).cos())).abs() < 1e-9);
        }
    }

    #[test]
    fn frame_identities_for_general_init() {
        let g = TimeGrid::with_spacing(6.0, 0.01).unwrap();
        let set = CoefficientSet::static_oscillator()
            .with_c(Profile::Constant(0.2))
            .with_d(Profile::Constant(0.1));
        let init = ErmakovInit {
            alpha0: 0.3,
            beta0: 1.3,
            gamma0: 0.1,
            delta0: 0.2,
            eps0: -0.4,
            kappa0: 0.05,
        };
        let (basis, frame, _) = setup(&set, &init, &g);
        assert_eq!(frame.c1 + frame.c2, Complex64::new(1.0, 0.0));
        assert!((frame.beta0_squared() - 1.69).abs() < 1e-14);
        assert!((frame.z[0] - 1.0).norm() < 1e-15);
        let zp0 = Complex64::new(0.0, 2.0 * 0.5) * (frame.c1 - frame.c2);
        assert!((frame.zp[0] - zp0).norm() < 1e-14);
        for i in 0..g.len() {
            assert!((frame.e_from_z(i) - frame.e[i]).norm() < 1e-10);
            assert!((frame.mu0_from_z(i) - basis.mu0[i]).abs() < 1e-10);
            assert!(frame.z[i].norm() > 0.0);
        }
    }

    #[test]
    fn homogeneous_state_examples() {
        let g = TimeGrid::uniform(PI, 1000).unwrap();
        let set = CoefficientSet::static_oscillator();
        let basis = integrate_characteristic(&set, &g, &Default::default()).unwrap();
        let (a0, b0, c0) = homogeneous_state(&basis, &set, g.nearest(FRAC_PI_2)).unwrap();
        assert!(a0.abs() < 1e-9 && (b0 + 1.0).abs() < 1e-9 && c0.abs() < 1e-9);
        let (a0, b0, _) = homogeneous_state(&basis, &set, g.nearest(FRAC_PI_4)).unwrap();
        assert!((a0 - 0.5).abs() < 1e-9 && (b0 + SQRT_2).abs() < 1e-9);
        assert!(matches!(
            homogeneous_state(&basis, &set, 0),
            Err(Error::Singularity { .. })
        ));

        let g = TimeGrid::uniform(2.0, 200).unwrap();
        let set = CoefficientSet::caldirola_kanai(2.0);
        let basis = integrate_characteristic(&set, &g, &Default::default()).unwrap();
        let (a0, _, _) = homogeneous_state(&basis, &set, g.nearest(1.0)).unwrap();
        assert!(a0.abs() < 1e-9);
    }

    #[test]
    fn driven_pieces_examples() {
        let g = TimeGrid::uniform(PI, 1000).unwrap();
        let set = CoefficientSet::static_oscillator();
        let basis = integrate_characteristic(&set, &g, &Default::default()).unwrap();
        let d = homogeneous_driven(&basis, &set, Tolerances::default()).unwrap();
        assert!(d.delta0.iter().chain(&d.eps0).chain(&d.kappa0).all(|v| *v == 0.0));

        let forced = set.clone().with_f(Profile::Constant(1.0));
        let d = homogeneous_driven(&basis, &forced, Tolerances::default()).unwrap();
        for (k, &t) in g.times().iter().enumerate().skip(1).take(900) {
            assert!((d.delta0[k] - (1.0 - t.cos()) / t.sin()).abs() < 1e-9);
        }
        assert!((d.delta0[500] - 1.0).abs() < 1e-9);

        let pulled = set.with_g(Profile::Constant(1.0));
        let d = homogeneous_driven(&basis, &pulled, Tolerances::default()).unwrap();
        assert_eq!((d.delta0[0], d.eps0[0]), (1.0, -1.0));
        assert!((d.delta0[1] - 1.0).abs() < 1e-4 && (d.eps0[1] + 1.0).abs() < 1e-4);
    }

    #[test]
    fn quadrature_forms_agree_before_turning_point() {
        let set = CoefficientSet::oscillator(
            Profile::Sinusoid {
                offset: 0.5,
                amplitude: 0.1,
                frequency: 1.0,
                phase: 0.0,
            },
            Profile::Constant(0.5),
        )
        .with_c(Profile::Constant(0.3))
        .with_d(Profile::Constant(0.1))
        .with_f(Profile::Constant(0.7))
        .with_g(Profile::Constant(0.4));
        let g = TimeGrid::uniform(1.0, 100).unwrap();
        let basis = integrate_characteristic(&set, &g, &Default::default()).unwrap();
        let d = homogeneous_driven(&basis, &set, Tolerances::default()).unwrap();
        let (d0, e0, k0) = homogeneous_driven_quadrature(&set, &g, Tolerances::default()).unwrap();
        for i in 1..g.len() {
            assert!((d0[i] - d.delta0[i]).abs() < 1e-8);
            assert!((e0[i] - d.eps0[i]).abs() < 1e-8);
            assert!((k0[i] - d.kappa0[i]).abs() < 1e-8);
        }
        let long = TimeGrid::uniform(4.0, 100).unwrap();
        assert!(matches!(
            homogeneous_driven_quadrature(&set, &long, Tolerances::default()),
            Err(Error::TurningPoint { .. })
        ));
    }

    #[test]
    fn ground_state_is_stationary() {
        let g = TimeGrid::with_spacing(10.0, 0.01).unwrap();
        let (_, _, states) = setup(&CoefficientSet::static_oscillator(), &ErmakovInit::ground(), &g);
        for s in &states {
            assert!(s.alpha.abs() < 1e-9 && (s.beta - 1.0).abs() < 1e-9);
            assert!((s.gamma + s.t / 2.0).abs() < 1e-9);
            assert!(s.delta == 0.0 && s.eps == 0.0 && s.kappa == 0.0);
        }
    }

    #[test]
    fn squeezed_beta_at_quarter_period() {
        let g = TimeGrid::uniform(PI, 1000).unwrap();
        let (_, _, states) = setup(
            &CoefficientSet::static_oscillator(),
            &ErmakovInit::squeezed(SQRT_2),
            &g,
        );
        assert!((states[250].beta - 0.894_427_191).abs() < 1e-9);
    }

    #[test]
    fn literal_closed_form_matches_regular_form() {
        let set = CoefficientSet::static_oscillator()
            .with_c(Profile::Constant(0.2))
            .with_d(Profile::Sinusoid {
                offset: 0.1,
                amplitude: 0.05,
                frequency: 1.0,
                phase: 0.0,
            })
            .with_f(Profile::Constant(0.7))
            .with_g(Profile::Constant(0.4));
        let init = ErmakovInit {
            alpha0: 0.3,
            beta0: 1.3,
            gamma0: 0.1,
            delta0: 0.2,
            eps0: -0.4,
            kappa0: 0.05,
        };
        let g = TimeGrid::with_spacing(10.0, 0.01).unwrap();
        let (basis, frame, states) = setup(&set, &init, &g);
        let mut compared = 0;
        for (i, s) in states.iter().enumerate() {
            if basis.mu0[i].abs() < 0.05 {
                continue;
            }
            let lit = solve_ermakov_literal(&init, &frame, &basis, &set, i).unwrap().unwrap();
            assert!(lit.max_abs_diff(s) < 1e-7, "t = {} diff {}", s.t, lit.max_abs_diff(s));
            compared += 1;
        }
        assert!(compared > 500);
    }

    #[test]
    fn rejects_nonpositive_beta0() {
        assert!(ErmakovInit::squeezed(0.0).validate().is_err());
        assert!(ErmakovInit::squeezed(-1.0).validate().is_err());
    }
}
