//! Time-dependent coefficients of the quadratic Hamiltonian
//! `H = a p² + b x² + c xp − i d − f x − g p`, and the mapping from a
//! factorized dielectric medium to `(a, b)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::quadrature::CumulativeIntegral;
use crate::spline::CubicSpline;

/// A real function of time given analytically or by a sampled table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Constant(f64),
    /// `scale · exp(rate · t)`
    Exponential { scale: f64, rate: f64 },
    /// `offset + amplitude · sin(frequency · t + phase)`
    Sinusoid {
        offset: f64,
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    Table(CubicSpline),
}

impl Profile {
    pub fn zero() -> Self {
        Profile::Constant(0.0)
    }

    pub fn is_identically_zero(&self) -> bool {
        match self {
            Profile::Constant(v) => *v == 0.0,
            Profile::Exponential { scale, .. } => *scale == 0.0,
            Profile::Sinusoid {
                offset, amplitude, ..
            } => *offset == 0.0 && *amplitude == 0.0,
            Profile::Table(s) => s.values().iter().all(|v| *v == 0.0),
        }
    }

    /// Value and time derivative at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        match self {
            Profile::Constant(v) => (*v, 0.0),
            Profile::Exponential { scale, rate } => {
                let v = scale * (rate * t).exp();
                (v, rate * v)
            }
            Profile::Sinusoid {
                offset,
                amplitude,
                frequency,
                phase,
            } => {
                let arg = frequency * t + phase;
                (offset + amplitude * arg.sin(), amplitude * frequency * arg.cos())
            }
            Profile::Table(s) => s.eval(t),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t).0
    }
}

/// Time parts of a factorized medium: permittivity `xi`, permeability `eta`,
/// conductivity `chi`, together with the spatial mode constant and the field scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumProfile {
    pub xi: Profile,
    pub eta: Profile,
    #[serde(default = "Profile::zero")]
    pub chi: Profile,
    pub upsilon: f64,
    #[serde(default = "one")]
    pub field_scale_omega: f64,
    #[serde(default = "one")]
    pub field_scale_varpi: f64,
}

fn one() -> f64 {
    1.0
}

impl MediumProfile {
    pub fn vacuum(upsilon: f64) -> Self {
        MediumProfile {
            xi: Profile::Constant(1.0),
            eta: Profile::Constant(1.0),
            chi: Profile::zero(),
            upsilon,
            field_scale_omega: 1.0,
            field_scale_varpi: 1.0,
        }
    }

    /// Checks `xi > 0`, `eta > 0`, `chi >= 0` at every grid node.
    pub fn validate(&self, grid: &TimeGrid) -> Result<()> {
        if !(self.upsilon.is_finite() && self.upsilon > 0.0) {
            return Err(Error::InvalidMedium {
                name: "upsilon",
                t: 0.0,
                value: self.upsilon,
                requirement: "upsilon > 0",
            });
        }
        for &t in grid.times() {
            let checks = [
                ("xi", self.xi.value(t), "xi > 0", false),
                ("eta", self.eta.value(t), "eta > 0", false),
                ("chi", self.chi.value(t), "chi >= 0", true),
            ];
            for (name, value, requirement, allow_zero) in checks {
                let ok = value.is_finite() && (value > 0.0 || (allow_zero && value == 0.0));
                if !ok {
                    return Err(Error::InvalidMedium {
                        name,
                        t,
                        value,
                        requirement,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Cached pieces shared by the medium-derived `a(t)` and `b(t)`.
#[derive(Debug)]
pub struct MediumTerms {
    profile: MediumProfile,
    // ∫_0^t chi/xi ds
    loss_exponent: CumulativeIntegral,
}

impl MediumTerms {
    pub fn profile(&self) -> &MediumProfile {
        &self.profile
    }

    pub fn loss_exponent(&self, t: f64) -> f64 {
        self.loss_exponent.value(t)
    }
}

#[derive(Debug, Clone)]
pub enum CoefficientFn {
    Profile(Profile),
    /// `a = exp(−∫chi/xi) / (2 xi)`
    MediumA(Arc<MediumTerms>),
    /// `b = upsilon² exp(∫chi/xi) / (2 eta)`
    MediumB(Arc<MediumTerms>),
}

impl From<Profile> for CoefficientFn {
    fn from(p: Profile) -> Self {
        CoefficientFn::Profile(p)
    }
}

impl CoefficientFn {
    pub fn constant(v: f64) -> Self {
        Profile::Constant(v).into()
    }

    pub fn is_identically_zero(&self) -> bool {
        matches!(self, CoefficientFn::Profile(p) if p.is_identically_zero())
    }

    pub fn eval(&self, t: f64) -> (f64, f64) {
        match self {
            CoefficientFn::Profile(p) => p.eval(t),
            CoefficientFn::MediumA(m) => {
                let (xi, xi_p) = m.profile.xi.eval(t);
                let chi = m.profile.chi.value(t);
                let a = (-m.loss_exponent(t)).exp() / (2.0 * xi);
                (a, -a * (xi_p + chi) / xi)
            }
            CoefficientFn::MediumB(m) => {
                let xi = m.profile.xi.value(t);
                let (eta, eta_p) = m.profile.eta.eval(t);
                let chi = m.profile.chi.value(t);
                let u = m.profile.upsilon;
                let b = u * u * m.loss_exponent(t).exp() / (2.0 * eta);
                (b, b * (chi / xi - eta_p / eta))
            }
        }
    }
}

/// The six coefficient values at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Coefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub f: f64,
    pub g: f64,
}

/// Coefficient values together with their time derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoefficientJet {
    pub value: Coefficients,
    pub slope: Coefficients,
}

#[derive(Debug, Clone)]
pub struct CoefficientSet {
    pub a: CoefficientFn,
    pub b: CoefficientFn,
    pub c: CoefficientFn,
    pub d: CoefficientFn,
    pub f: CoefficientFn,
    pub g: CoefficientFn,
}

const NAMES: [&str; 6] = ["a", "b", "c", "d", "f", "g"];
const SLOPE_NAMES: [&str; 6] = ["a'", "b'", "c'", "d'", "f'", "g'"];

impl CoefficientSet {
    /// All coefficients zero except the given `a`, `b`.
    pub fn oscillator(a: impl Into<CoefficientFn>, b: impl Into<CoefficientFn>) -> Self {
        CoefficientSet {
            a: a.into(),
            b: b.into(),
            c: CoefficientFn::constant(0.0),
            d: CoefficientFn::constant(0.0),
            f: CoefficientFn::constant(0.0),
            g: CoefficientFn::constant(0.0),
        }
    }

    /// `a = b = 1/2`: the unit-frequency oscillator.
    pub fn static_oscillator() -> Self {
        Self::oscillator(Profile::Constant(0.5), Profile::Constant(0.5))
    }

    /// `a = e^{−rate t}/2`, `b = e^{rate t}/2`.
    pub fn caldirola_kanai(rate: f64) -> Self {
        Self::oscillator(
            Profile::Exponential {
                scale: 0.5,
                rate: -rate,
            },
            Profile::Exponential { scale: 0.5, rate },
        )
    }

    pub fn with_c(mut self, c: impl Into<CoefficientFn>) -> Self {
        self.c = c.into();
        self
    }

    pub fn with_d(mut self, d: impl Into<CoefficientFn>) -> Self {
        self.d = d.into();
        self
    }

    pub fn with_f(mut self, f: impl Into<CoefficientFn>) -> Self {
        self.f = f.into();
        self
    }

    pub fn with_g(mut self, g: impl Into<CoefficientFn>) -> Self {
        self.g = g.into();
        self
    }

    fn fns(&self) -> [&CoefficientFn; 6] {
        [&self.a, &self.b, &self.c, &self.d, &self.f, &self.g]
    }

    pub fn has_drive(&self) -> bool {
        !(self.f.is_identically_zero() && self.g.is_identically_zero())
    }

    /// The six coefficient values at `t`.
    pub fn eval(&self, t: f64) -> Result<Coefficients> {
        Ok(self.eval_jet(t)?.value)
    }

    /// Values and derivatives at `t`; any non-finite entry is an error naming the function.
    pub fn eval_jet(&self, t: f64) -> Result<CoefficientJet> {
        let mut v = [0.0; 6];
        let mut s = [0.0; 6];
        for (i, f) in self.fns().iter().enumerate() {
            let (value, slope) = f.eval(t);
            if !value.is_finite() {
                return Err(Error::CoefficientEval { name: NAMES[i], t });
            }
            if !slope.is_finite() {
                return Err(Error::CoefficientEval {
                    name: SLOPE_NAMES[i],
                    t,
                });
            }
            v[i] = value;
            s[i] = slope;
        }
        let pack = |x: [f64; 6]| Coefficients {
            a: x[0],
            b: x[1],
            c: x[2],
            d: x[3],
            f: x[4],
            g: x[5],
        };
        Ok(CoefficientJet {
            value: pack(v),
            slope: pack(s),
        })
    }
}

/// Builds `(a, b)` from a factorized medium with `c = d = f = g = 0`.
///
/// The loss exponent `∫_0^t chi/xi ds` is cached on `grid` and completed between
/// nodes by Gauss-Legendre quadrature.
pub fn medium_to_hamiltonian(profile: &MediumProfile, grid: &TimeGrid) -> Result<CoefficientSet> {
    profile.validate(grid)?;
    let integrand_profile = profile.clone();
    let loss_exponent = CumulativeIntegral::new(
        grid,
        Arc::new(move |t| integrand_profile.chi.value(t) / integrand_profile.xi.value(t)),
    );
    let terms = Arc::new(MediumTerms {
        profile: profile.clone(),
        loss_exponent,
    });
    Ok(CoefficientSet::oscillator(
        CoefficientFn::MediumA(terms.clone()),
        CoefficientFn::MediumB(terms),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{E, PI};

    fn grid() -> TimeGrid {
        TimeGrid::with_spacing(10.0, 0.01).unwrap()
    }

    #[test]
    fn static_oscillator_values() {
        let c = CoefficientSet::static_oscillator().eval(0.7).unwrap();
        assert_eq!(
            c,
            Coefficients {
                a: 0.5,
                b: 0.5,
                ..Default::default()
            }
        );
    }

    #[test]
    fn caldirola_kanai_values() {
        let c = CoefficientSet::caldirola_kanai(2.0).eval(1.0).unwrap();
        assert!((c.a - (-2.0f64).exp() / 2.0).abs() < 1e-16);
        assert!((c.b - E * E / 2.0).abs() < 1e-14);
        assert_eq!((c.c, c.d, c.f, c.g), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn parametric_modulation_value() {
        let set = CoefficientSet::oscillator(
            Profile::Constant(0.5),
            Profile::Sinusoid {
                offset: 0.5,
                amplitude: 0.05,
                frequency: 2.0,
                phase: 0.0,
            },
        );
        assert!((set.eval(PI / 4.0).unwrap().b - 0.55).abs() < 1e-15);
    }

    #[test]
    fn non_finite_coefficient_names_function() {
        let table = CubicSpline::new(vec![0.0, 1.0], vec![1.0, 2.0]).unwrap();
        let set = CoefficientSet::static_oscillator().with_g(Profile::Table(table));
        match set.eval(2.0) {
            Err(Error::CoefficientEval { name, t }) => {
                assert_eq!(name, "g");
                assert_eq!(t, 2.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn vacuum_medium_is_static_oscillator() {
        let set = medium_to_hamiltonian(&MediumProfile::vacuum(1.0), &grid()).unwrap();
        for t in [0.0, 1.3, 9.99] {
            let c = set.eval(t).unwrap();
            assert!((c.a - 0.5).abs() < 1e-16 && (c.b - 0.5).abs() < 1e-16);
        }
    }

    #[test]
    fn constant_conductivity_gives_exponentials() {
        let k = 0.3;
        let mut m = MediumProfile::vacuum(1.0);
        m.chi = Profile::Constant(k);
        let set = medium_to_hamiltonian(&m, &grid()).unwrap();
        for t in [0.0, 0.517, 4.0, 10.0] {
            let c = set.eval(t).unwrap();
            assert!((c.a - (-k * t).exp() / 2.0).abs() < 1e-15);
            assert!((2.0 * c.b / (k * t).exp() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn modulated_permittivity_substitution() {
        let m = MediumProfile {
            xi: Profile::Sinusoid {
                offset: 1.0,
                amplitude: 0.2,
                frequency: 1.0,
                phase: 0.0,
            },
            eta: Profile::Constant(1.0),
            chi: Profile::zero(),
            upsilon: 2.0,
            field_scale_omega: 1.0,
            field_scale_varpi: 1.0,
        };
        let c = medium_to_hamiltonian(&m, &grid()).unwrap().eval(PI / 2.0).unwrap();
        assert!((c.a - 1.0 / 2.4).abs() < 1e-15);
        assert!((c.b - 2.0).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_permittivity_is_rejected() {
        let mut m = MediumProfile::vacuum(1.0);
        m.xi = Profile::Sinusoid {
            offset: 0.5,
            amplitude: 1.0,
            frequency: 1.0,
            phase: 0.0,
        };
        assert!(matches!(
            medium_to_hamiltonian(&m, &grid()),
            Err(Error::InvalidMedium { name: "xi", .. })
        ));
    }

    #[test]
    fn medium_slopes_match_finite_differences() {
        let m = MediumProfile {
            xi: Profile::Sinusoid {
                offset: 1.0,
                amplitude: 0.2,
                frequency: 1.3,
                phase: 0.1,
            },
            eta: Profile::Sinusoid {
                offset: 1.1,
                amplitude: -0.1,
                frequency: 0.7,
                phase: 0.0,
            },
            chi: Profile::Constant(0.1),
            upsilon: 1.5,
            field_scale_omega: 1.0,
            field_scale_varpi: 1.0,
        };
        let set = medium_to_hamiltonian(&m, &grid()).unwrap();
        let h = 1e-5;
        for t in [0.5, 3.21, 7.0] {
            let jet = set.eval_jet(t).unwrap();
            let fd_a = (set.eval(t + h).unwrap().a - set.eval(t - h).unwrap().a) / (2.0 * h);
            let fd_b = (set.eval(t + h).unwrap().b - set.eval(t - h).unwrap().b) / (2.0 * h);
            assert!((jet.slope.a - fd_a).abs() < 1e-8);
            assert!((jet.slope.b - fd_b).abs() < 1e-8);
        }
    }

    fn positive_profile() -> impl Strategy<Value = Profile> {
        (0.5f64..2.0, 0.0f64..0.4, 0.1f64..3.0, 0.0f64..6.0).prop_map(
            |(offset, amplitude, frequency, phase)| Profile::Sinusoid {
                offset,
                amplitude,
                frequency,
                phase,
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn product_ab_cancels_loss(xi in positive_profile(), eta in positive_profile(),
                                   chi in 0.0f64..0.5, upsilon in 0.2f64..3.0) {
            let g = TimeGrid::with_spacing(5.0, 0.05).unwrap();
            let m = MediumProfile { xi, eta, chi: Profile::Constant(chi), upsilon,
                                    field_scale_omega: 1.0, field_scale_varpi: 1.0 };
            let set = medium_to_hamiltonian(&m, &g).unwrap();
            for &t in g.times() {
                let c = set.eval(t).unwrap();
                let expected = upsilon * upsilon / (m.xi.value(t) * m.eta.value(t));
                prop_assert!((4.0 * c.a * c.b / expected - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn lossless_invariant_product(xi in positive_profile(), eta in positive_profile(),
                                      upsilon in 0.2f64..3.0) {
            let g = TimeGrid::with_spacing(5.0, 0.05).unwrap();
            let m = MediumProfile { xi, eta, chi: Profile::zero(), upsilon,
                                    field_scale_omega: 1.0, field_scale_varpi: 1.0 };
            let set = medium_to_hamiltonian(&m, &g).unwrap();
            for &t in g.times() {
                let c = set.eval(t).unwrap();
                let p = c.a * c.b * m.xi.value(t) * m.eta.value(t);
                prop_assert!((p - upsilon * upsilon / 4.0).abs() < 1e-12);
            }
        }
    }
}
