//! Heisenberg evolution for the general one-dimensional quadratic Hamiltonian
//! `H = a p² + b x² + c xp − i d − f x − g p` with time-dependent real
//! coefficients.
//!
//! The ladder operator is parametrized by the six functions `(α, β, γ, δ, ε, κ)`
//! of an Ermakov-type system. Its solution is evaluated in closed form from two
//! standard solutions `μ₀, μ₁` of a linear second-order equation, then turned
//! into Fock-state observables. Media with time-dependent permittivity,
//! permeability and conductivity map onto `(a, b)`, and ensembles over randomly
//! perturbed media are supported.
//!
//! ```
//! use quadfield::{CoefficientSet, ErmakovInit, Pipeline, PipelineOptions, TimeGrid};
//!
//! let grid = TimeGrid::with_spacing(10.0, 0.01).unwrap();
//! let run = Pipeline::run(
//!     CoefficientSet::static_oscillator(),
//!     None,
//!     &grid,
//!     ErmakovInit::squeezed(2f64.sqrt()),
//!     0,
//!     PipelineOptions::default(),
//! )
//! .unwrap();
//! assert!(run.observables.iter().all(|o| o.product >= 0.25 - 1e-12));
//! ```

pub mod characteristic;
pub mod checks;
pub mod coefficients;
pub mod ermakov;
pub mod error;
pub mod grid;
pub mod observables;
pub mod ode;
pub mod output;
pub mod pipeline;
pub mod quadrature;
pub mod scenario;
pub mod spline;
pub mod stochastic;
pub mod verify;

pub use characteristic::{
    CharacteristicBasis, CharacteristicOptions, build_tau_sigma, classical_mode_equivalence,
    compute_lambda, integrate_characteristic,
};
pub use checks::{CheckOutcome, InvariantReport, Thresholds, run_checks};
pub use coefficients::{
    CoefficientFn, CoefficientJet, CoefficientSet, Coefficients, MediumProfile, Profile,
    medium_to_hamiltonian,
};
pub use ermakov::{
    ComplexFrame, DrivenPieces, ErmakovInit, ErmakovState, QuasiInvariantReport, build_frame,
    homogeneous_driven, homogeneous_state, quasi_invariants, solve_ermakov, solve_path,
};
pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use observables::{
    FockObservables, Variances, hamiltonian_expectation, means, mode_amplitudes, phase_rates,
    phase_rates_via_transport, variances,
};
pub use ode::{Dopri5, Tolerances};
pub use pipeline::{Pipeline, PipelineOptions};
pub use scenario::{CoefficientSource, GridSpec, Scenario, bundled_scenario, bundled_scenarios};
pub use spline::CubicSpline;
pub use stochastic::{
    EnsembleSummary, NoiseModel, NoiseSpec, NoiseTarget, run_ensemble, sample_path,
};
pub use verify::{
    OperatorCoefficients, ansatz_coefficients, heisenberg_residual, riccati_oracle,
};
