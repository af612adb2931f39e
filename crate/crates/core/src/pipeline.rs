//! Deterministic pipeline: characteristic basis → complex frame → closed-form
//! states → observables.

use crate::characteristic::{CharacteristicBasis, CharacteristicOptions, integrate_characteristic};
use crate::coefficients::{CoefficientSet, MediumProfile};
use crate::ermakov::{ComplexFrame, ErmakovInit, ErmakovState, build_frame, solve_path};
use crate::error::Result;
use crate::grid::TimeGrid;
use crate::observables::{FockObservables, field_scales, observe_path};
use crate::ode::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    pub tol: Tolerances,
    pub mu1_init: f64,
    /// `|α|` below which an `n = 0` instant is flagged as minimum uncertainty.
    pub alpha_tol: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            tol: Tolerances::default(),
            mu1_init: 1.0,
            alpha_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Pipeline {
    pub set: CoefficientSet,
    pub medium: Option<MediumProfile>,
    pub init: ErmakovInit,
    pub fock_index: u32,
    pub options: PipelineOptions,
    pub basis: CharacteristicBasis,
    pub frame: ComplexFrame,
    pub states: Vec<ErmakovState>,
    pub observables: Vec<FockObservables>,
}

impl Pipeline {
    pub fn run(
        set: CoefficientSet,
        medium: Option<MediumProfile>,
        grid: &TimeGrid,
        init: ErmakovInit,
        fock_index: u32,
        options: PipelineOptions,
    ) -> Result<Self> {
        init.validate().map_err(|e| e.in_stage("ermakov"))?;
        let basis = integrate_characteristic(
            &set,
            grid,
            &CharacteristicOptions {
                tol: options.tol,
                mu1_init: options.mu1_init,
            },
        )
        .map_err(|e| e.in_stage("characteristic"))?;
        let frame =
            build_frame(&init, &basis, &set, options.tol).map_err(|e| e.in_stage("ermakov"))?;
        let states = solve_path(&init, &frame, &basis, &set).map_err(|e| e.in_stage("ermakov"))?;
        let observables = observe_path(
            &states,
            &basis.lambda,
            &set,
            fock_index,
            field_scales(medium.as_ref()),
            options.alpha_tol,
        )
        .map_err(|e| e.in_stage("observables"))?;
        Ok(Pipeline {
            set,
            medium,
            init,
            fock_index,
            options,
            basis,
            frame,
            states,
            observables,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.basis.grid
    }
}
