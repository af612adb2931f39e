//! Shared fixtures for the quadfield benchmarks.

use quadfield::scenario::Resolved;
use quadfield::{Scenario, bundled_scenario};

/// Scenarios covering the preset, driven and medium coefficient paths.
pub const SOLVER_SCENARIOS: [&str; 4] = [
    "static_oscillator",
    "caldirola_kanai",
    "driven_oscillator",
    "lossy_medium",
];

/// A bundled scenario with its coefficients materialized on its own grid.
pub fn fixture(name: &str) -> (Scenario, Resolved) {
    let scenario = bundled_scenario(name).expect("bundled scenario parses");
    let resolved = scenario.resolve().expect("bundled scenario resolves");
    (scenario, resolved)
}
