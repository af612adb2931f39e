//! Cumulative integrals of smooth functions of time.
//!
//! Values are cached at grid nodes and completed between nodes with a local
//! Gauss-Legendre rule, so `value(t)` can be called at arbitrary `t` (as an ODE
//! right-hand side does) and its derivative is the integrand itself.

use std::fmt;
use std::sync::Arc;

use crate::grid::TimeGrid;

// 8-point Gauss-Legendre rule on [-1, 1].
const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Integral of `f` over `[lo, hi]` with the 8-point Gauss-Legendre rule.
pub fn gauss_legendre<F: Fn(f64) -> f64 + ?Sized>(f: &F, lo: f64, hi: f64) -> f64 {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let mut acc = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
        acc += w * (f(mid - half * x) + f(mid + half * x));
    }
    acc * half
}

pub type Integrand = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `I(t) = ∫_0^t f(s) ds`, cached on a grid.
#[derive(Clone)]
pub struct CumulativeIntegral {
    nodes: Vec<f64>,
    values: Vec<f64>,
    integrand: Integrand,
}

impl fmt::Debug for CumulativeIntegral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CumulativeIntegral")
            .field("nodes", &self.nodes.len())
            .field("total", &self.values.last())
            .finish()
    }
}

impl CumulativeIntegral {
    pub fn new(grid: &TimeGrid, integrand: Integrand) -> Self {
        let nodes = grid.times().to_vec();
        let mut values = Vec::with_capacity(nodes.len());
        values.push(0.0);
        let mut acc = 0.0;
        for w in nodes.windows(2) {
            acc += gauss_legendre(&*integrand, w[0], w[1]);
            values.push(acc);
        }
        CumulativeIntegral {
            nodes,
            values,
            integrand,
        }
    }

    /// Values at the grid nodes.
    pub fn node_values(&self) -> &[f64] {
        &self.values
    }

    pub fn integrand(&self, t: f64) -> f64 {
        (self.integrand)(t)
    }

    pub fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return -gauss_legendre(&*self.integrand, t, 0.0);
        }
        let k = match self.nodes.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => return self.values[i],
            Err(i) => i - 1,
        };
        let t0 = self.nodes[k];
        // Beyond the last node, split so each panel stays short.
        if k + 1 == self.nodes.len() {
            let h = self.nodes[k] - self.nodes[k - 1];
            let mut acc = self.values[k];
            let mut lo = t0;
            while lo < t {
                let hi = (lo + h).min(t);
                acc += gauss_legendre(&*self.integrand, lo, hi);
                lo = hi;
            }
            return acc;
        }
        self.values[k] + gauss_legendre(&*self.integrand, t0, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gauss_legendre_is_exact_for_degree_15() {
        let f = |x: f64| x.powi(15) + 3.0 * x.powi(6) - 1.0;
        let exact = |x: f64| x.powi(16) / 16.0 + 3.0 * x.powi(7) / 7.0 - x;
        let got = gauss_legendre(&f, -0.3, 1.7);
        assert!((got - (exact(1.7) - exact(-0.3))).abs() < 1e-12);
    }

    #[test]
    fn cumulative_sine_matches_closed_form_off_grid() {
        let grid = TimeGrid::with_spacing(PI, 0.01).unwrap();
        let ci = CumulativeIntegral::new(&grid, Arc::new(f64::sin));
        for &t in &[0.0, 0.123, 1.0, 2.5, PI, 3.3] {
            assert!((ci.value(t) - (1.0 - t.cos())).abs() < 1e-13, "t = {t}");
        }
        assert!((ci.node_values().last().unwrap() - 2.0).abs() < 1e-13);
    }
}
