use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Master time grid: strictly increasing sample times starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    /// Uniform grid on `[0, t_max]` with `steps` intervals.
    pub fn uniform(t_max: f64, steps: usize) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidGrid(format!("t_max must be positive, got {t_max}")));
        }
        if steps == 0 {
            return Err(Error::InvalidGrid("need at least one step".into()));
        }
        let dt = t_max / steps as f64;
        let mut times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
        times[steps] = t_max;
        Ok(TimeGrid { times })
    }

    /// Uniform grid whose spacing is the largest value not exceeding `dt` that divides `t_max`.
    pub fn with_spacing(t_max: f64, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        let steps = (t_max / dt - 1e-9).ceil().max(1.0) as usize;
        Self::uniform(t_max, steps)
    }

    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidGrid("need at least two points".into()));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidGrid(format!("grid must start at 0, got {}", times[0])));
        }
        if let Some(w) = times.windows(2).find(|w| w[1].partial_cmp(&w[0]) != Some(Ordering::Greater) || !w[1].is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "grid must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(TimeGrid { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        *self.times.last().expect("grid is never empty")
    }

    /// Index of the last node `<= t` (clamped to a valid interval start).
    pub fn interval_of(&self, t: f64) -> usize {
        match self.times.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => i.min(self.times.len() - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.times.len() - 2),
        }
    }

    /// Index of the grid node nearest to `t`.
    pub fn nearest(&self, t: f64) -> usize {
        let i = self.interval_of(t);
        if (t - self.times[i]).abs() <= (self.times[i + 1] - t).abs() {
            i
        } else {
            i + 1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_hits_endpoint_exactly() {
        let g = TimeGrid::uniform(std::f64::consts::PI, 1000).unwrap();
        assert_eq!(g.len(), 1001);
        assert_eq!(g.t_max(), std::f64::consts::PI);
        assert_eq!(g.times()[0], 0.0);
    }

    #[test]
    fn spacing_rounds_to_divisor() {
        let g = TimeGrid::with_spacing(10.0, 0.01).unwrap();
        assert_eq!(g.len(), 1001);
        let g = TimeGrid::with_spacing(1.0, 0.3).unwrap();
        assert_eq!(g.len(), 5);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(TimeGrid::uniform(-1.0, 10).is_err());
        assert!(TimeGrid::from_times(vec![0.0, 1.0, 1.0]).is_err());
        assert!(TimeGrid::from_times(vec![0.5, 1.0]).is_err());
    }

    #[test]
    fn interval_lookup() {
        let g = TimeGrid::uniform(1.0, 10).unwrap();
        assert_eq!(g.interval_of(0.0), 0);
        assert_eq!(g.interval_of(0.55), 5);
        assert_eq!(g.interval_of(1.0), 9);
        assert_eq!(g.interval_of(2.0), 9);
        assert_eq!(g.nearest(0.56), 6);
    }
}
