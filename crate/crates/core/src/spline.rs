use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw knot table as it appears in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// Natural cubic spline through a table of samples.
///
/// Evaluation outside the knot range returns NaN so that callers treat it as a
/// non-finite coefficient rather than silently extrapolating.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableSpec", into = "TableSpec")]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    // second derivatives at the knots
    curvature: Vec<f64>,
}

impl TryFrom<TableSpec> for CubicSpline {
    type Error = Error;

    fn try_from(spec: TableSpec) -> Result<Self> {
        CubicSpline::new(spec.times, spec.values)
    }
}

impl From<CubicSpline> for TableSpec {
    fn from(s: CubicSpline) -> Self {
        TableSpec {
            times: s.knots,
            values: s.values,
        }
    }
}

impl CubicSpline {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = knots.len();
        if n != values.len() {
            return Err(Error::InvalidTable(format!(
                "{} times but {} values",
                n,
                values.len()
            )));
        }
        if n < 2 {
            return Err(Error::InvalidTable("need at least two samples".into()));
        }
        if knots.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidTable("non-finite sample".into()));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTable("times must be strictly increasing".into()));
        }

        // Tridiagonal system for the interior second derivatives (Thomas algorithm).
        let mut curvature = vec![0.0; n];
        if n > 2 {
            let m = n - 2;
            let mut diag = vec![0.0; m];
            let mut upper = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            for i in 0..m {
                let h0 = knots[i + 1] - knots[i];
                let h1 = knots[i + 2] - knots[i + 1];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0
                    * ((values[i + 2] - values[i + 1]) / h1 - (values[i + 1] - values[i]) / h0);
            }
            for i in 1..m {
                let lower = knots[i + 1] - knots[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            curvature[m] = rhs[m - 1] / diag[m - 1];
            for i in (0..m - 1).rev() {
                curvature[i + 1] = (rhs[i] - upper[i] * curvature[i + 2]) / diag[i];
            }
        }
        Ok(CubicSpline {
            knots,
            values,
            curvature,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    fn segment(&self, t: f64) -> Option<usize> {
        let (lo, hi) = self.domain();
        // Allow a rounding-level overshoot at the ends.
        let slack = 1e-12 * (hi - lo).max(1.0);
        if !(t >= lo - slack && t <= hi + slack) {
            return None;
        }
        let i = match self.knots.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        };
        Some(i.min(self.knots.len() - 2))
    }

    /// Value and first derivative at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let Some(i) = self.segment(t) else {
            return (f64::NAN, f64::NAN);
        };
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - t) / h;
        let b = (t - self.knots[i]) / h;
        let (m0, m1) = (self.curvature[i], self.curvature[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let value = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let slope = (y1 - y0) / h + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        (value, slope)
    }
}
