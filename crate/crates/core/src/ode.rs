//! Adaptive Dormand-Prince 5(4) integrator with continuous (dense) output.
//!
//! Solutions are reported on a caller-supplied list of output times; the
//! integrator picks its own steps and interpolates with the method's
//! fourth-order continuous extension.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Local error tolerances for the adaptive integrators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub tol: Tolerances,
    pub max_steps: usize,
    pub max_step: f64,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Dopri5::new(Tolerances::default())
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        if *c != 0.0 {
            for i in 0..N {
                out[i] += h * c * k[i];
            }
        }
    }
    out
}

impl Dopri5 {
    pub fn new(tol: Tolerances) -> Self {
        Dopri5 {
            tol,
            max_steps: 2_000_000,
            max_step: 0.25,
        }
    }

    fn error_norm<const N: usize>(&self, y0: &[f64; N], y1: &[f64; N], err: &[f64; N]) -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            let scale = self.tol.atol + self.tol.rtol * y0[i].abs().max(y1[i].abs());
            acc += (err[i] / scale).powi(2);
        }
        (acc / N as f64).sqrt()
    }

    fn initial_step<const N: usize, F>(
        &self,
        rhs: &mut F,
        t0: f64,
        y0: &[f64; N],
        f0: &[f64; N],
        span: f64,
    ) -> Result<f64>
    where
        F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    {
        let scale = |i: usize| self.tol.atol + self.tol.rtol * y0[i].abs();
        let d0 = (0..N).map(|i| (y0[i] / scale(i)).powi(2)).sum::<f64>().sqrt();
        let d1 = (0..N).map(|i| (f0[i] / scale(i)).powi(2)).sum::<f64>().sqrt();
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h0 = h0.min(span).min(self.max_step);
        let y1 = axpy(y0, h0, &[(1.0, f0)]);
        let f1 = rhs(t0 + h0, &y1)?;
        let d2 = (0..N)
            .map(|i| ((f1[i] - f0[i]) / scale(i)).powi(2))
            .sum::<f64>()
            .sqrt()
            / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        Ok((100.0 * h0).min(h1).min(span).min(self.max_step))
    }

    /// Integrates `y' = rhs(t, y)` from `times[0]` with `y(times[0]) = y0` and returns the
    /// solution at every entry of `times` (which must be increasing).
    pub fn solve<const N: usize, F>(&self, mut rhs: F, y0: [f64; N], times: &[f64]) -> Result<Vec<[f64; N]>>
    where
        F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    {
        let mut out = Vec::with_capacity(times.len());
        let Some((&t_start, rest)) = times.split_first() else {
            return Ok(out);
        };
        out.push(y0);
        if rest.is_empty() {
            return Ok(out);
        }
        let t_end = *times.last().unwrap();
        let span = t_end - t_start;

        let mut t = t_start;
        let mut y = y0;
        let mut k1 = rhs(t, &y)?;
        let mut h = self.initial_step(&mut rhs, t, &y, &k1, span)?;
        let mut next_out = 1;
        let mut steps = 0usize;
        let mut reject_streak = false;

        while next_out < times.len() {
            if steps >= self.max_steps {
                return Err(Error::TooManySteps {
                    t,
                    max_steps: self.max_steps,
                });
            }
            steps += 1;
            let min_step = 16.0 * f64::EPSILON * t.abs().max(1.0);
            if h < min_step {
                return Err(Error::Stiffness { t, step: h });
            }
            let last = t + h >= t_end - min_step;
            if last {
                h = t_end - t;
            }

            let k2 = rhs(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]))?;
            let k3 = rhs(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]))?;
            let k4 = rhs(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
            let k5 = rhs(
                t + C5 * h,
                &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            )?;
            let k6 = rhs(
                t + h,
                &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            )?;
            let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let t_new = if last { t_end } else { t + h };
            let k7 = rhs(t_new, &y_new)?;

            let mut err = [0.0; N];
            for i in 0..N {
                err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            let en = self.error_norm(&y, &y_new, &err);
            if !en.is_finite() {
                h *= 0.1;
                reject_streak = true;
                continue;
            }

            if en <= 1.0 {
                // accepted: emit dense output for every requested time inside (t, t_new]
                let mut dense: Option<[[f64; N]; 5]> = None;
                while next_out < times.len() && times[next_out] <= t_new {
                    let target = times[next_out];
                    if target == t_new {
                        out.push(y_new);
                    } else {
                        let r = dense.get_or_insert_with(|| {
                            let mut r = [[0.0; N]; 5];
                            for i in 0..N {
                                let ydiff = y_new[i] - y[i];
                                let bspl = h * k1[i] - ydiff;
                                r[0][i] = y[i];
                                r[1][i] = ydiff;
                                r[2][i] = bspl;
                                r[3][i] = ydiff - h * k7[i] - bspl;
                                r[4][i] = h
                                    * (D1 * k1[i]
                                        + D3 * k3[i]
                                        + D4 * k4[i]
                                        + D5 * k5[i]
                                        + D6 * k6[i]
                                        + D7 * k7[i]);
                            }
                            r
                        });
                        let theta = (target - t) / h;
                        let theta1 = 1.0 - theta;
                        let mut v = [0.0; N];
                        for i in 0..N {
                            v[i] = r[0][i]
                                + theta
                                    * (r[1][i]
                                        + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])));
                        }
                        out.push(v);
                    }
                    next_out += 1;
                }
                t = t_new;
                y = y_new;
                k1 = k7;
                let mut fac = 0.9 * en.max(1e-10).powf(-0.2);
                fac = fac.clamp(0.2, 10.0);
                if reject_streak {
                    fac = fac.min(1.0);
                }
                reject_streak = false;
                h = (h * fac).min(self.max_step);
            } else {
                let fac = (0.9 * en.powf(-0.2)).max(0.2);
                h *= fac;
                reject_streak = true;
            }
        }
        Ok(out)
    }
}
