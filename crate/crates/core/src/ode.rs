//! Adaptive Dormand–Prince 5(4) integrator for real first-order systems.
//!
//! Complex systems (the density matrix) are integrated by viewing the
//! interleaved `(re, im)` storage as a real vector.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{abs, powf, sqrt};
use crate::{Error, Result};

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

// 5th-order weights minus the embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

/// Step-size controller settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    /// Smallest step the error controller may ask for before giving up.
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            h_min: 1e-18,
            max_steps: 50_000_000,
        }
    }
}

/// Counters from one integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl Dopri5 {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    /// Integrates `dy/dt = rhs(t, y)` from `grid[0]` and reports the state at
    /// every grid time through `observe(index, t, y)`.
    ///
    /// Steps are clipped so that every grid point is hit exactly; the output
    /// therefore depends only on the inputs, never on timing.
    pub fn solve<F, O>(&self, mut rhs: F, y0: &[f64], grid: &[f64], mut observe: O) -> Result<Stats>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
        O: FnMut(usize, f64, &[f64]) -> Result<()>,
    {
        check_grid(grid)?;
        let dim = y0.len();
        let mut stats = Stats::default();
        let mut y = y0.to_vec();
        observe(0, grid[0], &y)?;
        if grid.len() == 1 {
            return Ok(stats);
        }

        let mut k1 = vec![0.0; dim];
        let mut k2 = vec![0.0; dim];
        let mut k3 = vec![0.0; dim];
        let mut k4 = vec![0.0; dim];
        let mut k5 = vec![0.0; dim];
        let mut k6 = vec![0.0; dim];
        let mut k7 = vec![0.0; dim];
        let mut tmp = vec![0.0; dim];
        let mut y_new = vec![0.0; dim];

        let mut t = grid[0];
        rhs(t, &y, &mut k1);
        stats.evaluations += 1;
        let mut h = self.initial_step(&mut rhs, t, &y, &k1, grid[grid.len() - 1] - t, &mut stats);

        for (idx, &t_out) in grid.iter().enumerate().skip(1) {
            while t < t_out {
                if stats.accepted + stats.rejected >= self.max_steps {
                    return Err(Error::StepSizeUnderflow { t, h });
                }
                let remaining = t_out - t;
                let clipped = h >= remaining;
                let step = if clipped { remaining } else { h };

                stage(&mut tmp, &y, step, &[(A21, &k1)]);
                rhs(t + C2 * step, &tmp, &mut k2);
                stage(&mut tmp, &y, step, &[(A31, &k1), (A32, &k2)]);
                rhs(t + C3 * step, &tmp, &mut k3);
                stage(&mut tmp, &y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
                rhs(t + C4 * step, &tmp, &mut k4);
                stage(
                    &mut tmp,
                    &y,
                    step,
                    &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)],
                );
                rhs(t + C5 * step, &tmp, &mut k5);
                stage(
                    &mut tmp,
                    &y,
                    step,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                );
                rhs(t + step, &tmp, &mut k6);
                stage(
                    &mut y_new,
                    &y,
                    step,
                    &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
                );
                let t_new = if clipped { t_out } else { t + step };
                rhs(t_new, &y_new, &mut k7);
                stats.evaluations += 6;

                let mut acc = 0.0;
                for i in 0..dim {
                    let err = step
                        * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                            + E7 * k7[i]);
                    let scale = self.atol + self.rtol * abs(y[i]).max(abs(y_new[i]));
                    let r = err / scale;
                    acc += r * r;
                }
                let err_norm = sqrt(acc / dim.max(1) as f64);
                let err_norm = if err_norm.is_finite() { err_norm } else { f64::INFINITY };

                if err_norm <= 1.0 {
                    stats.accepted += 1;
                    t = t_new;
                    core::mem::swap(&mut y, &mut y_new);
                    // FSAL: the last stage is the first stage of the next step
                    core::mem::swap(&mut k1, &mut k7);
                    let grow = if err_norm == 0.0 {
                        FAC_MAX
                    } else {
                        (SAFETY * powf(err_norm, -0.2)).clamp(FAC_MIN, FAC_MAX)
                    };
                    // a clipped step says nothing about how large h could be
                    if !clipped || step * grow < h {
                        h = step * grow;
                    }
                } else {
                    stats.rejected += 1;
                    h = step * (SAFETY * powf(err_norm, -0.2)).clamp(FAC_MIN, 1.0);
                    if h < self.h_min || t + h == t {
                        return Err(Error::StepSizeUnderflow { t, h });
                    }
                }
            }
            observe(idx, t, &y)?;
        }
        Ok(stats)
    }

    fn initial_step<F>(
        &self,
        rhs: &mut F,
        t: f64,
        y: &[f64],
        f0: &[f64],
        span: f64,
        stats: &mut Stats,
    ) -> f64
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let dim = y.len().max(1) as f64;
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for (yi, fi) in y.iter().zip(f0) {
            let sc = self.atol + self.rtol * abs(*yi);
            d0 += (yi / sc) * (yi / sc);
            d1 += (fi / sc) * (fi / sc);
        }
        d0 = sqrt(d0 / dim);
        d1 = sqrt(d1 / dim);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6 * span
        } else {
            0.01 * d0 / d1
        }
        .min(span);

        let y1: Vec<f64> = y.iter().zip(f0).map(|(yi, fi)| yi + h0 * fi).collect();
        let mut f1 = vec![0.0; y.len()];
        rhs(t + h0, &y1, &mut f1);
        stats.evaluations += 1;
        let mut d2 = 0.0;
        for ((yi, a), b) in y.iter().zip(f0).zip(&f1) {
            let sc = self.atol + self.rtol * abs(*yi);
            d2 += ((b - a) / sc) * ((b - a) / sc);
        }
        d2 = sqrt(d2 / dim) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6 * span)
        } else {
            powf(0.01 / d1.max(d2), 0.2)
        };
        (100.0 * h0).min(h1).min(span)
    }
}

fn stage(out: &mut [f64], y: &[f64], h: f64, terms: &[(f64, &Vec<f64>)]) {
    for i in 0..y.len() {
        let mut acc = 0.0;
        for (a, k) in terms {
            acc += a * k[i];
        }
        out[i] = y[i] + h * acc;
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter {
            name: "time grid",
            reason: "must not be empty",
        });
    }
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "time grid",
            reason: "must be finite",
        });
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter {
            name: "time grid",
            reason: "must be strictly increasing",
        });
    }
    Ok(())
}

/// `n + 1` equally spaced samples on `[0, t_max]`.
pub fn uniform_grid(t_max: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n).map(|i| t_max * i as f64 / n as f64).collect()
}
