//! Phenomenological damped-Rabi model and envelope diagnostics.
//!
//! `P↓(t) = ½(1 + Σ_n p_n cos(2·rabi·t√(n+1)) e^{−γ_n t})` with
//! `γ_n = γ₀(n+1)^exponent`.

use alloc::vec::Vec;

use crate::hierarchy::{self, HierarchyParams};
use crate::math::{abs, cos, exp, ln, powf, sqrt};
use crate::states::TimeSeries;
use crate::{Error, Result};

pub const DEFAULT_EXPONENT: f64 = 0.7;

#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicParams {
    p_dist: Vec<f64>,
    rabi: f64,
    gamma0: f64,
    exponent: f64,
}

impl HeuristicParams {
    /// `p_dist[n]` is the initial weight of Fock state `n`.
    pub fn new(p_dist: Vec<f64>, rabi: f64, gamma0: f64) -> Result<Self> {
        if p_dist.is_empty() || p_dist.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "p_dist",
                reason: "weights must be finite and nonnegative",
            });
        }
        let total: f64 = p_dist.iter().sum();
        if abs(total - 1.0) > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "p_dist",
                reason: "weights must sum to 1",
            });
        }
        if !(gamma0 >= 0.0) || !gamma0.is_finite() {
            return Err(Error::InvalidParameter {
                name: "gamma0",
                reason: "must be finite and nonnegative",
            });
        }
        if !rabi.is_finite() {
            return Err(Error::InvalidParameter {
                name: "rabi",
                reason: "must be finite",
            });
        }
        Ok(Self {
            p_dist,
            rabi,
            gamma0,
            exponent: DEFAULT_EXPONENT,
        })
    }

    /// All weight in Fock state `n0`.
    pub fn fock(n0: usize, rabi: f64, gamma0: f64) -> Result<Self> {
        let mut p = alloc::vec![0.0; n0 + 1];
        p[n0] = 1.0;
        Self::new(p, rabi, gamma0)
    }

    pub fn with_exponent(mut self, exponent: f64) -> Result<Self> {
        if !exponent.is_finite() {
            return Err(Error::InvalidParameter {
                name: "exponent",
                reason: "must be finite",
            });
        }
        self.exponent = exponent;
        Ok(self)
    }

    pub fn p_dist(&self) -> &[f64] {
        &self.p_dist
    }

    pub fn rabi(&self) -> f64 {
        self.rabi
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }
}

pub fn gamma_n(p: &HeuristicParams, n: usize) -> f64 {
    p.gamma0 * powf((n + 1) as f64, p.exponent)
}

pub fn p_down_heuristic(p: &HeuristicParams, t: f64) -> f64 {
    let sum: f64 = p
        .p_dist
        .iter()
        .enumerate()
        .filter(|(_, &w)| w != 0.0)
        .map(|(n, &w)| {
            let omega = 2.0 * p.rabi * sqrt((n + 1) as f64);
            w * cos(omega * t) * exp(-gamma_n(p, n) * t)
        })
        .sum();
    0.5 * (1.0 + sum)
}

/// Samples the model on `t_grid`; `mean_n` is NaN.
pub fn heuristic_series(p: &HeuristicParams, t_grid: &[f64]) -> TimeSeries {
    let mut s = TimeSeries::with_capacity(t_grid.len());
    for &t in t_grid {
        s.push(t, 1.0 - 2.0 * p_down_heuristic(p, t), f64::NAN);
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub t: f64,
    pub value: f64,
}

/// Local maxima and minima of a sampled curve, each refined by the parabola
/// through the sample and its two neighbours.
pub fn find_extrema(times: &[f64], values: &[f64]) -> (Vec<Extremum>, Vec<Extremum>) {
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
        let is_max = b >= a && b > c;
        let is_min = b <= a && b < c;
        if !(is_max || is_min) {
            continue;
        }
        let e = refine(times[i - 1], times[i], times[i + 1], a, b, c);
        if is_max {
            maxima.push(e);
        } else {
            minima.push(e);
        }
    }
    (maxima, minima)
}

fn refine(t0: f64, t1: f64, t2: f64, y0: f64, y1: f64, y2: f64) -> Extremum {
    let (h0, h1) = (t1 - t0, t2 - t1);
    // divided differences of the interpolating parabola
    let d1 = (y1 - y0) / h0;
    let d2 = (y2 - y1) / h1;
    let curv = (d2 - d1) / (h0 + h1);
    if curv == 0.0 {
        return Extremum { t: t1, value: y1 };
    }
    // y(t) = y1 + s (t − t1) + curv (t − t1)²
    let s = d1 + curv * h0;
    let dt = (-s / (2.0 * curv)).clamp(-h0, h1);
    Extremum {
        t: t1 + dt,
        value: y1 + s * dt + curv * dt * dt,
    }
}

/// Upper and lower envelopes of an oscillation about ½.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeAnalysis {
    pub maxima: Vec<Extremum>,
    pub minima: Vec<Extremum>,
    /// `max |(U(t) + L(t))/2 − ½|` over the minima, with `U` interpolated
    /// between maxima log-linearly in `U − ½`.
    pub midline_asymmetry: f64,
    /// Least-squares rate of `ln(U − ½)`, 1/time.
    pub upper_rate: f64,
    /// Least-squares rate of `ln(½ − L)`, 1/time.
    pub lower_rate: f64,
}

impl EnvelopeAnalysis {
    pub fn rate_asymmetry(&self) -> f64 {
        abs(self.upper_rate - self.lower_rate)
    }
}

/// Envelope diagnostics of `values` restricted to `t ≤ t_limit`.
pub fn analyze_envelopes(times: &[f64], values: &[f64], t_limit: f64) -> Result<EnvelopeAnalysis> {
    let end = times.iter().take_while(|&&t| t <= t_limit).count();
    let (maxima, minima) = find_extrema(&times[..end], &values[..end]);
    if maxima.len() < 2 || minima.is_empty() {
        return Err(Error::InvalidParameter {
            name: "series",
            reason: "too few oscillations for envelope analysis",
        });
    }
    let mut asym: f64 = 0.0;
    for lo in &minima {
        if let Some(up) = interpolate_upper(&maxima, lo.t) {
            asym = asym.max(abs(0.5 * (up + lo.value) - 0.5));
        }
    }
    Ok(EnvelopeAnalysis {
        upper_rate: decay_rate(maxima.iter().map(|e| (e.t, e.value - 0.5))),
        lower_rate: decay_rate(minima.iter().map(|e| (e.t, 0.5 - e.value))),
        maxima,
        minima,
        midline_asymmetry: asym,
    })
}

fn interpolate_upper(maxima: &[Extremum], t: f64) -> Option<f64> {
    let k = maxima.windows(2).position(|w| w[0].t <= t && t <= w[1].t)?;
    let (a, b) = (maxima[k], maxima[k + 1]);
    let w = (t - a.t) / (b.t - a.t);
    let (ya, yb) = (a.value - 0.5, b.value - 0.5);
    if ya > 0.0 && yb > 0.0 {
        Some(0.5 + exp(ln(ya) + w * (ln(yb) - ln(ya))))
    } else {
        Some(a.value + w * (b.value - a.value))
    }
}

fn decay_rate(points: impl Iterator<Item = (f64, f64)>) -> f64 {
    let (mut n, mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (t, amp) in points.filter(|(_, a)| *a > 0.0) {
        let y = ln(amp);
        n += 1.0;
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    let denom = n * stt - st * st;
    if n < 2.0 || denom == 0.0 {
        return f64::NAN;
    }
    -(n * sty - st * sy) / denom
}

/// Hierarchy and heuristic curves for the same initial Fock state on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub hierarchy: TimeSeries,
    pub heuristic: TimeSeries,
}

/// Runs both models from `|n0,↓⟩`. The heuristic weight sits entirely on `n0`
/// and uses `heuristic.rabi()`; pass `g` there to compare at matched frequency.
pub fn compare_with_hierarchy(
    hierarchy_params: &HierarchyParams,
    heuristic: &HeuristicParams,
    t_grid: &[f64],
) -> Result<Comparison> {
    let run = hierarchy::integrate(hierarchy_params, t_grid)?;
    Ok(Comparison {
        hierarchy: run.series,
        heuristic: heuristic_series(heuristic, t_grid),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{atan, PI};
    use crate::ode::uniform_grid;
    use alloc::vec;

    #[test]
    fn gamma_law() {
        let p = HeuristicParams::fock(0, 1.0, 11.9e3).unwrap();
        assert_eq!(gamma_n(&p, 0), 11.9e3);
        assert!(abs(gamma_n(&p, 1) - 19.33e3) < 5.0);
        let flat = p.with_exponent(0.0).unwrap();
        assert_eq!(gamma_n(&flat, 5), 11.9e3);
    }

    #[test]
    fn closed_form_limits() {
        let p = HeuristicParams::new(vec![0.3, 0.5, 0.2], 2.0, 0.4).unwrap();
        assert!(abs(p_down_heuristic(&p, 0.0) - 1.0) < 1e-15);
        assert!(abs(p_down_heuristic(&p, 200.0) - 0.5) < 1e-15);
        let pure = HeuristicParams::fock(0, 1.3, 0.0).unwrap();
        for t in [0.1, 1.0, 7.5] {
            assert!(abs(p_down_heuristic(&pure, t) - 0.5 * (1.0 + cos(2.6 * t))) < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_distributions() {
        assert!(HeuristicParams::new(vec![0.5, 0.4], 1.0, 0.0).is_err());
        assert!(HeuristicParams::new(vec![1.2, -0.2], 1.0, 0.0).is_err());
        assert!(HeuristicParams::new(vec![], 1.0, 0.0).is_err());
        assert!(HeuristicParams::fock(0, 1.0, -1.0).is_err());
    }

    #[test]
    fn series_carries_nan_number() {
        let p = HeuristicParams::fock(1, 1.0, 0.1).unwrap();
        let s = heuristic_series(&p, &[0.0, 0.5]);
        assert!(s.mean_n.iter().all(|n| n.is_nan()));
        assert!(abs(s.sigma_z[1] - (1.0 - 2.0 * s.p_down[1])) < 1e-15);
    }

    /// Peak of `½cos(ωt)e^{−γt}` in the period around `t_k = kπ/ω`, which
    /// exceeds `½e^{−γt_k}` by about `(γ/ω)²/2` of it.
    fn exact_peak(omega: f64, gamma: f64, k: usize) -> (f64, f64) {
        let tk = k as f64 * PI / omega;
        let ts = tk - atan(gamma / omega) / omega;
        let c = cos(omega * ts);
        (ts, 0.5 * c * exp(-gamma * ts) * if k % 2 == 0 { 1.0 } else { -1.0 })
    }

    #[test]
    fn peak_tracks_half_exponential() {
        for (rabi, gamma0) in [(2.0 * PI * 95.95e3, 11.9e3), (1.0, 1e-3), (1.0, 0.05)] {
            let p = HeuristicParams::fock(0, rabi, gamma0).unwrap();
            let omega = 2.0 * rabi;
            let eps = gamma0 / omega;
            let period = 2.0 * PI / omega;
            for k in 1..6 {
                let mid = k as f64 * period;
                let grid: Vec<f64> = (0..=4000)
                    .map(|i| mid - 0.5 * period + period * i as f64 / 4000.0)
                    .collect();
                let vals: Vec<f64> = grid.iter().map(|&t| p_down_heuristic(&p, t) - 0.5).collect();
                let (maxima, _) = find_extrema(&grid, &vals);
                let top = maxima.iter().map(|e| e.value).fold(f64::MIN, f64::max);
                let (_, exact) = exact_peak(omega, gamma0, 2 * k);
                assert!(abs(top - exact) < 1e-9 * (1.0 + exact));
                let half_exp = 0.5 * exp(-gamma0 * mid);
                assert!(abs(top - half_exp) <= 0.51 * eps * eps * half_exp + 1e-12);
                if eps <= 2e-3 {
                    assert!(abs(top - half_exp) < 1e-6);
                }
            }
        }
    }

    #[test]
    fn heuristic_envelopes_are_symmetric() {
        let g = 2.0 * PI * 95.95e3;
        for n0 in [0, 1] {
            let p = HeuristicParams::fock(n0, g, 11.9e3).unwrap();
            let grid = uniform_grid(60e-6, 20_000);
            let s = heuristic_series(&p, &grid);
            let env = analyze_envelopes(&grid, &s.p_down, 60e-6).unwrap();
            assert!(env.midline_asymmetry < 1e-6, "{}", env.midline_asymmetry);
            assert!(env.rate_asymmetry() < 1e-3 * env.upper_rate);
            assert!(abs(env.upper_rate - gamma_n(&p, n0)) < 1e-3 * gamma_n(&p, n0));
        }
    }

    #[test]
    fn parabola_refinement_is_exact_for_quadratics() {
        let times = [0.0, 0.3, 0.7];
        let f = |t: f64| 2.0 - 3.0 * (t - 0.41) * (t - 0.41);
        let vals: Vec<f64> = times.iter().map(|&t| f(t)).collect();
        let (maxima, minima) = find_extrema(&times, &vals);
        assert!(minima.is_empty());
        assert!(abs(maxima[0].t - 0.41) < 1e-14);
        assert!(abs(maxima[0].value - 2.0) < 1e-14);
    }

    #[test]
    fn too_short_series_is_rejected() {
        let grid = uniform_grid(1.0, 10);
        let flat = vec![0.5; grid.len()];
        assert!(analyze_envelopes(&grid, &flat, 1.0).is_err());
    }
}
