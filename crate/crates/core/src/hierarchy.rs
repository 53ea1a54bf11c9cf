//! Truncated c-number moment hierarchy for blue-sideband driving with
//! background-gas damping.
//!
//! The variables are
//!
//! ```text
//! P_n = ⟨(a†)ⁿ aⁿ⟩,   Q_n = ⟨(a†)ⁿ aⁿ σ_z⟩,
//! R_n = ⟨σ₊ (a†)ⁿ aⁿ⁻¹ e^{−iφ} + σ₋ (a†)ⁿ⁻¹ aⁿ e^{iφ}⟩,
//! ```
//!
//! and they obey
//!
//! ```text
//! dP_n/dt = n g R_n − nΓ P_n + n² Γ n̄ P_{n−1}
//! dQ_n/dt = n g R_n + 2g R_{n+1} − nΓ Q_n + n² Γ n̄ Q_{n−1}
//! dR_n/dt = −2g Q_n + n g P_{n−1} − n g Q_{n−1} − (n − ½)Γ R_n + n(n−1) Γ n̄ R_{n−1}
//! ```
//!
//! for `n = 0..=N` (`R` from 1). The only coupling out of range is
//! `R_{N+1}`, which is closed to zero. The laser phase drops out of the
//! system, so none of this depends on φ.

use alloc::vec;
use alloc::vec::Vec;

use crate::ode::Dopri5;
use crate::states::TimeSeries;
use crate::{Error, Result};

/// Default truncation order.
pub const DEFAULT_TRUNCATION: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HierarchyParams {
    /// Sideband coupling `g = η_L Ω`, rad/s.
    pub g: f64,
    /// Damping constant Γ, 1/s.
    pub gamma: f64,
    /// Thermal occupation n̄ of the gas.
    pub nbar: f64,
    /// Highest moment order N kept.
    pub truncation: usize,
    /// Initial state is `|n0, ↓⟩`.
    pub n0: usize,
}

impl HierarchyParams {
    pub fn new(g: f64, gamma: f64, nbar: f64, truncation: usize, n0: usize) -> Result<Self> {
        for (name, v) in [("g", g), ("gamma", gamma), ("nbar", nbar)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: "must be finite and nonnegative",
                });
            }
        }
        if truncation < 1 || truncation < n0 + 1 {
            return Err(Error::TruncationTooSmall { truncation, n0 });
        }
        Ok(Self {
            g,
            gamma,
            nbar,
            truncation,
            n0,
        })
    }

    fn len(&self) -> usize {
        3 * self.truncation + 2
    }
}

/// Moments at one instant. `p` and `q` hold orders `0..=N`, `r` holds `1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyState {
    pub t: f64,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub r: Vec<f64>,
}

impl HierarchyState {
    pub fn truncation(&self) -> usize {
        self.p.len() - 1
    }

    pub fn p(&self, n: usize) -> f64 {
        self.p[n]
    }

    pub fn q(&self, n: usize) -> f64 {
        self.q[n]
    }

    /// `R_n` for `n ≥ 1`; zero beyond the truncation.
    pub fn r(&self, n: usize) -> f64 {
        assert!(n >= 1, "R_n starts at n = 1");
        self.r.get(n - 1).copied().unwrap_or(0.0)
    }

    pub fn sigma_z(&self) -> f64 {
        self.q[0]
    }

    pub fn p_down(&self) -> f64 {
        (1.0 - self.q[0]) / 2.0
    }

    pub fn mean_n(&self) -> f64 {
        self.p[1]
    }

    /// Largest violation of `P_0 = 1`, `P_n ≥ 0` and `|Q_n| ≤ P_n` over the
    /// orders `0..=max_order`.
    pub fn bound_violation(&self, max_order: usize) -> f64 {
        let mut worst = crate::math::abs(self.p[0] - 1.0);
        for n in 0..=max_order.min(self.truncation()) {
            worst = worst.max(-self.p[n]);
            worst = worst.max(crate::math::abs(self.q[n]) - self.p[n]);
        }
        worst.max(0.0)
    }

    fn pack(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(self.p.len() * 3);
        y.extend_from_slice(&self.p);
        y.extend_from_slice(&self.q);
        y.extend_from_slice(&self.r);
        y
    }

    fn unpack(t: f64, n: usize, y: &[f64]) -> Self {
        Self {
            t,
            p: y[..=n].to_vec(),
            q: y[n + 1..2 * n + 2].to_vec(),
            r: y[2 * n + 2..].to_vec(),
        }
    }
}

/// Time derivatives in the same layout as [`HierarchyState`].
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyRates {
    pub dp: Vec<f64>,
    pub dq: Vec<f64>,
    pub dr: Vec<f64>,
}

impl HierarchyRates {
    /// `d⟨σ_z⟩/dt = 2g R_1`.
    pub fn d_sigma_z(&self) -> f64 {
        self.dq[0]
    }

    /// `d⟨a†a⟩/dt = g R_1 − Γ⟨a†a⟩ + Γn̄`.
    pub fn d_mean_n(&self) -> f64 {
        self.dp[1]
    }

    pub fn dr(&self, n: usize) -> f64 {
        self.dr[n - 1]
    }
}

/// Moments of `|n0, ↓⟩`: `P_n = n0!/(n0−n)!`, `Q_n = −P_n`, `R_n = 0`.
pub fn init_from_fock(p: &HierarchyParams) -> Result<HierarchyState> {
    let n = p.truncation;
    if p.n0 + 1 > n {
        return Err(Error::TruncationTooSmall {
            truncation: n,
            n0: p.n0,
        });
    }
    let mut moments = vec![0.0; n + 1];
    let mut falling = 1.0;
    for (k, m) in moments.iter_mut().enumerate().take(p.n0 + 1) {
        *m = falling;
        falling *= (p.n0 - k) as f64;
    }
    let q = moments.iter().map(|m| -m).collect();
    Ok(HierarchyState {
        t: 0.0,
        p: moments,
        q,
        r: vec![0.0; n],
    })
}

/// Right-hand side on the packed layout `[P_0..P_N, Q_0..Q_N, R_1..R_N]`.
fn rhs_packed(p: &HierarchyParams, y: &[f64], dy: &mut [f64]) {
    let n_trunc = p.truncation;
    let (g, gamma, nbar) = (p.g, p.gamma, p.nbar);
    let (pv, rest) = y.split_at(n_trunc + 1);
    let (qv, rv) = rest.split_at(n_trunc + 1);
    let r = |n: usize| -> f64 {
        if n == 0 || n > n_trunc {
            0.0
        } else {
            rv[n - 1]
        }
    };

    let (dp, rest) = dy.split_at_mut(n_trunc + 1);
    let (dq, dr) = rest.split_at_mut(n_trunc + 1);

    for n in 0..=n_trunc {
        let nf = n as f64;
        let (p_prev, q_prev) = if n > 0 { (pv[n - 1], qv[n - 1]) } else { (0.0, 0.0) };
        dp[n] = nf * g * r(n) - nf * gamma * pv[n] + nf * nf * gamma * nbar * p_prev;
        dq[n] = nf * g * r(n) + 2.0 * g * r(n + 1) - nf * gamma * qv[n]
            + nf * nf * gamma * nbar * q_prev;
    }
    for n in 1..=n_trunc {
        let nf = n as f64;
        dr[n - 1] = -2.0 * g * qv[n] + nf * g * pv[n - 1] - nf * g * qv[n - 1]
            - (nf - 0.5) * gamma * r(n)
            + nf * (nf - 1.0) * gamma * nbar * r(n - 1);
    }
}

/// Evaluates the hierarchy right-hand side at `s`.
pub fn hierarchy_rhs(p: &HierarchyParams, s: &HierarchyState) -> HierarchyRates {
    let n = p.truncation;
    assert_eq!(s.truncation(), n, "state and parameters disagree on truncation");
    let y = s.pack();
    let mut dy = vec![0.0; p.len()];
    rhs_packed(p, &y, &mut dy);
    HierarchyRates {
        dp: dy[..=n].to_vec(),
        dq: dy[n + 1..2 * n + 2].to_vec(),
        dr: dy[2 * n + 2..].to_vec(),
    }
}

/// Output of [`integrate`].
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyRun {
    pub series: TimeSeries,
    pub states: Vec<HierarchyState>,
}

/// Integrates from `|n0, ↓⟩` over `t_grid`, which must start at 0.
pub fn integrate(p: &HierarchyParams, t_grid: &[f64]) -> Result<HierarchyRun> {
    integrate_with(p, t_grid, &Dopri5::default())
}

pub fn integrate_with(p: &HierarchyParams, t_grid: &[f64], solver: &Dopri5) -> Result<HierarchyRun> {
    if t_grid.first() != Some(&0.0) {
        return Err(Error::InvalidParameter {
            name: "time grid",
            reason: "must start at t = 0",
        });
    }
    let init = init_from_fock(p)?;
    let y0 = init.pack();
    let n = p.truncation;
    let mut series = TimeSeries::with_capacity(t_grid.len());
    let mut states = Vec::with_capacity(t_grid.len());
    solver.solve(
        |_, y, dy| rhs_packed(p, y, dy),
        &y0,
        t_grid,
        |_, t, y| {
            let s = HierarchyState::unpack(t, n, y);
            series.push(t, s.sigma_z(), s.mean_n());
            states.push(s);
            Ok(())
        },
    )?;
    Ok(HierarchyRun { series, states })
}
