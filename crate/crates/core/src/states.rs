//! Basis conventions, state containers and observables.
//!
//! The Hilbert space is a truncated Fock ladder `n = 0..=n_max` tensored with
//! the two electronic levels. Flat index `2n + s` with `s = 0` for `↓` and
//! `s = 1` for `↑`, so the Fock number is the slow axis.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::math::{abs, exp, sqrt};
use crate::{Error, Result};

/// Electronic level of the ion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpinLabel {
    Down,
    Up,
}

impl SpinLabel {
    #[inline]
    pub const fn index(self) -> usize {
        match self {
            SpinLabel::Down => 0,
            SpinLabel::Up => 1,
        }
    }

    /// Eigenvalue of `σ_z`.
    #[inline]
    pub const fn sigma_z(self) -> f64 {
        match self {
            SpinLabel::Down => -1.0,
            SpinLabel::Up => 1.0,
        }
    }

    pub const fn flip(self) -> Self {
        match self {
            SpinLabel::Down => SpinLabel::Up,
            SpinLabel::Up => SpinLabel::Down,
        }
    }
}

#[inline]
pub const fn flatten(n: usize, s: SpinLabel) -> usize {
    2 * n + s.index()
}

#[inline]
pub const fn unflatten(i: usize) -> (usize, SpinLabel) {
    let s = if i % 2 == 0 {
        SpinLabel::Down
    } else {
        SpinLabel::Up
    };
    (i / 2, s)
}

/// Dimension of the truncated space.
#[inline]
pub const fn dimension(n_max: usize) -> usize {
    2 * (n_max + 1)
}

const IMAG_RESIDUE: f64 = 1e-10;
const CLAMP_SLACK: f64 = 1e-9;

/// Expectation values shared by pure and mixed states.
pub trait Observables {
    fn expect_sigma_z(&self) -> f64;
    fn expect_number(&self) -> f64;

    /// Probability of finding the ion in `↓`.
    fn p_down(&self) -> f64 {
        clamp_probability((1.0 - self.expect_sigma_z()) / 2.0)
    }

    fn p_up(&self) -> f64 {
        clamp_probability((1.0 + self.expect_sigma_z()) / 2.0)
    }
}

fn clamp_probability(p: f64) -> f64 {
    debug_assert!(
        (-CLAMP_SLACK..=1.0 + CLAMP_SLACK).contains(&p),
        "probability {p} outside clamp slack"
    );
    p.clamp(0.0, 1.0)
}

/// Pure state on the truncated Fock ⊗ spin space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockSpinVector {
    n_max: usize,
    amplitudes: Vec<Complex64>,
}

impl FockSpinVector {
    pub fn zeros(n_max: usize) -> Self {
        Self {
            n_max,
            amplitudes: vec![Complex64::new(0.0, 0.0); dimension(n_max)],
        }
    }

    /// `|n, s⟩`.
    pub fn basis(n_max: usize, n: usize, s: SpinLabel) -> Result<Self> {
        if n > n_max {
            return Err(Error::InvalidParameter {
                name: "Fock level",
                reason: "exceeds truncation n_max",
            });
        }
        let mut v = Self::zeros(n_max);
        v.amplitudes[flatten(n, s)] = Complex64::new(1.0, 0.0);
        Ok(v)
    }

    /// Builds a state from raw amplitudes in `2n + s` order, normalizing it.
    pub fn from_amplitudes(n_max: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != dimension(n_max) {
            return Err(Error::InvalidParameter {
                name: "amplitudes",
                reason: "length must be 2 (n_max + 1)",
            });
        }
        let mut v = Self { n_max, amplitudes };
        let norm = sqrt(v.norm_sqr());
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidParameter {
                name: "amplitudes",
                reason: "must have finite nonzero norm",
            });
        }
        for c in &mut v.amplitudes {
            *c /= norm;
        }
        Ok(v)
    }

    /// Truncated coherent motional state `|α⟩ ⊗ |s⟩`, renormalized on the
    /// truncated ladder.
    pub fn coherent(n_max: usize, alpha: Complex64, s: SpinLabel) -> Result<Self> {
        let mut amps = vec![Complex64::new(0.0, 0.0); dimension(n_max)];
        let mut c = Complex64::new(exp(-alpha.norm_sqr() / 2.0), 0.0);
        for n in 0..=n_max {
            amps[flatten(n, s)] = c;
            c = c * alpha / sqrt((n + 1) as f64);
        }
        Self::from_amplitudes(n_max, amps)
    }

    #[inline]
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    #[inline]
    pub fn amplitude(&self, n: usize, s: SpinLabel) -> Complex64 {
        self.amplitudes[flatten(n, s)]
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `Σ_s |c_{n,s}|²`.
    pub fn fock_population(&self, n: usize) -> f64 {
        self.amplitude(n, SpinLabel::Down).norm_sqr() + self.amplitude(n, SpinLabel::Up).norm_sqr()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn to_density(&self) -> DensityMatrix {
        let d = self.amplitudes.len();
        let mut data = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                data[i * d + j] = self.amplitudes[i] * self.amplitudes[j].conj();
            }
        }
        DensityMatrix {
            n_max: self.n_max,
            data,
        }
    }
}

impl Observables for FockSpinVector {
    fn expect_sigma_z(&self) -> f64 {
        (0..=self.n_max)
            .map(|n| {
                self.amplitude(n, SpinLabel::Up).norm_sqr()
                    - self.amplitude(n, SpinLabel::Down).norm_sqr()
            })
            .sum()
    }

    fn expect_number(&self) -> f64 {
        (0..=self.n_max)
            .map(|n| n as f64 * self.fock_population(n))
            .sum()
    }
}

/// Density matrix on the truncated Fock ⊗ spin space, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_max: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn zeros(n_max: usize) -> Self {
        let d = dimension(n_max);
        Self {
            n_max,
            data: vec![Complex64::new(0.0, 0.0); d * d],
        }
    }

    /// Wraps row-major elements without validation.
    pub fn from_elements(n_max: usize, data: Vec<Complex64>) -> Result<Self> {
        let d = dimension(n_max);
        if data.len() != d * d {
            return Err(Error::InvalidParameter {
                name: "density matrix",
                reason: "element count must be dimension squared",
            });
        }
        Ok(Self { n_max, data })
    }

    /// Incoherent mixture `Σ w_k |n_k, s_k⟩⟨n_k, s_k|`.
    pub fn diagonal(n_max: usize, weights: &[(usize, SpinLabel, f64)]) -> Result<Self> {
        let mut rho = Self::zeros(n_max);
        let d = rho.dim();
        for &(n, s, w) in weights {
            if n > n_max {
                return Err(Error::InvalidParameter {
                    name: "Fock level",
                    reason: "exceeds truncation n_max",
                });
            }
            let i = flatten(n, s);
            rho.data[i * d + i] += Complex64::new(w, 0.0);
        }
        Ok(rho)
    }

    /// Thermal motion at occupation `nbar` times a spin eigenstate,
    /// renormalized on the truncated ladder.
    pub fn thermal(n_max: usize, nbar: f64, s: SpinLabel) -> Result<Self> {
        if !(nbar >= 0.0 && nbar.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "nbar",
                reason: "must be finite and nonnegative",
            });
        }
        let ratio = nbar / (nbar + 1.0);
        let mut weights = Vec::with_capacity(n_max + 1);
        let mut p = 1.0;
        for n in 0..=n_max {
            weights.push((n, s, p));
            p *= ratio;
        }
        let total: f64 = weights.iter().map(|w| w.2).sum();
        for w in &mut weights {
            w.2 /= total;
        }
        Self::diagonal(n_max, &weights)
    }

    #[inline]
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    #[inline]
    pub fn dim(&self) -> usize {
        dimension(self.n_max)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim() + j]
    }

    #[inline]
    pub fn elements(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn elements_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn trace(&self) -> Complex64 {
        let d = self.dim();
        (0..d).map(|i| self.data[i * d + i]).sum()
    }

    /// Largest `|ρ_ij − conj(ρ_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.data[i * d + j] - self.data[j * d + i].conj()).norm());
            }
        }
        worst
    }

    /// Population of Fock level `n`, summed over spin.
    pub fn fock_population(&self, n: usize) -> f64 {
        let a = flatten(n, SpinLabel::Down);
        let b = flatten(n, SpinLabel::Up);
        self.get(a, a).re + self.get(b, b).re
    }

    /// `Tr(ρ O)` for a real-diagonal observable given per basis index.
    fn diagonal_expectation(&self, weight: impl Fn(usize, SpinLabel) -> f64) -> f64 {
        let d = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..d {
            let (n, s) = unflatten(i);
            acc += self.data[i * d + i] * weight(n, s);
        }
        debug_assert!(abs(acc.im) <= IMAG_RESIDUE, "imaginary residue {}", acc.im);
        acc.re
    }

    /// Checks `ρ + tol·I ≻ 0` with a complex Cholesky factorization, i.e.
    /// the smallest eigenvalue of the Hermitian part exceeds `−tol`.
    pub fn is_positive_within(&self, tol: f64) -> bool {
        let d = self.dim();
        let mut l = vec![Complex64::new(0.0, 0.0); d * d];
        for j in 0..d {
            let mut diag = self.data[j * d + j].re + tol;
            for k in 0..j {
                diag -= l[j * d + k].norm_sqr();
            }
            if !(diag > 0.0) {
                return false;
            }
            let ljj = sqrt(diag);
            l[j * d + j] = Complex64::new(ljj, 0.0);
            for i in (j + 1)..d {
                // Hermitian part of ρ
                let mut s = 0.5 * (self.data[i * d + j] + self.data[j * d + i].conj());
                for k in 0..j {
                    s -= l[i * d + k] * l[j * d + k].conj();
                }
                l[i * d + j] = s / ljj;
            }
        }
        true
    }

    /// Checks the type invariants at the given trace and positivity slack.
    pub fn validate(&self, trace_tol: f64, positivity_tol: f64) -> Result<()> {
        if self.hermiticity_defect() > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "density matrix",
                reason: "not Hermitian",
            });
        }
        if abs(self.trace().re - 1.0) > trace_tol {
            return Err(Error::InvalidParameter {
                name: "density matrix",
                reason: "trace differs from one",
            });
        }
        if !self.is_positive_within(positivity_tol) {
            return Err(Error::InvalidParameter {
                name: "density matrix",
                reason: "not positive semidefinite",
            });
        }
        Ok(())
    }
}

impl Observables for DensityMatrix {
    fn expect_sigma_z(&self) -> f64 {
        self.diagonal_expectation(|_, s| s.sigma_z())
    }

    fn expect_number(&self) -> f64 {
        self.diagonal_expectation(|n, _| n as f64)
    }
}

/// Sampled observables along a trajectory.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub p_down: Vec<f64>,
    pub sigma_z: Vec<f64>,
    pub mean_n: Vec<f64>,
}

impl TimeSeries {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            times: Vec::with_capacity(n),
            p_down: Vec::with_capacity(n),
            sigma_z: Vec::with_capacity(n),
            mean_n: Vec::with_capacity(n),
        }
    }

    /// Appends a sample; `p_down` is derived from `sigma_z`. Pass `f64::NAN`
    /// for `mean_n` when the model does not track the motion.
    pub fn push(&mut self, t: f64, sigma_z: f64, mean_n: f64) {
        self.times.push(t);
        self.sigma_z.push(sigma_z);
        self.p_down.push(clamp_probability((1.0 - sigma_z) / 2.0));
        self.mean_n.push(mean_n);
    }

    pub fn push_state<S: Observables>(&mut self, t: f64, state: &S) {
        self.push(t, state.expect_sigma_z(), state.expect_number());
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest `|p_down − other.p_down|` over shared samples.
    pub fn max_p_down_deviation(&self, other: &TimeSeries) -> f64 {
        self.p_down
            .iter()
            .zip(&other.p_down)
            .map(|(a, b)| abs(a - b))
            .fold(0.0, f64::max)
    }
}
