//! Reference Lindblad solver on the truncated Fock ⊗ spin space.
//!
//! The motion is coupled to a thermal reservoir through
//!
//! ```text
//! dρ/dt = −i[H, ρ] + Γ(n̄+1) D[a]ρ + Γ n̄ D[a†]ρ,   D[L]ρ = LρL† − ½{L†L, ρ},
//! ```
//!
//! the unique single-mode dissipator whose moment flow is
//! `d⟨a†ᵐaⁿ⟩/dt = −Γ(m+n)/2 ⟨a†ᵐaⁿ⟩ + Γmn n̄ ⟨a†ᵐ⁻¹aⁿ⁻¹⟩` in the frame
//! rotating with the trap. `H` is either the blue-sideband drive
//! `ig(σ₊a†e^{−iφ} − σ₋ae^{iφ})` or a carrier drive `g(σ₊e^{−iφ} + σ₋e^{iφ})`.
//!
//! Nothing here shares code with the moment hierarchy apart from the ODE
//! stepper, so agreement between the two is a real check.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::hierarchy::HierarchyState;
use crate::math::{powf, sqrt};
use crate::ode::Dopri5;
use crate::states::{dimension, flatten, DensityMatrix, SpinLabel, TimeSeries};
use crate::{Error, Result};

/// Truncation used when the caller does not choose one.
pub const DEFAULT_N_MAX: usize = 12;
/// Largest thermal population above `n_max` accepted by [`OracleParams::new`].
pub const THERMAL_TAIL_LIMIT: f64 = 1e-5;
/// Population of the top two Fock levels that aborts a run.
pub const TAIL_LEAKAGE_LIMIT: f64 = 1e-6;
/// Population of the top two levels allowed in the initial state.
pub const INITIAL_TAIL_LIMIT: f64 = 1e-8;
/// Slack on the smallest eigenvalue of ρ(t).
pub const POSITIVITY_TOL: f64 = 1e-8;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Which coherent drive acts on the ion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    /// Blue-sideband (anti-JC) drive at coupling `g`.
    AjcDrive,
    /// Carrier drive at Rabi frequency `g` (use 0 for free motion).
    CarrierFree,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleParams {
    pub g: f64,
    pub phi: f64,
    pub gamma: f64,
    pub nbar: f64,
    pub n_max: usize,
    pub mode: OracleMode,
}

impl OracleParams {
    /// Validates the inputs and raises `n_max` until the thermal population
    /// above it is at most [`THERMAL_TAIL_LIMIT`].
    pub fn new(
        g: f64,
        phi: f64,
        gamma: f64,
        nbar: f64,
        n_max: usize,
        mode: OracleMode,
    ) -> Result<Self> {
        let mut p = Self::with_fixed_truncation(g, phi, gamma, nbar, n_max, mode)?;
        while thermal_tail(p.nbar, p.n_max) > THERMAL_TAIL_LIMIT {
            p.n_max += 1;
        }
        Ok(p)
    }

    /// Uses `n_max` as given; only the run-time leakage check guards the
    /// truncation.
    pub fn with_fixed_truncation(
        g: f64,
        phi: f64,
        gamma: f64,
        nbar: f64,
        n_max: usize,
        mode: OracleMode,
    ) -> Result<Self> {
        for (name, v) in [("g", g), ("gamma", gamma), ("nbar", nbar)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: "must be finite and nonnegative",
                });
            }
        }
        if !phi.is_finite() {
            return Err(Error::InvalidParameter {
                name: "phi",
                reason: "must be finite",
            });
        }
        if n_max < 4 {
            return Err(Error::InvalidParameter {
                name: "n_max",
                reason: "must be at least 4",
            });
        }
        Ok(Self {
            g,
            phi,
            gamma,
            nbar,
            n_max,
            mode,
        })
    }
}

/// Thermal population above `n_max` at occupation `nbar`.
pub fn thermal_tail(nbar: f64, n_max: usize) -> f64 {
    powf(nbar / (nbar + 1.0), (n_max + 1) as f64)
}

/// Sparse square matrix as a list of nonzero entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    pub dim: usize,
    pub entries: Vec<(usize, usize, Complex64)>,
}

impl SparseOp {
    fn new(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    fn push(&mut self, row: usize, col: usize, v: Complex64) {
        if v != ZERO {
            self.entries.push((row, col, v));
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|&(i, j, v)| (j, i, v.conj()))
                .collect(),
        }
    }

    pub fn to_dense(&self) -> Vec<Complex64> {
        let mut m = vec![ZERO; self.dim * self.dim];
        for &(i, j, v) in &self.entries {
            m[i * self.dim + j] += v;
        }
        m
    }

    fn scaled(mut self, s: Complex64) -> Self {
        for e in &mut self.entries {
            e.2 *= s;
        }
        self
    }

    /// `self · other`, merging duplicate positions.
    fn compose(&self, other: &SparseOp) -> SparseOp {
        let d = self.dim;
        let dense = {
            let mut m = vec![ZERO; d * d];
            for &(i, k, a) in &self.entries {
                for &(k2, j, b) in &other.entries {
                    if k == k2 {
                        m[i * d + j] += a * b;
                    }
                }
            }
            m
        };
        let mut out = SparseOp::new(d);
        for (idx, v) in dense.into_iter().enumerate() {
            out.push(idx / d, idx % d, v);
        }
        out
    }

    fn add(mut self, other: SparseOp) -> SparseOp {
        self.entries.extend(other.entries);
        self
    }
}

/// Motional annihilation operator `a ⊗ 1`.
pub fn annihilation(n_max: usize) -> SparseOp {
    let mut op = SparseOp::new(dimension(n_max));
    for n in 1..=n_max {
        for s in [SpinLabel::Down, SpinLabel::Up] {
            op.push(
                flatten(n - 1, s),
                flatten(n, s),
                Complex64::new(sqrt(n as f64), 0.0),
            );
        }
    }
    op
}

/// `1 ⊗ σ₊` with `σ₊ = |↑⟩⟨↓|`.
pub fn sigma_plus(n_max: usize) -> SparseOp {
    let mut op = SparseOp::new(dimension(n_max));
    for n in 0..=n_max {
        op.push(
            flatten(n, SpinLabel::Up),
            flatten(n, SpinLabel::Down),
            Complex64::new(1.0, 0.0),
        );
    }
    op
}

/// Hamiltonians of the three resonant drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Drive {
    /// `Ω(σ₊e^{−iφ} + σ₋e^{iφ})`
    Carrier,
    /// `ig(σ₊a e^{−iφ} − σ₋a† e^{iφ})`
    Jc,
    /// `ig(σ₊a† e^{−iφ} − σ₋a e^{iφ})`
    Ajc,
}

/// Drive Hamiltonian with coupling `strength` (Ω or g) and phase `phi`.
pub fn drive_hamiltonian(drive: Drive, n_max: usize, strength: f64, phi: f64) -> SparseOp {
    let a = annihilation(n_max);
    let sp = sigma_plus(n_max);
    let e = Complex64::from_polar(1.0, -phi);
    let raising = match drive {
        Drive::Carrier => sp.scaled(e * strength),
        Drive::Jc => sp.compose(&a).scaled(I * e * strength),
        Drive::Ajc => sp.compose(&a.adjoint()).scaled(I * e * strength),
    };
    let lowering = raising.adjoint();
    raising.add(lowering)
}

/// Generator `L` of the master equation in the form
/// `Lρ = −i(Kρ − ρK†) + Σ_j γ_j L_j ρ L_j†` with `K = H − (i/2) Σ_j γ_j L_j†L_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladGenerator {
    dim: usize,
    hamiltonian: SparseOp,
    effective: SparseOp,
    jumps: Vec<(f64, SparseOp)>,
}

/// Builds the generator for the given drive and reservoir.
pub fn build_generator(p: &OracleParams) -> LindbladGenerator {
    let drive = match p.mode {
        OracleMode::AjcDrive => Drive::Ajc,
        OracleMode::CarrierFree => Drive::Carrier,
    };
    let h = drive_hamiltonian(drive, p.n_max, p.g, p.phi);
    let a = annihilation(p.n_max);
    let ad = a.adjoint();
    let mut jumps = Vec::new();
    if p.gamma > 0.0 {
        jumps.push((p.gamma * (p.nbar + 1.0), a));
        if p.nbar > 0.0 {
            jumps.push((p.gamma * p.nbar, ad));
        }
    }
    LindbladGenerator::new(h, jumps)
}

impl LindbladGenerator {
    pub fn new(hamiltonian: SparseOp, jumps: Vec<(f64, SparseOp)>) -> Self {
        let dim = hamiltonian.dim;
        let mut effective = hamiltonian.clone();
        for (rate, l) in &jumps {
            let ldl = l.adjoint().compose(l);
            effective = effective.add(ldl.scaled(Complex64::new(0.0, -0.5 * rate)));
        }
        Self {
            dim,
            hamiltonian,
            effective,
            jumps,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &SparseOp {
        &self.hamiltonian
    }

    /// `Lρ` for a row-major density matrix.
    pub fn apply(&self, rho: &[Complex64]) -> Vec<Complex64> {
        let d = self.dim;
        let mut out = vec![ZERO; d * d];
        self.accumulate(|idx| rho[idx], |idx, v| out[idx] += v);
        out
    }

    /// `Lρ` on interleaved `(re, im)` storage, for the ODE stepper.
    fn apply_interleaved(&self, rho: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        self.accumulate(
            |idx| Complex64::new(rho[2 * idx], rho[2 * idx + 1]),
            |idx, v| {
                out[2 * idx] += v.re;
                out[2 * idx + 1] += v.im;
            },
        );
    }

    fn accumulate<R, W>(&self, rho: R, mut add: W)
    where
        R: Fn(usize) -> Complex64,
        W: FnMut(usize, Complex64),
    {
        let d = self.dim;
        // −iKρ
        for &(i, k, v) in &self.effective.entries {
            let c = -I * v;
            for j in 0..d {
                add(i * d + j, c * rho(k * d + j));
            }
        }
        // +iρK†, (ρK†)_{ij} = Σ_k ρ_{ik} conj(K_{jk})
        for &(j, k, v) in &self.effective.entries {
            let c = I * v.conj();
            for i in 0..d {
                add(i * d + j, c * rho(i * d + k));
            }
        }
        // γ LρL†
        for (rate, l) in &self.jumps {
            for &(i, k, a) in &l.entries {
                for &(j, m, b) in &l.entries {
                    add(i * d + j, a * rho(k * d + m) * b.conj() * *rate);
                }
            }
        }
    }
}

/// Output of [`evolve`].
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRun {
    pub series: TimeSeries,
    pub states: Vec<DensityMatrix>,
}

/// Population of the two highest Fock levels.
pub fn top_tail_mass(rho: &DensityMatrix) -> f64 {
    let n = rho.n_max();
    rho.fock_population(n) + rho.fock_population(n - 1)
}

pub fn evolve(p: &OracleParams, rho0: &DensityMatrix, t_grid: &[f64]) -> Result<OracleRun> {
    evolve_with(p, rho0, t_grid, &Dopri5::default())
}

/// Propagates `rho0` over `t_grid` and samples observables.
pub fn evolve_with(
    p: &OracleParams,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    solver: &Dopri5,
) -> Result<OracleRun> {
    if rho0.n_max() != p.n_max {
        return Err(Error::InvalidParameter {
            name: "initial state",
            reason: "truncation differs from oracle n_max",
        });
    }
    rho0.validate(1e-9, POSITIVITY_TOL)?;
    if top_tail_mass(rho0) > INITIAL_TAIL_LIMIT {
        return Err(Error::TailLeakage {
            t: t_grid.first().copied().unwrap_or(0.0),
            mass: top_tail_mass(rho0),
        });
    }
    let generator = build_generator(p);
    let y0: Vec<f64> = rho0.elements().iter().flat_map(|c| [c.re, c.im]).collect();
    let mut series = TimeSeries::with_capacity(t_grid.len());
    let mut states = Vec::with_capacity(t_grid.len());
    solver.solve(
        |_, y, dy| generator.apply_interleaved(y, dy),
        &y0,
        t_grid,
        |_, t, y| {
            let rho = density_from_interleaved(p.n_max, y);
            let tail = top_tail_mass(&rho);
            if tail > TAIL_LEAKAGE_LIMIT {
                return Err(Error::TailLeakage { t, mass: tail });
            }
            if !rho.is_positive_within(POSITIVITY_TOL) {
                return Err(Error::NotPositive { t });
            }
            series.push_state(t, &rho);
            states.push(rho);
            Ok(())
        },
    )?;
    Ok(OracleRun { series, states })
}

fn density_from_interleaved(n_max: usize, y: &[f64]) -> DensityMatrix {
    let data = y
        .chunks_exact(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect();
    DensityMatrix::from_elements(n_max, data).expect("dimension fixed by generator")
}

/// `⟨a⟩ = Tr(ρa)`.
pub fn expect_annihilation(rho: &DensityMatrix) -> Complex64 {
    let mut acc = ZERO;
    for m in 0..rho.n_max() {
        for s in [SpinLabel::Down, SpinLabel::Up] {
            acc += rho.get(flatten(m + 1, s), flatten(m, s)) * sqrt((m + 1) as f64);
        }
    }
    acc
}

/// Hierarchy variables `P_n, Q_n (n ≤ order)` and `R_n (1 ≤ n ≤ order)`
/// evaluated directly on a density matrix.
pub fn hierarchy_moments(rho: &DensityMatrix, phi: f64, order: usize) -> HierarchyState {
    let n_max = rho.n_max();
    let mut p = vec![0.0; order + 1];
    let mut q = vec![0.0; order + 1];
    let mut r = vec![0.0; order];
    for m in 0..=n_max {
        let down = rho.get(flatten(m, SpinLabel::Down), flatten(m, SpinLabel::Down)).re;
        let up = rho.get(flatten(m, SpinLabel::Up), flatten(m, SpinLabel::Up)).re;
        // m!/(m−n)!
        let mut falling = 1.0;
        for n in 0..=order.min(m) {
            p[n] += falling * (down + up);
            q[n] += falling * (up - down);
            falling *= (m - n) as f64;
        }
    }
    let phase = Complex64::from_polar(1.0, -phi);
    for n in 1..=order {
        // σ₊ a†ⁿ aⁿ⁻¹ |m,↓⟩ = √(m!(m+1)!)/(m−n+1)! |m+1,↑⟩
        let mut acc = ZERO;
        for m in (n - 1)..n_max {
            let k = m + 1 - n;
            let mut coeff = 1.0;
            for j in (k + 1)..=m {
                coeff *= j as f64;
            }
            coeff *= sqrt((m + 1) as f64);
            acc += rho.get(flatten(m, SpinLabel::Down), flatten(m + 1, SpinLabel::Up)) * coeff;
        }
        r[n - 1] = 2.0 * (phase * acc).re;
    }
    HierarchyState { t: 0.0, p, q, r }
}

/// Dense row-major product `a · b`.
pub fn matmul(a: &[Complex64], b: &[Complex64], d: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            if aik == ZERO {
                continue;
            }
            for j in 0..d {
                out[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    out
}

/// Dense matrix exponential by scaling and squaring with a Taylor kernel.
pub fn expm(m: &[Complex64], d: usize) -> Vec<Complex64> {
    let norm = (0..d)
        .map(|i| (0..d).map(|j| m[i * d + j].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let a: Vec<Complex64> = m.iter().map(|v| v * scale).collect();
    let mut result = vec![ZERO; d * d];
    for i in 0..d {
        result[i * d + i] = Complex64::new(1.0, 0.0);
    }
    let mut term = result.clone();
    for k in 1..=24 {
        term = matmul(&term, &a, d);
        let inv = 1.0 / k as f64;
        let mut largest: f64 = 0.0;
        for (r, t) in result.iter_mut().zip(term.iter_mut()) {
            *t *= inv;
            *r += *t;
            largest = largest.max(t.norm());
        }
        if largest < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result, d);
    }
    result
}

/// `exp(−iHτ)` for a sparse Hamiltonian.
pub fn propagator(h: &SparseOp, tau: f64) -> Vec<Complex64> {
    let m: Vec<Complex64> = h.to_dense().iter().map(|v| -I * v * tau).collect();
    expm(&m, h.dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{abs, cos, exp, sin};
    use crate::ode::uniform_grid;
    use crate::states::Observables;

    fn ajc(g: f64, gamma: f64, nbar: f64, n_max: usize) -> OracleParams {
        OracleParams::with_fixed_truncation(g, 0.0, gamma, nbar, n_max, OracleMode::AjcDrive)
            .unwrap()
    }

    fn herm_random(n_max: usize, seed: u64) -> DensityMatrix {
        // small LCG keeps the test free of extra dependencies
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let d = dimension(n_max);
        let mut m = vec![ZERO; d * d];
        for i in 0..d {
            for j in i..d {
                let v = if i == j {
                    Complex64::new(next(), 0.0)
                } else {
                    Complex64::new(next(), next())
                };
                m[i * d + j] = v;
                m[j * d + i] = v.conj();
            }
        }
        DensityMatrix::from_elements(n_max, m).unwrap()
    }

    #[test]
    fn tail_rule_raises_truncation() {
        let p = OracleParams::new(1.0, 0.0, 0.1, 1.0, DEFAULT_N_MAX, OracleMode::AjcDrive).unwrap();
        assert!(thermal_tail(1.0, p.n_max) <= THERMAL_TAIL_LIMIT);
        assert!(thermal_tail(1.0, p.n_max - 1) > THERMAL_TAIL_LIMIT);
        let cold = OracleParams::new(1.0, 0.0, 0.1, 0.0, DEFAULT_N_MAX, OracleMode::AjcDrive)
            .unwrap();
        assert_eq!(cold.n_max, DEFAULT_N_MAX);
        assert!(OracleParams::new(1.0, 0.0, 0.1, 1.0, 3, OracleMode::AjcDrive).is_err());
        assert!(OracleParams::new(1.0, 0.0, -0.1, 1.0, 8, OracleMode::AjcDrive).is_err());
    }

    #[test]
    fn generator_is_trace_annihilating_and_hermitian() {
        let p = OracleParams::with_fixed_truncation(1.3, 0.7, 0.4, 1.2, 6, OracleMode::AjcDrive)
            .unwrap();
        let gen = build_generator(&p);
        for seed in 1..5 {
            let rho = herm_random(6, seed);
            let out = DensityMatrix::from_elements(6, gen.apply(rho.elements())).unwrap();
            assert!(out.trace().norm() < 1e-12);
            assert!(out.hermiticity_defect() < 1e-12);
        }
    }

    #[test]
    fn hamiltonians_are_hermitian() {
        for drive in [Drive::Carrier, Drive::Jc, Drive::Ajc] {
            let h = drive_hamiltonian(drive, 5, 0.8, 1.1);
            let dense = h.to_dense();
            let d = h.dim;
            for i in 0..d {
                for j in 0..d {
                    assert!((dense[i * d + j] - dense[j * d + i].conj()).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn second_factorial_moment_flow() {
        // g = 0: d⟨a†²a²⟩/dt = −2Γ⟨a†²a²⟩ + 4Γn̄⟨a†a⟩
        let (gamma, nbar) = (0.6, 0.9);
        let p = ajc(0.0, gamma, nbar, 10);
        let gen = build_generator(&p);
        let rho = DensityMatrix::diagonal(
            10,
            &[
                (0, SpinLabel::Down, 0.2),
                (1, SpinLabel::Up, 0.3),
                (2, SpinLabel::Down, 0.3),
                (3, SpinLabel::Up, 0.2),
            ],
        )
        .unwrap();
        let d_rho = DensityMatrix::from_elements(10, gen.apply(rho.elements())).unwrap();
        let m = hierarchy_moments(&rho, 0.0, 2);
        let dm = hierarchy_moments(&d_rho, 0.0, 2);
        let expected = -2.0 * gamma * m.p[2] + 4.0 * gamma * nbar * m.p[1];
        assert!(abs(dm.p[2] - expected) < 1e-9);
    }

    #[test]
    fn number_decays_without_drive() {
        let gamma = 0.5;
        let p = ajc(0.0, gamma, 0.0, 8);
        let rho0 = DensityMatrix::diagonal(8, &[(2, SpinLabel::Down, 0.5), (3, SpinLabel::Up, 0.5)])
            .unwrap();
        let run = evolve(&p, &rho0, &uniform_grid(4.0, 40)).unwrap();
        for (t, n) in run.series.times.iter().zip(&run.series.mean_n) {
            assert!(abs(n - 2.5 * exp(-gamma * t)) < 1e-9);
        }
    }

    #[test]
    fn undamped_rabi_from_vacuum() {
        let g = 1.0;
        let p = ajc(g, 0.0, 0.0, 6);
        let rho0 = DensityMatrix::diagonal(6, &[(0, SpinLabel::Down, 1.0)]).unwrap();
        let solver = Dopri5::with_tolerances(1e-11, 1e-13);
        let run = evolve_with(&p, &rho0, &uniform_grid(20.0, 400), &solver).unwrap();
        for (t, pd) in run.series.times.iter().zip(&run.series.p_down) {
            assert!(abs(pd - cos(g * t) * cos(g * t)) < 1e-8);
        }
    }

    #[test]
    fn thermal_state_is_stationary() {
        let nbar = 0.5;
        let p = ajc(0.0, 0.7, nbar, 20);
        let rho0 = DensityMatrix::thermal(20, nbar, SpinLabel::Down).unwrap();
        let run = evolve(&p, &rho0, &uniform_grid(3.0, 10));
        // the truncated thermal state is exactly stationary (detailed balance)
        let run = run.unwrap();
        let last = run.states.last().unwrap();
        let worst = last
            .elements()
            .iter()
            .zip(rho0.elements())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn carrier_drive_leaves_motion_alone() {
        let (gamma, nbar) = (0.3, 0.5);
        let alpha = Complex64::new(1.0, 0.5);
        let n_max = 24;
        let psi = crate::states::FockSpinVector::coherent(n_max, alpha, SpinLabel::Down).unwrap();
        let rho0 = psi.to_density();
        let grid = uniform_grid(3.0, 30);
        let driven = OracleParams::with_fixed_truncation(
            2.0,
            0.3,
            gamma,
            nbar,
            n_max,
            OracleMode::CarrierFree,
        )
        .unwrap();
        let run = evolve(&driven, &rho0, &grid).unwrap();
        for (s, t) in run.states.iter().zip(&grid) {
            let expected = alpha.norm_sqr() * exp(-gamma * t) + nbar * (1.0 - exp(-gamma * t));
            assert!(abs(s.expect_number() - expected) < 1e-7);
            // ⟨a⟩ in the frame rotating at ν decays at Γ/2
            let mean = expect_annihilation(s);
            assert!((mean - alpha * exp(-gamma * t / 2.0)).norm() < 1e-7);
            // the spin flops at 2Ω regardless of the motion
            let c = cos(2.0 * t);
            assert!(abs(s.p_down() - c * c) < 1e-7);
        }
    }

    #[test]
    fn moments_of_fock_states() {
        let rho = DensityMatrix::diagonal(6, &[(2, SpinLabel::Down, 1.0)]).unwrap();
        let m = hierarchy_moments(&rho, 0.0, 3);
        assert_eq!(m.p, vec![1.0, 2.0, 2.0, 0.0]);
        assert_eq!(m.q, vec![-1.0, -2.0, -2.0, 0.0]);
        assert_eq!(m.r, vec![0.0; 3]);
    }

    #[test]
    fn cross_term_matches_dense_operator() {
        let n_max = 6;
        let rho = herm_random(n_max, 9);
        let phi = 0.4;
        let m = hierarchy_moments(&rho, phi, 3);
        let d = dimension(n_max);
        let a = annihilation(n_max).to_dense();
        let ad = annihilation(n_max).adjoint().to_dense();
        let sp = sigma_plus(n_max).to_dense();
        for n in 1..=3 {
            let mut op = sp.clone();
            for _ in 0..n {
                op = matmul(&op, &ad, d);
            }
            for _ in 0..n - 1 {
                op = matmul(&op, &a, d);
            }
            let tr: Complex64 = (0..d)
                .map(|i| (0..d).map(|k| rho.get(i, k) * op[k * d + i]).sum::<Complex64>())
                .sum();
            let expected = 2.0 * (Complex64::from_polar(1.0, -phi) * tr).re;
            assert!(abs(m.r[n - 1] - expected) < 1e-12, "n={n}");
        }
    }

    #[test]
    fn expm_of_rotation() {
        // exp(−iθσ_x) on a qubit
        let theta = 0.9;
        let m = vec![
            ZERO,
            Complex64::new(0.0, -theta),
            Complex64::new(0.0, -theta),
            ZERO,
        ];
        let u = expm(&m, 2);
        assert!((u[0] - Complex64::new(cos(theta), 0.0)).norm() < 1e-15);
        assert!((u[1] - Complex64::new(0.0, -sin(theta))).norm() < 1e-15);
    }

    #[test]
    fn tail_leakage_is_reported() {
        let p = ajc(0.0, 1.0, 3.0, 4);
        let rho0 = DensityMatrix::diagonal(4, &[(0, SpinLabel::Down, 1.0)]).unwrap();
        let err = evolve(&p, &rho0, &uniform_grid(5.0, 10)).unwrap_err();
        assert!(matches!(err, Error::TailLeakage { .. }), "{err:?}");
        let top = DensityMatrix::diagonal(4, &[(4, SpinLabel::Down, 1.0)]).unwrap();
        assert!(matches!(
            evolve(&p, &top, &[0.0, 1.0]),
            Err(Error::TailLeakage { .. })
        ));
    }
}
