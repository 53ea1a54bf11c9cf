//! Resonant ion–laser pulse maps in closed form.
//!
//! All three maps act blockwise on two-dimensional subspaces: the carrier on
//! `{|n,↓⟩, |n,↑⟩}`, the red sideband on `{|n,↑⟩, |n+1,↓⟩}` and the blue
//! sideband on `{|n,↓⟩, |n+1,↑⟩}`. The rotation angle in the sideband blocks
//! is `A·√(n+1)` with `A = gτ`.

use num_complex::Complex64;

use crate::math::{cos, exp, floor, sin, sqrt, PI};
use crate::states::{FockSpinVector, SpinLabel};
use crate::{Error, Result};

/// Pulse area and laser phase.
///
/// `area` is `Ωτ` for the carrier and `gτ` (with `g = η_L Ω`) for sidebands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseParams {
    area: f64,
    phase: f64,
}

impl PulseParams {
    pub fn new(area: f64, phase: f64) -> Result<Self> {
        if !area.is_finite() {
            return Err(Error::InvalidParameter {
                name: "pulse area",
                reason: "must be finite",
            });
        }
        if !phase.is_finite() {
            return Err(Error::InvalidParameter {
                name: "pulse phase",
                reason: "must be finite",
            });
        }
        let two_pi = 2.0 * PI;
        let mut phase = phase - two_pi * floor(phase / two_pi);
        if phase >= two_pi {
            phase = 0.0;
        }
        Ok(Self { area, phase })
    }

    #[inline]
    pub fn area(&self) -> f64 {
        self.area
    }

    /// Laser phase in `[0, 2π)`.
    #[inline]
    pub fn phase(&self) -> f64 {
        self.phase
    }

    fn phasor(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.phase)
    }
}

/// Amplitude above which the top Fock level counts as occupied.
pub const LEAKAGE_THRESHOLD: f64 = 1e-10;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Carrier pulse: rotates the spin at every Fock level, motion untouched.
pub fn apply_carrier(state: &FockSpinVector, p: PulseParams) -> FockSpinVector {
    let (c, s) = (cos(p.area), sin(p.area));
    let e = p.phasor();
    let mut out = state.clone();
    let amps = out.amplitudes_mut();
    for n in 0..=state.n_max() {
        let up = state.amplitude(n, SpinLabel::Up);
        let down = state.amplitude(n, SpinLabel::Down);
        amps[2 * n + 1] = up * c - I * e.conj() * s * down;
        amps[2 * n] = down * c - I * e * s * up;
    }
    out
}

/// Red-sideband (Jaynes–Cummings) pulse, `|n,↑⟩ ↔ |n+1,↓⟩`.
pub fn apply_jc(state: &FockSpinVector, p: PulseParams) -> Result<FockSpinVector> {
    check_leakage(state, SpinLabel::Up)?;
    let e = p.phasor();
    let mut out = FockSpinVector::zeros(state.n_max());
    let amps = out.amplitudes_mut();
    // |0,↓⟩ is dark
    amps[0] = state.amplitude(0, SpinLabel::Down);
    for n in 0..=state.n_max() {
        let (c, s) = block_rotation(p.area, n);
        let up = state.amplitude(n, SpinLabel::Up);
        amps[2 * n + 1] += c * up;
        if n < state.n_max() {
            let down = state.amplitude(n + 1, SpinLabel::Down);
            amps[2 * n + 1] += e * s * down;
            amps[2 * (n + 1)] += c * down - e.conj() * s * up;
        }
    }
    Ok(out)
}

/// Blue-sideband (anti-Jaynes–Cummings) pulse, `|n,↓⟩ ↔ |n+1,↑⟩`.
pub fn apply_ajc(state: &FockSpinVector, p: PulseParams) -> Result<FockSpinVector> {
    check_leakage(state, SpinLabel::Down)?;
    let e = p.phasor();
    let mut out = FockSpinVector::zeros(state.n_max());
    let amps = out.amplitudes_mut();
    // |0,↑⟩ is dark
    amps[1] = state.amplitude(0, SpinLabel::Up);
    for n in 0..=state.n_max() {
        let (c, s) = block_rotation(p.area, n);
        let down = state.amplitude(n, SpinLabel::Down);
        amps[2 * n] += c * down;
        if n < state.n_max() {
            let up = state.amplitude(n + 1, SpinLabel::Up);
            amps[2 * n] -= e * s * up;
            amps[2 * (n + 1) + 1] += c * up + e.conj() * s * down;
        }
    }
    Ok(out)
}

/// `(C_n, S_n) = (cos(A√(n+1)), sin(A√(n+1)))`.
#[inline]
fn block_rotation(area: f64, n: usize) -> (f64, f64) {
    let angle = area * sqrt((n + 1) as f64);
    (cos(angle), sin(angle))
}

/// Only the top-level component whose partner lies at `n_max + 1` can leak.
fn check_leakage(state: &FockSpinVector, leaking: SpinLabel) -> Result<()> {
    let top = state.amplitude(state.n_max(), leaking).norm();
    if top > LEAKAGE_THRESHOLD {
        return Err(Error::TruncationLeakage {
            n_max: state.n_max(),
            amplitude: top,
        });
    }
    Ok(())
}

/// Largest `m + l` accepted by [`displacement_matrix_element`].
pub const MAX_INDEX_SUM: usize = 300;

/// `⟨m| exp(iη(a + a†)) |l⟩`, exactly.
///
/// With `k = |m − l|` and `j = min(m, l)` this is
/// `i^k η^k √(j!/(j+k)!) e^{−η²/2} L_j^{(k)}(η²)`.
pub fn displacement_matrix_element(eta: f64, m: usize, l: usize) -> Result<Complex64> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::Domain {
            what: "Lamb-Dicke parameter",
            value: eta,
        });
    }
    if m + l > MAX_INDEX_SUM {
        return Err(Error::Overflow { m, l });
    }
    let (lo, hi) = if m <= l { (m, l) } else { (l, m) };
    let k = hi - lo;

    let mut magnitude = exp(-eta * eta / 2.0);
    for j in (lo + 1)..=hi {
        magnitude *= eta / sqrt(j as f64);
    }
    magnitude *= laguerre(lo, k as f64, eta * eta);

    let phase = match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => I,
        2 => Complex64::new(-1.0, 0.0),
        _ => -I,
    };
    Ok(phase * magnitude)
}

/// Generalized Laguerre polynomial `L_n^{(α)}(x)` by upward recurrence.
fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// First-order Lamb-Dicke estimate of `⟨m|exp(iη(a+a†))|l⟩`: identity plus
/// `iη(a + a†)`.
pub fn displacement_first_order(eta: f64, m: usize, l: usize) -> Complex64 {
    if m == l {
        Complex64::new(1.0, 0.0)
    } else if m == l + 1 {
        I * eta * sqrt(m as f64)
    } else if l == m + 1 {
        I * eta * sqrt(l as f64)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{abs, FRAC_1_SQRT_2};
    use crate::states::{dimension, Observables};
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn basis(n_max: usize, n: usize, s: SpinLabel) -> FockSpinVector {
        FockSpinVector::basis(n_max, n, s).unwrap()
    }

    #[test]
    fn carrier_examples() {
        let out = apply_carrier(
            &basis(3, 0, SpinLabel::Down),
            PulseParams::new(PI / 2.0, 0.0).unwrap(),
        );
        assert!(close(out.amplitude(0, SpinLabel::Up), -I, 1e-15));
        assert!(out.amplitude(0, SpinLabel::Down).norm() < 1e-15);

        let psi = basis(3, 2, SpinLabel::Down);
        let same = apply_carrier(&psi, PulseParams::new(0.0, 1.3).unwrap());
        assert_eq!(same, psi);

        let out = apply_carrier(
            &basis(3, 2, SpinLabel::Up),
            PulseParams::new(PI / 4.0, PI / 2.0).unwrap(),
        );
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        assert!(close(out.amplitude(2, SpinLabel::Up), h, 1e-15));
        assert!(close(out.amplitude(2, SpinLabel::Down), h, 1e-15));
    }

    #[test]
    fn jc_examples() {
        for area in [0.0, 0.4, 2.0, 17.0] {
            let psi = basis(4, 0, SpinLabel::Down);
            let out = apply_jc(&psi, PulseParams::new(area, 0.3).unwrap()).unwrap();
            assert_eq!(out, psi);
        }
        let out = apply_jc(
            &basis(4, 0, SpinLabel::Up),
            PulseParams::new(PI / 2.0, 0.0).unwrap(),
        )
        .unwrap();
        assert!(close(out.amplitude(1, SpinLabel::Down), Complex64::new(-1.0, 0.0), 1e-15));
        assert!(out.amplitude(0, SpinLabel::Up).norm() < 1e-15);

        let out = apply_jc(
            &basis(4, 1, SpinLabel::Down),
            PulseParams::new(PI / 4.0, 0.0).unwrap(),
        )
        .unwrap();
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        assert!(close(out.amplitude(1, SpinLabel::Down), h, 1e-15));
        assert!(close(out.amplitude(0, SpinLabel::Up), h, 1e-15));
    }

    #[test]
    fn ajc_examples() {
        let out = apply_ajc(
            &basis(4, 0, SpinLabel::Down),
            PulseParams::new(PI / 2.0, 0.0).unwrap(),
        )
        .unwrap();
        assert!(close(out.amplitude(1, SpinLabel::Up), Complex64::new(1.0, 0.0), 1e-15));
        for area in [0.0, 0.4, 2.0, 17.0] {
            let psi = basis(4, 0, SpinLabel::Up);
            assert_eq!(apply_ajc(&psi, PulseParams::new(area, 1.1).unwrap()).unwrap(), psi);
        }
        // |1,↓⟩ flops at √2 g
        for gt in [0.1, 0.7, 1.9, 5.0] {
            let out = apply_ajc(
                &basis(6, 1, SpinLabel::Down),
                PulseParams::new(gt, 0.0).unwrap(),
            )
            .unwrap();
            let expected = cos(sqrt(2.0) * gt);
            assert!(abs(out.p_down() - expected * expected) < 1e-14);
        }
    }

    #[test]
    fn top_level_occupation_is_rejected() {
        let p = PulseParams::new(0.5, 0.0).unwrap();
        let up = basis(3, 3, SpinLabel::Up);
        let down = basis(3, 3, SpinLabel::Down);
        assert!(matches!(apply_jc(&up, p), Err(Error::TruncationLeakage { .. })));
        assert!(matches!(apply_ajc(&down, p), Err(Error::TruncationLeakage { .. })));
        // the partner of |n_max,↓⟩ under JC is |n_max−1,↑⟩, inside the space
        assert!(abs(apply_jc(&down, p).unwrap().norm_sqr() - 1.0) < 1e-15);
        assert!(abs(apply_ajc(&up, p).unwrap().norm_sqr() - 1.0) < 1e-15);
        let psi = down;
        // the carrier never changes n
        assert!(abs(apply_carrier(&psi, p).norm_sqr() - 1.0) < 1e-15);
    }

    #[test]
    fn phase_is_reduced() {
        let p = PulseParams::new(1.0, -PI / 2.0).unwrap();
        assert!(abs(p.phase() - 1.5 * PI) < 1e-15);
        let p = PulseParams::new(1.0, 4.0 * PI).unwrap();
        assert!(p.phase() >= 0.0 && p.phase() < 2.0 * PI);
        assert!(PulseParams::new(f64::NAN, 0.0).is_err());
        assert!(PulseParams::new(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn displacement_identity_at_zero_eta() {
        for m in 0..6 {
            for l in 0..6 {
                let v = displacement_matrix_element(0.0, m, l).unwrap();
                let expected = if m == l { 1.0 } else { 0.0 };
                assert!(close(v, Complex64::new(expected, 0.0), 1e-15), "{m} {l} {v}");
            }
        }
    }

    #[test]
    fn displacement_guards() {
        assert!(matches!(
            displacement_matrix_element(0.1, 200, 101),
            Err(Error::Overflow { .. })
        ));
        assert!(displacement_matrix_element(-0.1, 1, 0).is_err());
        assert!(displacement_matrix_element(0.1, 150, 150).is_ok());
    }

    #[test]
    fn displacement_rows_are_normalized() {
        // the displacement operator is unitary on the infinite ladder
        let eta = 0.202;
        for l in 0..5 {
            let col: f64 = (0..=120)
                .map(|m| displacement_matrix_element(eta, m, l).unwrap().norm_sqr())
                .sum();
            assert!(abs(col - 1.0) < 1e-13, "column {l}: {col}");
        }
    }

    #[test]
    fn first_order_lamb_dicke_bound() {
        for eta in [0.01, 0.1, 0.202, 0.3] {
            let exact = displacement_matrix_element(eta, 1, 0).unwrap();
            let gaussian = I * eta * exp(-eta * eta / 2.0);
            assert!((exact - gaussian).norm() <= eta * eta * eta);
            let linear = displacement_first_order(eta, 1, 0);
            assert!((exact - linear).norm() <= eta * eta * eta);
        }
    }

    fn random_state(n_max: usize, raw: &[(f64, f64)]) -> Option<FockSpinVector> {
        let d = dimension(n_max);
        let mut amps: Vec<Complex64> = raw[..d].iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        amps[d - 1] = Complex64::new(0.0, 0.0);
        amps[d - 2] = Complex64::new(0.0, 0.0);
        if amps.iter().map(|c| c.norm_sqr()).sum::<f64>() < 1e-6 {
            return None;
        }
        FockSpinVector::from_amplitudes(n_max, amps).ok()
    }

    fn distance(a: &FockSpinVector, b: &FockSpinVector) -> f64 {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    type Map = fn(&FockSpinVector, PulseParams) -> Result<FockSpinVector>;

    fn maps() -> [Map; 3] {
        [|s, p| Ok(apply_carrier(s, p)), apply_jc, apply_ajc]
    }

    proptest! {
        #[test]
        fn pulses_are_unitary(
            raw in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 20),
            area in -20.0f64..20.0,
            phase in 0.0f64..6.3,
        ) {
            let psi = match random_state(9, &raw) { Some(p) => p, None => return Ok(()) };
            let p = PulseParams::new(area, phase).unwrap();
            for map in maps() {
                let out = map(&psi, p).unwrap();
                prop_assert!(abs(out.norm_sqr() - 1.0) < 1e-12);
            }
            let carried = apply_carrier(&psi, p);
            prop_assert!(abs(carried.expect_number() - psi.expect_number()) < 1e-12);
        }

        #[test]
        fn pulses_compose_and_invert(
            raw in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 20),
            a1 in -5.0f64..5.0,
            a2 in -5.0f64..5.0,
            phase in 0.0f64..6.3,
        ) {
            let psi = match random_state(9, &raw) { Some(p) => p, None => return Ok(()) };
            let p1 = PulseParams::new(a1, phase).unwrap();
            let p2 = PulseParams::new(a2, phase).unwrap();
            let p12 = PulseParams::new(a1 + a2, phase).unwrap();
            let back = PulseParams::new(-a1, phase).unwrap();
            for map in maps() {
                let once = map(&psi, p1).unwrap();
                let undone = map(&once, back).unwrap();
                prop_assert!(distance(&undone, &psi) < 1e-12);
                let twice = map(&once, p2).unwrap();
                let direct = map(&psi, p12).unwrap();
                prop_assert!(distance(&twice, &direct) < 1e-12);
            }
        }
    }
}
