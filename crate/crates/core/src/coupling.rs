//! Ion–gas coupling strengths and collision-rate estimates, all in SI units.

use crate::math::{abs, exp, ln, powf, sqrt, PI};
use crate::{Error, Result};

/// Reduced Planck constant, J·s (CODATA 2018).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity, F/m (CODATA 2018).
pub const EPS0: f64 = 8.854_187_812_8e-12;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Unified atomic mass unit, kg.
pub const ATOMIC_MASS: f64 = 1.660_539_066_60e-27;

/// Argument where [`bessel_k1`] changes from the ascending series to the
/// continued fraction.
pub const K1_SWITCH: f64 = 2.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const EPS: f64 = 1e-16;

fn check_k1_arg(x: f64) -> Result<()> {
    if x > 0.0 && !x.is_nan() {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "bessel_k1 argument must be positive",
            value: x,
        })
    }
}

/// Modified Bessel function `K₁(x)`. Underflows to 0 past x ≈ 705.
pub fn bessel_k1(x: f64) -> Result<f64> {
    check_k1_arg(x)?;
    if x < K1_SWITCH {
        Ok(1.0 / x - series_remainder(x) / x)
    } else {
        Ok(exp(-x) * k1_scaled_cf(x))
    }
}

/// `eˣK₁(x)`, finite for all positive x.
pub fn bessel_k1_scaled(x: f64) -> Result<f64> {
    check_k1_arg(x)?;
    if x < K1_SWITCH {
        Ok(exp(x) * (1.0 - series_remainder(x)) / x)
    } else {
        Ok(k1_scaled_cf(x))
    }
}

/// `1 − xK₁(x)` without the cancellation near 0.
pub fn one_minus_x_k1(x: f64) -> Result<f64> {
    check_k1_arg(x)?;
    if x < K1_SWITCH {
        Ok(series_remainder(x))
    } else {
        Ok(1.0 - x * exp(-x) * k1_scaled_cf(x))
    }
}

/// `1 − xK₁(x)` from the ascending series
/// `xK₁ = 1 + x ln(x/2) I₁(x) − (x²/4) Σ [ψ(k+1)+ψ(k+2)] (x²/4)ᵏ/(k!(k+1)!)`.
fn series_remainder(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let mut term = 1.0; // (x²/4)^k / (k!(k+1)!)
    let mut psi1 = -EULER_GAMMA; // ψ(k+1)
    let mut i1_sum = 0.0;
    let mut psi_sum = 0.0;
    let mut k = 0u32;
    loop {
        let psi2 = psi1 + 1.0 / (k + 1) as f64;
        i1_sum += term;
        psi_sum += (psi1 + psi2) * term;
        k += 1;
        term *= y / (k as f64 * (k + 1) as f64);
        psi1 = psi2;
        if term < EPS * i1_sum {
            break;
        }
    }
    // I₁(x) = (x/2) Σ term
    let x_ln_i1 = x * ln(0.5 * x) * 0.5 * x * i1_sum;
    y * psi_sum - x_ln_i1
}

/// Steed's continued fraction for `K₀, K₁`, returning `eˣK₁(x)`.
fn k1_scaled_cf(x: f64) -> f64 {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        a -= 2.0 * (i - 1) as f64;
        c = -a * c / i as f64;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if abs(dels / s) < EPS {
            break;
        }
    }
    let h = a1 * h;
    let k0_scaled = sqrt(PI / (2.0 * x)) / s;
    k0_scaled * (x + 0.5 - h) / x
}

/// Large-argument expansion `√(π/2x) e^{−x} Σ_j a_j(1)/xʲ` truncated after
/// `terms` terms.
pub fn bessel_k1_asymptotic(x: f64, terms: usize) -> f64 {
    let mu = 4.0;
    let mut sum = 0.0;
    let mut term = 1.0;
    for j in 0..terms {
        sum += term;
        let odd = (2 * j + 1) as f64;
        term *= (mu - odd * odd) / ((j + 1) as f64 * 8.0 * x);
    }
    sqrt(PI / (2.0 * x)) * exp(-x) * sum
}

/// Ion in a dilute buffer gas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasIonSystem {
    /// Polarizability volume, m³.
    pub chi: f64,
    /// Ion charge, C.
    pub q: f64,
    /// Gas number density, 1/m³.
    pub rho_number: f64,
    /// Surface mass density entering `C_k`, kg/m².
    pub rho_mass: f64,
    /// Ion–atom reduced mass, kg.
    pub reduced_mass: f64,
    /// Relative velocity, m/s.
    pub rel_velocity: f64,
    /// Ion mass, kg.
    pub ion_mass: f64,
    /// Trap angular frequency, rad/s.
    pub trap_freq: f64,
    /// Mean ion–surface distance, m.
    pub z: f64,
    /// Surface area, m².
    pub area_s: f64,
}

impl GasIonSystem {
    /// Checks that every field is finite and positive. `chi` and
    /// `rho_number` may also be zero.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("chi", self.chi, true),
            ("q", self.q, false),
            ("rho_number", self.rho_number, true),
            ("rho_mass", self.rho_mass, false),
            ("reduced_mass", self.reduced_mass, false),
            ("rel_velocity", self.rel_velocity, false),
            ("ion_mass", self.ion_mass, false),
            ("trap_freq", self.trap_freq, false),
            ("z", self.z, false),
            ("area_s", self.area_s, false),
        ];
        for (name, v, zero_ok) in fields {
            let ok = v.is_finite() && (v > 0.0 || (zero_ok && v == 0.0));
            if !ok {
                return Err(Error::InvalidParameter {
                    name,
                    reason: "must be finite and positive",
                });
            }
        }
        Ok(())
    }

    /// `Λ = χρq²/(8ε₀)`, J·m.
    pub fn lambda(&self) -> f64 {
        self.chi * self.rho_number * self.q * self.q / (8.0 * EPS0)
    }
}

/// Gas dispersion `ω(k) = a·k^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionLaw {
    amplitude: f64,
    exponent: f64,
}

impl DispersionLaw {
    /// Exponent of the ripplon-like default law.
    pub const DEFAULT_EXPONENT: f64 = 1.5;

    pub fn power_law(amplitude: f64, exponent: f64) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "dispersion amplitude",
                reason: "must be finite and positive",
            });
        }
        if !exponent.is_finite() {
            return Err(Error::InvalidParameter {
                name: "dispersion exponent",
                reason: "must be finite",
            });
        }
        Ok(Self {
            amplitude,
            exponent,
        })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn omega(&self, k: f64) -> f64 {
        self.amplitude * powf(k, self.exponent)
    }
}

/// Polarization potential `U(r) = −χq²/(8πε₀r⁴)` in joules.
pub fn polarization_potential(sys: &GasIonSystem, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain {
            what: "distance must be positive",
            value: r,
        });
    }
    let r2 = r * r;
    Ok(-sys.chi * sys.q * sys.q / (8.0 * PI * EPS0 * r2 * r2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LangevinRates {
    /// Critical impact parameter 𝔭, m.
    pub impact_param: f64,
    /// Rate constant `π𝔭²𝔳`, m³/s.
    pub rate_const: f64,
    /// Collision rate `ρ π𝔭²𝔳`, 1/s.
    pub reaction_rate: f64,
}

pub fn langevin_rates(sys: &GasIonSystem) -> LangevinRates {
    let v = sys.rel_velocity;
    let p4 = sys.chi * sys.q * sys.q / (PI * EPS0 * sys.reduced_mass * v * v);
    let impact_param = sqrt(sqrt(p4));
    let rate_const = PI * sqrt(p4) * v;
    LangevinRates {
        impact_param,
        rate_const,
        reaction_rate: sys.rho_number * rate_const,
    }
}

/// Closed form `ρq√(πχ/(ε₀𝔪))` of the Langevin collision rate.
pub fn langevin_rate_closed_form(sys: &GasIonSystem) -> f64 {
    sys.rho_number * sys.q * sqrt(PI * sys.chi / (EPS0 * sys.reduced_mass))
}

/// Lamb-Dicke-like factor `η_k = k√(ħ/(2mν))`.
pub fn eta_k(k: f64, sys: &GasIonSystem) -> f64 {
    k * sqrt(HBAR / (2.0 * sys.ion_mass * sys.trap_freq))
}

/// Amplitude `C_k = √(ħ/(2ρω(k)))` of the surface displacement, m².
pub fn mode_amplitude(k: f64, sys: &GasIonSystem, disp: &DispersionLaw) -> f64 {
    sqrt(HBAR / (2.0 * sys.rho_mass * disp.omega(k)))
}

/// Coupling `V_k = ΛC_k/(z√S)·[1/z − kK₁(kz)]` in joules.
pub fn coupling_vk(k: f64, sys: &GasIonSystem, disp: &DispersionLaw) -> Result<f64> {
    if !(sys.z > 0.0) {
        return Err(Error::Domain {
            what: "ion-surface distance must be positive",
            value: sys.z,
        });
    }
    if !(k >= 0.0) || !k.is_finite() {
        return Err(Error::Domain {
            what: "wavenumber must be finite and nonnegative",
            value: k,
        });
    }
    sys.validate()?;
    if k == 0.0 {
        return Ok(0.0);
    }
    let bracket = one_minus_x_k1(k * sys.z)? / sys.z;
    let c_k = mode_amplitude(k, sys, disp);
    Ok(sys.lambda() * c_k / (sys.z * sqrt(sys.area_s)) * bracket)
}

/// Coupling rate `g_k = η_k V_k/ħ` in rad/s.
pub fn coupling_rate(k: f64, sys: &GasIonSystem, disp: &DispersionLaw) -> Result<f64> {
    Ok(eta_k(k, sys) * coupling_vk(k, sys, disp)? / HBAR)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// `eˣK₁(x) = ∫₀^∞ e^{−x(cosh t − 1)} cosh t dt` by the trapezoid rule.
    fn k1_scaled_quadrature(x: f64) -> f64 {
        let h = 0.02;
        let mut sum = 0.5;
        let mut n = 1;
        loop {
            let t = n as f64 * h;
            let c = libm::cosh(t);
            let f = exp(-x * (c - 1.0)) * c;
            sum += f;
            if f < 1e-20 * sum {
                break;
            }
            n += 1;
        }
        sum * h
    }

    fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
        let (a, b) = (ln(lo), ln(hi));
        (0..n).map(move |i| exp(a + (b - a) * i as f64 / (n - 1) as f64))
    }

    fn rel(a: f64, b: f64) -> f64 {
        abs(a - b) / abs(b)
    }

    fn beryllium_h2() -> GasIonSystem {
        GasIonSystem {
            chi: 0.787e-30,
            q: ELEMENTARY_CHARGE,
            rho_number: 1e14,
            rho_mass: 1e-9,
            reduced_mass: 9.012 * 2.016 / (9.012 + 2.016) * ATOMIC_MASS,
            rel_velocity: 500.0,
            ion_mass: 9.012_182 * ATOMIC_MASS,
            trap_freq: 2.0 * PI * 11.2e6,
            z: 1e-6,
            area_s: 1e-10,
        }
    }

    #[test]
    fn k1_reference_value() {
        assert!(abs(bessel_k1(1.0).unwrap() - 0.601_907_230_2) < 1e-10);
        assert!(rel(bessel_k1(1.0).unwrap(), exp(-1.0) * k1_scaled_quadrature(1.0)) < 1e-12);
    }

    #[test]
    fn k1_small_argument() {
        for x in [1e-6, 1e-8, 1e-10] {
            assert!(abs(x * bessel_k1(x).unwrap() - 1.0) < 1e-9);
        }
    }

    #[test]
    fn k1_matches_asymptotic_series() {
        let k = bessel_k1(10.0).unwrap();
        assert!(rel(k, bessel_k1_asymptotic(10.0, 8)) < 1e-6);
    }

    #[test]
    fn k1_matches_quadrature_on_log_grid() {
        for x in log_grid(1e-4, 100.0, 200) {
            let q = k1_scaled_quadrature(x);
            let s = bessel_k1_scaled(x).unwrap();
            assert!(rel(s, q) < 1e-10, "x={x}: {s} vs {q}");
        }
        for x in log_grid(1e-6, 700.0, 200) {
            let q = exp(-x) * k1_scaled_quadrature(x);
            assert!(rel(bessel_k1(x).unwrap(), q) < 1e-10, "x={x}");
        }
    }

    #[test]
    fn k1_domain_and_underflow() {
        assert!(bessel_k1(0.0).is_err());
        assert!(bessel_k1(-1.0).is_err());
        assert!(bessel_k1(f64::NAN).is_err());
        assert_eq!(bessel_k1(800.0).unwrap(), 0.0);
        assert!(bessel_k1_scaled(800.0).unwrap() > 0.0);
    }

    #[test]
    fn k1_is_continuous_at_switch() {
        let below = bessel_k1(K1_SWITCH * (1.0 - 1e-15)).unwrap();
        let at = bessel_k1(K1_SWITCH).unwrap();
        assert!(rel(below, at) < 1e-13);
        let sys = beryllium_h2();
        let disp = DispersionLaw::power_law(1.0, 1.5).unwrap();
        let k = K1_SWITCH / sys.z;
        let lo = coupling_vk(k * (1.0 - 1e-15), &sys, &disp).unwrap();
        let hi = coupling_vk(k, &sys, &disp).unwrap();
        assert!(rel(lo, hi) < 1e-10);
    }

    #[test]
    fn potential_scaling() {
        let sys = beryllium_h2();
        let u1 = polarization_potential(&sys, 1e-9).unwrap();
        let u2 = polarization_potential(&sys, 2e-9).unwrap();
        assert!(u1 < 0.0);
        assert!(rel(u2 / u1, 1.0 / 16.0) < 1e-14);
        let r = 1e-9_f64;
        let direct = -(0.787e-30 * 1.602_176_634e-19 * 1.602_176_634e-19)
            / (8.0 * core::f64::consts::PI * 8.854_187_812_8e-12 * r.powi(4));
        assert!(rel(u1, direct) < 1e-14);
        let neutral = GasIonSystem { chi: 0.0, ..sys };
        assert_eq!(polarization_potential(&neutral, 1e-9).unwrap(), 0.0);
        assert!(polarization_potential(&sys, 0.0).is_err());
    }

    #[test]
    fn langevin_identities() {
        let sys = beryllium_h2();
        let r = langevin_rates(&sys);
        assert!(rel(r.reaction_rate, langevin_rate_closed_form(&sys)) < 1e-12);
        let faster = GasIonSystem {
            rel_velocity: 2.0 * sys.rel_velocity,
            ..sys
        };
        assert!(rel(langevin_rates(&faster).rate_const, r.rate_const) < 1e-12);
        assert!(rel(langevin_rates(&faster).impact_param, r.impact_param / sqrt(2.0)) < 1e-12);
        let empty = GasIonSystem {
            rho_number: 0.0,
            ..sys
        };
        assert_eq!(langevin_rates(&empty).reaction_rate, 0.0);
        let dense = GasIonSystem {
            rho_number: 3.0 * sys.rho_number,
            ..sys
        };
        assert!(rel(langevin_rates(&dense).reaction_rate, 3.0 * r.reaction_rate) < 1e-14);
    }

    #[test]
    fn eta_values() {
        let sys = beryllium_h2();
        assert_eq!(eta_k(0.0, &sys), 0.0);
        assert!(rel(eta_k(2e6, &sys), 2.0 * eta_k(1e6, &sys)) < 1e-15);
        let eta = eta_k(1e6, &sys);
        assert!(eta > 0.0 && eta < 0.05, "{eta}");
    }

    #[test]
    fn coupling_limits() {
        let sys = beryllium_h2();
        let disp = DispersionLaw::power_law(1.0, 1.5).unwrap();
        assert_eq!(coupling_vk(0.0, &sys, &disp).unwrap(), 0.0);
        let mut prev = f64::INFINITY;
        for k in [1e2, 1e0, 1e-2, 1e-4] {
            let v = abs(coupling_vk(k, &sys, &disp).unwrap());
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 1e-3 * abs(coupling_vk(1e2, &sys, &disp).unwrap()));
        // kz = 50: bracket is 1/z up to e^{−50}
        let k = 50.0 / sys.z;
        let far = sys.lambda() * mode_amplitude(k, &sys, &disp) / (sys.z * sys.z * sqrt(sys.area_s));
        assert!(rel(coupling_vk(k, &sys, &disp).unwrap(), far) < 1e-15);
        // kz = 1
        let k = 1.0 / sys.z;
        let bracket = coupling_vk(k, &sys, &disp).unwrap() * sys.z * sqrt(sys.area_s)
            / (sys.lambda() * mode_amplitude(k, &sys, &disp));
        assert!(abs(bracket * sys.z - 0.398_092_769_8) < 1e-10);
    }

    #[test]
    fn coupling_domain_errors() {
        let sys = beryllium_h2();
        let disp = DispersionLaw::power_law(1.0, 1.5).unwrap();
        assert!(coupling_vk(1.0, &GasIonSystem { z: 0.0, ..sys }, &disp).is_err());
        assert!(coupling_vk(-1.0, &sys, &disp).is_err());
        assert!(DispersionLaw::power_law(0.0, 1.5).is_err());
        assert!(GasIonSystem { q: -1.0, ..sys }.validate().is_err());
    }

    /// Value tagged with exponents of (kg, m, s, A).
    #[derive(Clone, Copy, Debug)]
    struct Dim([i32; 4]);

    impl Dim {
        const ONE: Dim = Dim([0, 0, 0, 0]);
        const KG: Dim = Dim([1, 0, 0, 0]);
        const M: Dim = Dim([0, 1, 0, 0]);
        const S: Dim = Dim([0, 0, 1, 0]);
        const C: Dim = Dim([0, 0, 1, 1]);

        fn mul(self, o: Dim) -> Dim {
            Dim(core::array::from_fn(|i| self.0[i] + o.0[i]))
        }
        fn div(self, o: Dim) -> Dim {
            Dim(core::array::from_fn(|i| self.0[i] - o.0[i]))
        }
        fn pow(self, n: i32) -> Dim {
            Dim(self.0.map(|e| e * n))
        }
        fn half(self) -> Dim {
            assert!(self.0.iter().all(|e| e % 2 == 0), "odd power under sqrt");
            Dim(self.0.map(|e| e / 2))
        }
    }

    impl PartialEq for Dim {
        fn eq(&self, o: &Dim) -> bool {
            self.0 == o.0
        }
    }

    #[test]
    fn units_compose_to_rate() {
        let joule = Dim::KG.mul(Dim::M.pow(2)).div(Dim::S.pow(2));
        let hbar = joule.mul(Dim::S);
        let eps0 = Dim::C.pow(2).div(joule.mul(Dim::M));
        let chi = Dim::M.pow(3);
        let rho_n = Dim::ONE.div(Dim::M.pow(3));
        let rho_m = Dim::KG.div(Dim::M.pow(2));
        let k = Dim::ONE.div(Dim::M);
        let omega = Dim::ONE.div(Dim::S);

        let lambda = chi.mul(rho_n).mul(Dim::C.pow(2)).div(eps0);
        assert_eq!(lambda, joule.mul(Dim::M));
        let c_k = hbar.div(rho_m.mul(omega)).half();
        let bracket = Dim::ONE.div(Dim::M);
        let v_k = lambda.mul(c_k).div(Dim::M.mul(Dim::M.pow(2).half())).mul(bracket);
        assert_eq!(v_k, joule);
        let eta = k.mul(hbar.div(Dim::KG.mul(omega)).half());
        assert_eq!(eta, Dim::ONE);
        assert_eq!(eta.mul(v_k).div(hbar), omega);

        let u = chi.mul(Dim::C.pow(2)).div(eps0.mul(Dim::M.pow(4)));
        assert_eq!(u, joule);
        let velocity = Dim::M.div(Dim::S);
        let p4 = chi.mul(Dim::C.pow(2)).div(eps0.mul(Dim::KG).mul(velocity.pow(2)));
        assert_eq!(p4, Dim::M.pow(4));
        assert_eq!(rho_n.mul(p4.half()).mul(velocity), omega);
    }

    proptest! {
        #[test]
        fn langevin_identity_random(
            chi in 1e-31f64..1e-28,
            rho in 1e10f64..1e20,
            mass in 1e-27f64..1e-24,
            v in 1.0f64..1e4,
        ) {
            let sys = GasIonSystem { chi, rho_number: rho, reduced_mass: mass, rel_velocity: v, ..beryllium_h2() };
            let r = langevin_rates(&sys);
            prop_assert!(rel(r.reaction_rate, langevin_rate_closed_form(&sys)) < 1e-12);
        }
    }
}
