//! Motional dynamics under carrier driving.
//!
//! The carrier only rotates the spin, so the motion sees the gas as a plain
//! thermal reservoir. A coherent term `|α1⟩⟨α2|` then evolves into a Gaussian
//! P function centred on `u(t)α` with dispersion `D(t) = n̄(1 − e^{−Γt})`,
//! where `u(t) = e^{−(Γ/2 + iν)t}`.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::math::{abs, exp, expm1, sqrt, PI};
use crate::{Error, Result};

/// Reservoir and trap parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarrierParams {
    /// Damping constant Γ, 1/s.
    pub gamma: f64,
    /// Trap frequency ν, rad/s.
    pub nu: f64,
    /// Thermal occupation of the gas modes.
    pub nbar: f64,
}

impl CarrierParams {
    pub fn new(gamma: f64, nu: f64, nbar: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                reason: "must be finite and nonnegative",
            });
        }
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "nu",
                reason: "must be finite and positive",
            });
        }
        if !(nbar >= 0.0 && nbar.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "nbar",
                reason: "must be finite and nonnegative",
            });
        }
        Ok(Self { gamma, nu, nbar })
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain {
            what: "time",
            value: t,
        });
    }
    Ok(())
}

/// `u(t) = e^{−(Γ/2 + iν)t}`; the small frequency shifts are dropped.
pub fn propagator_u(p: &CarrierParams, t: f64) -> Complex64 {
    Complex64::from_polar(exp(-p.gamma * t / 2.0), -p.nu * t)
}

/// Response of the ion mode to gas mode `k`:
///
/// `v_k(t) = −g_k e^{−iω_k t} (1 − e^{i(ω_k−ν)t} e^{−Γt/2}) / (Γ/2 − i(ω_k − ν))`.
///
/// Near resonance with vanishing damping the ratio is evaluated by its
/// Taylor series, which tends to `−g_k e^{−iνt} t`.
pub fn coupling_response_vk(p: &CarrierParams, gk: f64, omega_k: f64, t: f64) -> Complex64 {
    if gk == 0.0 || t == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let z = Complex64::new(p.gamma / 2.0, -(omega_k - p.nu));
    let w = z * t;
    // (1 − e^{−w}) / w
    let ratio = if w.norm() < 1e-3 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for k in 2..=8 {
            term = -term * w / k as f64;
            sum += term;
        }
        sum
    } else {
        (Complex64::new(1.0, 0.0) - (-w).exp()) / w
    };
    -Complex64::from_polar(gk, -omega_k * t) * ratio * t
}

/// `D(t) = n̄(1 − e^{−Γt})`.
pub fn dispersion_d(p: &CarrierParams, t: f64) -> f64 {
    -p.nbar * expm1(-p.gamma * t)
}

/// `⟨a†a⟩(t) = |u(t)α|² + D(t)` for an initial coherent state `|α⟩`.
pub fn mean_excitation(p: &CarrierParams, alpha: Complex64, t: f64) -> f64 {
    (propagator_u(p, t) * alpha).norm_sqr() + dispersion_d(p, t)
}

/// Smallest dispersion for which the Gaussian can be evaluated pointwise.
pub const MIN_DISPERSION: f64 = 1e-300;

/// Conditional P distribution for the representative term `|α1⟩⟨α2|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPState {
    pub alpha1: Complex64,
    pub alpha2: Complex64,
    pub t: f64,
    pub u: Complex64,
    pub dispersion: f64,
    /// `⟨α1|α2⟩ / (π D)`.
    pub prefactor: Complex64,
}

impl GaussianPState {
    pub fn new(p: &CarrierParams, alpha1: Complex64, alpha2: Complex64, t: f64) -> Result<Self> {
        check_time(t)?;
        let u = propagator_u(p, t);
        let dispersion = dispersion_d(p, t);
        let overlap =
            (alpha1.conj() * alpha2 - (alpha1.norm_sqr() + alpha2.norm_sqr()) / 2.0).exp();
        let prefactor = if dispersion > MIN_DISPERSION {
            overlap / (PI * dispersion)
        } else {
            Complex64::new(f64::INFINITY, 0.0)
        };
        Ok(Self {
            alpha1,
            alpha2,
            t,
            u,
            dispersion,
            prefactor,
        })
    }

    /// Physical (diagonal) slice `|α⟩⟨α|`.
    pub fn coherent(p: &CarrierParams, alpha: Complex64, t: f64) -> Result<Self> {
        Self::new(p, alpha, alpha, t)
    }

    /// Centre of the distribution, `u(t)α2`.
    pub fn center(&self) -> Complex64 {
        self.u * self.alpha2
    }

    /// `prefactor · exp[−(γ* − u*α1*)(γ − uα2)/D]`.
    pub fn conditional_p(&self, point: Complex64) -> Result<Complex64> {
        if !(self.dispersion > MIN_DISPERSION) {
            return Err(Error::DegenerateDispersion {
                dispersion: self.dispersion,
            });
        }
        let left = point.conj() - (self.u * self.alpha1).conj();
        let right = point - self.u * self.alpha2;
        Ok(self.prefactor * (-(left * right) / self.dispersion).exp())
    }
}

/// Rectangular sampling grid over the phase plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub n_re: usize,
    pub n_im: usize,
}

impl GridSpec {
    pub fn square(half_width: f64, points: usize) -> Self {
        Self {
            re_min: -half_width,
            re_max: half_width,
            im_min: -half_width,
            im_max: half_width,
            n_re: points,
            n_im: points,
        }
    }

    /// 201×201 nodes over `±(|α| + 4√(n̄+1))`, wide enough to hold all but
    /// ~1e-6 of the Gaussian mass.
    pub fn default_for(alpha: Complex64, nbar: f64) -> Self {
        Self::square(alpha.norm() + 4.0 * sqrt(nbar + 1.0), 201)
    }

    pub fn re_step(&self) -> f64 {
        (self.re_max - self.re_min) / (self.n_re.max(2) - 1) as f64
    }

    pub fn im_step(&self) -> f64 {
        (self.im_max - self.im_min) / (self.n_im.max(2) - 1) as f64
    }

    /// Phase-plane point of node `(i_re, i_im)`.
    pub fn node(&self, i_re: usize, i_im: usize) -> Complex64 {
        Complex64::new(
            self.re_min + i_re as f64 * self.re_step(),
            self.im_min + i_im as f64 * self.im_step(),
        )
    }

    fn validate(&self) -> Result<()> {
        if self.n_re < 2 || self.n_im < 2 {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: "needs at least two nodes per axis",
            });
        }
        if !(self.re_max > self.re_min && self.im_max > self.im_min) {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: "axis bounds must be increasing",
            });
        }
        Ok(())
    }
}

/// Sampled P function. `values[i_im * n_re + i_re]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PGrid {
    pub spec: GridSpec,
    pub t: f64,
    pub values: Vec<f64>,
}

impl PGrid {
    pub fn value(&self, i_re: usize, i_im: usize) -> f64 {
        self.values[i_im * self.spec.n_re + i_re]
    }

    /// Iterates `(point, value)` in row order (imaginary axis slow).
    pub fn nodes(&self) -> impl Iterator<Item = (Complex64, f64)> + '_ {
        let n_re = self.spec.n_re;
        self.values
            .iter()
            .enumerate()
            .map(move |(k, &v)| (self.spec.node(k % n_re, k / n_re), v))
    }

    fn cell_area(&self) -> f64 {
        self.spec.re_step() * self.spec.im_step()
    }

    /// Riemann-sum integral of the samples.
    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area()
    }

    pub fn mean(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut mass = 0.0;
        for (z, v) in self.nodes() {
            acc += z * v;
            mass += v;
        }
        acc / mass
    }

    /// `E|γ − ⟨γ⟩|²`, which equals `D(t)` for the Gaussian.
    pub fn central_second_moment(&self) -> f64 {
        let mean = self.mean();
        let mut acc = 0.0;
        let mut mass = 0.0;
        for (z, v) in self.nodes() {
            acc += (z - mean).norm_sqr() * v;
            mass += v;
        }
        acc / mass
    }

    /// `E|γ|²`.
    pub fn second_moment(&self) -> f64 {
        let mut acc = 0.0;
        let mut mass = 0.0;
        for (z, v) in self.nodes() {
            acc += z.norm_sqr() * v;
            mass += v;
        }
        acc / mass
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Samples the diagonal P function of an initial coherent state `|α⟩` on a grid.
pub fn pgrid(p: &CarrierParams, alpha: Complex64, t: f64, grid: GridSpec) -> Result<PGrid> {
    grid.validate()?;
    let state = GaussianPState::coherent(p, alpha, t)?;
    let mut values = Vec::with_capacity(grid.n_re * grid.n_im);
    for i_im in 0..grid.n_im {
        for i_re in 0..grid.n_re {
            let v = state.conditional_p(grid.node(i_re, i_im))?;
            debug_assert!(abs(v.im) <= 1e-12 * v.re.max(1e-300) + 1e-300);
            values.push(v.re.max(0.0));
        }
    }
    Ok(PGrid {
        spec: grid,
        t,
        values,
    })
}
