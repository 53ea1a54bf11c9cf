//! Trapped-ion decoherence driven by polarization of the residual background gas.
//!
//! The crate is `no_std` (it needs `alloc`) and carries only the numerics:
//!
//! - [`states`]: the truncated Fock ⊗ spin basis, state containers and observables.
//! - [`pulses`]: closed-form carrier, red-sideband (JC) and blue-sideband (anti-JC)
//!   pulse maps, plus exact displacement-operator matrix elements.
//! - [`carrier`]: Gaussian P-function dynamics of the motion under carrier driving.
//! - [`hierarchy`]: the truncated c-number moment hierarchy of the damped anti-JC
//!   problem, the main production path for `P↓(t)`.
//! - [`oracle`]: a full Lindblad master-equation solver used as an independent
//!   reference for everything above.
//! - [`coupling`]: ion–gas coupling constants, Langevin collision rates and `K1`.
//! - [`heuristic`]: the phenomenological damped-Rabi formula and envelope analysis.
//!
//! File formats, presets and the command-line runner live in the `iondecay` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod carrier;
pub mod coupling;
mod error;
pub mod heuristic;
pub mod hierarchy;
pub(crate) mod math;
pub mod ode;
pub mod oracle;
pub mod pulses;
pub mod states;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use states::{DensityMatrix, FockSpinVector, Observables, SpinLabel, TimeSeries};
