//! Exact simulation of W-state fusion with nonunitary partial-swap gates.
//!
//! - [`fock`]: multimode Fock states over `(spatial mode, polarization)`.
//! - [`optics`]: beam splitters, wave plates and heralded circuits.
//! - [`pswap`]: the partial-swap gate, abstract and optical.
//! - [`fusion`]: W states and their fusion outcome distributions.
//! - [`planner`]: protocol comparison and repeat-until-success costs.
//!
//! Amplitudes default to the exact [`Amplitude`] field; every state and map
//! is generic over [`Scalar`] so a `Complex64` backend is available for
//! arbitrary inputs.

pub mod amplitude;
pub mod fock;
pub mod fusion;
pub mod optics;
pub mod planner;
pub mod pswap;
pub mod rational;
pub mod scalar;

pub use amplitude::Amplitude;
pub use fock::{FockError, Mode, ModeLabel, ModeMap, Occupation, PhotonicState, Pol};
pub use fusion::{FusionError, OutcomeClass, OutcomeDistribution, OutcomeEntry, Residual};
pub use optics::{Circuit, CircuitError, Element, ElementKind};
pub use pswap::{GateAccounting, PswapError, TwoQubitMap};
pub use rational::Rational;
pub use scalar::Scalar;
