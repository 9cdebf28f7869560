//! Travelling waves of the damped, driven sine-Gordon equation
//! `phi_tt - phi_xx + sin(phi) + alpha phi_t + gamma = 0`.
//!
//! The wave profile reduces to a particle in a tilted washboard with viscous
//! drag. [`shooting`] finds the drag that joins neighbouring barrier tops
//! (kinks) or repeats with period `Xi` (soliton arrays), [`unperturbed`]
//! holds the closed forms used as oracles, and [`pde`] propagates the
//! resulting profiles in the full field equation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod integrate;
pub mod model;
pub mod numerics;
pub mod pde;
pub mod profile;
pub mod shooting;
pub mod unperturbed;

pub use error::{Error, Result};
pub use model::{Direction, Params, State};
pub use profile::{ProfileKind, WaveProfile};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
