//! Exact quantum-trajectory simulation of two leaky single-mode condensates
//! whose emitted atoms interfere at position-resolving detectors.
//!
//! The joint state lives in the fixed-total-number two-mode Fock space
//! ([`fock`]). Detections are quantum jumps sampled from the conditional
//! fringe density ([`jump`]), trajectories and ensembles are driven by
//! [`trajectory`], atomic coherent states and overlap maximisation live in
//! [`coherent`], and every closed-form approximation with its brute-force
//! oracle is in [`theory`].
//!
//! The numerical core is generic over the real scalar type through
//! [`Real`]; the aliases below fix it to `f64`, which is what the simulator
//! and the command line use.

pub mod coherent;
pub mod error;
pub mod fock;
pub mod jump;
pub mod output;
pub mod scalar;
pub mod special;
pub mod theory;
pub mod trajectory;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision two-mode state.
pub type FockState = fock::TwoModeFockState<f64>;
/// Single-precision two-mode state.
pub type FockStateF32 = fock::TwoModeFockState<f32>;
/// Double-precision coherent-state label.
pub type ModePair = coherent::ModePair<f64>;
/// Double-precision overlap maximisation result.
pub type OverlapResult = coherent::OverlapResult<f64>;
/// Double-precision fringe parameters.
pub type FringeStats = jump::FringeStats<f64>;
/// Complex amplitude type used throughout the `f64` API.
pub type C64 = num_complex::Complex<f64>;
