//! Statistics of the next detection: conditional fringe visibility, the
//! fringe density and position sampling.
//!
//! With the jump operator `a + b e^{iφ}` the density of the next detection is
//! `‖(a + b e^{iφ})ψ‖² / (2π M ‖ψ‖²) = [1 + β_c cos(φ - θ)] / 2π` where
//! `β_c = 2|⟨a†b⟩| / (M ⟨ψ|ψ⟩)` and `θ = -arg⟨a†b⟩`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::fock::TwoModeFockState;
use crate::Real;

const BETA_CLAMP_SLACK: f64 = 1e-12;
const FLAT_FRINGE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeStats<T> {
    /// Conditional visibility in `[0, 1]`.
    pub beta_c: T,
    /// Most likely next detection position; 0 for a flat fringe.
    pub theta: T,
}

impl<T: Real> FringeStats<T> {
    /// Normalised density `[1 + β cos(φ - θ)] / 2π`.
    pub fn density(&self, phi: T) -> T {
        (T::one() + self.beta_c * (phi - self.theta).cos()) / (T::PI() + T::PI())
    }

    /// Rejection sampling against the flat envelope; accepts with
    /// probability `(1 + β cos(φ - θ)) / (1 + β)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let pi = T::PI();
        let ceiling = T::one() + self.beta_c;
        loop {
            let phi = pi * T::lit(2.0 * rng.random::<f64>() - 1.0);
            let u = T::lit(rng.random::<f64>());
            if u * ceiling < T::one() + self.beta_c * (phi - self.theta).cos() {
                return phi;
            }
        }
    }
}

pub fn fringe_stats<T: Real>(state: &TwoModeFockState<T>) -> Result<FringeStats<T>> {
    let m = state.total_atoms();
    if m == 0 {
        return Err(Error::NoAtoms);
    }
    let coherence = state.expect_adag_b();
    let mut beta = T::lit(2.0) * coherence.norm() / (T::from_usize_lossy(m) * state.norm_sq());
    if beta > T::one() {
        if beta > T::one() + T::lit(BETA_CLAMP_SLACK).max(T::tolerance()) {
            return Err(Error::Consistency(format!(
                "conditional visibility {beta} exceeds 1"
            )));
        }
        beta = T::one();
    }
    let theta = if beta < T::lit(FLAT_FRINGE) {
        T::zero()
    } else {
        -coherence.arg()
    };
    Ok(FringeStats { beta_c: beta, theta })
}

pub fn detection_density<T: Real>(state: &TwoModeFockState<T>, phi: T) -> Result<T> {
    Ok(fringe_stats(state)?.density(phi))
}

pub fn sample_position<T: Real, R: Rng + ?Sized>(
    state: &TwoModeFockState<T>,
    rng: &mut R,
) -> Result<T> {
    Ok(fringe_stats(state)?.sample(rng))
}
