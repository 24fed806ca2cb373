//! Atomic coherent states `|μ,ν⟩_N = (μa† + νb†)^N |0,0⟩ / √N!`, phase
//! states, and the overlap of arbitrary states with that family.
//!
//! Amplitudes are built in log-magnitude/phase form so that
//! `C(N,n)^{1/2} μ^n ν^{N-n}` never overflows or underflows for hundreds of
//! atoms.
//!
//! The maximum overlap is located on the `(ϑ, χ)` chart with
//! `μ = cos(ϑ/2)`, `ν = sin(ϑ/2) e^{iχ}`. For fixed `ϑ` the overlap amplitude
//! is a trigonometric polynomial in `χ`, so each grid row is a single FFT.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{domain, Result};
use crate::fock::TwoModeFockState;
use crate::special::{ln_binomial, ln_pow};
use crate::Real;

/// Label `(μ, ν)` of an atomic coherent state, stored in the canonical gauge
/// `μ ≥ 0` real and `|μ|² + |ν|² = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePair<T> {
    mu: Complex<T>,
    nu: Complex<T>,
}

impl<T: Real> ModePair<T> {
    /// Normalises and removes the global phase. Fails for `μ = ν = 0`.
    pub fn new(mu: Complex<T>, nu: Complex<T>) -> Result<Self> {
        let norm = (mu.norm_sqr() + nu.norm_sqr()).sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(domain("mode pair must have positive finite norm"));
        }
        let (mu, nu) = (mu.unscale(norm), nu.unscale(norm));
        if mu.norm() == T::zero() {
            return Ok(Self {
                mu: Complex::new(T::zero(), T::zero()),
                nu: Complex::new(nu.norm(), T::zero()),
            });
        }
        let gauge = Complex::from_polar(T::one(), -mu.arg());
        Ok(Self {
            mu: Complex::new(mu.norm(), T::zero()),
            nu: nu * gauge,
        })
    }

    /// `μ = cos(ϑ/2)`, `ν = sin(ϑ/2) e^{iχ}` with `ϑ` clamped to `[0, π]`.
    pub fn from_angles(theta: T, chi: T) -> Self {
        let theta = theta.max(T::zero()).min(T::PI());
        let half = theta / T::lit(2.0);
        Self {
            mu: Complex::new(half.cos().max(T::zero()), T::zero()),
            nu: Complex::from_polar(half.sin().max(T::zero()), wrap_angle(chi)),
        }
    }

    /// Canonical image of the phase state `|φ⟩_N`: `ϑ = π/2`, `χ = -2φ`.
    pub fn phase(phi: T) -> Self {
        Self::from_angles(T::FRAC_PI_2(), -(phi + phi))
    }

    pub fn mu(&self) -> Complex<T> {
        self.mu
    }

    pub fn nu(&self) -> Complex<T> {
        self.nu
    }

    /// Polar angle `ϑ ∈ [0, π]`.
    pub fn polar_angle(&self) -> T {
        T::lit(2.0) * self.nu.norm().atan2(self.mu.re)
    }

    /// Relative phase `χ ∈ [-π, π)`; zero at the poles.
    pub fn relative_phase(&self) -> T {
        if self.nu.norm() == T::zero() || self.mu.re == T::zero() {
            T::zero()
        } else {
            wrap_angle(self.nu.arg())
        }
    }
}

/// Maps an angle onto `[-π, π)`.
pub fn wrap_angle<T: Real>(x: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut y = (x + T::PI()) % two_pi;
    if y < T::zero() {
        y = y + two_pi;
    }
    let y = y - T::PI();
    if y >= T::PI() {
        -T::PI()
    } else {
        y
    }
}

/// Amplitudes `C(N,n)^{1/2} μ^n ν^{N-n}` for arbitrary (not gauge-fixed)
/// `μ, ν`.
fn coherent_amplitudes<T: Real>(mu: Complex<T>, nu: Complex<T>, n: usize) -> Vec<Complex<T>> {
    let (ln_mu, arg_mu) = (mu.norm().ln(), mu.arg());
    let (ln_nu, arg_nu) = (nu.norm().ln(), nu.arg());
    let half = T::lit(0.5);
    (0..=n)
        .map(|k| {
            let ln_mag =
                half * ln_binomial::<T>(n, k) + ln_pow(ln_mu, k) + ln_pow(ln_nu, n - k);
            let phase =
                T::from_usize_lossy(k) * arg_mu + T::from_usize_lossy(n - k) * arg_nu;
            Complex::from_polar(ln_mag.exp(), phase)
        })
        .collect()
}

/// `|μ,ν⟩_N` for a canonical pair.
pub fn atomic_coherent_state<T: Real>(pair: &ModePair<T>, n: usize) -> TwoModeFockState<T> {
    TwoModeFockState::from_amplitudes_unchecked(coherent_amplitudes(pair.mu, pair.nu, n))
}

/// Phase state `|φ⟩_N`, i.e. `μ = e^{iφ}/√2`, `ν = e^{-iφ}/√2`, keeping
/// those phases in the amplitudes.
pub fn phase_state<T: Real>(phi: T, n: usize) -> TwoModeFockState<T> {
    let r = T::FRAC_1_SQRT_2();
    TwoModeFockState::from_amplitudes_unchecked(coherent_amplitudes(
        Complex::from_polar(r, phi),
        Complex::from_polar(r, -phi),
        n,
    ))
}

/// `⟨pair2|pair1⟩_N = (μ₁μ₂* + ν₁ν₂*)^N`, evaluated in log/arg form.
pub fn overlap_kernel<T: Real>(pair1: &ModePair<T>, pair2: &ModePair<T>, n: usize) -> Complex<T> {
    if n == 0 {
        return Complex::new(T::one(), T::zero());
    }
    let z = pair1.mu * pair2.mu.conj() + pair1.nu * pair2.nu.conj();
    let nn = T::from_usize_lossy(n);
    Complex::from_polar((nn * z.norm().ln()).exp(), nn * z.arg())
}

/// `|⟨ψ|μ,ν⟩_N|² / ⟨ψ|ψ⟩` with `N` the atom number of `state`.
pub fn overlap_with<T: Real>(state: &TwoModeFockState<T>, pair: &ModePair<T>) -> T {
    OverlapEvaluator::new(state).value(pair.polar_angle(), pair.relative_phase())
}

/// Overlap with the phase state `|φ⟩_N`.
pub fn phase_state_overlap<T: Real>(state: &TwoModeFockState<T>, phi: T) -> T {
    overlap_with(state, &ModePair::phase(phi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapResult<T> {
    pub p_max: T,
    pub argmax: ModePair<T>,
    /// Grid steps per π used for the coarse search.
    pub grid_resolution_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Grid steps per π: `resolution + 1` polar rows and `2·resolution`
    /// distinct relative phases.
    pub resolution: usize,
    /// Refinement stops once a full coordinate sweep moves less than this.
    pub step_tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            resolution: 180,
            step_tolerance: 1e-6,
            max_sweeps: 200,
        }
    }
}

/// Maximises [`overlap_with`] over the whole coherent-state family with the
/// default 1°×1° grid and golden-section refinement.
pub fn max_overlap<T: Real>(state: &TwoModeFockState<T>) -> OverlapResult<T> {
    max_overlap_with(state, &SearchOptions::default())
}

pub fn max_overlap_with<T: Real>(
    state: &TwoModeFockState<T>,
    opts: &SearchOptions,
) -> OverlapResult<T> {
    let resolution = opts.resolution.max(2);
    if state.total_atoms() == 0 {
        return OverlapResult {
            p_max: T::one(),
            argmax: ModePair::from_angles(T::zero(), T::zero()),
            grid_resolution_used: resolution,
        };
    }
    let eval = OverlapEvaluator::new(state);
    let (theta0, chi0, _) = eval.grid_search(resolution);
    let step = T::PI() / T::from_usize_lossy(resolution);
    let (theta, chi, p) = eval.refine(theta0, chi0, step, opts);
    OverlapResult {
        p_max: p,
        argmax: ModePair::from_angles(theta, chi),
        grid_resolution_used: resolution,
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;
const GOLDEN_TOL: f64 = 1e-8;
const GOLDEN_MAX_ITERS: usize = 200;

struct OverlapEvaluator<T> {
    conj_amps: Vec<Complex<T>>,
    half_ln_binom: Vec<T>,
    norm_sq: T,
}

impl<T: Real> OverlapEvaluator<T> {
    fn new(state: &TwoModeFockState<T>) -> Self {
        let n = state.total_atoms();
        let half = T::lit(0.5);
        Self {
            conj_amps: state.amplitudes().iter().map(|c| c.conj()).collect(),
            half_ln_binom: (0..=n).map(|k| half * ln_binomial::<T>(n, k)).collect(),
            norm_sq: state.norm_sq(),
        }
    }

    fn atoms(&self) -> usize {
        self.conj_amps.len() - 1
    }

    /// `w_k = conj(c_k) C(N,k)^{1/2} cos^k(ϑ/2) sin^{N-k}(ϑ/2)`.
    fn row_weights(&self, theta: T) -> Vec<Complex<T>> {
        let n = self.atoms();
        let half = theta / T::lit(2.0);
        let ln_c = half.cos().max(T::zero()).ln();
        let ln_s = half.sin().max(T::zero()).ln();
        self.conj_amps
            .iter()
            .zip(&self.half_ln_binom)
            .enumerate()
            .map(|(k, (c, &hb))| c.scale((hb + ln_pow(ln_c, k) + ln_pow(ln_s, n - k)).exp()))
            .collect()
    }

    /// `|Σ_k w_k e^{iχ(N-k)}|² / ⟨ψ|ψ⟩` by Horner's rule in `e^{iχ}`.
    fn eval_row(&self, weights: &[Complex<T>], chi: T) -> T {
        let z = Complex::from_polar(T::one(), chi);
        let acc = weights
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |acc, &w| acc * z + w);
        acc.norm_sqr() / self.norm_sq
    }

    fn value(&self, theta: T, chi: T) -> T {
        self.eval_row(&self.row_weights(theta), chi)
    }

    /// Coarse search; ties go to the lowest `ϑ`, then the lowest `χ`.
    fn grid_search(&self, resolution: usize) -> (T, T, T) {
        let n = self.atoms();
        let cols = 2 * resolution;
        let step = T::PI() / T::from_usize_lossy(resolution);
        let fft: Arc<dyn Fft<T>> = FftPlanner::new().plan_fft(cols, FftDirection::Inverse);
        let rows: Vec<(usize, T)> = (0..=resolution)
            .into_par_iter()
            .map(|i| {
                let theta = step * T::from_usize_lossy(i);
                let w = self.row_weights(theta);
                // S(χ_l) = Σ_j w_{N-j} (-1)^j e^{2πi jl/L} with χ_l = -π + 2πl/L
                let mut buf = vec![Complex::new(T::zero(), T::zero()); cols];
                for j in 0..=n {
                    let v = w[n - j];
                    let v = if j % 2 == 0 { v } else { -v };
                    buf[j % cols] = buf[j % cols] + v;
                }
                fft.process(&mut buf);
                let mut best = (0usize, T::neg_infinity());
                for (l, s) in buf.iter().enumerate() {
                    let p = s.norm_sqr() / self.norm_sq;
                    if p > best.1 {
                        best = (l, p);
                    }
                }
                best
            })
            .collect();
        let mut best = (0usize, 0usize, T::neg_infinity());
        for (i, &(l, p)) in rows.iter().enumerate() {
            if p > best.2 {
                best = (i, l, p);
            }
        }
        let theta = step * T::from_usize_lossy(best.0);
        let chi = -T::PI() + step * T::from_usize_lossy(best.1);
        (theta, chi, best.2)
    }

    fn refine(&self, theta: T, chi: T, bracket: T, opts: &SearchOptions) -> (T, T, T) {
        let tol = T::lit(opts.step_tolerance);
        let (mut theta, mut chi) = (theta, chi);
        let mut best = self.value(theta, chi);
        for _ in 0..opts.max_sweeps {
            let lo = (theta - bracket).max(T::zero());
            let hi = (theta + bracket).min(T::PI());
            let (t_new, p_t) = golden_max(|t| self.value(t, chi), lo, hi);
            let mut moved = T::zero();
            if p_t > best {
                moved = (t_new - theta).abs();
                theta = t_new;
                best = p_t;
            }
            let w = self.row_weights(theta);
            let (c_new, p_c) =
                golden_max(|c| self.eval_row(&w, c), chi - bracket, chi + bracket);
            if p_c > best {
                moved = moved.max((c_new - chi).abs());
                chi = wrap_angle(c_new);
                best = p_c;
            }
            if moved < tol {
                break;
            }
        }
        (theta, wrap_angle(chi), best)
    }
}

/// Golden-section maximisation of a unimodal function on `[lo, hi]`.
fn golden_max<T: Real>(f: impl Fn(T) -> T, lo: T, hi: T) -> (T, T) {
    let r = T::lit(INV_PHI);
    // never ask for more than the scalar type can resolve
    let floor = T::epsilon() * T::lit(4.0) * (lo.abs().max(hi.abs()) + T::one());
    let tol = T::lit(GOLDEN_TOL).max(floor);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let mut iters = 0;
    while (b - a).abs() > tol && iters < GOLDEN_MAX_ITERS {
        iters += 1;
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}
