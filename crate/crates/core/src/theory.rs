//! Closed-form approximations for visibility build-up, coherent-state
//! overlap, imperfect detection and collisional dephasing, plus two exact
//! oracles used to check them.
//!
//! Occupations and detection counts are reals where the imperfect-detection
//! substitution `n → n − ξk`, `k → ηk` makes them non-integer.

use rayon::prelude::*;

use crate::error::{config, domain, Result};
use crate::fock::TwoModeFockState;
use crate::jump::fringe_stats;
use crate::special::{erfcx, ln_binomial, log_sum_exp};

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(domain(msg()))
    }
}

/// Mean visibility after the first detection, `2n₁n₂ / (N² − N)`.
pub fn mean_beta_after_1(n1: f64, n2: f64) -> Result<f64> {
    let n = n1 + n2;
    check(n1 >= 0.0 && n2 >= 0.0 && n >= 2.0, || {
        format!("need n1, n2 >= 0 and n1 + n2 >= 2, got ({n1}, {n2})")
    })?;
    Ok(2.0 * n1 * n2 / (n * n - n))
}

/// Mean visibility after two detections, `(4/π)⟨β⟩₁`.
pub fn mean_beta_after_2(n1: f64, n2: f64) -> Result<f64> {
    Ok(4.0 / std::f64::consts::PI * mean_beta_after_1(n1, n2)?)
}

/// `e^{−1/k}` for equal initial occupations.
pub fn beta_equalpos_approx(k: f64) -> Result<f64> {
    check(k >= 1.0, || format!("k must be >= 1, got {k}"))?;
    Ok((-1.0 / k).exp())
}

/// `2√(n₁n₂)/(n₁+n₂) · e^{−1/k}`.
pub fn beta_unequal_approx(n1: f64, n2: f64, k: f64) -> Result<f64> {
    check(n1 >= 0.0 && n2 >= 0.0 && n1 + n2 > 0.0, || {
        format!("need non-negative occupations with n1 + n2 > 0, got ({n1}, {n2})")
    })?;
    Ok(2.0 * (n1 * n2).sqrt() / (n1 + n2) * beta_equalpos_approx(k)?)
}

fn check_nk(n: f64, k: f64) -> Result<()> {
    check(k >= 1.0 && k <= 2.0 * n, || format!("need 1 <= k <= 2n, got n = {n}, k = {k}"))
}

/// Gaussian approximation to the phase-state overlap after `k` detections
/// at one position: `½√(k(4n−k)/n²) · exp(−(φ²/2)·k(2n−k)/n)`.
pub fn pphi_approx(n: f64, k: f64, phi: f64) -> Result<f64> {
    check_nk(n, k)?;
    let peak = 0.5 * (k * (4.0 * n - k)).sqrt() / n;
    Ok(peak * (-0.5 * phi * phi * k * (2.0 * n - k) / n).exp())
}

fn check_eta(eta: f64) -> Result<()> {
    check(eta > 0.0 && eta <= 1.0, || {
        format!("eta must lie in (0, 1] for interfering detections, got {eta}")
    })
}

/// `e^{−1/(ηk)}`.
pub fn beta_imperfect(k: f64, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    check(k >= 1.0, || format!("k must be >= 1, got {k}"))?;
    Ok((-1.0 / (eta * k)).exp())
}

/// Overlap approximation with detector efficiency `η`:
/// `√(1 − (1 − ηk/(2n−k+ηk))²) · exp(−φ² ηk(2n−k)/(2n−k+ηk))`.
pub fn pphi_imperfect(n: f64, k: f64, eta: f64, phi: f64) -> Result<f64> {
    check_eta(eta)?;
    check_nk(n, k)?;
    let d = 2.0 * n - k + eta * k;
    let r = 1.0 - eta * k / d;
    Ok((1.0 - r * r).sqrt() * (-phi * phi * eta * k * (2.0 * n - k) / d).exp())
}

fn check_time(t: f64) -> Result<()> {
    check(t >= 0.0, || format!("t must be >= 0, got {t}"))
}

/// `N e^{−2γt}`.
pub fn mean_remaining(n_total: f64, gamma: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(n_total * (-2.0 * gamma * t).exp())
}

/// `N (1 − e^{−2γt})`.
pub fn mean_detected(n_total: f64, gamma: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(-n_total * (-2.0 * gamma * t).exp_m1())
}

/// Visibility of the balanced coherent state under collisions,
/// `|cos 2κt|^{N−1}`.
pub fn beta_collision_acs(n_total: f64, kappa: f64, t: f64) -> Result<f64> {
    check(n_total >= 1.0, || format!("need at least one atom, got {n_total}"))?;
    Ok((2.0 * kappa * t).cos().abs().powf(n_total - 1.0))
}

/// `1/τ²` of the Gaussian collisional decay of `(a+b)^k|n,n⟩`:
/// `2κ² k(2n−k−1)/(4n−k−2)`.
pub fn collision_decay_rate_sq(n: f64, k: f64, kappa: f64) -> Result<f64> {
    check(k >= 1.0 && k <= 2.0 * n - 1.0, || {
        format!("need 1 <= k <= 2n - 1, got n = {n}, k = {k}")
    })?;
    Ok(2.0 * kappa * kappa * k * (2.0 * n - k - 1.0) / (4.0 * n - k - 2.0))
}

/// `e^{−1/k} · exp(−t²/τ²)` for the equal-position state.
pub fn beta_collision_psik(n: f64, k: f64, kappa: f64, t: f64) -> Result<f64> {
    let rate = collision_decay_rate_sq(n, k, kappa)?;
    Ok(beta_equalpos_approx(k)? * (-rate * t * t).exp())
}

/// Steady-state visibility balancing detection-driven growth against
/// collisional decay.
///
/// With `n₀ = 2n − k` atoms left the next waiting time is exponential with
/// rate `2n₀γ`; averaging the Gaussian decay over it gives
/// `F = √π s e^{s²} erfc(s)` with `s = n₀γτ`, and the visibility settles at
/// `1 / (1 + √(1 − F))`.
pub fn beta_steady(n: f64, k: f64, gamma: f64, kappa: f64) -> Result<f64> {
    check(kappa > 0.0, || format!("kappa must be > 0, got {kappa}"))?;
    check(gamma > 0.0, || format!("gamma must be > 0, got {gamma}"))?;
    let n0 = 2.0 * n - k;
    check(n0 >= 1.0, || format!("need 2n - k >= 1, got n = {n}, k = {k}"))?;
    let rate = collision_decay_rate_sq(n, k, kappa)?;
    let f = if rate == 0.0 {
        1.0
    } else {
        let s = n0 * gamma / rate.sqrt();
        std::f64::consts::PI.sqrt() * s * erfcx(s)
    };
    Ok(1.0 / (1.0 + (1.0 - f).max(0.0).sqrt()))
}

/// Decay of the maximal coherent-state overlap of `(a+b)^k|n,n⟩` under
/// collisions: the `t = 0` peak divided by `√(1 + [tκ k(2n−k)/(2n)]²)`.
pub fn max_overlap_decay(n: f64, k: f64, kappa: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    let p0 = pphi_approx(n, k, 0.0)?;
    let x = t * kappa * k * (2.0 * n - k) / (2.0 * n);
    Ok(p0 / (1.0 + x * x).sqrt())
}

const ORACLE_MAX_N: usize = 500;

/// Exact visibility of `(a+b)^k|n,n⟩` from the closed binomial sums for
/// `⟨ψ_k|ψ_k⟩` and `⟨ψ_k|a†b|ψ_k⟩`, evaluated in log space.
pub fn oracle_beta_equalpos(n: usize, k: usize) -> Result<f64> {
    check(n <= ORACLE_MAX_N, || format!("n = {n} exceeds {ORACLE_MAX_N}"))?;
    check(k < 2 * n, || format!("need k < 2n atoms detected, got n = {n}, k = {k}"))?;
    let r = 2 * n - k;
    let lb = |a: usize, b: isize| -> f64 {
        if b < 0 {
            f64::NEG_INFINITY
        } else {
            ln_binomial::<f64>(a, b as usize)
        }
    };
    let norm: Vec<f64> = (0..=k)
        .map(|m| 2.0 * lb(k, m as isize) + lb(r, n as isize - m as isize))
        .collect();
    let coh: Vec<f64> = (1..=k)
        .map(|m| {
            lb(k, m as isize) + lb(k, m as isize - 1) + lb(r - 1, n as isize - m as isize)
        })
        .collect();
    Ok(2.0 * (log_sum_exp(&coh) - log_sum_exp(&norm)).exp())
}

const QUADRATURE_MIN_POINTS: usize = 512;
const QUADRATURE_MAX_ATOMS: usize = 400;

/// Mean visibility after `k ∈ {1, 2}` detections from `|n1, n2⟩`, averaged
/// over detection positions by the periodic trapezoid rule on `points`
/// nodes per axis (at least 512).
///
/// The weight of a detection record is the product of the conditional
/// next-detection densities, which equals the joint density
/// `‖ψ_k‖² (N−k)! / ((2π)^k N!)` of the unnormalised jump sequence.
pub fn oracle_mean_beta_quadrature(n1: usize, n2: usize, k: usize, points: usize) -> Result<f64> {
    let n = n1 + n2;
    check(k == 1 || k == 2, || format!("k must be 1 or 2, got {k}"))?;
    check(n > k && n <= QUADRATURE_MAX_ATOMS, || {
        format!("need {k} < n1 + n2 <= {QUADRATURE_MAX_ATOMS}, got {n}")
    })?;
    let points = points.max(QUADRATURE_MIN_POINTS);
    let h = 2.0 * std::f64::consts::PI / points as f64;
    let node = |i: usize| -std::f64::consts::PI + i as f64 * h;
    let start = TwoModeFockState::<f64>::number_state(n1, n2);
    let p0 = fringe_stats(&start)?;
    let row = |i: usize| -> Result<f64> {
        let phi1 = node(i);
        let w1 = p0.density(phi1);
        let s1 = start.apply_interference_jump(phi1)?.normalize()?;
        let f1 = fringe_stats(&s1)?;
        if k == 1 {
            return Ok(w1 * f1.beta_c);
        }
        let mut acc = 0.0;
        for j in 0..points {
            let phi2 = node(j);
            let s2 = s1.apply_interference_jump(phi2)?;
            acc += f1.density(phi2) * fringe_stats(&s2)?.beta_c;
        }
        Ok(w1 * acc * h)
    };
    let rows = (0..points).into_par_iter().map(row).collect::<Result<Vec<f64>>>()?;
    Ok(rows.iter().sum::<f64>() * h)
}

/// Parameters of a closed-form evaluation; each formula reads the fields
/// it needs and reports the first missing one.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ApproxParams {
    pub n: Option<f64>,
    pub n1: Option<f64>,
    pub n2: Option<f64>,
    pub k: Option<f64>,
    pub eta: Option<f64>,
    pub gamma: Option<f64>,
    pub kappa: Option<f64>,
    pub t: Option<f64>,
    pub phi: Option<f64>,
}

impl ApproxParams {
    fn get(v: Option<f64>, field: &'static str) -> Result<f64> {
        v.ok_or_else(|| config(field, "required by this formula"))
    }

    /// Loss fraction `ξ = (1 − η)/2` of undetected atoms per condensate.
    pub fn xi(&self) -> Option<f64> {
        self.eta.map(|e| 0.5 * (1.0 - e))
    }

    /// `n`, or half the total `n1 + n2` when only those are given.
    fn half_total(&self) -> Result<f64> {
        match (self.n, self.n1, self.n2) {
            (Some(n), _, _) => Ok(n),
            (None, Some(a), Some(b)) => Ok(0.5 * (a + b)),
            _ => Err(config("n", "required by this formula")),
        }
    }

    fn total(&self) -> Result<f64> {
        match (self.n1, self.n2, self.n) {
            (Some(a), Some(b), _) => Ok(a + b),
            (_, _, Some(n)) => Ok(2.0 * n),
            _ => Err(config("n", "required by this formula (as n or n1 + n2)")),
        }
    }

    fn count(v: f64, field: &'static str) -> Result<usize> {
        if v >= 0.0 && v.fract() == 0.0 && v <= usize::MAX as f64 {
            Ok(v as usize)
        } else {
            Err(config(field, format!("must be a non-negative integer, got {v}")))
        }
    }
}

/// Registry of the closed forms and oracles, keyed by CLI name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formula {
    Beta1,
    Beta2,
    BetaEqualPos,
    BetaUnequal,
    Pphi,
    BetaImperfect,
    PphiImperfect,
    Remaining,
    Detected,
    BetaCollisionAcs,
    BetaCollisionPsik,
    Steady,
    OverlapDecay,
    OracleEqualPos,
    OracleQuadrature,
}

impl Formula {
    pub const ALL: [Formula; 15] = [
        Formula::Beta1,
        Formula::Beta2,
        Formula::BetaEqualPos,
        Formula::BetaUnequal,
        Formula::Pphi,
        Formula::BetaImperfect,
        Formula::PphiImperfect,
        Formula::Remaining,
        Formula::Detected,
        Formula::BetaCollisionAcs,
        Formula::BetaCollisionPsik,
        Formula::Steady,
        Formula::OverlapDecay,
        Formula::OracleEqualPos,
        Formula::OracleQuadrature,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Formula::Beta1 => "beta1",
            Formula::Beta2 => "beta2",
            Formula::BetaEqualPos => "beta-equalpos",
            Formula::BetaUnequal => "beta-unequal",
            Formula::Pphi => "pphi",
            Formula::BetaImperfect => "beta-imperfect",
            Formula::PphiImperfect => "pphi-imperfect",
            Formula::Remaining => "remaining",
            Formula::Detected => "detected",
            Formula::BetaCollisionAcs => "beta-collision-acs",
            Formula::BetaCollisionPsik => "beta-collision-psik",
            Formula::Steady => "steady",
            Formula::OverlapDecay => "overlap-decay",
            Formula::OracleEqualPos => "oracle-equalpos",
            Formula::OracleQuadrature => "oracle-quadrature",
        }
    }

    /// Parameters read by the formula, for help output.
    pub fn parameters(self) -> &'static str {
        match self {
            Formula::Beta1 | Formula::Beta2 => "n1 n2",
            Formula::BetaEqualPos => "k",
            Formula::BetaUnequal => "n1 n2 k",
            Formula::Pphi => "n k [phi=0]",
            Formula::BetaImperfect => "k eta",
            Formula::PphiImperfect => "n k eta [phi=0]",
            Formula::Remaining | Formula::Detected => "n1 n2 (or n) [gamma=1] t",
            Formula::BetaCollisionAcs => "n1 n2 (or n: N = 2n) kappa t",
            Formula::BetaCollisionPsik => "n k kappa t",
            Formula::Steady => "n k [gamma=1] kappa",
            Formula::OverlapDecay => "n k kappa t",
            Formula::OracleEqualPos => "n k",
            Formula::OracleQuadrature => "n1 n2 k",
        }
    }

    pub fn from_name(name: &str) -> Option<Formula> {
        Formula::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn evaluate(self, p: &ApproxParams) -> Result<f64> {
        use ApproxParams as P;
        let phi = p.phi.unwrap_or(0.0);
        let gamma = p.gamma.unwrap_or(1.0);
        match self {
            Formula::Beta1 => mean_beta_after_1(P::get(p.n1, "n1")?, P::get(p.n2, "n2")?),
            Formula::Beta2 => mean_beta_after_2(P::get(p.n1, "n1")?, P::get(p.n2, "n2")?),
            Formula::BetaEqualPos => beta_equalpos_approx(P::get(p.k, "k")?),
            Formula::BetaUnequal => beta_unequal_approx(
                P::get(p.n1, "n1")?,
                P::get(p.n2, "n2")?,
                P::get(p.k, "k")?,
            ),
            Formula::Pphi => pphi_approx(p.half_total()?, P::get(p.k, "k")?, phi),
            Formula::BetaImperfect => beta_imperfect(P::get(p.k, "k")?, P::get(p.eta, "eta")?),
            Formula::PphiImperfect => pphi_imperfect(
                p.half_total()?,
                P::get(p.k, "k")?,
                P::get(p.eta, "eta")?,
                phi,
            ),
            Formula::Remaining => mean_remaining(p.total()?, gamma, P::get(p.t, "t")?),
            Formula::Detected => mean_detected(p.total()?, gamma, P::get(p.t, "t")?),
            Formula::BetaCollisionAcs => {
                beta_collision_acs(p.total()?, P::get(p.kappa, "kappa")?, P::get(p.t, "t")?)
            }
            Formula::BetaCollisionPsik => beta_collision_psik(
                p.half_total()?,
                P::get(p.k, "k")?,
                P::get(p.kappa, "kappa")?,
                P::get(p.t, "t")?,
            ),
            Formula::Steady => beta_steady(
                p.half_total()?,
                P::get(p.k, "k")?,
                gamma,
                P::get(p.kappa, "kappa")?,
            ),
            Formula::OverlapDecay => max_overlap_decay(
                p.half_total()?,
                P::get(p.k, "k")?,
                P::get(p.kappa, "kappa")?,
                P::get(p.t, "t")?,
            ),
            Formula::OracleEqualPos => oracle_beta_equalpos(
                P::count(p.half_total()?, "n")?,
                P::count(P::get(p.k, "k")?, "k")?,
            ),
            Formula::OracleQuadrature => oracle_mean_beta_quadrature(
                P::count(P::get(p.n1, "n1")?, "n1")?,
                P::count(P::get(p.n2, "n2")?, "n2")?,
                P::count(P::get(p.k, "k")?, "k")?,
                QUADRATURE_MIN_POINTS,
            ),
        }
    }
}

impl std::str::FromStr for Formula {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Formula::from_name(s).ok_or_else(|| {
            let names: Vec<&str> = Formula::ALL.iter().map(|f| f.name()).collect();
            format!("unknown formula `{s}`; known: {}", names.join(", "))
        })
    }
}
