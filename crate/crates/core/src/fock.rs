//! Two-mode Fock states with a fixed total atom number.
//!
//! A state with `M` atoms is stored as `M + 1` complex amplitudes indexed by
//! the occupation `m` of condensate `a`; index `m` is the ket `|m, M-m⟩`.
//! Jump operators drop the `1/√2` of the detection operator since every
//! observable is a ratio.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::Real;

/// Which condensate an atom is removed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeFockState<T> {
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> TwoModeFockState<T> {
    /// `|n1, n2⟩`
    pub fn number_state(n1: usize, n2: usize) -> Self {
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); n1 + n2 + 1];
        amplitudes[n1] = Complex::new(T::one(), T::zero());
        Self { amplitudes }
    }

    /// Wraps raw amplitudes; index `m` is `|m, len-1-m⟩`.
    ///
    /// Rejects an empty sequence, non-finite entries and the all-zero vector.
    pub fn from_amplitudes(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::EmptyState);
        }
        if amplitudes.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(domain("amplitudes must be finite"));
        }
        let state = Self { amplitudes };
        if state.norm_sq() <= T::zero() {
            return Err(Error::ZeroNorm);
        }
        Ok(state)
    }

    pub(crate) fn from_amplitudes_unchecked(amplitudes: Vec<Complex<T>>) -> Self {
        debug_assert!(!amplitudes.is_empty());
        Self { amplitudes }
    }

    #[inline]
    pub fn total_atoms(&self) -> usize {
        self.amplitudes.len() - 1
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amplitudes
    }

    pub fn norm_sq(&self) -> T {
        self.amplitudes
            .iter()
            .fold(T::zero(), |acc, c| acc + c.norm_sqr())
    }

    pub fn normalize(&self) -> Result<Self> {
        let mut out = self.clone();
        out.normalize_mut()?;
        Ok(out)
    }

    /// Normalises in place; on error the state is left untouched.
    pub fn normalize_mut(&mut self) -> Result<()> {
        let n2 = self.norm_sq();
        if !(n2 > T::zero()) || !n2.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let inv = n2.sqrt().recip();
        for c in &mut self.amplitudes {
            *c = c.scale(inv);
        }
        Ok(())
    }

    /// ⟨self|other⟩; both states must hold the same atom number.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if self.total_atoms() != other.total_atoms() {
            return Err(domain(format!(
                "inner product between {} and {} atom states",
                self.total_atoms(),
                other.total_atoms()
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| {
                acc + x.conj() * y
            }))
    }

    /// Multiplies every amplitude by `factor`.
    pub fn scaled(&self, factor: Complex<T>) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|c| c * factor).collect(),
        }
    }

    /// `(a + b e^{iφ})|ψ⟩`, unnormalised:
    /// `d_m = √(m+1) c_{m+1} + e^{iφ} √(M-m) c_m`.
    pub fn apply_interference_jump(&self, phi: T) -> Result<Self> {
        let m_tot = self.total_atoms();
        if m_tot == 0 {
            return Err(Error::NoAtoms);
        }
        let phase = Complex::from_polar(T::one(), phi);
        let c = &self.amplitudes;
        let amplitudes: Vec<_> = (0..m_tot)
            .map(|m| {
                let up = T::from_usize_lossy(m + 1).sqrt();
                let down = T::from_usize_lossy(m_tot - m).sqrt();
                c[m + 1].scale(up) + phase * c[m].scale(down)
            })
            .collect();
        let out = Self { amplitudes };
        if out.norm_sq() <= T::zero() {
            return Err(Error::ZeroNorm);
        }
        Ok(out)
    }

    /// Applies the annihilator of one mode, unnormalised.
    pub fn apply_loss_jump(&self, mode: Mode) -> Result<Self> {
        let m_tot = self.total_atoms();
        if m_tot == 0 {
            return Err(Error::NoAtoms);
        }
        let c = &self.amplitudes;
        let amplitudes: Vec<_> = match mode {
            Mode::A => (0..m_tot)
                .map(|m| c[m + 1].scale(T::from_usize_lossy(m + 1).sqrt()))
                .collect(),
            Mode::B => (0..m_tot)
                .map(|m| c[m].scale(T::from_usize_lossy(m_tot - m).sqrt()))
                .collect(),
        };
        let out = Self { amplitudes };
        if out.norm_sq() <= T::zero() {
            return Err(Error::ZeroNorm);
        }
        Ok(out)
    }

    /// ⟨ψ|a†b|ψ⟩ = Σ conj(c_{m+1}) c_m √((m+1)(M-m)), not divided by the norm.
    pub fn expect_adag_b(&self) -> Complex<T> {
        let m_tot = self.total_atoms();
        let c = &self.amplitudes;
        (0..m_tot).fold(Complex::new(T::zero(), T::zero()), |acc, m| {
            let w = (T::from_usize_lossy(m + 1) * T::from_usize_lossy(m_tot - m)).sqrt();
            acc + (c[m + 1].conj() * c[m]).scale(w)
        })
    }

    /// ⟨ψ|b†a|ψ⟩, computed directly rather than by conjugation.
    pub fn expect_bdag_a(&self) -> Complex<T> {
        let m_tot = self.total_atoms();
        let c = &self.amplitudes;
        (0..m_tot).fold(Complex::new(T::zero(), T::zero()), |acc, m| {
            let w = (T::from_usize_lossy(m + 1) * T::from_usize_lossy(m_tot - m)).sqrt();
            acc + (c[m].conj() * c[m + 1]).scale(w)
        })
    }

    /// Normalised (⟨a†a⟩, ⟨b†b⟩).
    pub fn mode_occupations(&self) -> (T, T) {
        let m_tot = self.total_atoms();
        let norm = self.norm_sq();
        let na = self
            .amplitudes
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (m, c)| acc + T::from_usize_lossy(m) * c.norm_sqr())
            / norm;
        (na, T::from_usize_lossy(m_tot) - na)
    }

    /// Free evolution for `dt` under `κ[(a†a)² + (b†b)²]`: each amplitude
    /// picks up `exp(-iκ dt (m² + (M-m)²))`.
    pub fn apply_collision_phase(&self, kappa: T, dt: T) -> Result<Self> {
        let mut out = self.clone();
        out.apply_collision_phase_mut(kappa, dt)?;
        Ok(out)
    }

    pub fn apply_collision_phase_mut(&mut self, kappa: T, dt: T) -> Result<()> {
        if !(dt >= T::zero()) {
            return Err(domain(format!("collision step dt must be >= 0, got {dt}")));
        }
        if kappa == T::zero() || dt == T::zero() {
            return Ok(());
        }
        let m_tot = self.total_atoms();
        let scale = kappa * dt;
        for (m, c) in self.amplitudes.iter_mut().enumerate() {
            let e = (m * m + (m_tot - m) * (m_tot - m)) as f64;
            *c = *c * Complex::from_polar(T::one(), -scale * T::lit(e));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type S = TwoModeFockState<f64>;
    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn close(a: C, b: C, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn number_state_layout() {
        let s = S::number_state(2, 1);
        assert_eq!(s.total_atoms(), 3);
        assert_eq!(s.amplitudes()[2], c(1.0, 0.0));
        assert_eq!(s.norm_sq(), 1.0);
        let vac = S::number_state(0, 0);
        assert_eq!(vac.total_atoms(), 0);
        assert_eq!(vac.amplitudes(), &[c(1.0, 0.0)]);
        let big = S::number_state(100, 100);
        assert_eq!(big.total_atoms(), 200);
        assert_eq!(big.amplitudes()[100], c(1.0, 0.0));
    }

    #[test]
    fn interference_jump_on_one_one() {
        let s = S::number_state(1, 1).apply_interference_jump(0.0).unwrap();
        assert_eq!(s.total_atoms(), 1);
        assert!(close(s.amplitudes()[0], c(1.0, 0.0), 1e-15));
        assert!(close(s.amplitudes()[1], c(1.0, 0.0), 1e-15));
        assert!((s.norm_sq() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn interference_jump_single_atom_in_a() {
        for phi in [-3.0, 0.0, 1.2] {
            let s = S::number_state(1, 0).apply_interference_jump(phi).unwrap();
            assert_eq!(s.total_atoms(), 0);
            assert!(close(s.amplitudes()[0], c(1.0, 0.0), 1e-15));
        }
    }

    #[test]
    fn interference_jump_on_vacuum_fails() {
        let err = S::number_state(0, 0).apply_interference_jump(0.3).unwrap_err();
        assert_eq!(err, Error::NoAtoms);
    }

    #[test]
    fn two_equal_jumps_from_three_three() {
        // (a+b)²|3,3⟩ = √6|1,3⟩ + 6|2,2⟩ + √6|3,1⟩
        let s = S::number_state(3, 3)
            .apply_interference_jump(0.0)
            .unwrap()
            .apply_interference_jump(0.0)
            .unwrap();
        assert!((s.norm_sq() - 48.0).abs() < 1e-12);
        assert!(close(s.amplitudes()[2], c(6.0, 0.0), 1e-12));
        // closed sum (n!²/(2n-k)!) Σ C(k,m)² C(2n-k, n-m) = 36/24 · 32
        let sum: f64 = (0..=2u64)
            .map(|m| {
                let ck = [1.0, 2.0, 1.0][m as usize];
                let c4 = [4.0, 6.0, 4.0][m as usize];
                ck * ck * c4
            })
            .sum();
        assert!((s.norm_sq() - 36.0 / 24.0 * sum).abs() < 1e-12);
    }

    #[test]
    fn loss_jumps() {
        let s = S::number_state(2, 1).apply_loss_jump(Mode::A).unwrap();
        assert_eq!(s.total_atoms(), 2);
        assert!(close(s.amplitudes()[1], c(2f64.sqrt(), 0.0), 1e-15));
        assert_eq!(
            S::number_state(0, 1).apply_loss_jump(Mode::A).unwrap_err(),
            Error::ZeroNorm
        );
        let sym = S::number_state(1, 1)
            .apply_interference_jump(0.0)
            .unwrap()
            .normalize()
            .unwrap();
        let lost = sym.apply_loss_jump(Mode::B).unwrap();
        assert_eq!(lost.total_atoms(), 0);
        assert!((lost.norm_sq() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn coherence_expectations() {
        assert_eq!(S::number_state(4, 7).expect_adag_b(), c(0.0, 0.0));
        let sym = S::from_amplitudes(vec![c(1.0, 0.0), c(1.0, 0.0)])
            .unwrap()
            .normalize()
            .unwrap();
        assert!(close(sym.expect_adag_b(), c(0.5, 0.0), 1e-15));
        assert_eq!(S::number_state(0, 0).expect_adag_b(), c(0.0, 0.0));
    }

    #[test]
    fn occupations() {
        assert_eq!(S::number_state(3, 5).mode_occupations(), (3.0, 5.0));
        let sym = S::from_amplitudes(vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let (na, nb) = sym.mode_occupations();
        assert!((na - 0.5).abs() < 1e-15 && (nb - 0.5).abs() < 1e-15);
    }

    #[test]
    fn collision_phase_edge_cases() {
        let s = S::from_amplitudes(vec![c(0.3, 0.1), c(-0.2, 0.7), c(0.5, 0.5)]).unwrap();
        assert_eq!(s.apply_collision_phase(2.0, 0.0).unwrap(), s);
        assert!(s.apply_collision_phase(1.0, -1e-3).is_err());
        let n = S::number_state(4, 2).apply_collision_phase(0.7, 1.3).unwrap();
        assert!((n.amplitudes()[4].norm() - 1.0).abs() < 1e-15);
        assert_eq!(n.expect_adag_b(), c(0.0, 0.0));
    }

    #[test]
    fn normalize_and_norm() {
        let s = S::from_amplitudes(vec![c(3.0, 0.0), c(0.0, 4.0)]).unwrap();
        assert_eq!(s.norm_sq(), 25.0);
        let n = s.normalize().unwrap();
        assert!(close(n.amplitudes()[0], c(0.6, 0.0), 1e-15));
        assert!(close(n.amplitudes()[1], c(0.0, 0.8), 1e-15));
        let zero = S::from_amplitudes_unchecked(vec![c(0.0, 0.0); 3]);
        assert_eq!(zero.normalize().unwrap_err(), Error::ZeroNorm);
        assert_eq!(
            S::from_amplitudes(vec![c(0.0, 0.0); 2]).unwrap_err(),
            Error::ZeroNorm
        );
        assert_eq!(S::from_amplitudes(vec![]).unwrap_err(), Error::EmptyState);
    }

    #[test]
    fn single_precision_jump() {
        let s = TwoModeFockState::<f32>::number_state(1, 1)
            .apply_interference_jump(0.0)
            .unwrap();
        assert!((s.norm_sq() - 2.0).abs() < 1e-6);
    }

    fn small_state() -> impl Strategy<Value = S> {
        (1usize..12)
            .prop_flat_map(|m| prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), m + 1))
            .prop_filter_map("nonzero", |v| {
                S::from_amplitudes(v.into_iter().map(|(r, i)| c(r, i)).collect()).ok()
            })
    }

    fn states_same_size() -> impl Strategy<Value = (S, S)> {
        (1usize..12).prop_flat_map(|m| {
            let amp = prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), m + 1);
            (amp.clone(), amp).prop_filter_map("nonzero", |(x, y)| {
                let f = |v: Vec<(f64, f64)>| {
                    S::from_amplitudes(v.into_iter().map(|(r, i)| c(r, i)).collect()).ok()
                };
                Some((f(x)?, f(y)?))
            })
        })
    }

    proptest! {
        #[test]
        fn jumps_remove_one_atom(s in small_state(), phi in -3.2f64..3.2) {
            let m = s.total_atoms();
            if let Ok(j) = s.apply_interference_jump(phi) {
                prop_assert_eq!(j.total_atoms(), m - 1);
            }
            for mode in [Mode::A, Mode::B] {
                if let Ok(j) = s.apply_loss_jump(mode) {
                    prop_assert_eq!(j.total_atoms(), m - 1);
                }
            }
            prop_assert_eq!(s.normalize().unwrap().total_atoms(), m);
            prop_assert_eq!(s.apply_collision_phase(0.4, 1.7).unwrap().total_atoms(), m);
        }

        #[test]
        fn collision_preserves_populations(s in small_state(), kappa in 0.0f64..10.0, dt in 0.0f64..5.0) {
            let e = s.apply_collision_phase(kappa, dt).unwrap();
            prop_assert!((e.norm_sq() - s.norm_sq()).abs() <= 1e-12 * s.norm_sq());
            for (x, y) in s.amplitudes().iter().zip(e.amplitudes()) {
                prop_assert!((x.norm_sqr() - y.norm_sqr()).abs() <= 1e-12);
            }
        }

        #[test]
        fn jump_is_linear((x, y) in states_same_size(), phi in -3.2f64..3.2,
                          a in (-2.0f64..2.0, -2.0f64..2.0), b in (-2.0f64..2.0, -2.0f64..2.0)) {
            let (a, b) = (c(a.0, a.1), c(b.0, b.1));
            let combo: Vec<C> = x.amplitudes().iter().zip(y.amplitudes())
                .map(|(p, q)| a * p + b * q).collect();
            let combo = S::from_amplitudes_unchecked(combo);
            let lhs = combo.apply_interference_jump(phi);
            let jx = x.apply_interference_jump(phi);
            let jy = y.apply_interference_jump(phi);
            if let (Ok(lhs), Ok(jx), Ok(jy)) = (lhs, jx, jy) {
                for ((l, p), q) in lhs.amplitudes().iter().zip(jx.amplitudes()).zip(jy.amplitudes()) {
                    prop_assert!(close(*l, a * p + b * q, 1e-12));
                }
            }
        }

        #[test]
        fn jump_decomposes_into_losses(s in small_state(), phi in -3.2f64..3.2) {
            let j = s.apply_interference_jump(phi);
            let la = s.apply_loss_jump(Mode::A);
            let lb = s.apply_loss_jump(Mode::B);
            if let (Ok(j), Ok(la), Ok(lb)) = (j, la, lb) {
                let ph = C::from_polar(1.0, phi);
                for ((x, p), q) in j.amplitudes().iter().zip(la.amplitudes()).zip(lb.amplitudes()) {
                    prop_assert!(close(*x, p + ph * q, 1e-12));
                }
            }
        }

        #[test]
        fn coherence_is_hermitian(s in small_state()) {
            let ab = s.expect_adag_b();
            let ba = s.expect_bdag_a();
            prop_assert!(close(ab, ba.conj(), 1e-12));
            prop_assert!((ab.norm() - ba.conj().norm()).abs() <= 1e-12);
        }

        #[test]
        fn occupations_sum_to_atom_number(s in small_state()) {
            let (na, nb) = s.mode_occupations();
            prop_assert!((na + nb - s.total_atoms() as f64).abs() < 1e-10);
        }
    }
}
