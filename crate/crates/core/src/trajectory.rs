//! Monte Carlo wave-function trajectories and ensembles.
//!
//! Every remaining atom leaks at intensity rate `2γ`, so with `M` atoms left
//! the waiting time to the next event is exponential with rate `2γM`.
//! Each event is first classified as interfering (probability `η`) or as a
//! loss, and losses pick condensate `a` with probability `⟨a†a⟩/M`.
//! Between events the state dephases under the collision Hamiltonian.
//!
//! Trajectory `i` of an ensemble uses the seed
//! [`trajectory_seed`]`(master, i)`, and results are reduced in index order,
//! so ensembles are bitwise reproducible for any worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coherent::max_overlap;
use crate::error::{config, domain, Result};
use crate::fock::{Mode, TwoModeFockState};
use crate::jump::fringe_stats;
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// Conditional visibility of the next detection.
    #[serde(alias = "beta_c")]
    Beta,
    /// Maximum overlap with the atomic coherent states.
    #[serde(alias = "overlap")]
    MaxOverlap,
    /// Atoms left in the two condensates.
    Remaining,
    /// Full normalised amplitude vector (single trajectories only).
    #[serde(alias = "state_snapshot")]
    Snapshot,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Observable::Beta => "beta",
            Observable::MaxOverlap => "max_overlap",
            Observable::Remaining => "remaining",
            Observable::Snapshot => "snapshot",
        }
    }
}

impl std::str::FromStr for Observable {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "beta" | "beta_c" => Ok(Observable::Beta),
            "max_overlap" | "overlap" | "max-overlap" => Ok(Observable::MaxOverlap),
            "remaining" => Ok(Observable::Remaining),
            "snapshot" | "state_snapshot" | "state" => Ok(Observable::Snapshot),
            other => Err(format!(
                "unknown observable `{other}` (expected beta, max_overlap, remaining, snapshot)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    DetectionCount,
    Time,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::DetectionCount => "k",
            Axis::Time => "t",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop {
    Detections(usize),
    Time(f64),
}

fn one() -> f64 {
    1.0
}

fn default_observables() -> Vec<Observable> {
    vec![Observable::Beta]
}

/// Simulation parameters. Serialises to a flat key/value table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n1: usize,
    pub n2: usize,
    /// Single-atom decay rate; the intensity rate per atom is `2γ`.
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default = "one")]
    pub eta: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_detections: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_time: Option<f64>,
    #[serde(default)]
    pub record_k: Vec<usize>,
    #[serde(default)]
    pub record_t: Vec<f64>,
    #[serde(default = "default_observables")]
    pub observables: Vec<Observable>,
}

impl SimConfig {
    /// Detection-count run from `|n1, n2⟩` with ideal detectors, no
    /// collisions and `β` recorded nowhere.
    pub fn new(n1: usize, n2: usize) -> Self {
        Self {
            n1,
            n2,
            gamma: 1.0,
            kappa: 0.0,
            eta: 1.0,
            seed: 0,
            max_detections: None,
            max_time: None,
            record_k: Vec::new(),
            record_t: Vec::new(),
            observables: default_observables(),
        }
    }

    pub fn total_atoms(&self) -> usize {
        self.n1 + self.n2
    }

    pub fn stop(&self) -> Stop {
        if let Some(t) = self.max_time {
            return Stop::Time(t);
        }
        if self.max_detections.is_none() && !self.record_t.is_empty() && self.record_k.is_empty() {
            return Stop::Time(*self.record_t.last().expect("non-empty"));
        }
        let k = self
            .max_detections
            .or_else(|| self.record_k.last().copied())
            .unwrap_or(self.total_atoms());
        Stop::Detections(k.min(self.total_atoms()))
    }

    fn is_timed(&self) -> bool {
        self.gamma > 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(config("eta", format!("must lie in [0, 1], got {}", self.eta)));
        }
        if !self.kappa.is_finite() {
            return Err(config("kappa", "must be finite"));
        }
        if !self.gamma.is_finite() || self.gamma < 0.0 {
            return Err(config("gamma", format!("must be finite and >= 0, got {}", self.gamma)));
        }
        if self.max_detections.is_some() && self.max_time.is_some() {
            return Err(config(
                "max_time",
                "give either max_detections or max_time, not both",
            ));
        }
        let stop = self.stop();
        let needs_time = matches!(stop, Stop::Time(_)) || self.kappa != 0.0 || !self.record_t.is_empty();
        if needs_time && !(self.gamma > 0.0) {
            return Err(config(
                "gamma",
                "must be > 0 for time-resolved runs or when kappa != 0",
            ));
        }
        if let Some(t) = self.max_time {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(config("max_time", format!("must be finite and >= 0, got {t}")));
            }
        }
        if self.record_k.windows(2).any(|w| w[0] >= w[1]) {
            return Err(config("record_k", "must be strictly ascending"));
        }
        if self.record_t.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(config("record_t", "must be strictly ascending"));
        }
        if self.record_t.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return Err(config("record_t", "times must be finite and >= 0"));
        }
        if let Some(&k) = self.record_k.last() {
            if k > self.total_atoms() {
                return Err(config(
                    "record_k",
                    format!("{k} exceeds the {} atoms available", self.total_atoms()),
                ));
            }
        }
        match stop {
            Stop::Detections(kmax) => {
                if let Some(&k) = self.record_k.last() {
                    if k > kmax {
                        return Err(config(
                            "record_k",
                            format!("{k} lies beyond max_detections = {kmax}"),
                        ));
                    }
                }
                if !self.record_t.is_empty() {
                    return Err(config(
                        "record_t",
                        "time records need a time-mode run (set max_time)",
                    ));
                }
            }
            Stop::Time(tmax) => {
                if let Some(&t) = self.record_t.last() {
                    if t > tmax {
                        return Err(config(
                            "record_t",
                            format!("{t} lies beyond max_time = {tmax}"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Interfering,
    LossA,
    LossB,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionEvent {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
}

/// Observables captured at one record point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub axis: Axis,
    pub x: f64,
    pub detections: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    /// `None` once the vacuum is reached.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_overlap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remaining: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<Vec<[f64; 2]>>,
}

impl Record {
    pub fn value(&self, obs: Observable) -> Option<f64> {
        match obs {
            Observable::Beta => self.beta,
            Observable::MaxOverlap => self.max_overlap,
            Observable::Remaining => self.remaining.map(|m| m as f64),
            Observable::Snapshot => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub events: Vec<DetectionEvent>,
    pub records: Vec<Record>,
    pub final_state: TwoModeFockState<T>,
    /// Physical time of the last event, if times were drawn.
    pub final_time: Option<f64>,
}

const SEED_INCREMENT: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(SEED_INCREMENT);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trajectory `index` under `master`: two SplitMix64 rounds.
pub fn trajectory_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

/// Runs the trajectory with index 0 under `config.seed`.
pub fn run_trajectory<T: Real>(config: &SimConfig) -> Result<Trajectory<T>> {
    config.validate()?;
    simulate(config, 0)
}

/// Runs trajectory `index` of the ensemble seeded by `config.seed`.
pub fn run_trajectory_indexed<T: Real>(config: &SimConfig, index: u64) -> Result<Trajectory<T>> {
    config.validate()?;
    simulate(config, index)
}

struct Recorder<'a> {
    config: &'a SimConfig,
    next_k: usize,
    next_t: usize,
    records: Vec<Record>,
}

impl Recorder<'_> {
    fn capture<T: Real>(
        &mut self,
        state: &TwoModeFockState<T>,
        axis: Axis,
        x: f64,
        detections: usize,
        time: Option<f64>,
    ) -> Result<()> {
        let mut rec = Record {
            axis,
            x,
            detections,
            time,
            beta: None,
            max_overlap: None,
            remaining: None,
            snapshot: None,
        };
        for obs in &self.config.observables {
            match obs {
                Observable::Beta => {
                    if state.total_atoms() > 0 {
                        rec.beta = Some(fringe_stats(state)?.beta_c.to_f64_lossy());
                    }
                }
                Observable::MaxOverlap => {
                    rec.max_overlap = Some(max_overlap(state).p_max.to_f64_lossy());
                }
                Observable::Remaining => rec.remaining = Some(state.total_atoms()),
                Observable::Snapshot => {
                    rec.snapshot = Some(
                        state
                            .amplitudes()
                            .iter()
                            .map(|c| [c.re.to_f64_lossy(), c.im.to_f64_lossy()])
                            .collect(),
                    )
                }
            }
        }
        self.records.push(rec);
        Ok(())
    }

    fn at_count<T: Real>(
        &mut self,
        state: &TwoModeFockState<T>,
        k: usize,
        time: Option<f64>,
    ) -> Result<()> {
        while self.next_k < self.config.record_k.len() && self.config.record_k[self.next_k] == k {
            self.capture(state, Axis::DetectionCount, k as f64, k, time)?;
            self.next_k += 1;
        }
        Ok(())
    }

    /// Records every pending time point strictly before `until`, evolving
    /// the collision phase up to each one.
    fn at_times_before<T: Real>(
        &mut self,
        state: &mut TwoModeFockState<T>,
        state_time: &mut f64,
        until: f64,
        inclusive: bool,
        k: usize,
    ) -> Result<()> {
        let kappa = T::lit(self.config.kappa);
        while let Some(&r) = self.config.record_t.get(self.next_t) {
            if r > until || (!inclusive && r == until) {
                break;
            }
            state.apply_collision_phase_mut(kappa, T::lit(r - *state_time))?;
            *state_time = r;
            self.capture(state, Axis::Time, r, k, Some(r))?;
            self.next_t += 1;
        }
        Ok(())
    }
}

fn simulate<T: Real>(config: &SimConfig, index: u64) -> Result<Trajectory<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(trajectory_seed(config.seed, index));
    let stop = config.stop();
    let timed = config.is_timed();
    let kappa = T::lit(config.kappa);
    let mut state = TwoModeFockState::<T>::number_state(config.n1, config.n2);
    let mut events = Vec::new();
    let mut rec = Recorder {
        config,
        next_k: 0,
        next_t: 0,
        records: Vec::new(),
    };
    let mut k = 0usize;
    // time of the last event, and time the state's collision phase refers to
    let mut t_event = 0.0f64;
    let mut t_state = 0.0f64;

    rec.at_count(&state, 0, timed.then_some(0.0))?;
    loop {
        let m = state.total_atoms();
        if m == 0 {
            break;
        }
        if let Stop::Detections(kmax) = stop {
            if k >= kmax {
                break;
            }
        }
        if timed {
            let rate = 2.0 * config.gamma * m as f64;
            let dt = Exp::new(rate)
                .map_err(|e| domain(format!("waiting-time rate {rate}: {e}")))?
                .sample(&mut rng);
            let t_next = t_event + dt;
            if let Stop::Time(tmax) = stop {
                if t_next > tmax {
                    break;
                }
            }
            rec.at_times_before(&mut state, &mut t_state, t_next, false, k)?;
            state.apply_collision_phase_mut(kappa, T::lit(t_next - t_state))?;
            t_state = t_next;
            t_event = t_next;
        }

        let interfering = rng.random::<f64>() < config.eta;
        let (next, kind, phi) = if interfering {
            let phi = fringe_stats(&state)?.sample(&mut rng);
            (
                state.apply_interference_jump(phi)?,
                EventKind::Interfering,
                Some(phi.to_f64_lossy()),
            )
        } else {
            let (na, _) = state.mode_occupations();
            let p_a = na.to_f64_lossy() / m as f64;
            if rng.random::<f64>() < p_a {
                (state.apply_loss_jump(Mode::A)?, EventKind::LossA, None)
            } else {
                (state.apply_loss_jump(Mode::B)?, EventKind::LossB, None)
            }
        };
        state = next;
        state.normalize_mut()?;
        k += 1;
        let event_time = timed.then_some(t_event);
        events.push(DetectionEvent {
            time: if matches!(stop, Stop::Time(_)) { event_time } else { None },
            kind,
            phi,
        });
        rec.at_count(&state, k, event_time)?;
    }
    if let Stop::Time(tmax) = stop {
        rec.at_times_before(&mut state, &mut t_state, tmax, true, k)?;
    }

    Ok(Trajectory {
        events,
        records: rec.records,
        final_state: state,
        final_time: timed.then_some(t_event),
    })
}

/// `(a + b e^{iφ})^k |n, n⟩`, normalised.
pub fn equal_position_state<T: Real>(n: usize, k: usize, phi: T) -> Result<TwoModeFockState<T>> {
    if k > 2 * n {
        return Err(domain(format!("k = {k} exceeds the {} atoms of |{n},{n}>", 2 * n)));
    }
    let mut s = TwoModeFockState::number_state(n, n);
    for _ in 0..k {
        s = s.apply_interference_jump(phi)?;
        s.normalize_mut()?;
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub mean: f64,
    pub standard_error: f64,
    pub n_samples: usize,
}

impl CurvePoint {
    /// Sample variance recovered from the standard error.
    pub fn variance(&self) -> f64 {
        self.standard_error * self.standard_error * self.n_samples as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleCurve {
    pub observable: Observable,
    pub axis: Axis,
    pub points: Vec<CurvePoint>,
}

impl EnsembleCurve {
    pub fn at(&self, x: f64) -> Option<&CurvePoint> {
        self.points.iter().find(|p| p.x == x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub n_traj: usize,
    pub curves: Vec<EnsembleCurve>,
}

impl Ensemble {
    pub fn curve(&self, observable: Observable, axis: Axis) -> Option<&EnsembleCurve> {
        self.curves
            .iter()
            .find(|c| c.observable == observable && c.axis == axis)
    }
}

/// Mean and standard error (sample std / √n) of `values`.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Runs `n_traj` trajectories on `workers` threads (0 = rayon default) and
/// averages every recorded observable per record point.
pub fn run_ensemble(config: &SimConfig, n_traj: usize, workers: usize) -> Result<Ensemble> {
    config.validate()?;
    if n_traj == 0 {
        return Err(domain("an ensemble needs at least one trajectory"));
    }
    if config.observables.contains(&Observable::Snapshot) {
        return Err(config_err_snapshot());
    }
    let runs = in_pool(workers, || {
        (0..n_traj as u64)
            .into_par_iter()
            .map(|i| simulate::<f64>(config, i).map(|t| t.records))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(aggregate(config, n_traj, &runs))
}

/// Trajectories `0..n_traj` under `config.seed`, in index order.
pub fn run_batch(config: &SimConfig, n_traj: usize, workers: usize) -> Result<Vec<Trajectory<f64>>> {
    config.validate()?;
    in_pool(workers, || {
        (0..n_traj as u64)
            .into_par_iter()
            .map(|i| simulate::<f64>(config, i))
            .collect()
    })
}

fn in_pool<R: Send>(workers: usize, job: impl FnOnce() -> Result<R> + Send) -> Result<R> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| domain(format!("cannot build worker pool: {e}")))?
        .install(job)
}

fn config_err_snapshot() -> crate::Error {
    config("observables", "snapshot cannot be averaged over an ensemble")
}

fn aggregate(config: &SimConfig, n_traj: usize, runs: &[Vec<Record>]) -> Ensemble {
    let mut points: Vec<(Axis, f64)> = config
        .record_k
        .iter()
        .map(|&k| (Axis::DetectionCount, k as f64))
        .collect();
    points.extend(config.record_t.iter().map(|&t| (Axis::Time, t)));
    let mut curves = Vec::new();
    for &obs in &config.observables {
        for axis in [Axis::DetectionCount, Axis::Time] {
            let xs: Vec<f64> = points
                .iter()
                .filter(|(a, _)| *a == axis)
                .map(|&(_, x)| x)
                .collect();
            if xs.is_empty() {
                continue;
            }
            let pts = xs
                .iter()
                .map(|&x| {
                    let values: Vec<f64> = runs
                        .iter()
                        .filter_map(|recs| {
                            recs.iter()
                                .find(|r| r.axis == axis && r.x == x)
                                .and_then(|r| r.value(obs))
                        })
                        .collect();
                    let (mean, standard_error) = mean_and_stderr(&values);
                    CurvePoint {
                        x,
                        mean,
                        standard_error,
                        n_samples: values.len(),
                    }
                })
                .collect();
            curves.push(EnsembleCurve {
                observable: obs,
                axis,
                points: pts,
            });
        }
    }
    Ensemble { n_traj, curves }
}
