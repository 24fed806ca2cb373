//! Data series behind each figure: Monte Carlo averages next to the exact
//! and approximate reference curves they are compared with.

use condensate::coherent::{phase_state, phase_state_overlap};
use condensate::jump::fringe_stats;
use condensate::output::Series;
use condensate::theory::{
    beta_collision_acs, beta_collision_psik, beta_equalpos_approx, beta_steady,
    beta_unequal_approx, oracle_beta_equalpos, pphi_approx,
};
use condensate::trajectory::{
    equal_position_state, mean_and_stderr, run_batch, run_ensemble, Axis, CurvePoint,
    Observable, SimConfig,
};
use condensate::{FockState, C64};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FigureId {
    /// Mean visibility vs detections from |100,100⟩
    Fig2,
    /// Mean visibility vs n2 with n1 + n2 = 100, after 5 and 99 detections
    Fig3,
    /// Phase-state overlap profiles and maximal coherent-state overlap
    Fig4,
    /// Collisional decay of the visibility for three 150-atom states
    Fig5,
    /// Visibility vs detections with collisions, and the steady state
    Fig6,
    /// Maximal coherent-state overlap vs detections with collisions
    Fig7,
}

impl FigureId {
    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FigureOptions {
    pub traj: Option<usize>,
    pub workers: usize,
    pub seed: u64,
}

pub struct Bundle {
    pub series: Vec<Series>,
    pub configs: Vec<SimConfig>,
}

pub fn build(id: FigureId, opts: &FigureOptions) -> Result<Bundle, CliError> {
    let mut b = Bundle {
        series: Vec::new(),
        configs: Vec::new(),
    };
    match id {
        FigureId::Fig2 => fig2(opts, &mut b)?,
        FigureId::Fig3 => fig3(opts, &mut b)?,
        FigureId::Fig4 => fig4(opts, &mut b)?,
        FigureId::Fig5 => fig5(opts, &mut b)?,
        FigureId::Fig6 => fig6(opts, &mut b)?,
        FigureId::Fig7 => fig7(opts, &mut b)?,
    }
    Ok(b)
}

fn base(n1: usize, n2: usize, opts: &FigureOptions) -> SimConfig {
    SimConfig {
        seed: opts.seed,
        ..SimConfig::new(n1, n2)
    }
}

fn ensemble_series(
    name: String,
    cfg: SimConfig,
    traj: usize,
    opts: &FigureOptions,
    obs: Observable,
    x_scale: f64,
    b: &mut Bundle,
) -> Result<(), CliError> {
    let ens = run_ensemble(&cfg, traj, opts.workers)?;
    let mut points = ens
        .curve(obs, Axis::DetectionCount)
        .map(|c| c.points.clone())
        .unwrap_or_default();
    for p in &mut points {
        p.x *= x_scale;
    }
    b.series.push(Series::new(name, points));
    b.configs.push(cfg);
    Ok(())
}

fn fig2(opts: &FigureOptions, b: &mut Bundle) -> Result<(), CliError> {
    let ks: Vec<usize> = (1..200).collect();
    let cfg = SimConfig {
        record_k: ks.clone(),
        ..base(100, 100, opts)
    };
    ensemble_series("mc".into(), cfg, opts.traj.unwrap_or(1000), opts, Observable::Beta, 1.0, b)?;
    let exact = ks
        .iter()
        .map(|&k| Ok((k as f64, oracle_beta_equalpos(100, k)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    b.series.push(Series::exact("equal_position", exact));
    let approx = ks
        .iter()
        .map(|&k| Ok((k as f64, beta_equalpos_approx(k as f64)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    b.series.push(Series::exact("approx", approx));
    Ok(())
}

fn fig3(opts: &FigureOptions, b: &mut Bundle) -> Result<(), CliError> {
    let traj = opts.traj.unwrap_or(1000);
    let mut mc = [Vec::new(), Vec::new()];
    let mut approx = [Vec::new(), Vec::new()];
    for n2 in 0..=100usize {
        let n1 = 100 - n2;
        let cfg = SimConfig {
            record_k: vec![5, 99],
            ..base(n1, n2, opts)
        };
        let ens = run_ensemble(&cfg, traj, opts.workers)?;
        let c = ens
            .curve(Observable::Beta, Axis::DetectionCount)
            .ok_or_else(|| CliError::Runtime("missing beta curve".into()))?;
        for (slot, p) in c.points.iter().enumerate() {
            mc[slot].push(CurvePoint { x: n2 as f64, ..p.clone() });
            let k = [5.0, 99.0][slot];
            approx[slot].push((n2 as f64, beta_unequal_approx(n1 as f64, n2 as f64, k)?));
        }
        b.configs.push(cfg);
    }
    let [mc5, mc99] = mc;
    let [ap5, ap99] = approx;
    b.series.push(Series::new("mc_k99", mc99));
    b.series.push(Series::new("mc_k5", mc5));
    b.series.push(Series::exact("approx_k99", ap99));
    b.series.push(Series::exact("approx_k5", ap5));
    Ok(())
}

const PROFILE_KS: [usize; 3] = [10, 100, 190];
const PROFILE_SEARCH_POINTS: usize = 720;
const PROFILE_HALF_WIDTH: f64 = 0.6;
const PROFILE_STEP: f64 = 0.02;

fn fig4(opts: &FigureOptions, b: &mut Bundle) -> Result<(), CliError> {
    let overlap_traj = opts.traj.unwrap_or(2000);
    let profile_traj = opts.traj.unwrap_or(1000);

    // phase-state overlap profiles, each trajectory centred on its peak
    let cfg = SimConfig {
        record_k: PROFILE_KS.to_vec(),
        observables: vec![Observable::Snapshot],
        ..base(100, 100, opts)
    };
    let runs = run_batch(&cfg, profile_traj, opts.workers)?;
    b.configs.push(cfg);
    let n_off = (PROFILE_HALF_WIDTH / PROFILE_STEP).round() as i64;
    let offsets: Vec<f64> = (-n_off..=n_off).map(|i| i as f64 * PROFILE_STEP).collect();
    for (slot, &k) in PROFILE_KS.iter().enumerate() {
        let mut samples = vec![Vec::with_capacity(runs.len()); offsets.len()];
        for run in &runs {
            let snap = run.records[slot]
                .snapshot
                .as_ref()
                .ok_or_else(|| CliError::Runtime("missing snapshot".into()))?;
            let state = FockState::from_amplitudes(snap.iter().map(|c| C64::new(c[0], c[1])).collect())?;
            let peak = (0..PROFILE_SEARCH_POINTS)
                .map(|j| {
                    let phi = -std::f64::consts::FRAC_PI_2
                        + j as f64 * std::f64::consts::PI / PROFILE_SEARCH_POINTS as f64;
                    (phi, phase_state_overlap(&state, phi))
                })
                .fold((0.0, f64::NEG_INFINITY), |a, c| if c.1 > a.1 { c } else { a })
                .0;
            for (i, d) in offsets.iter().enumerate() {
                samples[i].push(phase_state_overlap(&state, peak + d));
            }
        }
        let points = offsets
            .iter()
            .zip(&samples)
            .map(|(&x, v)| {
                let (mean, standard_error) = mean_and_stderr(v);
                CurvePoint {
                    x,
                    mean,
                    standard_error,
                    n_samples: v.len(),
                }
            })
            .collect();
        b.series.push(Series::new(format!("mc_pphi_k{k}"), points));
        let approx = offsets
            .iter()
            .map(|&d| Ok((d, pphi_approx(100.0, k as f64, d)?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        b.series.push(Series::exact(format!("approx_pphi_k{k}"), approx));
    }

    // maximal overlap against the detected fraction k/N
    for (n1, n2) in [(100usize, 100usize), (200, 50)] {
        let n = n1 + n2;
        let cfg = SimConfig {
            record_k: (10..n).step_by(10).collect(),
            observables: vec![Observable::MaxOverlap],
            ..base(n1, n2, opts)
        };
        let name = format!("mc_max_overlap_{n1}_{n2}");
        ensemble_series(name, cfg, overlap_traj, opts, Observable::MaxOverlap, 1.0 / n as f64, b)?;
    }
    let circle = (0..=100).map(|i| {
        let x = i as f64 / 100.0;
        (x, (x * (2.0 - x)).sqrt())
    });
    b.series.push(Series::exact("approx_max_overlap", circle));
    Ok(())
}

const COLLISION_TIMES: usize = 101;
const COLLISION_T_MAX: f64 = 0.2;

fn fig5(opts: &FigureOptions, b: &mut Bundle) -> Result<(), CliError> {
    let kappa = 1.0;
    let times: Vec<f64> = (0..COLLISION_TIMES)
        .map(|i| i as f64 * COLLISION_T_MAX / (COLLISION_TIMES - 1) as f64)
        .collect();
    let decay = |s: &FockState| -> Result<Vec<f64>, CliError> {
        times
            .iter()
            .map(|&t| Ok(fringe_stats(&s.apply_collision_phase(kappa, t)?)?.beta_c))
            .collect()
    };

    let cfg = SimConfig {
        record_k: vec![50],
        observables: vec![Observable::Snapshot],
        ..base(100, 100, opts)
    };
    let runs = run_batch(&cfg, opts.traj.unwrap_or(1), opts.workers)?;
    b.configs.push(cfg);
    let mut per_time = vec![Vec::new(); times.len()];
    for run in &runs {
        let snap = run.records[0]
            .snapshot
            .as_ref()
            .ok_or_else(|| CliError::Runtime("missing snapshot".into()))?;
        let state = FockState::from_amplitudes(snap.iter().map(|c| C64::new(c[0], c[1])).collect())?;
        for (i, v) in decay(&state)?.into_iter().enumerate() {
            per_time[i].push(v);
        }
    }
    let points = times
        .iter()
        .zip(&per_time)
        .map(|(&x, v)| {
            let (mean, standard_error) = mean_and_stderr(v);
            CurvePoint {
                x,
                mean,
                standard_error,
                n_samples: v.len(),
            }
        })
        .collect();
    b.series.push(Series::new("mc_detected_50", points));

    let eq = decay(&equal_position_state(100, 50, 0.0)?)?;
    b.series.push(Series::exact("equal_position_50", times.iter().copied().zip(eq)));
    let ph = decay(&phase_state(0.0, 150))?;
    b.series.push(Series::exact("phase_state_150", times.iter().copied().zip(ph)));
    let psik = times
        .iter()
        .map(|&t| Ok((t, beta_collision_psik(100.0, 50.0, kappa, t)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    b.series.push(Series::exact("approx_equal_position_50", psik));
    let acs = times
        .iter()
        .map(|&t| Ok((t, beta_collision_acs(150.0, kappa, t)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    b.series.push(Series::exact("approx_coherent_150", acs));
    Ok(())
}

fn fig6(opts: &FigureOptions, b: &mut Bundle) -> Result<(), CliError> {
    let ks: Vec<usize> = (1..200).collect();
    for kappa in [0.5, 2.0, 5.0] {
        let cfg = SimConfig {
            kappa,
            record_k: ks.clone(),
            ..base(100, 100, opts)
        };
        let name = format!("mc_kappa_{kappa}");
        ensemble_series(name, cfg, opts.traj.unwrap_or(1000), opts, Observable::Beta, 1.0, b)?;
        let steady = ks
            .iter()
            .map(|&k| Ok((k as f64, beta_steady(100.0, k as f64, 1.0, kappa)?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        b.series.push(Series::exact(format!("steady_kappa_{kappa}"), steady));
    }
    Ok(())
}

fn fig7(opts: &FigureOptions, b: &mut Bundle) -> Result<(), CliError> {
    for kappa in [0.1, 0.5, 5.0] {
        let cfg = SimConfig {
            kappa,
            record_k: (10..200).step_by(10).collect(),
            observables: vec![Observable::MaxOverlap],
            ..base(100, 100, opts)
        };
        let name = format!("mc_kappa_{kappa}");
        ensemble_series(name, cfg, opts.traj.unwrap_or(1000), opts, Observable::MaxOverlap, 1.0, b)?;
    }
    let approx = (1..200)
        .map(|k| Ok((k as f64, pphi_approx(100.0, k as f64, 0.0)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    b.series.push(Series::exact("approx_kappa_0", approx));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::ValueEnum;

    #[test]
    fn ids_round_trip_through_their_names() {
        for id in FigureId::value_variants() {
            assert_eq!(FigureId::from_str(id.name(), false).unwrap(), *id);
        }
    }

    #[test]
    fn aligned_profiles_peak_at_zero_offset() {
        let opts = FigureOptions {
            traj: Some(3),
            workers: 1,
            seed: 2,
        };
        let bundle = build(FigureId::Fig4, &opts).unwrap();
        for k in PROFILE_KS {
            let s = bundle.series.iter().find(|s| s.name == format!("mc_pphi_k{k}")).unwrap();
            let top = s.points.iter().fold(&s.points[0], |a, p| if p.mean > a.mean { p } else { a });
            assert!(top.x.abs() < 1e-12, "k = {k}: peak at {}", top.x);
            assert!(s.points.iter().all(|p| p.mean <= 1.0 + 1e-12));
        }
    }
}
