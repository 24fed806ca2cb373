//! Acceptance gate: one PASS/FAIL line per criterion, then a single
//! assertion listing every failure.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use condensate::coherent::{atomic_coherent_state, max_overlap, overlap_kernel};
use condensate::fock::Mode;
use condensate::jump::{detection_density, fringe_stats};
use condensate::output::write_curve_csv;
use condensate::special::ln_binomial;
use condensate::theory::{
    beta_collision_psik, mean_beta_after_1, oracle_beta_equalpos, oracle_mean_beta_quadrature,
};
use condensate::trajectory::{
    equal_position_state, run_ensemble, run_trajectory_indexed, Axis, Observable, SimConfig,
};
use condensate::{FockState, ModePair, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_pair(rng: &mut ChaCha8Rng) -> ModePair {
    ModePair::from_angles(PI * rng.random::<f64>(), PI * (2.0 * rng.random::<f64>() - 1.0))
}

fn random_state(rng: &mut ChaCha8Rng, m: usize) -> FockState {
    let amps = (0..=m)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    FockState::from_amplitudes(amps).unwrap()
}

fn first_detection() -> Outcome {
    let cfg = SimConfig {
        seed: SEED,
        record_k: vec![1],
        ..SimConfig::new(100, 100)
    };
    let ens = run_ensemble(&cfg, 10_000, 0).unwrap();
    let p = ens.curve(Observable::Beta, Axis::DetectionCount).unwrap().points[0].clone();
    let exact = mean_beta_after_1(100.0, 100.0).unwrap();
    // every trajectory carries the same value, so the standard error is at
    // the rounding floor; allow that floor explicitly
    let tol = (3.0 * p.standard_error).max(1e-12);
    let var = p.variance();
    outcome(
        (p.mean - exact).abs() <= tol && var < 1e-20 && p.n_samples == 10_000,
        format!("mean={:.9} exact={exact:.9} se={:.2e} var={var:.2e}", p.mean, p.standard_error),
    )
}

fn second_detection_ratio() -> Outcome {
    let q1 = oracle_mean_beta_quadrature(100, 100, 1, 512).unwrap();
    let q2 = oracle_mean_beta_quadrature(100, 100, 2, 512).unwrap();
    let quad = q2 / q1;
    let cfg = SimConfig {
        seed: SEED,
        record_k: vec![1, 2],
        ..SimConfig::new(100, 100)
    };
    let ens = run_ensemble(&cfg, 10_000, 0).unwrap();
    let c = ens.curve(Observable::Beta, Axis::DetectionCount).unwrap();
    let (p1, p2) = (&c.points[0], &c.points[1]);
    let r = p2.mean / p1.mean;
    let se = r * ((p1.standard_error / p1.mean).powi(2) + (p2.standard_error / p2.mean).powi(2)).sqrt();
    let target = 4.0 / PI;
    outcome(
        (quad - target).abs() < 1e-4 && (r - target).abs() <= 3.0 * se,
        format!("quadrature={quad:.7} mc={r:.5}±{se:.5} target={target:.7}"),
    )
}

fn equal_position_quality() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, want, tol) in [(2usize, 10.0, 2.0), (3, 5.0, 1.5), (4, 3.0, 1.0)] {
        let approx = (-1.0 / k as f64).exp();
        let rel = 100.0 * (oracle_beta_equalpos(100, k).unwrap() - approx).abs() / approx;
        pass &= (rel - want).abs() <= tol;
        parts.push(format!("k={k}: {rel:.2}%"));
    }
    outcome(pass, parts.join(" "))
}

fn unequal_saturation() -> Outcome {
    let cfg = SimConfig {
        seed: SEED,
        record_k: vec![99],
        ..SimConfig::new(80, 20)
    };
    let ens = run_ensemble(&cfg, 2000, 0).unwrap();
    let p = &ens.curve(Observable::Beta, Axis::DetectionCount).unwrap().points[0];
    let target = 2.0 * (80.0f64 * 20.0).sqrt() / 100.0;
    let z = (p.mean - target) / p.standard_error;
    outcome(
        z.abs() <= 2.0,
        format!("mean={:.5}±{:.5} target={target} z={z:.2}", p.mean, p.standard_error),
    )
}

fn phase_state_overlap() -> Outcome {
    let s = equal_position_state::<f64>(100, 1, 0.0).unwrap();
    let got = max_overlap(&s).p_max;
    let exact = 2.0 * (ln_binomial::<f64>(200, 100) - 200.0 * 2f64.ln()).exp();
    let approx = 2.0 / (100.0 * PI).sqrt();
    let rel = (approx - exact).abs() / exact;
    outcome(
        (got - exact).abs() < 1e-6 && rel < 2e-3,
        format!("p_max={got:.9} exact={exact:.9} approx={approx:.6} ({:.3}%)", 100.0 * rel),
    )
}

fn collision_revival() -> Outcome {
    let pair = ModePair::new(FRAC_1_SQRT_2.into(), FRAC_1_SQRT_2.into()).unwrap();
    let s = atomic_coherent_state(&pair, 150);
    let kappa = 1.0;
    let revived = fringe_stats(&s.apply_collision_phase(kappa, PI / (2.0 * kappa)).unwrap())
        .unwrap()
        .beta_c;
    let mut worst = 0.0f64;
    for t in [1e-3, 5e-3, 0.01, 0.03, 0.06] {
        let b = fringe_stats(&s.apply_collision_phase(kappa, t).unwrap()).unwrap().beta_c;
        worst = worst.max((b - (2.0 * kappa * t).cos().abs().powi(149)).abs());
    }
    outcome(
        (revived - 1.0).abs() < 1e-9 && worst < 1e-10,
        format!("beta(pi/2k)={revived:.12} small-t max dev={worst:.2e}"),
    )
}

fn gaussian_collision_decay() -> Outcome {
    let s = equal_position_state::<f64>(100, 50, 0.0).unwrap();
    let kappa = 1.0;
    let (mut worst_rel, mut worst_excess) = (0.0f64, f64::NEG_INFINITY);
    let mut checked = 0;
    for i in 0..5000 {
        let t = i as f64 * 2e-4;
        let predicted = beta_collision_psik(100.0, 50.0, kappa, t).unwrap();
        if predicted < 0.3 {
            break;
        }
        let sim = fringe_stats(&s.apply_collision_phase(kappa, t).unwrap()).unwrap().beta_c;
        worst_rel = worst_rel.max((sim - predicted).abs() / predicted);
        worst_excess = worst_excess.max(sim / predicted - 1.0);
        checked += 1;
    }
    outcome(
        checked > 50 && worst_rel <= 0.05 && worst_excess <= 0.01,
        format!(
            "{checked} times, max |rel dev|={:.3}%, max excess={:.3}%",
            100.0 * worst_rel,
            100.0 * worst_excess
        ),
    )
}

fn kernel_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut kernel_dev, mut ladder_dev) = (0.0f64, 0.0f64);
    for n in [1usize, 7, 50, 200] {
        for _ in 0..100 {
            let (p1, p2) = (random_pair(&mut rng), random_pair(&mut rng));
            let (s1, s2) = (atomic_coherent_state(&p1, n), atomic_coherent_state(&p2, n));
            let direct = s2.inner(&s1).unwrap().norm_sqr();
            kernel_dev = kernel_dev.max((overlap_kernel(&p1, &p2, n).norm_sqr() - direct).abs());
            let lower = atomic_coherent_state(&p1, n - 1);
            for (mode, amp) in [(Mode::A, p1.mu()), (Mode::B, p1.nu())] {
                let lhs = s1.apply_loss_jump(mode).unwrap();
                let rhs = lower.scaled(amp * (n as f64).sqrt());
                for (x, y) in lhs.amplitudes().iter().zip(rhs.amplitudes()) {
                    ladder_dev = ladder_dev.max((x - y).norm());
                }
            }
        }
    }
    outcome(
        kernel_dev < 1e-10 && ladder_dev < 1e-10,
        format!("kernel max dev={kernel_dev:.2e} ladder max dev={ladder_dev:.2e}"),
    )
}

fn decay_law() -> Outcome {
    let gamma = 1.0;
    let times: Vec<f64> = [0.25, 0.5, 1.0].iter().map(|x| x / (2.0 * gamma)).collect();
    let cfg = SimConfig {
        seed: SEED,
        gamma,
        max_time: Some(*times.last().unwrap()),
        record_t: times.clone(),
        observables: vec![Observable::Remaining],
        ..SimConfig::new(50, 50)
    };
    let ens = run_ensemble(&cfg, 1000, 0).unwrap();
    let c = ens.curve(Observable::Remaining, Axis::Time).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for p in &c.points {
        let want = 100.0 * (-2.0 * gamma * p.x).exp();
        let z = (p.mean - want) / p.standard_error;
        pass &= z.abs() <= 3.0;
        parts.push(format!("t={}: {:.3} vs {want:.3} (z={z:.2})", p.x, p.mean));
    }
    outcome(pass, parts.join("; "))
}

fn property_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut failures = Vec::new();

    // atom bookkeeping over a mixed-channel trajectory
    let cfg = SimConfig {
        seed: SEED,
        eta: 0.6,
        kappa: 0.7,
        record_k: (0..=30).collect(),
        observables: vec![Observable::Remaining],
        ..SimConfig::new(17, 13)
    };
    let t = run_trajectory_indexed::<f64>(&cfg, 3).unwrap();
    let books = t.records.iter().all(|r| r.remaining == Some(30 - r.detections))
        && t.events.len() == 30
        && t.final_state.total_atoms() == 0;
    if !books {
        failures.push("bookkeeping");
    }

    // norm and populations under collisions
    let mut norm_dev = 0.0f64;
    for m in [1usize, 10, 150] {
        let s = random_state(&mut rng, m).normalize().unwrap();
        let e = s.apply_collision_phase(2.3, 0.77).unwrap();
        norm_dev = norm_dev.max((e.norm_sq() - 1.0).abs());
    }
    if norm_dev > 1e-12 {
        failures.push("collision norm");
    }

    // density normalisation
    let mut int_dev = 0.0f64;
    for m in [1usize, 9, 120] {
        let s = random_state(&mut rng, m);
        let n = 10_000;
        let h = 2.0 * PI / n as f64;
        let integral: f64 = (0..=n)
            .map(|i| {
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * detection_density(&s, -PI + i as f64 * h).unwrap()
            })
            .sum::<f64>()
            * h;
        int_dev = int_dev.max((integral - 1.0).abs());
    }
    if int_dev > 1e-9 {
        failures.push("density normalisation");
    }

    // rejection sampler against the exact CDF, one-sample KS at 99%
    let s = equal_position_state::<f64>(20, 3, 0.4).unwrap();
    let f = fringe_stats(&s).unwrap();
    let n = 50_000;
    let mut xs: Vec<f64> = (0..n).map(|_| f.sample(&mut rng)).collect();
    xs.sort_by(f64::total_cmp);
    let cdf = |x: f64| (x + PI + f.beta_c * ((x - f.theta).sin() - f.theta.sin())) / (2.0 * PI);
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - c).abs())
        })
        .fold(0.0, f64::max);
    let ks_crit = 1.628 / (n as f64).sqrt();
    if d > ks_crit {
        failures.push("KS");
    }

    // bitwise CSV equality across worker counts
    let cfg = SimConfig {
        seed: SEED,
        kappa: 0.5,
        eta: 0.9,
        record_k: vec![1, 5, 20],
        observables: vec![Observable::Beta, Observable::MaxOverlap],
        ..SimConfig::new(20, 20)
    };
    let csv = |workers| {
        let ens = run_ensemble(&cfg, 200, workers).unwrap();
        let mut out = Vec::new();
        for c in &ens.curves {
            write_curve_csv(&mut out, c).unwrap();
        }
        out
    };
    let deterministic = csv(1) == csv(4) && csv(3) == csv(1);
    if !deterministic {
        failures.push("worker determinism");
    }

    outcome(
        failures.is_empty(),
        format!(
            "collision norm dev={norm_dev:.1e} density dev={int_dev:.1e} KS D={d:.4} (crit {ks_crit:.4}) failed=[{}]",
            failures.join(", ")
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("first-detection visibility", first_detection),
        ("second-detection ratio", second_detection_ratio),
        ("equal-position approximation quality", equal_position_quality),
        ("unequal-number saturation", unequal_saturation),
        ("phase-state overlap after one detection", phase_state_overlap),
        ("collision revival", collision_revival),
        ("gaussian collision decay", gaussian_collision_decay),
        ("kernel equivalence and ladder identities", kernel_equivalence),
        ("decay-law fit", decay_law),
        ("property suite", property_suite),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} {:>2} {name}: {}", i + 1, o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
