//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line for
//! each and exits non-zero if any failed.
//!
//! `ACCEPTANCE_CRITERIA=1,5` restricts the run to the listed criteria.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ris_core::channel::{draw_nlos, phase_matrix, rician_combine, steering_bs, steering_ris};
use ris_core::linalg::matmul;
use ris_core::metrics::dbm_to_watts;
use ris_core::solvers::{
    decode_association, evaluate, ic_beamforming, normalize_beamformer, oresou_phases, random_search_step,
};
use ris_core::{assemble_channels, build_geometry, cascaded_channel, CMatrix, ChannelSet, Complex64, IcScaling, PhaseConfig, SystemConfig};
use ris_ddpg::ris::decode_action;
use ris_ddpg::{train, DdpgAgent, Hyperparams, Mlp, OutputActivation, QuadraticBandit, Schedule, Variant};
use ris_experiment::runner::{run_fairness, run_onebit_table, OnebitComparison};
use ris_experiment::{Algorithm, ExperimentKind, ExperimentSpec};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn table_channels(rng: &mut ChaCha8Rng) -> (SystemConfig, ChannelSet) {
    let cfg = SystemConfig::default();
    let geo = build_geometry(&cfg).unwrap();
    let ch = assemble_channels(&cfg, &geo, rng);
    (cfg, ch)
}

fn random_phases(rng: &mut ChaCha8Rng, n: usize) -> PhaseConfig {
    PhaseConfig::new((0..n).map(|_| rng.gen_range(0.0..TAU)).collect())
}

fn within_runtime(v: Verdict, started: Instant, limit: Duration) -> Verdict {
    let took = started.elapsed();
    if took > limit {
        verdict(false, format!("{}; took {took:.1?}, limit {limit:?}", v.detail))
    } else {
        verdict(v.pass, format!("{} in {took:.1?}", v.detail))
    }
}

fn interference_cancellation() -> Verdict {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut checked, mut worst_leak, mut worst_spread) = (0, 0.0f64, 0.0f64);
    while checked < 1000 {
        let (cfg, ch) = table_channels(&mut rng);
        let phases = random_phases(&mut rng, ch.total_elements());
        let Ok(bf) = ic_beamforming(&ch, &phases, cfg.p_max) else { continue };
        let e = matmul(&cascaded_channel(&ch, &phases), &bf.f_hat).unwrap();
        let n = e.rows();
        let diag_mean = (0..n).map(|i| e[(i, i)].norm()).sum::<f64>() / n as f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    worst_leak = worst_leak.max(e[(i, j)].norm() / diag_mean);
                }
            }
        }
        let s = evaluate(&ch, &phases, &bf, cfg.noise_power).per_uav_sinr;
        let hi = s.iter().copied().fold(f64::MIN, f64::max);
        let lo = s.iter().copied().fold(f64::MAX, f64::min);
        worst_spread = worst_spread.max((hi - lo) / hi);
        checked += 1;
    }
    within_runtime(
        verdict(
            worst_leak <= 1e-9 && worst_spread <= 1e-9,
            format!("1000 instances, max leakage {worst_leak:.2e}, max SINR spread {worst_spread:.2e}"),
        ),
        started,
        Duration::from_secs(10),
    )
}

fn power_constraint() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    let mut invocations = 0;
    let (cfg0, mut ch) = table_channels(&mut rng);
    for i in 0..10_000 {
        if i % 100 == 0 {
            ch = table_channels(&mut rng).1;
        }
        let p = dbm_to_watts(rng.gen_range(0.0..60.0));
        let mut check = |power: f64| {
            worst = worst.max((power - p).abs() / p);
            invocations += 1;
        };
        let phases = random_phases(&mut rng, ch.total_elements());
        if let Ok(bf) = ic_beamforming(&ch, &phases, p) {
            check(bf.power());
        }
        let raw: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
        check(normalize_beamformer(&raw, 4, 2, p).unwrap().power());
        let (_, bf, _) = random_search_step(&mut rng, &ch, p, cfg0.noise_power, i % 2 == 0);
        check(bf.power());
        for variant in [Variant::Ic, Variant::Oresou, Variant::Joint] {
            let k = variant.action_dim(&cfg0);
            let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            if let Ok((_, bf)) = decode_action(variant, &ch, &raw, p, i % 3 == 0, IcScaling::SquareRoot) {
                check(bf.power());
            }
        }
    }
    verdict(
        worst <= 1e-9 && invocations >= 10_000,
        format!("{invocations} outputs, worst relative power error {worst:.2e}"),
    )
}

fn power_scaling_law() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < 1000 {
        let (cfg, ch) = table_channels(&mut rng);
        let phases = random_phases(&mut rng, ch.total_elements());
        let (Ok(lo), Ok(hi)) = (
            ic_beamforming(&ch, &phases, dbm_to_watts(20.0)),
            ic_beamforming(&ch, &phases, dbm_to_watts(45.0)),
        ) else {
            continue;
        };
        let a = evaluate(&ch, &phases, &lo, cfg.noise_power).min_sinr_db;
        let b = evaluate(&ch, &phases, &hi, cfg.noise_power).min_sinr_db;
        worst = worst.max((b - a - 25.0).abs());
        checked += 1;
    }
    verdict(worst <= 1e-6, format!("1000 instances, worst deviation from 25 dB: {worst:.2e} dB"))
}

fn gradient_oracle() -> Verdict {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let (step, rel_tol, floor) = (1e-6, 1e-4, 1e-7);
    let (mut nets, mut failures, mut checks) = (0, 0, 0);
    while nets < 100 {
        let mut dims = vec![rng.gen_range(1..=8)];
        for _ in 0..rng.gen_range(1..=2) {
            dims.push(rng.gen_range(2..=16));
        }
        dims.push(rng.gen_range(1..=4));
        let output = if nets % 2 == 0 { OutputActivation::Tanh } else { OutputActivation::Identity };
        let mut net = Mlp::new(&dims, output, 0.5, &mut rng);
        let x: Vec<f64> = (0..dims[0]).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..net.output_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // Skip inputs sitting on a ReLU kink, where the derivative is undefined.
        let mut a = x.clone();
        let mut kink = false;
        for layer in &net.layers()[..net.layers().len() - 1] {
            let z: Vec<f64> = (0..layer.bias.len())
                .map(|r| layer.bias[r] + (0..a.len()).map(|c| layer.weights[[r, c]] * a[c]).sum::<f64>())
                .collect();
            kink |= z.iter().any(|v| v.abs() < 1e-3);
            a = z.into_iter().map(|v| v.max(0.0)).collect();
        }
        if kink {
            continue;
        }
        let f = |net: &Mlp| -> f64 { net.forward(&x).unwrap().iter().zip(&w).map(|(y, w)| y * w).sum() };
        let (grads, _) = net.gradients(&x, &w).unwrap();
        for l in 0..net.layers().len() {
            let (rows, cols) = net.layers()[l].weights.dim();
            for r in 0..rows {
                for c in 0..cols {
                    let orig = net.layers()[l].weights[[r, c]];
                    net.layers_mut()[l].weights[[r, c]] = orig + step;
                    let up = f(&net);
                    net.layers_mut()[l].weights[[r, c]] = orig - step;
                    let down = f(&net);
                    net.layers_mut()[l].weights[[r, c]] = orig;
                    let numeric = (up - down) / (2.0 * step);
                    let analytic = grads.layers[l].weights[[r, c]];
                    let err = (analytic - numeric).abs();
                    checks += 1;
                    if err > rel_tol * analytic.abs().max(numeric.abs()) && err > floor {
                        failures += 1;
                    }
                }
            }
        }
        nets += 1;
    }
    within_runtime(
        verdict(failures == 0, format!("100 networks, {checks} weight derivatives, {failures} mismatches")),
        started,
        Duration::from_secs(30),
    )
}

fn bandit_sanity() -> Verdict {
    let started = Instant::now();
    let target = vec![0.6, -0.4, 0.2, -0.8, 0.0, 0.5, -0.1, 0.3];
    let hyper = Hyperparams {
        actor_hidden: vec![32, 32],
        critic_hidden: vec![64, 64],
        actor_lr: 1e-3,
        critic_lr: 1e-3,
        discount: 0.0,
        batch_size: 32,
        buffer_capacity: 20_000,
        warmup_steps: 500,
        ..Hyperparams::default()
    };
    let mut solved = Vec::new();
    for seed in 0..3u64 {
        let mut env = QuadraticBandit { target: target.clone() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut agent = DdpgAgent::new(1, target.len(), hyper.clone(), &mut rng).unwrap();
        let schedule = Schedule {
            episodes: 1,
            steps_per_episode: 20_000,
        };
        let mut hit = None;
        train(&mut env, &mut agent, schedule, &mut rng, |p, _, _, agent| {
            let greedy = agent.actor.forward(&[1.0]).unwrap();
            let dist = greedy.iter().zip(&target).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            if dist <= 0.05 {
                hit = Some(p.step + 1);
                return false;
            }
            true
        })
        .unwrap();
        solved.push(hit);
    }
    let ok = solved.iter().all(Option::is_some);
    let steps: Vec<String> = solved.iter().map(|s| s.map_or("never".into(), |n| n.to_string())).collect();
    within_runtime(
        verdict(ok, format!("8-dim bandit within 0.05 after [{}] steps", steps.join(", "))),
        started,
        Duration::from_secs(120),
    )
}

fn acceptance_spec(kind: ExperimentKind) -> ExperimentSpec {
    // Narrower networks than the CLI default keep the suite's runtime bounded
    // on small machines.
    let text = "seeds = [0, 1, 2]\niterations = 10000\n[agent]\nactor_hidden = [64, 64]\ncritic_hidden = [64, 64]\n";
    ExperimentSpec::parse(text, Some(kind)).unwrap()
}

fn log_cell(msg: &str) {
    eprintln!("    running {msg}");
}

type Means = BTreeMap<Algorithm, (f64, f64)>;

fn onebit_means(rows: &[OnebitComparison]) -> Means {
    let mut sums: BTreeMap<Algorithm, (f64, f64, f64)> = BTreeMap::new();
    for r in rows {
        let e = sums.entry(r.continuous.cell.algorithm).or_default();
        e.0 += r.continuous.best_min_sinr_db;
        e.1 += r.one_bit.best_min_sinr_db;
        e.2 += 1.0;
    }
    sums.into_iter().map(|(a, (c, b, n))| (a, (c / n, b / n))).collect()
}

fn describe(means: &Means) -> String {
    means
        .iter()
        .map(|(a, (c, b))| format!("{} {c:.2}/{b:.2}", a.name()))
        .collect::<Vec<_>>()
        .join(", ")
}

fn ordering_trend(means: &Means) -> Verdict {
    let m = |a: Algorithm| means[&a].0;
    let (ic, or, jd, rs) = (m(Algorithm::Ic), m(Algorithm::Oresou), m(Algorithm::JointDrl), m(Algorithm::Random));
    let ordered = ic >= or && or >= jd && jd >= rs;
    let margin = ic - rs;
    verdict(
        ordered && margin >= 3.0,
        format!(
            "mean best min-SINR dB: IC {ic:.2}, ORESOU {or:.2}, JOINT_DRL {jd:.2}, RANDOM {rs:.2}; IC-RANDOM {margin:.2} dB (need ordering and >= 3)"
        ),
    )
}

fn onebit_trend(means: &Means) -> Verdict {
    let drops: Vec<(Algorithm, f64)> = means.iter().map(|(a, (c, b))| (*a, c - b)).collect();
    let all_drop = drops.iter().all(|(_, d)| *d > 0.0);
    let random_drop = drops.iter().find(|(a, _)| *a == Algorithm::Random).map_or(f64::NAN, |d| d.1);
    let largest = drops.iter().all(|(_, d)| *d <= random_drop);
    let listed: Vec<String> = drops.iter().map(|(a, d)| format!("{} {d:.2}", a.name())).collect();
    verdict(
        all_drop && largest,
        format!("continuous minus one-bit, dB: {} ({})", listed.join(", "), describe(means)),
    )
}

fn fairness_trend() -> Verdict {
    let spec = acceptance_spec(ExperimentKind::Fairness);
    let runs = run_fairness(&spec, &mut log_cell).unwrap();
    let mut lines = Vec::new();
    let mut wins = 0;
    for &seed in &spec.seeds {
        let gap = |objective| {
            runs.iter()
                .find(|r| r.seed == seed && r.objective == objective)
                .map(|r| r.final_rolling_gap_db())
                .unwrap()
        };
        let sum_rate = gap(ris_experiment::ObjectiveKind::MaxSumRate);
        let max_min = gap(ris_experiment::ObjectiveKind::MaxMinSinr);
        wins += usize::from(sum_rate > max_min);
        lines.push(format!("seed {seed}: {sum_rate:.2} vs {max_min:.2}"));
    }
    verdict(
        wins == spec.seeds.len(),
        format!("final rolling SINR gap, sum-rate vs max-min, dB: {}", lines.join("; ")),
    )
}

fn model_identities() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut worst_norm = 0.0f64;
    for _ in 0..10_000 {
        let (az, el) = (rng.gen_range(0.0..PI), rng.gen_range(-PI / 2.0..PI / 2.0));
        let lambda = rng.gen_range(0.005..0.5);
        let v = steering_ris(az, el, rng.gen_range(1..9), rng.gen_range(1..9), lambda / 2.0, lambda / 2.0, lambda);
        worst_norm = worst_norm.max((v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() - 1.0).abs());
        let b = steering_bs(el, rng.gen_range(-1.0..1.0), rng.gen_range(1..9), lambda / 2.0, lambda);
        worst_norm = worst_norm.max((b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() - 1.0).abs());
    }

    let mut worst_cascade = 0.0f64;
    let mut worst_coherent = 0.0f64;
    for _ in 0..1000 {
        let (cfg, ch) = table_channels(&mut rng);
        let phases = random_phases(&mut rng, ch.total_elements());
        let stacked = cascaded_channel(&ch, &phases);
        let n = cfg.elements_per_ris();
        let mut summed = CMatrix::zeros(cfg.n_uav(), cfg.n_bs_antennas);
        for r in 0..cfg.n_ris() {
            let h_r = CMatrix::from_fn(cfg.n_uav(), n, |u, k| ch.h_stacked[(u, r * n + k)]);
            let g_r = CMatrix::from_fn(n, cfg.n_bs_antennas, |k, b| ch.g_stacked[(r * n + k, b)]);
            let phi_r = phase_matrix(&PhaseConfig::new(phases.theta()[r * n..(r + 1) * n].to_vec()));
            let term = matmul(&matmul(&h_r, &phi_r).unwrap(), &g_r).unwrap();
            summed = summed.axpby(1.0, &term, 1.0).unwrap();
        }
        worst_cascade = worst_cascade.max(stacked.sub(&summed).unwrap().max_abs() / summed.max_abs());

        let raw: Vec<f64> = (0..2 * ch.total_elements()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let assoc = decode_association(&raw, 2).unwrap();
        let raw_bf: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let bf = normalize_beamformer(&raw_bf, 4, 2, cfg.p_max).unwrap();
        let coeffs = oresou_phases(&assoc, &ch, &bf).coefficients();
        for u in 0..2 {
            let mut sum = Complex64::new(0.0, 0.0);
            let mut mags = 0.0;
            for (m, &owner) in assoc.assignment().iter().enumerate() {
                if owner == u {
                    let beam: Complex64 = (0..4).map(|b| ch.g_stacked[(m, b)] * bf.f_hat[(b, u)]).sum();
                    let term = ch.h_stacked[(u, m)] * coeffs[m] * beam;
                    sum += term;
                    mags += term.norm();
                }
            }
            if mags > 0.0 {
                worst_coherent = worst_coherent.max((sum.norm() - mags).abs() / mags);
            }
        }
    }

    let mut rician_ok = true;
    for _ in 0..1000 {
        let rows = rng.gen_range(1..6);
        let cols = rng.gen_range(1..6);
        let los = draw_nlos(&mut rng, rows, cols);
        let nlos = draw_nlos(&mut rng, rows, cols);
        rician_ok &= rician_combine(&los, &nlos, 0.0) == nlos;
        rician_ok &= rician_combine(&los, &nlos, f64::INFINITY) == los;
    }

    let pass = worst_norm <= 1e-12 && worst_cascade <= 1e-12 && worst_coherent <= 1e-10 && rician_ok;
    verdict(
        pass,
        format!(
            "steering norm error {worst_norm:.1e}, cascade mismatch {worst_cascade:.1e}, coherent-sum error {worst_coherent:.1e}, Rician limits {}",
            if rician_ok { "exact" } else { "violated" }
        ),
    )
}

fn main() {
    let selected: Option<Vec<u32>> = std::env::var("ACCEPTANCE_CRITERIA")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let wanted = |k: u32| selected.as_ref().is_none_or(|s| s.contains(&k));

    let mut results: Vec<(u32, &str, Verdict)> = Vec::new();
    let mut run = |k: u32, name: &'static str, f: &mut dyn FnMut() -> Verdict| {
        if !wanted(k) {
            return;
        }
        eprintln!("criterion {k}: {name} ...");
        let started = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| verdict(false, "panicked"));
        println!(
            "criterion {k} [{}] {name}: {} ({:.1?})",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            started.elapsed()
        );
        results.push((k, name, v));
    };

    run(1, "interference cancellation", &mut interference_cancellation);
    run(2, "power constraint", &mut power_constraint);
    run(3, "IC power-scaling law", &mut power_scaling_law);
    run(4, "gradient oracle", &mut gradient_oracle);
    run(5, "DDPG bandit sanity", &mut bandit_sanity);

    let mut means: Option<Means> = None;
    let mut table = || -> Means {
        means
            .get_or_insert_with(|| {
                let spec = acceptance_spec(ExperimentKind::OnebitTable);
                onebit_means(&run_onebit_table(&spec, &mut log_cell).unwrap())
            })
            .clone()
    };
    if wanted(6) || wanted(7) {
        let m = catch_unwind(AssertUnwindSafe(&mut table)).ok();
        run(6, "algorithm ordering at 45 dBm", &mut || {
            m.as_ref().map_or_else(|| verdict(false, "runs panicked"), ordering_trend)
        });
        run(7, "one-bit degradation", &mut || {
            m.as_ref().map_or_else(|| verdict(false, "runs panicked"), onebit_trend)
        });
    }
    run(8, "objective fairness at 35 dBm", &mut fairness_trend);
    run(9, "model identities", &mut model_identities);

    println!("\nacceptance summary");
    for (k, name, v) in &results {
        println!("  {k}. {} {name}", if v.pass { "PASS" } else { "FAIL" });
    }
    if results.iter().any(|(_, _, v)| !v.pass) {
        std::process::exit(1);
    }
}
