use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use relaycap::analytic::{
    af_integrals, df_outage_rate_exact, df_received_snr, df_success_prob, rayleigh_outage_rate,
    mac_received_snr, af_received_snr, SystemParams,
};
use relaycap::montecarlo::{
    asymptotic_outage, estimate_outage, fold_trials, simulate_trial, Realization, SimStrategy,
    TrialConfig,
};
use relaycap::topology::{sample_positions, NetworkGeometry, PathGains, TopologyMoments};

fn config(strategy: SimStrategy, n: usize, p: f64, trials: u64) -> TrialConfig {
    let params = SystemParams::new(1000.0, p, 0.5, 0.1).unwrap();
    TrialConfig {
        trials,
        seed: 2024,
        ..TrialConfig::new(strategy, n, params, NetworkGeometry::default_line())
    }
}

/// Sample mean and its standard error.
fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn per_trial<F: Fn(&Realization) -> f64 + Sync>(cfg: &TrialConfig, f: F) -> Vec<f64> {
    (0..cfg.trials).map(|i| f(&simulate_trial(cfg, i))).collect()
}

#[test]
fn estimates_do_not_depend_on_thread_count() {
    let cfg = TrialConfig {
        target_rate: 1.0,
        ..config(SimStrategy::Df, 100, 0.2, 5_000)
    };
    let runs: Vec<_> = [1, 4, 16]
        .into_iter()
        .map(|t| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .unwrap()
                .install(|| estimate_outage(&cfg).unwrap())
        })
        .collect();
    assert!(runs.windows(2).all(|w| w[0] == w[1]), "{runs:?}");
}

#[test]
fn af_signal_and_power_moments() {
    let cfg = config(SimStrategy::Af, 1000, 0.2, 20_000);
    let sp = cfg.params;
    let (a, b) = af_integrals(&sp, &cfg.geometry).unwrap();
    let mut signal = Vec::new();
    let mut noise = Vec::new();
    let mut power = Vec::new();
    for i in 0..cfg.trials {
        if let Realization::Af(r) = simulate_trial(&cfg, i) {
            signal.push(r.signal.norm_sqr());
            noise.push(r.noise_power);
            power.push(r.relay_power);
        }
    }
    let (s, _) = mean_se(&signal);
    assert!((s / (0.8 * a) - 1.0).abs() < 0.03, "E|A|^2 = {s}, expected {}", 0.8 * a);
    let (v, _) = mean_se(&noise);
    assert!((v / (0.8 * b) - 1.0).abs() < 0.03, "{v} vs {}", 0.8 * b);
    let budget = (1.0 - sp.alpha()) * sp.gamma0();
    let (pw, _) = mean_se(&power);
    assert!((pw / budget - 1.0).abs() < 0.02, "{pw} vs {budget}");
}

#[test]
fn df_forwarding_count_is_binomial() {
    let n = 200;
    let cfg = config(SimStrategy::Df, n, 0.2, 20_000);
    let q = (1.0 - 0.2) * df_success_prob(1.0, &cfg.params, &cfg.geometry).unwrap();
    let counts = per_trial(&cfg, |r| match r {
        Realization::Df(d) => d.forwarding(1.0).count() as f64,
        _ => unreachable!(),
    });
    let (mean, se) = mean_se(&counts);
    let expected = n as f64 * q;
    assert!((mean - expected).abs() < 3.0 * se, "{mean} vs {expected} (se {se})");
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (counts.len() - 1) as f64;
    assert!((var / (expected * (1.0 - q)) - 1.0).abs() < 0.05, "{var}");
}

#[test]
fn df_received_snr_matches_integral() {
    let cfg = config(SimStrategy::Df, 300, 0.1, 20_000);
    let expected = df_received_snr(1.0, &cfg.params, &cfg.geometry).unwrap();
    let snr = per_trial(&cfg, |r| match r {
        Realization::Df(d) => d.snr_at(1.0),
        _ => unreachable!(),
    });
    let (mean, se) = mean_se(&snr);
    assert!((mean - expected).abs() < 4.0 * se, "{mean} vs {expected} (se {se})");
}

#[test]
fn outage_converges_to_rayleigh_prediction() {
    let g = NetworkGeometry::default_line();
    let m = TopologyMoments::compute(&g).unwrap();
    let sp = SystemParams::new(1000.0, 0.2, 0.5, 0.2).unwrap();
    let targets = [
        (SimStrategy::Mac, rayleigh_outage_rate(mac_received_snr(&sp, &m), 0.2)),
        (SimStrategy::Af, rayleigh_outage_rate(af_received_snr(&sp, &g).unwrap(), 0.2)),
    ];
    for (strategy, rate) in targets {
        let err = |n| {
            let cfg = TrialConfig {
                target_rate: rate,
                trials: 20_000,
                seed: 5,
                ..TrialConfig::new(strategy, n, sp, g.clone())
            };
            let mc = estimate_outage(&cfg).unwrap().outage_freq;
            (mc - asymptotic_outage(strategy, &sp, &g, rate).unwrap()).abs()
        };
        let large = err(1000);
        assert!(large < 0.015, "{strategy} N=1000 error {large}");
        assert!(err(2) > large, "{strategy}");
    }
}

#[test]
fn df_outage_at_exact_rate_is_epsilon() {
    let sp = SystemParams::new(1000.0, 0.1, 0.5, 0.1).unwrap();
    let g = NetworkGeometry::default_line();
    let rate = df_outage_rate_exact(&sp, &g).unwrap().rate;
    let cfg = TrialConfig {
        target_rate: rate,
        trials: 40_000,
        seed: 9,
        ..TrialConfig::new(SimStrategy::Df, 1000, sp, g)
    };
    let e = estimate_outage(&cfg).unwrap();
    assert!((e.outage_freq - 0.1).abs() < 0.015, "{e:?}");
}

#[test]
fn fold_trials_counts_every_trial_once() {
    let cfg = config(SimStrategy::Mac, 5, 0.5, 3_333);
    let total = fold_trials(&cfg, 0u64, |acc, _, _| acc + 1, |a, b| a + b);
    assert_eq!(total, 3_333);
    let indices = fold_trials(&cfg, 0u64, |acc, i, _| acc + i, |a, b| a + b);
    assert_eq!(indices, 3_333 * 3_332 / 2);
}

#[test]
fn quadrature_moments_agree_with_sampling() {
    let g = NetworkGeometry::default_line();
    let m = TopologyMoments::compute(&g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let pts = sample_positions(&g, 1_000_000, &mut rng);
    let gains: Vec<_> = pts.iter().map(|s| g.gains(s)).collect();
    type Moment = (&'static str, f64, fn(&PathGains) -> f64);
    let checks: [Moment; 4] = [
        ("rho_d", m.e_rho_d, |x| x.dest),
        ("rho_s", m.e_rho_s, |x| x.source),
        ("ratio", m.e_ratio, |x| x.dest / x.source),
        ("product", m.e_product, |x| x.source * x.dest),
    ];
    for (name, exact, f) in checks {
        let xs: Vec<f64> = gains.iter().map(f).collect();
        let (mean, se) = mean_se(&xs);
        assert!((mean - exact).abs() < 4.0 * se, "{name}: {mean} vs {exact} (se {se})");
    }
}
