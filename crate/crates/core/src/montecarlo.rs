//! Finite-N Monte Carlo simulation of the relay network.
//!
//! Each trial draws relay positions, the attack survivor mask and the
//! Rayleigh fading of both hops, then evaluates the instantaneous rate at
//! the destination. Trial `i` of a run with seed `s` always uses ChaCha8
//! keyed by `s` on stream `i`, so an estimate does not depend on how trials
//! are spread over threads. Outage counts are integers, so the reduction is
//! exact.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2};
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::analytic::{
    af_received_snr, df_outage_prob, mac_received_snr, rayleigh_outage_prob, SystemParams,
};
use crate::error::{check_range, Result};
use crate::topology::{NetworkGeometry, Point, TopologyMoments};

pub type TrialRng = ChaCha8Rng;

/// Stream id reserved for the shared placement in fixed-position mode.
pub const FIXED_PLACEMENT_STREAM: u64 = u64::MAX;

/// Counter-derived substream for trial `index` of a run seeded with `seed`.
pub fn trial_stream(seed: u64, index: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SimStrategy {
    Mac,
    Af,
    Df,
}

impl SimStrategy {
    pub const ALL: [SimStrategy; 3] = [SimStrategy::Mac, SimStrategy::Af, SimStrategy::Df];

    pub fn as_str(&self) -> &'static str {
        match self {
            SimStrategy::Mac => "MAC",
            SimStrategy::Af => "AF",
            SimStrategy::Df => "DF",
        }
    }
}

impl fmt::Display for SimStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub n_relays: usize,
    pub strategy: SimStrategy,
    /// bits per channel use
    pub target_rate: f64,
    pub trials: u64,
    pub seed: u64,
    pub params: SystemParams,
    pub geometry: NetworkGeometry,
    /// Fresh positions every trial; otherwise one placement for the run.
    pub resample_positions: bool,
}

impl TrialConfig {
    pub fn new(
        strategy: SimStrategy,
        n_relays: usize,
        params: SystemParams,
        geometry: NetworkGeometry,
    ) -> Self {
        Self {
            n_relays,
            strategy,
            target_rate: 0.0,
            trials: 10_000,
            seed: 0,
            params,
            geometry,
            resample_positions: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_range("n_relays", self.n_relays as f64, self.n_relays >= 1, "n_relays >= 1")?;
        check_range("trials", self.trials as f64, self.trials >= 1, "trials >= 1")?;
        check_range(
            "target_rate",
            self.target_rate,
            self.target_rate >= 0.0 && self.target_rate.is_finite(),
            "target_rate >= 0",
        )?;
        if self.strategy != SimStrategy::Mac {
            let a = self.params.alpha();
            check_range("alpha", a, a > 0.0, "alpha > 0 for AF and DF")?;
        }
        Ok(())
    }

    fn placement(&self) -> Option<Vec<Point>> {
        (!self.resample_positions).then(|| {
            let mut rng = trial_stream(self.seed, FIXED_PLACEMENT_STREAM);
            crate::topology::sample_positions(&self.geometry, self.n_relays, &mut rng)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEstimate {
    pub outage_freq: f64,
    pub outages: u64,
    pub trials: u64,
    /// 1.96·√(f(1−f)/trials)
    pub ci95_halfwidth: f64,
    pub seed: u64,
}

impl OutageEstimate {
    pub fn from_counts(outages: u64, trials: u64, seed: u64) -> Self {
        let f = outages as f64 / trials as f64;
        Self {
            outage_freq: f,
            outages,
            trials,
            ci95_halfwidth: 1.96 * (f * (1.0 - f) / trials as f64).sqrt(),
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacRealization {
    /// |Σ √((1−α)γ0ρ_iD/N)·h_iD|² over survivors
    pub snr: f64,
    pub survivors: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AfRealization {
    /// Realized signal coefficient A.
    pub signal: Complex64,
    /// Realized power of the forwarded relay noise B given the fading.
    pub noise_power: f64,
    /// Σ|t_i|² over all N relays, as allocated before the attack.
    pub relay_power: f64,
    pub survivors: usize,
}

impl AfRealization {
    pub fn snr(&self) -> f64 {
        self.signal.norm_sqr() / (1.0 + self.noise_power)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfRelay {
    pub position: Point,
    /// ½·log2(1 + αγ0ρ_Si|h_Si|²), the largest rate this relay decodes.
    pub decode_rate: f64,
    /// √((1−α)γ0ρ_iD/N)·h_iD
    pub amplitude: Complex64,
}

/// Surviving relays of one DF trial. Which of them forward depends on the
/// target rate, so one realization serves every rate.
#[derive(Debug, Clone, PartialEq)]
pub struct DfRealization {
    pub survivors: Vec<DfRelay>,
}

impl DfRealization {
    pub fn forwarding(&self, rate: f64) -> impl Iterator<Item = &DfRelay> {
        self.survivors.iter().filter(move |r| r.decode_rate >= rate)
    }

    pub fn snr_at(&self, rate: f64) -> f64 {
        self.forwarding(rate)
            .map(|r| r.amplitude)
            .sum::<Complex64>()
            .norm_sqr()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Realization {
    Mac(MacRealization),
    Af(AfRealization),
    Df(DfRealization),
}

impl Realization {
    /// Instantaneous destination rate for a codeword of rate `target`.
    pub fn rate_at(&self, target: f64) -> f64 {
        let snr = match self {
            Realization::Mac(r) => r.snr,
            Realization::Af(r) => r.snr(),
            Realization::Df(r) => r.snr_at(target),
        };
        capacity(snr)
    }

    pub fn is_outage(&self, target: f64) -> bool {
        self.rate_at(target) < target
    }
}

fn capacity(snr: f64) -> f64 {
    0.5 * snr.ln_1p() / LN_2
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * FRAC_1_SQRT_2
}

fn simulate<R: Rng + ?Sized>(cfg: &TrialConfig, placement: Option<&[Point]>, rng: &mut R) -> Realization {
    let g = &cfg.geometry;
    let n = cfg.n_relays as f64;
    let (g0, a, p) = (cfg.params.gamma0(), cfg.params.alpha(), cfg.params.p());
    let relay_share = (1.0 - a) * g0 / n;

    let position =|rng: &mut R, i: usize| match placement {
        Some(ps) => ps[i],
        None => g.sample_position(rng),
    };

    match cfg.strategy {
        SimStrategy::Mac => {
            let mut sum = Complex64::new(0.0, 0.0);
            let mut survivors = 0;
            for i in 0..cfg.n_relays {
                let s = position(rng, i);
                let alive = rng.random::<f64>() >= p;
                let h_d = complex_normal(rng);
                if alive {
                    survivors += 1;
                    sum += (relay_share * g.gains(&s).dest).sqrt() * h_d;
                }
            }
            Realization::Mac(MacRealization {
                snr: sum.norm_sqr(),
                survivors,
            })
        }
        SimStrategy::Af => {
            let mut signal = Complex64::new(0.0, 0.0);
            let mut noise_power = 0.0;
            let mut relay_power = 0.0;
            let mut survivors = 0;
            for i in 0..cfg.n_relays {
                let s = position(rng, i);
                let alive = rng.random::<f64>() >= p;
                let h_s = complex_normal(rng);
                let h_d = complex_normal(rng);
                let noise = complex_normal(rng);
                let rho = g.gains(&s);
                let gs = a * g0 * rho.source;
                // |gain|² of the amplification rule with N0 = 1.
                let scale = relay_share / (gs + 1.0);
                let received = gs.sqrt() * h_s + noise;
                relay_power += scale * received.norm_sqr();
                if alive {
                    survivors += 1;
                    signal += (scale * gs * rho.dest).sqrt() * h_s * h_d;
                    noise_power += scale * rho.dest * h_d.norm_sqr();
                }
            }
            Realization::Af(AfRealization {
                signal,
                noise_power,
                relay_power,
                survivors,
            })
        }
        SimStrategy::Df => {
            let mut survivors = Vec::with_capacity(cfg.n_relays);
            for i in 0..cfg.n_relays {
                let s = position(rng, i);
                let alive = rng.random::<f64>() >= p;
                let h_s = complex_normal(rng);
                let h_d = complex_normal(rng);
                if alive {
                    let rho = g.gains(&s);
                    survivors.push(DfRelay {
                        position: s,
                        decode_rate: capacity(a * g0 * rho.source * h_s.norm_sqr()),
                        amplitude: (relay_share * rho.dest).sqrt() * h_d,
                    });
                }
            }
            Realization::Df(DfRealization { survivors })
        }
    }
}

/// One trial drawn from a caller-owned stream. Honors
/// `resample_positions`; the fixed placement comes from the run seed.
pub fn run_trial_realization(cfg: &TrialConfig, stream: &mut TrialRng) -> Realization {
    let placement = cfg.placement();
    simulate(cfg, placement.as_deref(), stream)
}

fn run_trial_as(cfg: &TrialConfig, strategy: SimStrategy, stream: &mut TrialRng) -> bool {
    if cfg.strategy == strategy {
        run_trial_realization(cfg, stream).is_outage(cfg.target_rate)
    } else {
        let cfg = TrialConfig {
            strategy,
            ..cfg.clone()
        };
        run_trial_realization(&cfg, stream).is_outage(cfg.target_rate)
    }
}

/// Outage flag of one cut-set trial: every surviving relay forwards.
pub fn run_trial_mac(cfg: &TrialConfig, stream: &mut TrialRng) -> bool {
    run_trial_as(cfg, SimStrategy::Mac, stream)
}

/// Outage flag of one amplify-and-forward trial.
pub fn run_trial_af(cfg: &TrialConfig, stream: &mut TrialRng) -> bool {
    run_trial_as(cfg, SimStrategy::Af, stream)
}

/// Outage flag of one decode-and-forward trial.
pub fn run_trial_df(cfg: &TrialConfig, stream: &mut TrialRng) -> bool {
    run_trial_as(cfg, SimStrategy::Df, stream)
}

/// Realization of trial `index` of the run described by `cfg`.
pub fn simulate_trial(cfg: &TrialConfig, index: u64) -> Realization {
    run_trial_realization(cfg, &mut trial_stream(cfg.seed, index))
}

/// Runs every trial once and reduces `per_trial` over them. `per_trial`
/// gets the trial index and its realization; `combine` must be associative
/// and commutative for the result to be schedule independent.
pub fn fold_trials<T, F, C>(cfg: &TrialConfig, identity: T, per_trial: F, combine: C) -> T
where
    T: Clone + Send + Sync,
    F: Fn(T, u64, &Realization) -> T + Send + Sync,
    C: Fn(T, T) -> T + Send + Sync,
{
    let placement = cfg.placement();
    (0..cfg.trials)
        .into_par_iter()
        .fold(
            || identity.clone(),
            |acc, i| {
                let mut rng = trial_stream(cfg.seed, i);
                let r = simulate(cfg, placement.as_deref(), &mut rng);
                per_trial(acc, i, &r)
            },
        )
        .reduce(|| identity.clone(), &combine)
}

/// Outage frequencies at several target rates from the same trials.
/// `cfg.target_rate` is ignored.
pub fn estimate_outage_curve(cfg: &TrialConfig, rates: &[f64]) -> Result<Vec<OutageEstimate>> {
    cfg.validate()?;
    for &r in rates {
        check_range("target_rate", r, r >= 0.0 && r.is_finite(), "target_rate >= 0")?;
    }
    let counts = fold_trials(
        cfg,
        vec![0u64; rates.len()],
        |mut acc, _, r| {
            for (c, &rate) in acc.iter_mut().zip(rates) {
                *c += r.is_outage(rate) as u64;
            }
            acc
        },
        |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        },
    );
    Ok(counts
        .into_iter()
        .map(|c| OutageEstimate::from_counts(c, cfg.trials, cfg.seed))
        .collect())
}

pub fn estimate_outage(cfg: &TrialConfig) -> Result<OutageEstimate> {
    Ok(estimate_outage_curve(cfg, &[cfg.target_rate])?[0])
}

/// Outage probability of the equivalent Rayleigh channel for `strategy`,
/// the N → ∞ prediction the simulation is checked against.
pub fn asymptotic_outage(
    strategy: SimStrategy,
    params: &SystemParams,
    g: &NetworkGeometry,
    rate: f64,
) -> Result<f64> {
    match strategy {
        SimStrategy::Mac => {
            let m = TopologyMoments::compute(g)?;
            Ok(rayleigh_outage_prob(mac_received_snr(params, &m), rate))
        }
        SimStrategy::Af => Ok(rayleigh_outage_prob(af_received_snr(params, g)?, rate)),
        SimStrategy::Df => df_outage_prob(rate, params, g),
    }
}

/// Histogram along x of the positions of DF relays that forward at `rate`,
/// over bins delimited by the increasing `edges`. Positions outside the
/// edges are dropped.
pub fn df_forwarding_histogram(cfg: &TrialConfig, rate: f64, edges: &[f64]) -> Result<Vec<u64>> {
    cfg.validate()?;
    let bins = edges.len().saturating_sub(1);
    Ok(fold_trials(
        cfg,
        vec![0u64; bins],
        |mut acc, _, r| {
            if let Realization::Df(df) = r {
                for relay in df.forwarding(rate) {
                    let x = relay.position.x;
                    let k = edges.partition_point(|&e| e <= x);
                    if k >= 1 && k <= bins {
                        acc[k - 1] += 1;
                    } else if bins > 0 && x == edges[bins] {
                        acc[bins - 1] += 1;
                    }
                }
            }
            acc
        },
        |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        },
    ))
}
