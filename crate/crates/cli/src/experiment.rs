//! Preset sweeps and single-shot tables.

use rayon::prelude::*;
use relaycap::analytic::{
    af_outage_rate, af_received_snr_high, df_outage_rate_approx, df_outage_rate_exact,
    mac_upper_bound,
};
use relaycap::montecarlo::{asymptotic_outage, estimate_outage_curve, SimStrategy, TrialConfig};
use relaycap::poweralloc::{af_alpha_high_snr, af_alpha_low_snr, df_alpha_result, optimize_af_alpha};
use relaycap::topology::{NetworkGeometry, Region, TopologyMoments};
use relaycap::SystemParams;
use thiserror::Error;

use crate::config::{AlphaPolicy, Config, Preset};
use crate::output::{Cell, Table};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{context}: {source}")]
pub struct ExperimentError {
    pub context: String,
    pub source: relaycap::Error,
}

type Result<T> = std::result::Result<T, ExperimentError>;

trait Context<T> {
    fn at(self, context: impl FnOnce() -> String) -> Result<T>;
}

impl<T> Context<T> for relaycap::Result<T> {
    fn at(self, context: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|source| ExperimentError {
            context: context(),
            source,
        })
    }
}

pub const FIG2_COLUMNS: &[&str] = &["gamma0_db", "epsilon", "r_df_exact", "r_df_approx"];
pub const FIG3_COLUMNS: &[&str] = &[
    "strategy",
    "n_relays",
    "target_rate",
    "outage_mc",
    "ci95",
    "outage_gauss",
];
pub const FIG4_COLUMNS: &[&str] = &[
    "gamma0_db", "epsilon", "c_upper", "r_af_opt", "alpha_af", "r_df_opt", "alpha_df",
];
pub const FIG5_COLUMNS: &[&str] = &[
    "gamma0_db",
    "p",
    "strategy",
    "rate",
    "rate_p0",
    "loss_bits",
    "loss_fraction",
];
pub const CUSTOM_COLUMNS: &[&str] = &[
    "gamma0_db",
    "epsilon",
    "p",
    "c_upper",
    "alpha_af",
    "r_af",
    "alpha_df",
    "r_df_exact",
    "r_df_approx",
];

fn params(db: f64, p: f64, alpha: f64, eps: f64) -> Result<SystemParams> {
    SystemParams::from_db(db, p, alpha, eps).at(|| format!("gamma0_db={db} p={p} alpha={alpha} epsilon={eps}"))
}

fn join(xs: &[impl ToString]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
}

pub fn describe_geometry(g: &NetworkGeometry) -> String {
    let region = match g.region() {
        Region::Interval { min, max } => format!("[{min}, {max}]"),
        Region::Rectangle { min, max } => format!("[{}, {}]x[{}, {}]", min.x, max.x, min.y, max.y),
    };
    let (s, d) = (g.source(), g.dest());
    format!(
        "source=({}, {}) dest=({}, {}) region={region} theta={} s0={}",
        s.x,
        s.y,
        d.x,
        d.y,
        g.theta(),
        g.s0()
    )
}

fn base_table(cfg: &Config, columns: &[&'static str], command: &str) -> Table {
    let mut t = Table::new(columns);
    t.note("tool", concat!("relaycap ", env!("CARGO_PKG_VERSION")));
    t.note("command", command);
    t.note("seed", cfg.experiment.seed);
    t.note("geometry", describe_geometry(&cfg.geometry));
    t
}

fn note_system(t: &mut Table, cfg: &Config) {
    let sp = &cfg.params;
    t.note(
        "system",
        format!(
            "gamma0_db={} p={} alpha={} epsilon={}",
            cfg.gamma0_db,
            sp.p(),
            sp.alpha(),
            sp.epsilon()
        ),
    );
}

fn note_sweep(t: &mut Table, cfg: &Config) {
    let s = cfg.experiment.gamma0_db;
    t.note("sweep", format!("gamma0_db={}:{}:{}", s.start, s.step, s.stop));
}

/// Runs the preset in `cfg.experiment`.
pub fn run_experiment(cfg: &Config) -> Result<Table> {
    match cfg.experiment.preset {
        Preset::Fig2 => fig2(cfg),
        Preset::Fig3 => fig3(cfg),
        Preset::Fig4 => fig4(cfg),
        Preset::Fig5 => fig5(cfg),
        Preset::Custom => custom(cfg),
    }
}

fn preset_table(cfg: &Config, columns: &[&'static str]) -> Table {
    let mut t = base_table(cfg, columns, "reproduce");
    t.note("preset", cfg.experiment.preset);
    t
}

/// Sweep rows computed in parallel and kept in the sweep's own order.
fn sweep<P: Sync, F>(points: &[P], f: F) -> Result<Vec<Vec<Cell>>>
where
    F: Fn(&P) -> Result<Vec<Vec<Cell>>> + Sync + Send,
{
    let chunks: Vec<Vec<Vec<Cell>>> = points.par_iter().map(f).collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

fn grid<A: Copy, B: Copy>(a: &[A], b: &[B]) -> Vec<(A, B)> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
}

fn fig2(cfg: &Config) -> Result<Table> {
    let e = &cfg.experiment;
    let (p, alpha) = (cfg.params.p(), cfg.params.alpha());
    let mut t = preset_table(cfg, FIG2_COLUMNS);
    note_sweep(&mut t, cfg);
    t.note("fillers", format!("p={p} alpha={alpha} epsilons={}", join(&e.epsilons)));
    let m = TopologyMoments::compute(&cfg.geometry).at(|| "topology moments".into())?;
    t.rows = sweep(&grid(&e.gamma0_db.points(), &e.epsilons), |&(db, eps)| {
        let sp = params(db, p, alpha, eps)?;
        let ctx = || format!("gamma0_db={db} epsilon={eps}");
        let exact = df_outage_rate_exact(&sp, &cfg.geometry).at(ctx)?;
        let approx = df_outage_rate_approx(&sp, &m).at(ctx)?;
        Ok(vec![vec![db.into(), eps.into(), exact.rate.into(), approx.rate.into()]])
    })?;
    Ok(t)
}

fn fig3(cfg: &Config) -> Result<Table> {
    let e = &cfg.experiment;
    let sp = cfg.params;
    let mut t = preset_table(cfg, FIG3_COLUMNS);
    t.note("trials", e.trials);
    note_system(&mut t, cfg);
    t.note(
        "fillers",
        format!(
            "n_relays={} rates={} resample_positions={}",
            join(&e.n_relays),
            join(&e.rates),
            cfg.sim.resample_positions
        ),
    );
    for strategy in SimStrategy::ALL {
        let gauss: Vec<f64> = e
            .rates
            .iter()
            .map(|&r| asymptotic_outage(strategy, &sp, &cfg.geometry, r))
            .collect::<relaycap::Result<_>>()
            .at(|| format!("{strategy} closed-form outage"))?;
        for &n in &e.n_relays {
            let tc = TrialConfig {
                trials: e.trials,
                seed: e.seed,
                resample_positions: cfg.sim.resample_positions,
                ..TrialConfig::new(strategy, n, sp, cfg.geometry.clone())
            };
            let est = estimate_outage_curve(&tc, &e.rates).at(|| format!("{strategy} N={n}"))?;
            for ((&rate, mc), g) in e.rates.iter().zip(est).zip(&gauss) {
                t.rows.push(vec![
                    strategy.as_str().into(),
                    n.into(),
                    rate.into(),
                    mc.outage_freq.into(),
                    mc.ci95_halfwidth.into(),
                    (*g).into(),
                ]);
            }
        }
    }
    Ok(t)
}

/// The cut-set bound with the whole budget on the relays.
fn cut_set(sp: &SystemParams, m: &TopologyMoments) -> Result<f64> {
    Ok(mac_upper_bound(&sp.with_alpha(0.0).at(|| "alpha=0".into())?, m).rate)
}

fn fig4(cfg: &Config) -> Result<Table> {
    let e = &cfg.experiment;
    let p = cfg.params.p();
    let mut t = preset_table(cfg, FIG4_COLUMNS);
    note_sweep(&mut t, cfg);
    t.note("fillers", format!("p={p} epsilons={} alpha=optimal", join(&e.epsilons)));
    let m = TopologyMoments::compute(&cfg.geometry).at(|| "topology moments".into())?;
    t.rows = sweep(&grid(&e.gamma0_db.points(), &e.epsilons), |&(db, eps)| {
        let sp = params(db, p, 0.5, eps)?;
        let ctx = || format!("gamma0_db={db} epsilon={eps}");
        let af = optimize_af_alpha(&sp, &cfg.geometry).at(ctx)?;
        let r_af = af_outage_rate(&sp.with_alpha(af.alpha_opt).at(ctx)?, &cfg.geometry).at(ctx)?;
        let df = df_alpha_result(&sp, &m).at(ctx)?;
        Ok(vec![vec![
            db.into(),
            eps.into(),
            cut_set(&sp, &m)?.into(),
            r_af.rate.into(),
            af.alpha_opt.into(),
            df.objective_value.into(),
            df.alpha_opt.into(),
        ]])
    })?;
    Ok(t)
}

fn fig5(cfg: &Config) -> Result<Table> {
    let e = &cfg.experiment;
    let (alpha, eps) = (cfg.params.alpha(), cfg.params.epsilon());
    let mut t = preset_table(cfg, FIG5_COLUMNS);
    note_sweep(&mut t, cfg);
    t.note("fillers", format!("alpha={alpha} epsilon={eps} ps={}", join(&e.ps)));
    let m = TopologyMoments::compute(&cfg.geometry).at(|| "topology moments".into())?;
    t.rows = sweep(&grid(&e.gamma0_db.points(), &e.ps), |&(db, p)| {
        let ctx = || format!("gamma0_db={db} p={p}");
        let attacked = params(db, p, alpha, eps)?;
        let clean = params(db, 0.0, alpha, eps)?;
        let af = |sp: &SystemParams| af_outage_rate(sp, &cfg.geometry).map(|r| r.rate).at(ctx);
        let df = |sp: &SystemParams| df_outage_rate_approx(sp, &m).map(|r| r.rate).at(ctx);
        let rows = [
            ("AF", af(&attacked)?, af(&clean)?),
            ("DF", df(&attacked)?, df(&clean)?),
        ];
        Ok(rows
            .into_iter()
            .map(|(name, rate, rate0)| {
                let loss = rate0 - rate;
                vec![
                    db.into(),
                    p.into(),
                    name.into(),
                    rate.into(),
                    rate0.into(),
                    loss.into(),
                    (loss / rate0).into(),
                ]
            })
            .collect())
    })?;
    Ok(t)
}

fn custom(cfg: &Config) -> Result<Table> {
    let e = &cfg.experiment;
    let mut t = preset_table(cfg, CUSTOM_COLUMNS);
    note_sweep(&mut t, cfg);
    t.note(
        "fillers",
        format!("epsilons={} ps={} alpha={}", join(&e.epsilons), join(&e.ps), e.alpha),
    );
    let m = TopologyMoments::compute(&cfg.geometry).at(|| "topology moments".into())?;
    let points: Vec<(f64, (f64, f64))> = grid(&e.gamma0_db.points(), &grid(&e.epsilons, &e.ps));
    t.rows = sweep(&points, |&(db, (eps, p))| {
        let ctx = || format!("gamma0_db={db} epsilon={eps} p={p}");
        let sp = params(db, p, 0.5, eps)?;
        let (alpha_af, alpha_df) = match e.alpha {
            AlphaPolicy::Fixed(a) => (a, a),
            AlphaPolicy::Optimal => (
                optimize_af_alpha(&sp, &cfg.geometry).at(ctx)?.alpha_opt,
                df_alpha_result(&sp, &m).at(ctx)?.alpha_opt,
            ),
        };
        let af_params = sp.with_alpha(alpha_af).at(ctx)?;
        let df_params = sp.with_alpha(alpha_df).at(ctx)?;
        Ok(vec![vec![
            db.into(),
            eps.into(),
            p.into(),
            cut_set(&sp, &m)?.into(),
            alpha_af.into(),
            af_outage_rate(&af_params, &cfg.geometry).at(ctx)?.rate.into(),
            alpha_df.into(),
            df_outage_rate_exact(&df_params, &cfg.geometry).at(ctx)?.rate.into(),
            df_outage_rate_approx(&df_params, &m).at(ctx)?.rate.into(),
        ]])
    })?;
    Ok(t)
}

/// Every strategy's rate at the configured operating point.
pub fn rates_table(cfg: &Config) -> Result<Table> {
    let mut t = base_table(
        cfg,
        &["strategy", "rate", "alpha", "received_snr", "regime"],
        "rates",
    );
    note_system(&mut t, cfg);
    let sp = &cfg.params;
    let g = &cfg.geometry;
    let m = TopologyMoments::compute(g).at(|| "topology moments".into())?;
    let results = [
        Ok(mac_upper_bound(sp, &m)),
        af_outage_rate(sp, g),
        df_outage_rate_exact(sp, g),
        df_outage_rate_approx(sp, &m),
    ];
    for r in results {
        let r = r.at(|| "rates".into())?;
        t.rows.push(vec![
            r.strategy.as_str().into(),
            r.rate.into(),
            r.alpha_used.into(),
            r.received_snr.into(),
            r.regime.as_str().into(),
        ]);
    }
    Ok(t)
}

/// Optimal power splits at the configured operating point.
pub fn alpha_table(cfg: &Config) -> Result<Table> {
    let mut t = base_table(
        cfg,
        &["strategy", "method", "alpha_opt", "objective_value", "iterations", "degenerate"],
        "alpha",
    );
    note_system(&mut t, cfg);
    let sp = &cfg.params;
    let g = &cfg.geometry;
    let m = TopologyMoments::compute(g).at(|| "topology moments".into())?;
    let mut push = |strategy: &str, r: relaycap::AlphaResult| {
        t.rows.push(vec![
            strategy.into(),
            r.method.as_str().into(),
            r.alpha_opt.into(),
            r.objective_value.into(),
            u64::from(r.iterations).into(),
            r.degenerate.into(),
        ]);
    };
    push("AF", optimize_af_alpha(sp, g).at(|| "AF golden section".into())?);
    if sp.p() < 1.0 {
        let a = af_alpha_high_snr(sp.p(), &m).at(|| "AF high SNR".into())?;
        let value = af_received_snr_high(&sp.with_alpha(a).at(|| "AF high SNR".into())?, &m);
        push(
            "AF",
            relaycap::AlphaResult {
                alpha_opt: a,
                objective_value: value,
                method: relaycap::poweralloc::AlphaMethod::ClosedFormHigh,
                iterations: 0,
                degenerate: false,
            },
        );
    }
    push("AF", af_alpha_low_snr(sp, &m));
    if sp.p() < 1.0 {
        push("DF", df_alpha_result(sp, &m).at(|| "DF closed form".into())?);
    }
    Ok(t)
}

/// One Monte Carlo estimate at the configured simulation point.
pub fn sim_table(cfg: &Config) -> Result<Table> {
    let s = &cfg.sim;
    let mut t = base_table(
        cfg,
        &[
            "strategy",
            "n_relays",
            "target_rate",
            "trials",
            "outage_mc",
            "ci95",
            "outage_gauss",
        ],
        "sim",
    );
    note_system(&mut t, cfg);
    t.note("resample_positions", s.resample_positions);
    let tc = TrialConfig {
        target_rate: s.target_rate,
        trials: s.trials,
        seed: s.seed,
        resample_positions: s.resample_positions,
        ..TrialConfig::new(s.strategy, s.n_relays, cfg.params, cfg.geometry.clone())
    };
    let ctx = || format!("{} N={} R={}", s.strategy, s.n_relays, s.target_rate);
    let est = estimate_outage_curve(&tc, &[s.target_rate]).at(ctx)?[0];
    let gauss = asymptotic_outage(s.strategy, &cfg.params, &cfg.geometry, s.target_rate).at(ctx)?;
    t.rows.push(vec![
        s.strategy.as_str().into(),
        s.n_relays.into(),
        s.target_rate.into(),
        s.trials.into(),
        est.outage_freq.into(),
        est.ci95_halfwidth.into(),
        gauss.into(),
    ]);
    Ok(t)
}
