//! Closed-form asymptotic rates of the large relay network.
//!
//! Every strategy reduces, as the number of relays grows, to a Rayleigh
//! fading channel with some average received SNR γ. Its ε-outage rate is
//! `½·log2(1 + γ·ln(1/(1−ε)))`. Rates are in bits per channel use; all SNRs
//! are linear with the noise power normalized to one.

use std::cell::Cell;
use std::f64::consts::LN_2;
use std::fmt;

use crate::error::{check_range, Error, Result};
use crate::search::bisect_increasing;
use crate::topology::{NetworkGeometry, Point, TopologyMoments};

const DF_RATE_TOL: f64 = 1e-10;
const MAX_DOUBLINGS: u32 = 200;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// `ln(1/(1−ε))`, the Rayleigh fading quantile at outage level ε.
pub fn outage_quantile(epsilon: f64) -> f64 {
    -(-epsilon).ln_1p()
}

/// ε-outage rate of a Rayleigh channel with average SNR `snr`.
pub fn rayleigh_outage_rate(snr: f64, epsilon: f64) -> f64 {
    0.5 * (snr * outage_quantile(epsilon)).ln_1p() / LN_2
}

/// Outage probability of a Rayleigh channel with average SNR `snr` at `rate`.
pub fn rayleigh_outage_prob(snr: f64, rate: f64) -> f64 {
    let x = snr_threshold(rate);
    if x == 0.0 {
        0.0
    } else if snr <= 0.0 {
        1.0
    } else {
        -(-x / snr).exp_m1()
    }
}

/// `2^{2R} − 1`, the SNR needed to support `rate`.
pub fn snr_threshold(rate: f64) -> f64 {
    (2.0 * rate * LN_2).exp_m1()
}

/// `(2^{2R} − 1)/(ε·γ0)`.
pub fn normalized_rate(rate: f64, params: &SystemParams) -> f64 {
    snr_threshold(rate) / (params.epsilon * params.gamma0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    gamma0: f64,
    p: f64,
    alpha: f64,
    epsilon: f64,
}

impl SystemParams {
    /// `gamma0`: transmit SNR P/N0 (linear); `p`: attack probability;
    /// `alpha`: source power fraction; `epsilon`: outage target.
    pub fn new(gamma0: f64, p: f64, alpha: f64, epsilon: f64) -> Result<Self> {
        check_range("gamma0", gamma0, gamma0 > 0.0 && gamma0.is_finite(), "gamma0 > 0")?;
        check_range("p", p, (0.0..=1.0).contains(&p), "0 <= p <= 1")?;
        check_range("alpha", alpha, (0.0..1.0).contains(&alpha), "0 <= alpha < 1")?;
        check_range(
            "epsilon",
            epsilon,
            epsilon > 0.0 && epsilon < 1.0,
            "0 < epsilon < 1",
        )?;
        Ok(Self {
            gamma0,
            p,
            alpha,
            epsilon,
        })
    }

    pub fn from_db(gamma0_db: f64, p: f64, alpha: f64, epsilon: f64) -> Result<Self> {
        Self::new(db_to_linear(gamma0_db), p, alpha, epsilon)
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn with_gamma0(self, gamma0: f64) -> Result<Self> {
        Self::new(gamma0, self.p, self.alpha, self.epsilon)
    }
    pub fn with_p(self, p: f64) -> Result<Self> {
        Self::new(self.gamma0, p, self.alpha, self.epsilon)
    }
    pub fn with_alpha(self, alpha: f64) -> Result<Self> {
        Self::new(self.gamma0, self.p, alpha, self.epsilon)
    }
    pub fn with_epsilon(self, epsilon: f64) -> Result<Self> {
        Self::new(self.gamma0, self.p, self.alpha, epsilon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    MacUpper,
    Af,
    DfExact,
    DfApprox,
}

impl Strategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::MacUpper => "MAC_UPPER",
            Strategy::Af => "AF",
            Strategy::DfExact => "DF_EXACT",
            Strategy::DfApprox => "DF_APPROX",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Whether the small-ε decode linearization stayed inside [0, 1] everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Nominal,
    /// `1 − (2^{2R}−1)/(αγ0ρ_Si)` fell below zero somewhere in the region.
    DecodeLinearizationClamped,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Nominal => "NOMINAL",
            Regime::DecodeLinearizationClamped => "LINEARIZATION_CLAMPED",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResult {
    pub strategy: Strategy,
    /// bits per channel use
    pub rate: f64,
    pub alpha_used: f64,
    /// Average SNR of the equivalent Rayleigh channel.
    pub received_snr: f64,
    pub regime: Regime,
}

/// Low/high transmit-SNR helper formulas. The caller picks the regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnrRegime {
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateLoss {
    /// R0 − R in bits.
    pub bits: f64,
    /// 1 − R/R0.
    pub fraction: f64,
}

impl RateLoss {
    const NONE: RateLoss = RateLoss {
        bits: 0.0,
        fraction: 0.0,
    };
}

// ---------------------------------------------------------------------------
// MAC cut-set bound

/// γ_upper = (1−p)(1−α)·γ0·E(ρ_iD).
pub fn mac_received_snr(params: &SystemParams, m: &TopologyMoments) -> f64 {
    (1.0 - params.p) * (1.0 - params.alpha) * params.gamma0 * m.e_rho_d
}

pub fn mac_upper_bound(params: &SystemParams, m: &TopologyMoments) -> RateResult {
    let snr = mac_received_snr(params, m);
    RateResult {
        strategy: Strategy::MacUpper,
        rate: rayleigh_outage_rate(snr, params.epsilon),
        alpha_used: params.alpha,
        received_snr: snr,
        regime: Regime::Nominal,
    }
}

// ---------------------------------------------------------------------------
// Amplify-and-forward

/// The signal and forwarded-noise integrals `(𝒜, ℬ)`:
/// 𝒜 = E[γ_Si·γ_iD/(1+γ_Si)], ℬ = E[γ_iD/(1+γ_Si)].
pub fn af_integrals(params: &SystemParams, g: &NetworkGeometry) -> Result<(f64, f64)> {
    let (a, g0) = (params.alpha, params.gamma0);
    let signal = g.expect(|r| {
        let gs = a * g0 * r.source;
        let gd = (1.0 - a) * g0 * r.dest;
        gs * gd / (1.0 + gs)
    })?;
    let noise = g.expect(|r| {
        let gs = a * g0 * r.source;
        (1.0 - a) * g0 * r.dest / (1.0 + gs)
    })?;
    Ok((signal, noise))
}

/// γ_AF = (1−p)𝒜 / (1 + (1−p)ℬ).
pub fn af_received_snr(params: &SystemParams, g: &NetworkGeometry) -> Result<f64> {
    if params.p == 1.0 || params.alpha == 0.0 {
        return Ok(0.0);
    }
    let (signal, noise) = af_integrals(params, g)?;
    let s = 1.0 - params.p;
    Ok(s * signal / (1.0 + s * noise))
}

/// High-SNR form of γ_AF, with 1+γ_Si replaced by γ_Si.
pub fn af_received_snr_high(params: &SystemParams, m: &TopologyMoments) -> f64 {
    let (p, a) = (params.p, params.alpha);
    if a == 0.0 {
        return 0.0;
    }
    (1.0 - p) * (1.0 - a) * params.gamma0 * m.e_rho_d
        / (1.0 + (1.0 - p) * (1.0 - a) / a * m.e_ratio)
}

pub fn af_outage_rate(params: &SystemParams, g: &NetworkGeometry) -> Result<RateResult> {
    let snr = af_received_snr(params, g)?;
    Ok(RateResult {
        strategy: Strategy::Af,
        rate: rayleigh_outage_rate(snr, params.epsilon),
        alpha_used: params.alpha,
        received_snr: snr,
        regime: Regime::Nominal,
    })
}

/// Constant high-SNR gap between the α = 0 cut-set bound and the AF rate:
/// `½·log2(1/(1−α) + ((1−p)/α)·E(ρ_iD/ρ_Si))`. Independent of γ0.
pub fn af_high_snr_gap(params: &SystemParams, m: &TopologyMoments) -> Result<f64> {
    let (p, a) = (params.p, params.alpha);
    if a == 0.0 {
        return Err(Error::ZeroAlpha("AF high-SNR gap"));
    }
    Ok(0.5 * (1.0 / (1.0 - a) + (1.0 - p) / a * m.e_ratio).log2())
}

pub fn af_rate_loss(params: &SystemParams, m: &TopologyMoments, regime: SnrRegime) -> Result<RateLoss> {
    let (p, a, g0) = (params.p, params.alpha, params.gamma0);
    match regime {
        SnrRegime::Low => {
            if p == 0.0 {
                return Ok(RateLoss::NONE);
            }
            // R ≈ (1−p)·R0 with R0 = ½·E(γ_Si γ_iD)·ln(1/(1−ε)), in bits.
            let r0 = 0.5 * a * (1.0 - a) * g0 * g0 * m.e_product * outage_quantile(params.epsilon)
                / LN_2;
            Ok(RateLoss {
                bits: p * r0,
                fraction: p,
            })
        }
        SnrRegime::High => {
            if p == 1.0 {
                return Err(Error::UnboundedLoss);
            }
            if a == 0.0 {
                return Err(Error::ZeroAlpha("AF high-SNR rate loss"));
            }
            if p == 0.0 {
                return Ok(RateLoss::NONE);
            }
            let k = (1.0 - a) / a * m.e_ratio;
            let c1 = 0.5 * ((1.0 + k) / (1.0 + (1.0 - p) * k)).log2();
            let bits = attack_loss_bound(p) - c1;
            let r0 = 0.5
                * ((1.0 - a) * g0 * m.e_rho_d * outage_quantile(params.epsilon) / (1.0 + k)).log2();
            if !(r0 > 0.0) {
                return Err(Error::OutsideRegime(r0));
            }
            Ok(RateLoss {
                bits,
                fraction: bits / r0,
            })
        }
    }
}

/// `½·log2(1/(1−p))`, the attack-induced loss bound at high SNR.
pub fn attack_loss_bound(p: f64) -> f64 {
    -0.5 * (-p).ln_1p() / LN_2
}

/// `R_AF/(ε·γ0)`, which vanishes as γ0 and ε go to zero together.
pub fn af_low_snr_ratio(params: &SystemParams, g: &NetworkGeometry) -> Result<f64> {
    if params.p == 1.0 {
        return Ok(0.0);
    }
    let r = af_outage_rate(params, g)?;
    Ok(r.rate / (params.epsilon * params.gamma0))
}

// ---------------------------------------------------------------------------
// Decode-and-forward

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeMode {
    /// `exp(−(2^{2R}−1)/(αγ0ρ_Si))`
    Exact,
    /// `1 − (2^{2R}−1)/(αγ0ρ_Si)`, clamped to [0, 1]
    Approx,
}

/// Decode probability of a relay with source gain `rho_s`.
pub fn df_decode_prob_at_gain(rho_s: f64, rate: f64, params: &SystemParams, mode: DecodeMode) -> f64 {
    if params.alpha == 0.0 {
        return 0.0;
    }
    let x = snr_threshold(rate) / (params.alpha * params.gamma0 * rho_s);
    match mode {
        DecodeMode::Exact => (-x).exp(),
        DecodeMode::Approx => (1.0 - x).clamp(0.0, 1.0),
    }
}

/// Probability that a relay at `s` decodes a codeword of rate `rate`.
pub fn df_decode_prob(
    s: &Point,
    rate: f64,
    params: &SystemParams,
    g: &NetworkGeometry,
    mode: DecodeMode,
) -> f64 {
    df_decode_prob_at_gain(g.gains(s).source, rate, params, mode)
}

/// Average decode probability `p0 = E[p0(s)]`.
pub fn df_success_prob(rate: f64, params: &SystemParams, g: &NetworkGeometry) -> Result<f64> {
    g.expect(|r| df_decode_prob_at_gain(r.source, rate, params, DecodeMode::Exact))
}

/// Density of the location of a relay given that it decoded:
/// `f(s) = p(s)·p0(s)/p0`.
pub fn df_survivor_pdf(s: &Point, rate: f64, params: &SystemParams, g: &NetworkGeometry) -> Result<f64> {
    let p0 = df_success_prob(rate, params, g)?;
    if !(p0 > 0.0) {
        return Err(Error::NoDecoding { rate });
    }
    Ok(g.density(s) * df_decode_prob(s, rate, params, g, DecodeMode::Exact) / p0)
}

/// γ_DF(R) = (1−p)(1−α)γ0·∫ρ_iD p(s) p0(s) ds, with the decode probability
/// evaluated in the given mode.
pub fn df_received_snr_with(
    rate: f64,
    params: &SystemParams,
    g: &NetworkGeometry,
    mode: DecodeMode,
) -> Result<f64> {
    let (p, a) = (params.p, params.alpha);
    if p == 1.0 || a == 0.0 {
        return Ok(0.0);
    }
    let integral = g.expect(|r| r.dest * df_decode_prob_at_gain(r.source, rate, params, mode))?;
    Ok((1.0 - p) * (1.0 - a) * params.gamma0 * integral)
}

pub fn df_received_snr(rate: f64, params: &SystemParams, g: &NetworkGeometry) -> Result<f64> {
    df_received_snr_with(rate, params, g, DecodeMode::Exact)
}

/// p_DF(R) = 1 − exp(−(2^{2R}−1)/γ_DF(R)).
pub fn df_outage_prob(rate: f64, params: &SystemParams, g: &NetworkGeometry) -> Result<f64> {
    check_range("rate", rate, rate >= 0.0, "rate >= 0")?;
    if rate == 0.0 {
        return Ok(0.0);
    }
    let snr = df_received_snr(rate, params, g)?;
    Ok(rayleigh_outage_prob(snr, rate))
}

/// Largest R with p_DF(R) ≤ ε, by bisection on the monotone outage curve.
pub fn df_outage_rate_exact(params: &SystemParams, g: &NetworkGeometry) -> Result<RateResult> {
    let eps = params.epsilon;
    let empty = RateResult {
        strategy: Strategy::DfExact,
        rate: 0.0,
        alpha_used: params.alpha,
        received_snr: 0.0,
        regime: Regime::Nominal,
    };
    if params.p == 1.0 || params.alpha == 0.0 {
        return Ok(empty);
    }

    let failure = Cell::new(None);
    let excess = |r: f64| match df_outage_prob(r, params, g) {
        Ok(v) => v - eps,
        Err(e) => {
            failure.set(Some(e));
            f64::NAN
        }
    };

    let mut hi = 1.0;
    let mut doublings = 0;
    loop {
        let e = excess(hi);
        if e > 0.0 {
            break;
        }
        if e.is_nan() || doublings == MAX_DOUBLINGS {
            return Err(failure.take().unwrap_or(Error::NoBracket { doublings }));
        }
        hi *= 2.0;
        doublings += 1;
    }
    let rate = bisect_increasing(excess, 0.0, hi, DF_RATE_TOL);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(RateResult {
        rate,
        received_snr: df_received_snr(rate, params, g)?,
        ..empty
    })
}

/// Small-ε closed form:
/// `½·log2(1 + (1−p)(1−α)γ0E(ρ_iD)ε / (1 + ε(1−p)((1−α)/α)E(ρ_iD/ρ_Si)))`.
///
/// `received_snr` is the equivalent γ_DF = (2^{2R}−1)/ε implied by the
/// linearized outage `p_DF ≈ (2^{2R}−1)/γ_DF`.
pub fn df_outage_rate_approx(params: &SystemParams, m: &TopologyMoments) -> Result<RateResult> {
    let (p, a, eps) = (params.p, params.alpha, params.epsilon);
    if a == 0.0 {
        return Err(Error::ZeroAlpha("approximate DF rate"));
    }
    let threshold = (1.0 - p) * (1.0 - a) * params.gamma0 * m.e_rho_d * eps
        / (1.0 + eps * (1.0 - p) * (1.0 - a) / a * m.e_ratio);
    let rate = 0.5 * threshold.ln_1p() / LN_2;
    let worst = threshold / (a * params.gamma0 * m.rho_s_floor);
    Ok(RateResult {
        strategy: Strategy::DfApprox,
        rate,
        alpha_used: a,
        received_snr: threshold / eps,
        regime: if worst > 1.0 {
            Regime::DecodeLinearizationClamped
        } else {
            Regime::Nominal
        },
    })
}

pub fn df_rate_loss(params: &SystemParams, m: &TopologyMoments, regime: SnrRegime) -> Result<RateLoss> {
    let (p, a, eps, g0) = (params.p, params.alpha, params.epsilon, params.gamma0);
    if regime == SnrRegime::High && p == 1.0 {
        return Err(Error::UnboundedLoss);
    }
    if p == 0.0 {
        return Ok(RateLoss::NONE);
    }
    if a == 0.0 {
        return Err(Error::ZeroAlpha("DF rate loss"));
    }
    let k = (1.0 - a) / a * m.e_ratio;
    match regime {
        SnrRegime::Low => {
            let fraction = 1.0 - (1.0 - p) * (1.0 + eps * k) / (1.0 + (1.0 - p) * eps * k);
            let r0 = 0.5 * (1.0 - a) * g0 * m.e_rho_d * eps / (1.0 + eps * k) / LN_2;
            Ok(RateLoss {
                bits: fraction * r0,
                fraction,
            })
        }
        SnrRegime::High => {
            let c2 = 0.5 * ((1.0 + eps * k) / (1.0 + eps * (1.0 - p) * k)).log2();
            let bits = attack_loss_bound(p) - c2;
            let r0 = 0.5 * ((1.0 - a) * g0 * m.e_rho_d * eps / (1.0 + eps * k)).log2();
            if !(r0 > 0.0) {
                return Err(Error::OutsideRegime(r0));
            }
            Ok(RateLoss {
                bits,
                fraction: bits / r0,
            })
        }
    }
}

/// Common ε → 0 limit of `(2^{2C}−1)/(εγ0)` for the cut-set bound and DF:
/// `(1−p)(1−α)E(ρ_iD)`.
pub fn df_asymptotic_ratio(params: &SystemParams, m: &TopologyMoments) -> f64 {
    (1.0 - params.p) * (1.0 - params.alpha) * m.e_rho_d
}
