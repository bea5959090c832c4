//! Source/relay power split α.
//!
//! γ_AF(α) = 𝒜/(1+ℬ) is a ratio of a positive concave function and a
//! positive convex one, hence quasiconcave, so a golden-section search on a
//! slightly shrunk unit interval finds the global maximum. The limiting
//! regimes and DF have closed forms.

use crate::analytic::{af_received_snr, df_outage_rate_approx, SystemParams};
use crate::error::{check_range, Result};
use crate::search::golden_section_max;
use crate::topology::{NetworkGeometry, TopologyMoments};

/// Distance of the search interval from α = 0 and α = 1.
pub const ALPHA_MARGIN: f64 = 1e-6;
pub const ALPHA_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaMethod {
    GoldenSection,
    ClosedFormLow,
    ClosedFormHigh,
    ClosedFormDf,
}

impl AlphaMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            AlphaMethod::GoldenSection => "GOLDEN_SECTION",
            AlphaMethod::ClosedFormLow => "CLOSED_FORM_LOW",
            AlphaMethod::ClosedFormHigh => "CLOSED_FORM_HIGH",
            AlphaMethod::ClosedFormDf => "CLOSED_FORM_DF",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaResult {
    pub alpha_opt: f64,
    /// γ_AF for AF methods, the small-ε DF rate in bits for DF.
    pub objective_value: f64,
    pub method: AlphaMethod,
    pub iterations: u32,
    /// The objective was identically zero (p = 1); α is arbitrary.
    pub degenerate: bool,
}

/// Maximizes γ_AF over α by golden-section search.
pub fn optimize_af_alpha(params: &SystemParams, g: &NetworkGeometry) -> Result<AlphaResult> {
    if params.p() == 1.0 {
        return Ok(AlphaResult {
            alpha_opt: 0.5,
            objective_value: 0.0,
            method: AlphaMethod::GoldenSection,
            iterations: 0,
            degenerate: true,
        });
    }
    let mut failure = None;
    let best = golden_section_max(
        |a| {
            let snr = params
                .with_alpha(a)
                .and_then(|p| af_received_snr(&p, g));
            match snr {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        ALPHA_MARGIN,
        1.0 - ALPHA_MARGIN,
        ALPHA_TOL,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(AlphaResult {
        alpha_opt: best.x,
        objective_value: best.value,
        method: AlphaMethod::GoldenSection,
        iterations: best.iterations,
        degenerate: false,
    })
}

/// Low-SNR optimum: γ_AF ≈ (1−p)·α(1−α)·γ0²·E(ρ_Si ρ_iD), maximized at ½.
pub fn af_alpha_low_snr(params: &SystemParams, m: &TopologyMoments) -> AlphaResult {
    let g0 = params.gamma0();
    AlphaResult {
        alpha_opt: 0.5,
        objective_value: (1.0 - params.p()) * 0.25 * g0 * g0 * m.e_product,
        method: AlphaMethod::ClosedFormLow,
        iterations: 0,
        degenerate: params.p() == 1.0,
    }
}

/// High-SNR optimum `√((1−p)E(ρ_iD/ρ_Si)) / (1 + √((1−p)E(ρ_iD/ρ_Si)))`.
pub fn af_alpha_high_snr(p: f64, m: &TopologyMoments) -> Result<f64> {
    check_range("p", p, (0.0..1.0).contains(&p), "0 <= p < 1")?;
    let q = ((1.0 - p) * m.e_ratio).sqrt();
    Ok(q / (1.0 + q))
}

/// DF optimum for the small-ε rate:
/// `√(ε(1−p)E(ρ_iD/ρ_Si)) / (1 + √(ε(1−p)E(ρ_iD/ρ_Si)))`.
pub fn df_alpha_opt(params: &SystemParams, m: &TopologyMoments) -> Result<f64> {
    let p = params.p();
    check_range("p", p, p < 1.0, "0 <= p < 1")?;
    let q = (params.epsilon() * (1.0 - p) * m.e_ratio).sqrt();
    Ok(q / (1.0 + q))
}

/// [`df_alpha_opt`] packaged with the rate it achieves.
pub fn df_alpha_result(params: &SystemParams, m: &TopologyMoments) -> Result<AlphaResult> {
    let alpha = df_alpha_opt(params, m)?;
    let rate = df_outage_rate_approx(&params.with_alpha(alpha)?, m)?.rate;
    Ok(AlphaResult {
        alpha_opt: alpha,
        objective_value: rate,
        method: AlphaMethod::ClosedFormDf,
        iterations: 0,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::af_received_snr_high;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(g0: f64, p: f64, e: f64) -> SystemParams {
        SystemParams::new(g0, p, 0.5, e).unwrap()
    }

    #[test]
    fn low_snr_optimum_is_half() {
        let g = NetworkGeometry::default_line();
        let r = optimize_af_alpha(&params(1e-3, 0.1, 0.1), &g).unwrap();
        assert!((r.alpha_opt - 0.5).abs() < 5e-3, "{}", r.alpha_opt);
        assert!(!r.degenerate);
    }

    #[test]
    fn high_snr_optimum_matches_closed_form() {
        let g = NetworkGeometry::default_line();
        let m = TopologyMoments::compute(&g).unwrap();
        let closed = af_alpha_high_snr(0.1, &m).unwrap();
        assert!((closed - 0.732_551_987_928_471_3).abs() < 1e-9);
        let r = optimize_af_alpha(&params(1e6, 0.1, 0.1), &g).unwrap();
        assert!((r.alpha_opt - closed).abs() < 1e-2);
    }

    #[test]
    fn optimum_beats_random_alphas() {
        let g = NetworkGeometry::default_line();
        let p = params(1000.0, 0.1, 0.1);
        let r = optimize_af_alpha(&p, &g).unwrap();
        assert!((r.alpha_opt - 0.722_609_592_613_312_9).abs() < 1e-5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for a in (0..50).map(|_| rng.random_range(1e-6..1.0 - 1e-6)).chain([0.01, 0.5, 0.99]) {
            let v = af_received_snr(&p.with_alpha(a).unwrap(), &g).unwrap();
            assert!(r.objective_value >= v);
        }
    }

    #[test]
    fn degenerate_when_all_relays_die() {
        let r = optimize_af_alpha(&params(1000.0, 1.0, 0.1), &NetworkGeometry::default_line()).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.alpha_opt, 0.5);
    }

    #[test]
    fn closed_forms() {
        let m = TopologyMoments {
            e_rho_d: 0.1,
            e_rho_s: 0.1,
            e_ratio: 2.0,
            e_product: 0.01,
            rho_s_floor: 0.01,
        };
        assert!((af_alpha_high_snr(0.5, &m).unwrap() - 0.5).abs() < 1e-15);
        assert!(af_alpha_high_snr(0.99, &m).unwrap() < af_alpha_high_snr(0.01, &m).unwrap());
        assert!(af_alpha_high_snr(1.0, &m).is_err());

        // ε(1−p)E = 0.5 · 0.5 · 4 = 1
        let p = SystemParams::new(10.0, 0.5, 0.5, 0.5).unwrap();
        let unit = TopologyMoments { e_ratio: 4.0, ..m };
        assert!((df_alpha_opt(&p, &unit).unwrap() - 0.5).abs() < 1e-15);

        let dm = TopologyMoments::compute(&NetworkGeometry::default_line()).unwrap();
        let a = df_alpha_opt(&params(1000.0, 0.1, 0.1), &dm).unwrap();
        assert!((a - 0.46415).abs() < 1e-5);
        let low = af_alpha_low_snr(&params(1e-3, 0.1, 0.1), &dm);
        assert_eq!(low.alpha_opt, 0.5);
        assert_eq!(low.method, AlphaMethod::ClosedFormLow);
    }

    #[test]
    fn df_closed_form_maximizes_grid() {
        let m = TopologyMoments::compute(&NetworkGeometry::default_line()).unwrap();
        let p = params(1000.0, 0.1, 0.1);
        let closed = df_alpha_opt(&p, &m).unwrap();
        let n = 10_000;
        let (best, _) = (1..n)
            .map(|k| k as f64 / n as f64)
            .map(|a| (a, df_outage_rate_approx(&p.with_alpha(a).unwrap(), &m).unwrap().rate))
            .fold((0.0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        assert!((best - closed).abs() < 1e-3);
    }

    #[test]
    fn high_snr_form_is_concave_in_alpha() {
        let m = TopologyMoments::compute(&NetworkGeometry::default_line()).unwrap();
        let p = params(1e4, 0.2, 0.1);
        let h = 1e-3;
        let f = |a: f64| af_received_snr_high(&p.with_alpha(a).unwrap(), &m);
        for k in 1..999 {
            let a = k as f64 * h;
            assert!(f(a - h) - 2.0 * f(a) + f(a + h) <= 1e-9 * f(a));
        }
    }
}
