use relaycap::analytic::{af_received_snr, SystemParams};
use relaycap::poweralloc::{af_alpha_high_snr, df_alpha_opt, optimize_af_alpha};
use relaycap::topology::{NetworkGeometry, TopologyMoments};

#[test]
fn af_snr_has_a_single_interior_peak() {
    let g = NetworkGeometry::default_line();
    for g0 in [1e-2, 1.0, 1e2, 1e4, 1e6] {
        for p in [0.0, 0.3, 0.9] {
            let sp = SystemParams::new(g0, p, 0.5, 0.1).unwrap();
            let v: Vec<f64> = (1..=200)
                .map(|k| k as f64 / 201.0)
                .map(|a| af_received_snr(&sp.with_alpha(a).unwrap(), &g).unwrap())
                .collect();
            let peaks = v
                .windows(3)
                .filter(|w| w[1] > w[0] && w[1] > w[2])
                .count();
            assert_eq!(peaks, 1, "gamma0 {g0}, p {p}");
        }
    }
}

#[test]
fn af_optimum_approaches_high_snr_closed_form() {
    let g = NetworkGeometry::default_line();
    let m = TopologyMoments::compute(&g).unwrap();
    let target = af_alpha_high_snr(0.1, &m).unwrap();
    let gaps: Vec<f64> = [1e3, 1e4, 1e5, 1e6]
        .into_iter()
        .map(|g0| {
            let sp = SystemParams::new(g0, 0.1, 0.5, 0.1).unwrap();
            (optimize_af_alpha(&sp, &g).unwrap().alpha_opt - target).abs()
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

#[test]
fn df_alpha_monotone_in_p_and_epsilon() {
    let m = TopologyMoments::compute(&NetworkGeometry::default_line()).unwrap();
    let alpha = |p: f64, e: f64| df_alpha_opt(&SystemParams::new(100.0, p, 0.5, e).unwrap(), &m).unwrap();
    for e in [1e-3, 0.01, 0.1, 0.5] {
        let a: Vec<f64> = (0..10).map(|k| alpha(k as f64 * 0.1, e)).collect();
        assert!(a.windows(2).all(|w| w[1] < w[0]), "{a:?}");
    }
    for p in [0.0, 0.2, 0.8] {
        let a: Vec<f64> = [1e-3, 0.01, 0.1, 0.5].into_iter().map(|e| alpha(p, e)).collect();
        assert!(a.windows(2).all(|w| w[1] > w[0]), "{a:?}");
    }
}
