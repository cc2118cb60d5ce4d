use imdd_wiener::channel::{build_conv_operator, sample_cir, Cir, CirGrid, ConvOperator, LinkParams};
use imdd_wiener::constellation::{build_pam, build_pam_normalized, predistort};
use imdd_wiener::sim::{
    apply_filter, draw_symbols, edge_discard, launch_power, received_intensity, run_monte_carlo,
    RxPowerNorm, SweepSetup,
};
use imdd_wiener::wiener::{design, filter_esr, matched_wf, Variant, WienerFilter};
use imdd_wiener::Error;
use num_complex::Complex64;

fn link(length_km: f64) -> (Cir, ConvOperator, f64) {
    let params = LinkParams {
        length_km,
        ..LinkParams::default()
    };
    let cir = sample_cir(&params, 0.01, CirGrid::default()).unwrap();
    let op = build_conv_operator(&cir, cir.len(), 2).unwrap();
    let p = launch_power(&LinkParams::default(), 0.1).unwrap().p_tx_opt_w;
    (cir, op, p)
}

#[test]
fn back_to_back_recovers_intensities() {
    let (cir, _, p) = link(0.0);
    let breve = build_pam(4, p, 2.0 * p).unwrap();
    let amps = predistort(&breve).unwrap();
    let idx = draw_symbols(4, 5000, 9);
    let a: Vec<f64> = idx.iter().map(|&i| amps.points()[i]).collect();
    let u = received_intensity(&cir, &a, 0.0, 9).unwrap();
    let c = cir.center_index;
    let skip = cir.len();
    let mut worst: f64 = 0.0;
    for nu in skip..idx.len() - skip {
        let want = breve.points()[idx[nu]];
        let got = u[2 * nu + c];
        worst = worst.max((got - want).abs() / breve.points()[3]);
    }
    assert!(worst < 1e-3, "{worst}");
}

#[test]
fn prior_mean_filter_has_unit_esr() {
    let (cir, op, p) = link(20.0);
    let breve = build_pam_normalized(4, p, 0.5).unwrap();
    let f = WienerFilter {
        taps: vec![Complex64::new(0.0, 0.0); op.k()],
        bias: Complex64::new(breve.mean, 0.0),
        variant: Variant::Matched,
    };
    let r = run_monte_carlo(&op, &cir, &f, &breve, 1e-9, 40_000, 5).unwrap();
    assert!((r.esr_empirical - 1.0).abs() < 0.03, "{}", r.esr_empirical);
}

#[test]
fn sliding_filter_matches_window_dot_products() {
    let taps: Vec<Complex64> = (0..7).map(|i| Complex64::new(0.1 * i as f64 - 0.3, 0.05)).collect();
    let f = WienerFilter {
        taps,
        bias: Complex64::new(0.25, 0.0),
        variant: Variant::Naive,
    };
    let u: Vec<f64> = (0..501).map(|i| ((i * 37 % 101) as f64).sin()).collect();
    let est = apply_filter(&f, &u).unwrap();
    let g = f.real_taps();
    assert_eq!(est.len(), (u.len() - g.len()) / 2 + 1);
    for (nu, e) in est.iter().enumerate() {
        let direct: f64 = g.iter().enumerate().map(|(i, gi)| gi * u[2 * nu + i]).sum::<f64>() + 0.25;
        assert!((e - direct).abs() < 1e-10, "{nu}: {e} vs {direct}");
    }
}

#[test]
fn runs_are_reproducible() {
    let (cir, op, p) = link(20.0);
    let breve = build_pam_normalized(4, p, 0.3).unwrap();
    let f = matched_wf(&op, &breve, 1e-9).unwrap();
    let a = run_monte_carlo(&op, &cir, &f, &breve, 1e-9, 20_000, 77).unwrap();
    let b = run_monte_carlo(&op, &cir, &f, &breve, 1e-9, 20_000, 77).unwrap();
    let c = run_monte_carlo(&op, &cir, &f, &breve, 1e-9, 20_000, 78).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.mse_prime, c.mse_prime);
    assert_eq!(a.estimates.len(), 20_000 - 2 * edge_discard(cir.len(), op.k()));
}

#[test]
fn symbol_stream_is_prefix_stable() {
    let long = draw_symbols(8, 20_000, 3);
    let short = draw_symbols(8, 5_000, 3);
    assert_eq!(&long[..5_000], &short[..]);
    assert!(long.iter().all(|&s| s < 8));
}

#[test]
fn empirical_error_converges_to_analytic() {
    // short link keeps the longest run cheap
    let (cir, op, p) = link(5.0);
    let breve = build_pam_normalized(4, p, 0.4).unwrap();
    let eta = 1e-8;
    let f = matched_wf(&op, &breve, eta).unwrap();
    let exact = filter_esr(&op, &f, &breve, eta).unwrap();
    let mut spread = Vec::new();
    for (v, reps) in [(10_000usize, 64u64), (100_000, 64), (1_000_000, 16)] {
        let dev: f64 = (0..reps)
            .map(|s| {
                let r = run_monte_carlo(&op, &cir, &f, &breve, eta, v, 1000 + s).unwrap();
                (r.esr_empirical / exact - 1.0).powi(2)
            })
            .sum::<f64>()
            / reps as f64;
        spread.push(dev.sqrt());
    }
    // rms relative deviation should fall by ~√10 per decade
    assert!(spread[0] > 2.0 * spread[1] && spread[1] > 2.0 * spread[2], "{spread:?}");
    assert!(spread[2] < 0.005, "{spread:?}");
}

#[test]
fn reference_link_esr_levels() {
    let (cir, op, _) = link(20.0);
    let setup = SweepSetup {
        cir: &cir,
        op: &op,
        budget: launch_power(&LinkParams::default(), 0.1).unwrap(),
        order: 4,
        n_symbols: 100_000,
        master_seed: 1,
        rx_norm: RxPowerNorm::PerSymbol,
    };
    let cal = setup.calibrate(40.7).unwrap();
    let db = |x: f64| 10.0 * x.log10();
    let matched = setup.evaluate(&cal, 0, Variant::Matched).unwrap();
    let naive = setup.evaluate(&cal, 0, Variant::Naive).unwrap();
    assert!((db(matched.esr_empirical) + 16.3).abs() < 1.0, "{}", db(matched.esr_empirical));
    assert!(db(naive.esr_empirical) > -7.0);
    assert!(db(matched.esr_empirical) < -16.0);
    assert!((cal.snr_el_db - 40.7).abs() < 1e-9);
    // different variants of the same point draw independent streams
    assert_ne!(matched.seed, naive.seed);
}

#[test]
fn monte_carlo_argument_errors() {
    let (cir, op, p) = link(20.0);
    let breve = build_pam_normalized(4, p, 0.3).unwrap();
    let f = design(Variant::Mismatched, &op, &breve, 1e-9).unwrap();
    assert!(matches!(
        run_monte_carlo(&op, &cir, &f, &breve, 1e-9, 100, 1),
        Err(Error::InsufficientSamples(_))
    ));
    let short = WienerFilter {
        taps: f.taps[..3].to_vec(),
        ..f.clone()
    };
    assert!(matches!(
        run_monte_carlo(&op, &cir, &short, &breve, 1e-9, 20_000, 1),
        Err(Error::DimensionMismatch { .. })
    ));
    assert!(received_intensity(&cir, &[1.0], -1.0, 0).is_err());
}
