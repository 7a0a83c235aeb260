use degenlab_core::mellin::StripGrid;
use degenlab_core::profile::{make_profile, ProfileDescriptor};
use degenlab_core::quadrature::{gauss_legendre, Cutoff};
use degenlab_core::singular::fourier::{transform, TimeProfile};
use degenlab_core::singular::{
    build_singular, default_cutoffs, gevrey_scan, higher_order_singular, sobolev_scan, tail_exponent, GevreyReport,
};
use degenlab_core::spectrum::spectrum_of;
use degenlab_core::Profile;
use num_complex::Complex64;

/// Brute-force `∫₀^{t2} t^b η(t) e^{-iτt} dt` with panels much shorter than
/// the oscillation period and geometric refinement at `t = 0`.
fn brute_force(b: f64, cut: &Cutoff, tau: f64) -> Complex64 {
    let (x, w) = gauss_legendre(24);
    let mut breaks: Vec<f64> = (0..=80).rev().map(|k| 0.01 * 2f64.powi(-k)).collect();
    let n = ((cut.t2 - 0.01) * tau).ceil() as usize;
    breaks.extend((1..=n).map(|i| 0.01 + (cut.t2 - 0.01) * i as f64 / n as f64));
    let mut acc = Complex64::new(0.0, 0.0);
    for p in breaks.windows(2) {
        let (lo, h) = (p[0], p[1] - p[0]);
        for (xi, wi) in x.iter().zip(&w) {
            let t = lo + 0.5 * h * (xi + 1.0);
            acc += Complex64::from_polar(t.powf(b) * cut.eval(t) * 0.5 * h * wi, -tau * t);
        }
    }
    acc
}

#[test]
fn pure_half_power_tail() {
    let cut = Cutoff::default();
    let p = TimeProfile::Power { b: 0.5 };
    for tau in [1e3, 4e3] {
        let a = transform(&p, &cut, tau);
        let o = brute_force(0.5, &cut, tau);
        assert!((a - o).norm() <= 1e-8 * o.norm(), "τ = {tau}: {a} vs {o}");
    }
    let e = tail_exponent(&p, &cut);
    assert!((e + 1.5).abs() <= 0.05, "{e}");
}

fn flat_setup() -> (Profile, degenlab_core::spectrum::SpectrumReport<f64>) {
    let p = Profile::constant(1.0, 0.0).unwrap();
    let r = spectrum_of(&p, 30.0, 10).unwrap();
    (p, r)
}

#[test]
fn threshold_estimate_matches_spectrum() {
    let (p, r) = flat_setup();
    let sol = build_singular(&p, &r, 0, Cutoff::default(), StripGrid::default()).unwrap();
    let s0 = r.sigma[0];
    let rs = [0.0, 0.5, s0 - 0.5, s0];
    let scan = sobolev_scan(&sol, &rs, &default_cutoffs()).unwrap();
    assert!((scan.s_hat - 1.648).abs() <= 0.01, "{}", scan.s_hat);
    assert!((scan.s_hat - s0).abs() <= 0.01);
    assert!((scan.tail_exponent + (s0 + 0.5)).abs() <= 0.05);
    // Parseval at r = 0
    let top = *scan.norms[0].last().unwrap();
    assert!((top / scan.l2_norm_sq - 1.0).abs() <= 1e-8, "{top} vs {}", scan.l2_norm_sq);
    for (r, inc) in rs.iter().zip(&scan.last_increment).take(3) {
        assert!(*inc < 1e-3, "r = {r}: {inc}");
    }
    assert!(scan.log_growth_slope[3] > 0.0);
    // monotone in cutoff and in r
    for row in &scan.norms {
        assert!(row.windows(2).all(|w| w[1] >= w[0]));
    }
    for k in 0..scan.cutoffs.len() {
        assert!(scan.norms.windows(2).all(|w| w[1][k] >= w[0][k]));
    }
}

#[test]
fn log_growth_at_threshold_is_linear_in_log_cutoff() {
    let (p, r) = flat_setup();
    let sol = build_singular(&p, &r, 0, Cutoff::default(), StripGrid::default()).unwrap();
    let scan = sobolev_scan(&sol, &[r.sigma[0]], &default_cutoffs()).unwrap();
    let n = &scan.norms[0];
    let k = n.len();
    // equal increments per factor 10^{1/4} in the upper range
    let d1 = n[k - 1] - n[k - 2];
    let d2 = n[k - 5] - n[k - 6];
    assert!((d1 / d2 - 1.0).abs() < 0.05, "{d1} {d2}");
}

#[test]
fn cutoff_dilation_leaves_exponents() {
    let (p, r) = flat_setup();
    let sol = build_singular(&p, &r, 0, Cutoff::default(), StripGrid::default()).unwrap();
    let a = sobolev_scan(&sol, &[0.0], &default_cutoffs()).unwrap();
    let b = sobolev_scan(&sol.with_dilated_cutoff(2.0), &[0.0], &default_cutoffs()).unwrap();
    assert!((a.tail_exponent - b.tail_exponent).abs() <= 0.01);
    assert!((a.s_hat - b.s_hat).abs() <= 0.01);
}

#[test]
fn cross_module_consistency_on_nonconstant_profile() {
    let p = make_profile(ProfileDescriptor::Polynomial { alpha: vec![1.0, 0.0, 0.25], beta: vec![0.3] }, 1).unwrap();
    let r = spectrum_of(&p, 30.0, 10).unwrap();
    for j in 0..2 {
        let sol = build_singular(&p, &r, j, Cutoff::default(), StripGrid::default()).unwrap();
        let scan = sobolev_scan(&sol, &[0.0], &default_cutoffs()).unwrap();
        assert!((scan.s_hat - r.sigma[j]).abs() <= 0.01, "j = {j}: {} vs {}", scan.s_hat, r.sigma[j]);
    }
}

#[test]
fn scan_argument_checks() {
    let (p, r) = flat_setup();
    let sol = build_singular(&p, &r, 0, Cutoff::default(), StripGrid::default()).unwrap();
    assert!(sobolev_scan(&sol, &[0.0], &[10.0, 5.0]).is_err());
    assert!(sobolev_scan(&sol, &[5.0], &[10.0, 20.0]).is_err());
}

#[test]
fn gevrey_orders() {
    let (p, r) = flat_setup();
    let g = StripGrid::<f64>::new(129, -8.0, 3.0, 512).unwrap();
    for (m, kappa) in [(2u32, 0.5), (3, 2.0 / 3.0)] {
        let sol = higher_order_singular(&p, &r, m, 0, Cutoff::default(), g).unwrap();
        match gevrey_scan(&sol, (50.0, 5000.0), 60).unwrap() {
            GevreyReport::Exponential { origin, predicted_r, .. } => {
                assert!((origin.kappa - kappa).abs() <= 0.05, "m = {m}: {origin:?}");
                assert!((predicted_r - m as f64 / (m as f64 - 1.0)).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
    }
    let power = build_singular(&p, &r, 0, Cutoff::default(), g).unwrap();
    match gevrey_scan(&power, (50.0, 5000.0), 60).unwrap() {
        GevreyReport::Algebraic { message, .. } => assert!(message.contains("algebraic decay")),
        other => panic!("{other:?}"),
    }
}
