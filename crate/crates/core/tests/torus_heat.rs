use degenlab_core::profile::CoefficientProfile;
use degenlab_core::torus::eigen::GapOptions;
use degenlab_core::torus::probe::{regularity_probe, squeezed_bump};
use degenlab_core::torus::{
    growth_scan, heat_evolve, semigroup_inverse_check, spectral_gap, DiscreteOperator, HeatOptions, HeatScheme,
    LinearOp, SobolevNorm,
};
use degenlab_core::torus_spec::{extend_to_torus, TorusGrid, TorusOperatorSpec, Variant};
use degenlab_core::{Error, TorusSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn flat(n: usize, pt: f64, variant: Variant) -> TorusSpec {
    let p = CoefficientProfile::constant(1.0, 0.0).unwrap();
    extend_to_torus(&p, 2.0, pt, TorusGrid::new(n, n), variant).unwrap()
}

fn mean_zero_random(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let m = v.iter().sum::<f64>() / n as f64;
    v.iter_mut().for_each(|x| *x -= m);
    v
}

#[test]
fn gap_of_the_flat_square_torus() {
    for n in [32, 64] {
        let spec = TorusOperatorSpec::elliptic(PI, PI, TorusGrid::new(n, n), 1.0, Variant::Diffusion).unwrap();
        let gap = spectral_gap(&DiscreteOperator::assemble(&spec), GapOptions::default()).unwrap();
        let h = spec.hx();
        let symbol = 4.0 * (h / 2.0).sin().powi(2) / (h * h);
        assert!((gap.lambda1 - symbol).abs() <= 1e-9, "n = {n}: {} vs {symbol}", gap.lambda1);
        assert!(gap.lambda1 < 1.0 && 1.0 - gap.lambda1 < h * h / 10.0);
    }
}

#[test]
fn gap_shrinks_on_a_larger_torus_and_stays_positive_when_degenerate() {
    let small = TorusOperatorSpec::elliptic(2.0, 1.5, TorusGrid::new(32, 32), 1.0, Variant::Diffusion).unwrap();
    let large = TorusOperatorSpec::elliptic(4.0, 3.0, TorusGrid::new(64, 64), 1.0, Variant::Diffusion).unwrap();
    let g1 = spectral_gap(&DiscreteOperator::assemble(&small), GapOptions::default()).unwrap();
    let g2 = spectral_gap(&DiscreteOperator::assemble(&large), GapOptions::default()).unwrap();
    assert!(g2.lambda1 < g1.lambda1);
    let deg =
        spectral_gap(&DiscreteOperator::assemble(&flat(48, 1.0, Variant::Diffusion)), GapOptions::default()).unwrap();
    assert!(deg.lambda1 > 0.0);
    assert!((deg.constant * deg.lambda1 - 1.0).abs() < 1e-15);
    let inv = DiscreteOperator::assemble(&flat(32, 1.0, Variant::Invertible));
    assert!(matches!(spectral_gap(&inv, GapOptions::default()), Err(Error::Parameter { .. })));
}

#[test]
fn constants_are_stationary() {
    let spec = flat(32, 1.0, Variant::Diffusion);
    let op = DiscreteOperator::assemble(&spec);
    let sob = SobolevNorm::new(&spec);
    for scheme in [HeatScheme::ImplicitEuler, HeatScheme::CrankNicolson] {
        let run = heat_evolve(&op, &sob, &vec![1.0; op.len()], &HeatOptions::new(0.1, 1.0, scheme)).unwrap();
        assert!(run.mean.iter().all(|&m| m == 1.0));
        assert!(run.mean_zero_l2.iter().all(|&m| m == 0.0));
    }
    let bad = heat_evolve(&op, &sob, &vec![1.0; op.len()], &HeatOptions::new(0.0, 1.0, HeatScheme::ImplicitEuler));
    assert!(matches!(bad, Err(Error::Parameter { .. })));
}

#[test]
fn heat_flow_contracts_and_conserves_the_mean() {
    let spec = flat(48, 1.0, Variant::Diffusion);
    let op = DiscreteOperator::assemble(&spec);
    let sob = SobolevNorm::new(&spec);
    let mut f = mean_zero_random(op.len(), 4);
    f.iter_mut().for_each(|v| *v += 0.75);
    let mut opts = HeatOptions::new(0.02, 1.0, HeatScheme::ImplicitEuler);
    opts.s_values = vec![0.0, 1.0];
    let run = heat_evolve(&op, &sob, &f, &opts).unwrap();
    assert!(run.contraction_defect <= 1e-10);
    assert!(run.mean_zero_l2.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-10)));
    let m0 = run.mean[0];
    assert!(run.mean.iter().all(|&m| (m - m0).abs() <= 1e-14));
    let rep = growth_scan(&run, 0).unwrap();
    assert!(rep.slopes.iter().all(|&s| s <= 0.0));
    assert!(rep.positive_windows.is_empty());
}

#[test]
fn single_mode_decays_at_the_scheme_rate() {
    let spec = TorusOperatorSpec::elliptic(PI, PI, TorusGrid::new(32, 32), 1.0, Variant::Diffusion).unwrap();
    let op = DiscreteOperator::assemble(&spec);
    let sob = SobolevNorm::new(&spec);
    let (xs, ts) = (spec.x_nodes(), spec.t_nodes());
    let f: Vec<f64> = xs.iter().flat_map(|&x| ts.iter().map(move |&t| (2.0 * x).cos() * t.sin())).collect();
    let h = spec.hx();
    let lambda = 4.0 * (h).sin().powi(2) / (h * h) + 4.0 * (h / 2.0).sin().powi(2) / (h * h);
    let tau_max = 1.0;
    let mut errs = Vec::new();
    for (scheme, dt) in [
        (HeatScheme::ImplicitEuler, 0.02),
        (HeatScheme::ImplicitEuler, 0.01),
        (HeatScheme::CrankNicolson, 0.02),
        (HeatScheme::CrankNicolson, 0.01),
    ] {
        let run = heat_evolve(&op, &sob, &f, &HeatOptions::new(dt, tau_max, scheme)).unwrap();
        let n = run.tau.len() - 1;
        let factor = match scheme {
            HeatScheme::ImplicitEuler => 1.0 / (1.0 + dt * lambda),
            HeatScheme::CrankNicolson => (1.0 - dt * lambda / 2.0) / (1.0 + dt * lambda / 2.0),
        };
        let got = run.mean_zero_l2[n] / run.mean_zero_l2[0];
        // the scalar recursion holds to solver accuracy
        assert!((got - factor.powi(n as i32)).abs() <= 1e-9, "{scheme:?}");
        errs.push((got - (-lambda * tau_max).exp()).abs());
    }
    let order_ie = (errs[0] / errs[1]).log2();
    let order_cn = (errs[2] / errs[3]).log2();
    assert!((order_ie - 1.0).abs() < 0.1, "implicit Euler order {order_ie}");
    assert!((order_cn - 2.0).abs() < 0.1, "Crank-Nicolson order {order_cn}");
}

#[test]
fn late_decay_rate_is_the_spectral_gap() {
    let spec = flat(32, 1.0, Variant::Diffusion);
    let op = DiscreteOperator::assemble(&spec);
    let sob = SobolevNorm::new(&spec);
    let gap = spectral_gap(&op, GapOptions::default()).unwrap();
    let f = squeezed_bump(&spec, 0.5);
    let mut opts = HeatOptions::new(0.02, 10.0, HeatScheme::CrankNicolson);
    opts.record_every = 25;
    let run = heat_evolve(&op, &sob, &f, &opts).unwrap();
    let m = &run.mean_zero_l2;
    let k = m.len() - 1;
    let slope = (m[k].ln() - m[k - 4].ln()) / (run.tau[k] - run.tau[k - 4]);
    assert!(slope <= -gap.lambda1 + 1e-3, "{slope} vs {}", gap.lambda1);
    assert!((slope + gap.lambda1).abs() <= 1e-3);
}

#[test]
fn semigroup_integral_inverts_the_operator() {
    let spec = flat(32, 1.0, Variant::Diffusion);
    let op = DiscreteOperator::assemble(&spec);
    let gap = spectral_gap(&op, GapOptions::default()).unwrap();
    let l1 = gap.lambda1;
    let f = mean_zero_random(op.len(), 8);
    let rnd = semigroup_inverse_check(&op, &f, l1, 12.0 / l1, 120).unwrap();
    assert!(rnd.discrepancy <= 1e-4, "{}", rnd.discrepancy);
    let eig = semigroup_inverse_check(&op, &gap.vector, l1, 16.0 / l1, 200).unwrap();
    assert!(eig.discrepancy <= 1e-6, "{}", eig.discrepancy);
    // scalar oracle: ∫ e^{-λτ} dτ = 1/λ
    let proj = eig.integral.iter().zip(&gap.vector).map(|(a, b)| a * b).sum::<f64>();
    assert!((proj - 1.0 / l1).abs() <= 1e-6 / l1);
    let zero = semigroup_inverse_check(&op, &vec![0.0; op.len()], l1, 1.0, 10).unwrap();
    assert_eq!(zero.discrepancy, 0.0);
    assert!(zero.integral.iter().all(|&v| v == 0.0));
    let biased: Vec<f64> = f.iter().map(|v| v + 0.1).collect();
    assert!(matches!(semigroup_inverse_check(&op, &biased, l1, 1.0, 10), Err(Error::Parameter { .. })));
}

#[test]
fn elliptic_control_never_grows() {
    let spec = TorusOperatorSpec::elliptic(2.0, 1.0, TorusGrid::new(64, 64), 1.0, Variant::Diffusion).unwrap();
    let op = DiscreteOperator::assemble(&spec);
    let sob = SobolevNorm::new(&spec);
    let f = squeezed_bump(&spec, 0.125);
    let mut opts = HeatOptions::new(0.01, 0.6, HeatScheme::ImplicitEuler);
    opts.s_values = vec![0.0, 1.0, 2.0, 3.0, 4.0];
    let run = heat_evolve(&op, &sob, &f, &opts).unwrap();
    for k in 0..opts.s_values.len() {
        let rep = growth_scan(&run, k).unwrap();
        assert!(rep.positive_windows.is_empty(), "s = {}", opts.s_values[k]);
    }
}

#[test]
fn degenerate_flow_grows_high_sobolev_norms_for_a_while() {
    let spec = flat(128, 1.0, Variant::Diffusion);
    let op = DiscreteOperator::assemble(&spec);
    let sob = SobolevNorm::new(&spec);
    let f = squeezed_bump(&spec, 0.125);
    let mut opts = HeatOptions::new(0.01, 0.6, HeatScheme::ImplicitEuler);
    opts.s_values = vec![1.0, 1.6484541 + 0.5];
    let run = heat_evolve(&op, &sob, &f, &opts).unwrap();
    assert!(growth_scan(&run, 0).unwrap().positive_windows.is_empty());
    let high = growth_scan(&run, 1).unwrap();
    assert!(!high.positive_windows.is_empty());
    assert!(high.max_slope.is_finite() && high.max_slope > 0.0);
}

#[test]
fn probe_input_scaling_on_a_small_grid() {
    let p = CoefficientProfile::constant(1.0, 0.0).unwrap();
    let spec = extend_to_torus(&p, 2.0, 0.25, TorusGrid::new(64, 128), Variant::Invertible).unwrap();
    let eps = [0.5f64, 0.25, 0.125, 0.0625];
    let rep = regularity_probe(&spec, &[0.0f64, 1.0], &eps).unwrap();
    // ht = 1/256: 0.0625 has 16 nodes across the bump
    assert_eq!(rep.eps.len(), 4);
    assert!((rep.input_exponents[0] - 0.5).abs() <= 0.05);
    assert!((rep.input_exponents[1] + 0.5).abs() <= 0.05);
    assert!(rep.variation(0) < 2.0);
    let rep = regularity_probe(&spec, &[0.0], &[0.25, 0.015625]).unwrap();
    assert_eq!(rep.skipped, vec![0.015625]);
    assert_eq!(rep.warnings.len(), 1);
    assert!(matches!(regularity_probe(&spec, &[0.0], &[0.125, 0.25]), Err(Error::Parameter { .. })));
    let diff = extend_to_torus(&p, 2.0, 0.25, TorusGrid::new(64, 64), Variant::Diffusion).unwrap();
    assert!(matches!(regularity_probe(&diff, &[0.0], &[0.25]), Err(Error::Parameter { .. })));
    let lu: Vec<f64> = DiscreteOperator::assemble(&spec).apply_vec(&vec![1.0; spec.grid.len()]);
    assert!(lu.iter().all(|&v| (v - 1.0).abs() < 1e-12) && !lu.is_empty());
    let _ = DiscreteOperator::assemble(&spec).len();
}
