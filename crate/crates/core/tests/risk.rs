use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavedens::processes::{derive_seed, Simulator};
use wavedens::risk::{
    centred_probe, covariance_decay, integrated_moment, lp_distance, lp_distance_grid, monte_carlo_risk,
    monte_carlo_risk_with_seeds, DecayClass, MonteCarloConfig,
};
use wavedens::{
    DensityEstimate, Family, FitOptions, Method, ProcessCase, ProcessSpec, Sample, TargetDensity, TargetKind,
    WaveletFilter, WaveletTables,
};

fn sym8() -> WaveletTables<f64> {
    WaveletTables::cascade(&WaveletFilter::build(Family::Symmlet, 8).unwrap(), 12).unwrap()
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let whole = (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let left = (m - a) / 6.0 * (f(a) + 4.0 * f(lm) + f(m));
    let right = (b - m) / 6.0 * (f(m) + 4.0 * f(rm) + f(b));
    if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
        left + right + (left + right - whole) / 15.0
    } else {
        simpson(f, a, m, tol / 2.0, depth - 1) + simpson(f, m, b, tol / 2.0, depth - 1)
    }
}

#[test]
fn lp_distance_matches_adaptive_quadrature() {
    let truth = TargetDensity::build(TargetKind::bimodal_gaussian()).unwrap();
    let g = |x: f64| 1.0 + 0.6 * (2.0 * std::f64::consts::PI * x).cos();
    let est = DensityEstimate::from_fn(0.0, 1.0, 4097, "probe", g);
    for p in [1.0, 1.5, 2.0, 4.0, 8.0] {
        let oracle = simpson(&|x| (g(x) - truth.density(x)).abs().powf(p), 0.0, 1.0, 1e-12, 40).powf(1.0 / p);
        let got = lp_distance(&est, &truth, p).unwrap();
        assert!((got - oracle).abs() < 1e-4 * oracle.max(1.0), "p = {p}: {got} vs {oracle}");
    }
}

#[test]
fn lp_distance_rejects_short_grid_and_bad_p() {
    let truth = TargetDensity::build(TargetKind::sine_uniform()).unwrap();
    let short = DensityEstimate::from_fn(0.1, 1.0, 100, "short", |_| 1.0);
    assert!(lp_distance(&short, &truth, 2.0).is_err());
    let full = DensityEstimate::from_fn(0.0, 1.0, 100, "full", |_| 1.0);
    assert!(lp_distance(&full, &truth, 0.5).is_err());
    assert!(lp_distance(&full, &truth, f64::INFINITY).is_err());
}

fn grid_fn() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, 64)
}

proptest! {
    #[test]
    fn lp_distance_is_a_metric(a in grid_fn(), b in grid_fn(), c in grid_fn(), p in 1.0f64..6.0) {
        let dx = 1.0 / 63.0;
        let ab = lp_distance_grid(&a, &b, dx, p);
        prop_assert!((ab - lp_distance_grid(&b, &a, dx, p)).abs() < 1e-12);
        prop_assert!(lp_distance_grid(&a, &a, dx, p) == 0.0);
        prop_assert!(lp_distance_grid(&a, &c, dx, p) <= ab + lp_distance_grid(&b, &c, dx, p) + 1e-12);
    }

    #[test]
    fn lp_distance_is_continuous_in_p(a in grid_fn(), b in grid_fn(), p in 1.0f64..6.0) {
        let dx = 1.0 / 63.0;
        let here = lp_distance_grid(&a, &b, dx, p);
        let near = lp_distance_grid(&a, &b, dx, p + 1e-7);
        prop_assert!((here - near).abs() < 1e-5 * (1.0 + here));
    }
}

#[test]
fn integrated_moment_matches_naive_average() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for _ in 0..10 {
        // dx = 0.01 puts both interval ends on the grid
        let estimates: Vec<DensityEstimate<f64>> = (0..7)
            .map(|_| {
                let shift: f64 = rng.gen_range(-0.5..0.5);
                let wiggle: f64 = rng.gen_range(0.0..2.0);
                DensityEstimate::from_fn(0.0, 1.0, 101, "fixture", move |x: f64| 1.0 + shift + wiggle * (7.0 * x).sin())
            })
            .collect();
        let mut oracle = 0.0;
        for g in 1..=100 {
            let h = |i: usize| (estimates.iter().map(|e| e.values[i].powi(4)).sum::<f64>() / 7.0).powf(0.25);
            oracle += 0.005 * (h(g - 1) + h(g));
        }
        let got = integrated_moment(&estimates, 4, (0.0, 1.0)).unwrap();
        assert!((got.value - oracle).abs() < 1e-10, "{} vs {oracle}", got.value);
        let sub: f64 = (2..=100)
            .map(|g| {
                let h = |i: usize| (estimates.iter().map(|e| e.values[i].powi(4)).sum::<f64>() / 7.0).powf(0.25);
                0.005 * (h(g - 1) + h(g))
            })
            .sum();
        let got = integrated_moment(&estimates, 4, (0.01, 1.0)).unwrap();
        assert!((got.value - sub).abs() < 1e-10);
        assert_eq!(got.clamped, 0);
    }
}

fn periodic_sample(n: usize) -> Sample<f64> {
    Sample::new((0..n).map(|i| if i % 2 == 0 { 0.2 } else { 0.7 }).collect(), 0.0, 1.0).unwrap()
}

#[test]
fn decay_of_period_two_sequence() {
    let t = sym8();
    let j = 2;
    let k = centred_probe(&t, j, 0.0, 1.0);
    let n = 4000;
    let profile = covariance_decay(&periodic_sample(n), &t, j, k, 100).unwrap();
    let v = profile.variance;
    assert!(v > 0.0);
    assert!((profile.covariances[1] - v).abs() < 1e-12 * v, "c(2) = {}", profile.covariances[1]);
    assert!((profile.covariances[0] + v).abs() < 1e-12 * v);
    assert_eq!(profile.lags[..3], [1, 2, 3]);
}

#[test]
fn decay_variance_is_lag_zero_covariance() {
    let t = sym8();
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    let x: Vec<f64> = (0..2000).map(|_| rng.gen()).collect();
    let sample = Sample::new(x.clone(), 0.0, 1.0).unwrap();
    let k = centred_probe(&t, 2, 0.0, 1.0);
    let profile = covariance_decay(&sample, &t, 2, k, 50).unwrap();
    let d: Vec<f64> = x.iter().map(|&v| t.eval(wavedens::Kind::Phi, 2, k, v)).collect();
    let mean = d.iter().sum::<f64>() / 2000.0;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 2000.0;
    assert!((profile.variance - var).abs() < 1e-12 * var);
    for (i, &r) in profile.lags.iter().enumerate().step_by(7) {
        let direct = (0..2000 - r).map(|s| (d[s] - mean) * (d[s + r] - mean)).sum::<f64>() / (2000 - r) as f64;
        assert!((profile.covariances[i] - direct).abs() < 1e-12);
    }
    assert!(covariance_decay(&sample, &t, 2, k, 501).is_err());
}

#[test]
fn iid_covariances_stay_below_noise_bound() {
    let t = sym8();
    let n = 200_000;
    let sim = Simulator::new(&ProcessSpec::new(ProcessCase::Iid, TargetKind::sine_uniform(), n, 0)).unwrap();
    let sample = sim.run(63).unwrap();
    let k = centred_probe(&t, 2, 0.0, 1.0);
    let profile = covariance_decay(&sample, &t, 2, k, 2000).unwrap();
    let bound = 3.0 * profile.variance.sqrt() / (n as f64).sqrt();
    let below = profile.covariances.iter().filter(|c| c.abs() < bound).count();
    assert!(below as f64 >= 0.95 * profile.covariances.len() as f64, "{below}");
    assert_eq!(profile.class, DecayClass::ExponentialOrFaster);
}

fn stcv_options() -> FitOptions {
    FitOptions { grid_points: 1024, ..FitOptions::default() }
}

#[test]
fn repeated_seed_has_zero_spread() {
    let t = sym8();
    let sim = Simulator::new(&ProcessSpec::new(ProcessCase::Iid, TargetKind::sine_uniform(), 512, 0)).unwrap();
    let mc = MonteCarloConfig::new(2, 0);
    let seed = derive_seed(3, 0);
    let twice = monte_carlo_risk_with_seeds(&sim, Method::Stcv, &t, &stcv_options(), &mc, &[seed, seed]).unwrap();
    let once = monte_carlo_risk_with_seeds(&sim, Method::Stcv, &t, &stcv_options(), &mc, &[seed]).unwrap();
    assert_eq!(twice.mise_se, Some(0.0));
    assert_eq!(twice.mise, once.mise);
    assert_eq!(twice.mean_j1, once.mean_j1);
}

#[test]
fn disjoint_replicate_blocks_agree() {
    let t = sym8();
    let sim = Simulator::new(&ProcessSpec::new(ProcessCase::Iid, TargetKind::sine_uniform(), 512, 0)).unwrap();
    let mut a = MonteCarloConfig::new(40, 8);
    let mut b = MonteCarloConfig::new(80, 8);
    b.seed_offset = 40;
    a.p_list = vec![1.0, 2.0];
    let ra = monte_carlo_risk(&sim, Method::Stcv, &t, &stcv_options(), &a).unwrap();
    let rb = monte_carlo_risk(&sim, Method::Stcv, &t, &stcv_options(), &b).unwrap();
    let se = (ra.mise_se.unwrap().powi(2) + rb.mise_se.unwrap().powi(2)).sqrt();
    assert!((ra.mise.unwrap() - rb.mise.unwrap()).abs() < 5.0 * se);
    // the p = 2 risk is the root of the MISE
    assert!((ra.lp_risks[1].risk.powi(2) - ra.mise.unwrap()).abs() < 1e-12);
}

#[test]
fn risk_falls_with_sample_size() {
    let t = sym8();
    let mc = MonteCarloConfig::new(30, 9);
    let risk = |n: usize| {
        let sim = Simulator::new(&ProcessSpec::new(ProcessCase::Iid, TargetKind::sine_uniform(), n, 0)).unwrap();
        monte_carlo_risk(&sim, Method::Stcv, &t, &stcv_options(), &mc).unwrap().mise.unwrap()
    };
    assert!(risk(4096) < risk(256));
}

#[test]
fn lsv_reports_have_no_truth_based_risk() {
    let t = sym8();
    let sim = Simulator::new(&ProcessSpec::lsv(0.5, 512, 0)).unwrap();
    let mut mc = MonteCarloConfig::new(4, 1);
    mc.moment_orders = vec![1, 2];
    let report = monte_carlo_risk(&sim, Method::Stcv, &t, &stcv_options(), &mc).unwrap();
    assert_eq!(report.mise, None);
    assert!(report.lp_risks.is_empty());
    assert_eq!(report.integrated_moments.len(), 2);
    assert!(report.mean_j1.is_some());
}
