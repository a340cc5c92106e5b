use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavedens::processes::{
    case3_marginal_cdf, derive_seed, logistic_invariant_cdf, logistic_map, logistic_orbit, lsv_orbit, noncausal_ar,
    Simulator,
};
use wavedens::{ProcessCase, ProcessSpec, TargetDensity, TargetKind};

fn ks_one_sample(values: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let sorted = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(|x, y| x.partial_cmp(y).unwrap());
        s
    };
    let (a, b) = (sorted(a), sorted(b));
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

fn spec(case: ProcessCase, n: usize) -> ProcessSpec {
    ProcessSpec::new(case, TargetKind::sine_uniform(), n, 0)
}

#[test]
fn iid_case_matches_target_law() {
    let n = 10_000;
    let sim = Simulator::new(&spec(ProcessCase::Iid, n)).unwrap();
    let sample = sim.run(41).unwrap();
    let target = sim.target().unwrap();
    let d = ks_one_sample(sample.values(), |x| target.cdf(x));
    // 1% critical value of the one-sample statistic
    assert!(d < 1.628 / (n as f64).sqrt(), "D = {d}");
}

#[test]
fn logistic_orbit_follows_arcsine_law_and_map() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let y = logistic_orbit(&mut rng, 100_000);
    assert!(ks_one_sample(&y, logistic_invariant_cdf) < 0.02);
    for w in y.windows(2) {
        assert_eq!(w[1], logistic_map(w[0]));
    }
    let sim = Simulator::new(&spec(ProcessCase::LogisticMap, 100_000)).unwrap();
    let sample = sim.run(43).unwrap();
    let target = sim.target().unwrap();
    assert!(ks_one_sample(sample.values(), |x| target.cdf(x)) < 0.02);
}

#[test]
fn noncausal_ar_marginal_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let y = noncausal_ar(&mut rng, 100_000, 512);
    assert!(ks_one_sample(&y, case3_marginal_cdf) < 0.02);
}

#[test]
fn case3_cdf_matches_monte_carlo_moving_average() {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    let draws = 200_000;
    let weights: Vec<f64> = (-40i32..=40).map(|j| 0.5f64.powi(j.abs()) / 3.0).collect();
    let values: Vec<f64> = (0..draws)
        .map(|_| weights.iter().map(|w| if rng.gen_bool(0.5) { *w } else { 0.0 }).sum())
        .collect();
    for y in [0.1, 0.2, 1.0 / 3.0, 0.45, 0.5, 0.6, 2.0 / 3.0, 0.8, 0.95] {
        let p = case3_marginal_cdf(y);
        let empirical = values.iter().filter(|&&v| v <= y).count() as f64 / draws as f64;
        let sd = (p * (1.0 - p) / draws as f64).sqrt();
        assert!((empirical - p).abs() < 4.0 * sd + 1e-9, "y = {y}: {empirical} vs {p}");
    }
}

#[test]
fn dependent_cases_share_the_iid_marginal() {
    let n = 10_000;
    let iid = Simulator::new(&spec(ProcessCase::Iid, n)).unwrap().run(46).unwrap();
    let logistic = Simulator::new(&spec(ProcessCase::LogisticMap, n)).unwrap().run(47).unwrap();
    let mut ar_spec = spec(ProcessCase::NoncausalAr, n);
    ar_spec.ar_depth = Some(256);
    let ar = Simulator::new(&ar_spec).unwrap().run(48).unwrap();
    // 0.1% critical value of the two-sample statistic
    let critical = 1.949 * (2.0 / n as f64).sqrt();
    assert!(ks_two_sample(iid.values(), logistic.values()) < critical);
    assert!(ks_two_sample(iid.values(), ar.values()) < critical);
}

#[test]
fn noncausal_ar_is_insensitive_to_extra_depth() {
    let n = 1000;
    let shallow = noncausal_ar(&mut ChaCha8Rng::seed_from_u64(49), n, 150);
    let deep = noncausal_ar(&mut ChaCha8Rng::seed_from_u64(49), n, 300);
    // both draw the same innovation prefix, offset by the extra 150 burn-in positions
    for t in 0..n - 150 {
        assert!((deep[t] - shallow[t + 150]).abs() < 2f64.powi(-40), "t = {t}");
    }
}

#[test]
fn lsv_invariant_density_diverges_at_zero() {
    let alpha = 0.5;
    let z = lsv_orbit(&mut ChaCha8Rng::seed_from_u64(50), 1_000_000, alpha);
    let edges: Vec<f64> = (0..=8).map(|i| (0.01f64.ln() + (0.05f64 / 0.01).ln() * i as f64 / 8.0).exp()).collect();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for w in edges.windows(2) {
        let count = z.iter().filter(|&&v| v >= w[0] && v < w[1]).count() as f64;
        xs.push((w[0] * w[1]).sqrt().ln());
        ys.push((count / (w[1] - w[0])).ln());
    }
    let (mx, my) = (xs.iter().sum::<f64>() / 8.0, ys.iter().sum::<f64>() / 8.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((slope + alpha).abs() < 0.3, "slope {slope}");
}

#[test]
fn runs_are_reproducible_per_seed() {
    for case in ProcessCase::ALL {
        let mut s = spec(case, 500);
        s.ar_depth = Some(64);
        if case == ProcessCase::Lsv {
            s.lsv_alpha = Some(0.4);
        }
        let sim = Simulator::new(&s).unwrap();
        let seed = derive_seed(9, 3);
        assert_eq!(sim.run(seed).unwrap(), sim.run(seed).unwrap(), "{case}");
        assert_ne!(sim.run(seed).unwrap(), sim.run(derive_seed(9, 4)).unwrap(), "{case}");
    }
}

#[test]
fn target_quantile_inverts_cdf() {
    for kind in [TargetKind::sine_uniform(), TargetKind::bimodal_gaussian()] {
        let t = TargetDensity::build(kind).unwrap();
        for i in 1..200 {
            let u = i as f64 / 200.0;
            assert!((t.cdf(t.inverse_cdf(u)) - u).abs() < 1e-10);
        }
    }
}
