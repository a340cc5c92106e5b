//! Distances to the truth, Monte-Carlo risk aggregation and the covariance
//! decay diagnostic.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{DensityEstimate, Sample};
use crate::fit::{fit_method, FitOptions, LevelStat, Method};
use crate::processes::{derive_seed, Simulator, TargetDensity};
use crate::wavelet::{Kind, WaveletTables};

/// `(sum |a - b|^p dx)^{1/p}` with trapezoid weights.
pub fn lp_distance_grid(a: &[f64], b: &[f64], dx: f64, p: f64) -> f64 {
    assert_eq!(a.len(), b.len(), "grid functions differ in length");
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y).abs().powf(p)).collect();
    crate::scalar::trapezoid(&diff, dx).powf(1.0 / p)
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("p = {p} must be finite and at least 1")))
    }
}

/// `(int |g - f|^p)^{1/p}` on the estimate grid, which must cover the
/// truth's support.
pub fn lp_distance(estimate: &DensityEstimate<f64>, truth: &TargetDensity, p: f64) -> Result<f64> {
    check_p(p)?;
    let (lo, hi) = truth.support();
    let tol = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
    if estimate.lo > lo + tol || estimate.hi < hi - tol || estimate.len() < 2 {
        return Err(Error::GridCoverage { grid_lo: estimate.lo, grid_hi: estimate.hi, lo, hi });
    }
    let f: Vec<f64> = estimate.grid().into_iter().map(|x| truth.density(x)).collect();
    Ok(lp_distance_grid(&estimate.values, &f, estimate.dx(), p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpRisk {
    pub p: f64,
    pub risk: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelMean {
    pub j: u32,
    pub mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentValue {
    pub k: u32,
    pub value: f64,
    /// Grid points whose mean `g^k` was negative and clamped to zero.
    pub clamped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub method: String,
    pub case: String,
    pub n: usize,
    pub replicates: usize,
    /// Absent when the truth is unknown.
    pub mise: Option<f64>,
    pub mise_se: Option<f64>,
    pub lp_risks: Vec<LpRisk>,
    pub mean_j1: Option<f64>,
    pub mean_bandwidth: Option<f64>,
    pub threshold_profile: Vec<LevelMean>,
    pub thresholded_fraction: Vec<LevelMean>,
    pub integrated_moments: Vec<MomentValue>,
}

impl RiskReport {
    pub const CSV_HEADER: &'static str = "method,case,n,replicates,p,lp_risk,mise,mise_se,mean_j1,mean_bandwidth";

    /// One row per `p`, or a single row with an empty `p` when no risk was asked.
    pub fn csv_rows(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        let base = |p: String, risk: String| {
            format!(
                "{},{},{},{},{},{},{},{},{},{}",
                self.method,
                self.case,
                self.n,
                self.replicates,
                p,
                risk,
                opt(self.mise),
                opt(self.mise_se),
                opt(self.mean_j1),
                opt(self.mean_bandwidth)
            )
        };
        if self.lp_risks.is_empty() {
            return vec![base(String::new(), String::new())];
        }
        self.lp_risks.iter().map(|r| base(format!("{:?}", r.p), format!("{:?}", r.risk))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub replicates: usize,
    pub master_seed: u64,
    /// Replicate `r` uses `derive_seed(master_seed, seed_offset + r)`.
    #[serde(default)]
    pub seed_offset: u64,
    #[serde(default = "default_p_list")]
    pub p_list: Vec<f64>,
    #[serde(default)]
    pub moment_orders: Vec<u32>,
    #[serde(default = "default_moment_interval")]
    pub moment_interval: (f64, f64),
}

fn default_p_list() -> Vec<f64> {
    vec![2.0]
}

fn default_moment_interval() -> (f64, f64) {
    (0.01, 1.0)
}

impl MonteCarloConfig {
    pub fn new(replicates: usize, master_seed: u64) -> Self {
        Self {
            replicates,
            master_seed,
            seed_offset: 0,
            p_list: default_p_list(),
            moment_orders: vec![],
            moment_interval: default_moment_interval(),
        }
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.replicates as u64).map(|r| derive_seed(self.master_seed, self.seed_offset + r)).collect()
    }
}

struct Replicate {
    lp: Vec<f64>,
    sq_l2: Option<f64>,
    j1: Option<u32>,
    levels: Vec<LevelStat>,
    bandwidth: Option<f64>,
    estimate: Option<DensityEstimate<f64>>,
}

/// Simulates, fits and scores every replicate; aggregates are plain means
/// folded in replicate order.
pub fn monte_carlo_risk(
    simulator: &Simulator,
    method: Method,
    tables: &WaveletTables<f64>,
    opts: &FitOptions,
    mc: &MonteCarloConfig,
) -> Result<RiskReport> {
    monte_carlo_risk_with_seeds(simulator, method, tables, opts, mc, &mc.seeds())
}

pub fn monte_carlo_risk_with_seeds(
    simulator: &Simulator,
    method: Method,
    tables: &WaveletTables<f64>,
    opts: &FitOptions,
    mc: &MonteCarloConfig,
    seeds: &[u64],
) -> Result<RiskReport> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("Monte-Carlo run needs at least one replicate".into()));
    }
    for &p in &mc.p_list {
        check_p(p)?;
    }
    let truth = simulator.target();
    let keep_estimates = !mc.moment_orders.is_empty();
    let run = |r: usize, seed: u64| -> Result<Replicate> {
        let sample = simulator.run(seed)?;
        let fit = fit_method(&sample, method, tables, opts)?;
        let (lp, sq_l2) = match truth {
            Some(t) => {
                let lp = mc.p_list.iter().map(|&p| lp_distance(&fit.estimate, t, p)).collect::<Result<Vec<_>>>()?;
                (lp, Some(lp_distance(&fit.estimate, t, 2.0)?.powi(2)))
            }
            None => (vec![], None),
        };
        log::debug!("replicate {r} (seed {seed}): done");
        Ok(Replicate {
            lp,
            sq_l2,
            j1: fit.j1,
            levels: fit.levels,
            bandwidth: fit.bandwidth,
            estimate: keep_estimates.then_some(fit.estimate),
        })
    };
    let results: Vec<Replicate> = seeds
        .par_iter()
        .enumerate()
        .map(|(r, &seed)| {
            run(r, seed).map_err(|e| Error::Replicate { replicate: r, seed, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;

    let m = results.len() as f64;
    let mean = |it: &mut dyn Iterator<Item = f64>| it.sum::<f64>() / m;
    let mut mise = None;
    let mut mise_se = None;
    if truth.is_some() {
        let sq: Vec<f64> = results.iter().map(|r| r.sq_l2.unwrap_or(0.0)).collect();
        let mu = mean(&mut sq.iter().copied());
        let var = if sq.len() > 1 { sq.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (m - 1.0) } else { 0.0 };
        mise = Some(mu);
        mise_se = Some((var / m).sqrt());
    }
    let lp_risks = if truth.is_some() {
        mc.p_list
            .iter()
            .enumerate()
            .map(|(i, &p)| LpRisk { p, risk: mean(&mut results.iter().map(|r| r.lp[i].powf(p))).powf(1.0 / p) })
            .collect()
    } else {
        vec![]
    };
    let mean_j1 = results
        .iter()
        .map(|r| r.j1)
        .collect::<Option<Vec<_>>>()
        .map(|js| js.iter().map(|&j| j as f64).sum::<f64>() / m);
    let mean_bandwidth =
        results.iter().map(|r| r.bandwidth).collect::<Option<Vec<_>>>().map(|hs| hs.iter().sum::<f64>() / m);

    let mut by_level: std::collections::BTreeMap<u32, (f64, f64, usize)> = Default::default();
    for r in &results {
        for l in &r.levels {
            let e = by_level.entry(l.j).or_default();
            e.0 += l.lambda;
            e.1 += l.thresholded_fraction;
            e.2 += 1;
        }
    }
    let threshold_profile = by_level.iter().map(|(&j, e)| LevelMean { j, mean: e.0 / e.2 as f64 }).collect();
    let thresholded_fraction = by_level.iter().map(|(&j, e)| LevelMean { j, mean: e.1 / e.2 as f64 }).collect();

    let integrated_moments = if keep_estimates {
        let estimates: Vec<DensityEstimate<f64>> = results.into_iter().filter_map(|r| r.estimate).collect();
        mc.moment_orders
            .iter()
            .map(|&k| integrated_moment(&estimates, k, mc.moment_interval))
            .collect::<Result<Vec<_>>>()?
    } else {
        vec![]
    };

    Ok(RiskReport {
        method: method.name().into(),
        case: simulator.spec().case.name().into(),
        n: simulator.spec().n,
        replicates: seeds.len(),
        mise,
        mise_se,
        lp_risks,
        mean_j1,
        mean_bandwidth,
        threshold_profile,
        thresholded_fraction,
        integrated_moments,
    })
}

/// `int_a^b (E g^k(t))^{1/k} dt` with the expectation replaced by the mean
/// over `estimates`; odd orders clamp negative means at zero.
pub fn integrated_moment(estimates: &[DensityEstimate<f64>], k: u32, interval: (f64, f64)) -> Result<MomentValue> {
    if k == 0 {
        return Err(Error::InvalidParameter("moment order must be at least 1".into()));
    }
    let first = estimates.first().ok_or_else(|| Error::InvalidParameter("no estimates".into()))?;
    if estimates.iter().any(|e| e.lo != first.lo || e.hi != first.hi || e.len() != first.len()) {
        return Err(Error::InvalidParameter("estimates do not share a grid".into()));
    }
    let (a, b) = interval;
    if !(a < b) || a < first.lo || b > first.hi {
        return Err(Error::GridCoverage { grid_lo: first.lo, grid_hi: first.hi, lo: a, hi: b });
    }
    let m = estimates.len() as f64;
    let mut clamped = 0;
    let h: Vec<f64> = (0..first.len())
        .map(|g| {
            let mean = estimates.iter().map(|e| e.values[g].powi(k as i32)).sum::<f64>() / m;
            if mean < 0.0 {
                clamped += 1;
                0.0
            } else {
                mean.powf(1.0 / k as f64)
            }
        })
        .collect();
    Ok(MomentValue { k, value: integrate_sub(first, &h, a, b), clamped })
}

/// Trapezoid integral over `[a, b]` of a piecewise-linear grid function.
fn integrate_sub(grid: &DensityEstimate<f64>, h: &[f64], a: f64, b: f64) -> f64 {
    let dx = grid.dx();
    let at = |x: f64| {
        let t = ((x - grid.lo) / dx).clamp(0.0, (h.len() - 1) as f64);
        let i = (t.floor() as usize).min(h.len() - 2);
        h[i] + (t - i as f64) * (h[i + 1] - h[i])
    };
    let mut knots = vec![a];
    for g in 0..grid.len() {
        let x = grid.x(g);
        if x > a && x < b {
            knots.push(x);
        }
    }
    knots.push(b);
    knots.windows(2).map(|w| 0.5 * (w[1] - w[0]) * (at(w[0]) + at(w[1]))).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub lag_lo: usize,
    pub lag_hi: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayClass {
    ExponentialOrFaster,
    Polynomial,
}

impl std::fmt::Display for DecayClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::ExponentialOrFaster => "exponential-or-faster",
            Self::Polynomial => "polynomial",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub j: u32,
    pub k: i64,
    pub n: usize,
    pub lags: Vec<usize>,
    pub covariances: Vec<f64>,
    /// Lag-zero covariance.
    pub variance: f64,
    /// `variance / sqrt(n)`, the spread of a lag covariance under independence.
    pub noise_floor: f64,
    pub fit: Option<DecayFit>,
    pub class: DecayClass,
}

pub const DECAY_MIN_LAG: usize = 5;

impl DecayProfile {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "r,cov,log_r,log_abs_cov,log_fit")?;
        for (&r, &c) in self.lags.iter().zip(&self.covariances) {
            let lr = (r as f64).ln();
            let la = if c != 0.0 { format!("{:?}", c.abs().ln()) } else { String::new() };
            let fit = match &self.fit {
                Some(f) if r >= f.lag_lo && r <= f.lag_hi => format!("{:?}", f.intercept + f.slope * lr),
                _ => String::new(),
            };
            writeln!(out, "{r},{c:?},{lr:?},{la},{fit}")?;
        }
        Ok(())
    }
}

/// Probe translate whose support is centred nearest the middle of `[a, b]`.
pub fn centred_probe(tables: &WaveletTables<f64>, j: u32, a: f64, b: f64) -> i64 {
    let (s_lo, s_hi) = tables.support();
    let centre = 0.5 * (s_lo + s_hi) as f64;
    ((0.5 * (a + b)) * 2f64.powi(j as i32) - centre).round() as i64
}

/// Empirical autocovariances `c(r) = (n - r)^{-1} sum_i d_i d_{i+r}` of the
/// centred probe values `d_i = phi_{j,k}(X_i) - mean`, for `r = 1..=max_lag`.
///
/// The slope is fitted on `ln r` against `ln |c(r)|` over the run of lags
/// from `DECAY_MIN_LAG` that stay above three noise floors.
pub fn covariance_decay(
    sample: &Sample<f64>,
    tables: &WaveletTables<f64>,
    j: u32,
    k: i64,
    max_lag: usize,
) -> Result<DecayProfile> {
    let n = sample.len();
    sample.require(8)?;
    if max_lag == 0 || max_lag > n / 4 {
        return Err(Error::InvalidParameter(format!("max_lag {max_lag} must lie in 1..={}", n / 4)));
    }
    let raw: Vec<f64> = sample.values().iter().map(|&x| tables.eval(Kind::Phi, j, k, x)).collect();
    let mean = raw.iter().sum::<f64>() / n as f64;
    let d: Vec<f64> = raw.iter().map(|v| v - mean).collect();
    let acov = autocovariance(&d, max_lag);
    let variance = acov[0];
    let noise_floor = variance / (n as f64).sqrt();
    let lags: Vec<usize> = (1..=max_lag).collect();
    let covariances = acov[1..].to_vec();

    let mut pts = vec![];
    for (&r, &c) in lags.iter().zip(&covariances).skip(DECAY_MIN_LAG - 1) {
        if c.abs() <= 3.0 * noise_floor {
            break;
        }
        pts.push(((r as f64).ln(), c.abs().ln(), r));
    }
    let fit = (pts.len() >= 3).then(|| {
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = sxy / sxx;
        DecayFit { slope, intercept: my - slope * mx, lag_lo: pts[0].2, lag_hi: pts[pts.len() - 1].2 }
    });
    let class = if fit.is_some() { DecayClass::Polynomial } else { DecayClass::ExponentialOrFaster };
    Ok(DecayProfile { j, k, n, lags, covariances, variance, noise_floor, fit, class })
}

/// `c(r)` for `r = 0..=max_lag` through a zero-padded FFT.
fn autocovariance(d: &[f64], max_lag: usize) -> Vec<f64> {
    let n = d.len();
    let size = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd: Arc<dyn rustfft::Fft<f64>> = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut buf: Vec<Complex<f64>> = d.iter().map(|&v| Complex::new(v, 0.0)).collect();
    buf.resize(size, Complex::new(0.0, 0.0));
    fwd.process(&mut buf);
    for z in buf.iter_mut() {
        *z = Complex::new(z.norm_sqr(), 0.0);
    }
    inv.process(&mut buf);
    (0..=max_lag).map(|r| buf[r].re / size as f64 / (n - r) as f64).collect()
}
