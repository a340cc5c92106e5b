//! Epanechnikov kernel density estimation with rule-of-thumb and
//! least-squares cross-validated bandwidths.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{DensityEstimate, Sample};
use crate::scalar::Real;

pub const RULE_OF_THUMB_LABEL: &str = "kernel-1";
pub const CV_LABEL: &str = "kernel-2";

/// `3/4 (1 - u^2)` on `[-1, 1]`.
pub fn epanechnikov<T: Real>(u: T) -> T {
    if u.abs() <= T::one() {
        T::of(0.75) * (T::one() - u * u)
    } else {
        T::zero()
    }
}

/// Self-convolution `(K * K)(u) = 3/160 (2 - |u|)^3 (u^2 + 6|u| + 4)` on `[-2, 2]`.
pub fn epanechnikov_convolution<T: Real>(u: T) -> T {
    let a = u.abs();
    if a >= T::of(2.0) {
        return T::zero();
    }
    let c = T::of(2.0) - a;
    T::of(3.0 / 160.0) * c * c * c * (a * a + T::of(6.0) * a + T::of(4.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthRule {
    RuleOfThumb,
    Cv,
    Fixed,
}

impl fmt::Display for BandwidthRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::RuleOfThumb => "rule_of_thumb",
            Self::Cv => "cv",
            Self::Fixed => "fixed",
        })
    }
}

impl FromStr for BandwidthRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rule_of_thumb" | "rot" => Ok(Self::RuleOfThumb),
            "cv" => Ok(Self::Cv),
            "fixed" => Ok(Self::Fixed),
            _ => Err(Error::InvalidParameter(format!("unknown bandwidth rule {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub bandwidth_rule: BandwidthRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    pub grid_points: usize,
}

impl KernelConfig {
    pub fn new(bandwidth_rule: BandwidthRule, grid_points: usize) -> Self {
        Self { bandwidth_rule, h: None, grid_points }
    }

    pub fn fixed(h: f64, grid_points: usize) -> Self {
        Self { bandwidth_rule: BandwidthRule::Fixed, h: Some(h), grid_points }
    }
}

/// Sample quantile by linear interpolation between order statistics: with
/// `x_(0) <= ... <= x_(n-1)` and `t = (n - 1) p`, the value
/// `x_(floor t) + (t - floor t) (x_(floor t + 1) - x_(floor t))`.
pub fn quantile_sorted<T: Real>(sorted: &[T], p: f64) -> T {
    let t = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let i = t.floor() as usize;
    let frac = T::of(t - i as f64);
    if i + 1 >= sorted.len() {
        sorted[sorted.len() - 1]
    } else {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    }
}

fn sorted_values<T: Real>(sample: &Sample<T>) -> Vec<T> {
    let mut v = sample.values().to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("sample values are not NaN"));
    v
}

/// `(q3 - q1) / (2 * 0.6745) * (4 / (3 n))^{1/5}`.
pub fn rule_of_thumb_bandwidth<T: Real>(sample: &Sample<T>) -> Result<T> {
    sample.require(4)?;
    let sorted = sorted_values(sample);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    if !(iqr > T::zero()) {
        return Err(Error::ZeroInterquartileRange);
    }
    let n = sample.len() as f64;
    Ok(iqr / T::of(2.0 * 0.6745) * T::of((4.0 / (3.0 * n)).powf(0.2)))
}

/// Estimate on `grid_points` uniform points over the sample support.
pub fn kernel_estimate<T: Real>(sample: &Sample<T>, h: T, grid_points: usize) -> Result<DensityEstimate<T>> {
    let (lo, hi) = sample.support();
    kernel_estimate_on(sample, h, lo, hi, grid_points)
}

pub fn kernel_estimate_on<T: Real>(
    sample: &Sample<T>,
    h: T,
    lo: T,
    hi: T,
    grid_points: usize,
) -> Result<DensityEstimate<T>> {
    if !(h > T::zero()) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!("bandwidth {h} must be positive")));
    }
    if grid_points < 2 || !(lo < hi) {
        return Err(Error::InvalidParameter("kernel grid needs two points on a nonempty interval".into()));
    }
    sample.require(1)?;
    let mut est = DensityEstimate { lo, hi, values: vec![T::zero(); grid_points], method: "kernel".into() };
    let grid = est.grid();
    let dx = est.dx().as_f64();
    let hf = h.as_f64();
    let scale = T::one() / (T::of_usize(sample.len()) * h);
    for &xi in sample.values() {
        let c = (xi.as_f64() - lo.as_f64()) / dx;
        let g_lo = (c - hf / dx).floor().max(0.0) as usize;
        let g_hi = ((c + hf / dx).ceil().max(0.0) as usize).min(grid_points - 1);
        for g in g_lo..=g_hi {
            est.values[g] = est.values[g] + scale * epanechnikov((grid[g] - xi) / h);
        }
    }
    Ok(est)
}

/// `int fhat_h^2 - (2/n) sum_i fhat_{h,-i}(X_i)` in closed form.
pub fn lscv_score<T: Real>(sample: &Sample<T>, h: T) -> Result<T> {
    sample.require(2)?;
    let sorted = sorted_values(sample);
    Ok(lscv_sorted(&sorted, h))
}

fn lscv_sorted<T: Real>(sorted: &[T], h: T) -> T {
    let n = sorted.len();
    let two = T::of(2.0);
    let mut conv = T::zero();
    let mut kern = T::zero();
    for i in 0..n {
        for j in i + 1..n {
            let u = (sorted[j] - sorted[i]) / h;
            if u >= two {
                break;
            }
            conv = conv + epanechnikov_convolution(u);
            kern = kern + epanechnikov(u);
        }
    }
    let nt = T::of_usize(n);
    let square = (nt * epanechnikov_convolution(T::zero()) + two * conv) / (nt * nt * h);
    let loo = two * two * kern / (nt * (nt - T::one()) * h);
    square - loo
}

/// 40 log-spaced bandwidths from `h_rot / 10` to `3 h_rot`.
pub fn default_candidates<T: Real>(h_rot: T) -> Vec<T> {
    log_spaced(h_rot / T::of(10.0), h_rot * T::of(3.0), 40)
}

pub fn log_spaced<T: Real>(a: T, b: T, count: usize) -> Vec<T> {
    if count == 1 {
        return vec![a];
    }
    let (la, lb) = (a.as_f64().ln(), b.as_f64().ln());
    (0..count).map(|i| T::of((la + (lb - la) * i as f64 / (count - 1) as f64).exp())).collect()
}

/// Candidate minimizing the LSCV score; ties go to the smaller bandwidth.
pub fn cv_bandwidth<T: Real>(sample: &Sample<T>, candidates: &[T]) -> Result<T> {
    if candidates.is_empty() || candidates.iter().any(|h| !(*h > T::zero())) {
        return Err(Error::InvalidParameter("candidate bandwidths must be nonempty and positive".into()));
    }
    sample.require(2)?;
    let sorted = sorted_values(sample);
    let scores: Vec<T> = candidates.par_iter().map(|&h| lscv_sorted(&sorted, h)).collect();
    let mut best = 0;
    for i in 1..candidates.len() {
        if scores[i] < scores[best] || (scores[i] == scores[best] && candidates[i] < candidates[best]) {
            best = i;
        }
    }
    Ok(candidates[best])
}

/// Bandwidth chosen by `config`, the estimate and its label.
pub fn fit_kernel<T: Real>(sample: &Sample<T>, config: &KernelConfig) -> Result<(T, DensityEstimate<T>)> {
    let (h, label) = match config.bandwidth_rule {
        BandwidthRule::RuleOfThumb => (rule_of_thumb_bandwidth(sample)?, RULE_OF_THUMB_LABEL),
        BandwidthRule::Cv => {
            let h_rot = rule_of_thumb_bandwidth(sample)?;
            (cv_bandwidth(sample, &default_candidates(h_rot))?, CV_LABEL)
        }
        BandwidthRule::Fixed => {
            let h = config.h.ok_or_else(|| Error::InvalidParameter("fixed bandwidth rule needs h".into()))?;
            (T::of(h), "kernel-fixed")
        }
    };
    let mut est = kernel_estimate(sample, h, config.grid_points)?;
    est.method = label.into();
    Ok((h, est))
}
