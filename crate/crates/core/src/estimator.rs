//! Empirical wavelet coefficients, thresholding and reconstruction.
//!
//! The estimate is
//!
//! ```text
//! f(x) = sum_k a_{j0,k} phi_{j0,k}(x) + sum_{j=j0}^{j1} sum_k gamma_j(b_{j,k}) psi_{j,k}(x)
//! ```
//!
//! where `a` and `b` are sample means of the basis functions and `gamma_j`
//! is a hard or soft threshold at level `lambda_j`. Scaling coefficients are
//! never thresholded and the reconstruction is neither clipped nor renormalized.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{trapezoid, Real};
use crate::wavelet::{Kind, WaveletTables};

/// Observations together with the interval the density lives on.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    values: Vec<T>,
    lo: T,
    hi: T,
}

impl<T: Real> Sample<T> {
    pub fn new(values: Vec<T>, lo: T, hi: T) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidParameter(format!("support [{lo}, {hi}] is empty")));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v >= lo && **v <= hi)) {
            return Err(Error::InvalidParameter(format!(
                "observation {i} = {v} lies outside the support [{lo}, {hi}]"
            )));
        }
        Ok(Self { values, lo, hi })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn support(&self) -> (T, T) {
        (self.lo, self.hi)
    }

    pub fn cast<U: Real>(&self) -> Sample<U> {
        Sample {
            values: self.values.iter().map(|v| U::of(v.as_f64())).collect(),
            lo: U::of(self.lo.as_f64()),
            hi: U::of(self.hi.as_f64()),
        }
    }

    pub(crate) fn require(&self, required: usize) -> Result<()> {
        if self.values.is_empty() {
            Err(Error::EmptySample)
        } else if self.values.len() < required {
            Err(Error::SampleTooSmall { required, got: self.values.len() })
        } else {
            Ok(())
        }
    }
}

/// Coefficients of one resolution level, indexed by `k - k_min`.
#[derive(Debug, Clone, PartialEq)]
pub struct Level<T> {
    pub j: u32,
    pub k_min: i64,
    pub values: Vec<T>,
    /// Set where a threshold replaced the coefficient by zero.
    pub thresholded: Vec<bool>,
}

impl<T: Real> Level<T> {
    pub fn zeros(j: u32, k_min: i64, len: usize) -> Self {
        Self { j, k_min, values: vec![T::zero(); len], thresholded: vec![false; len] }
    }

    pub fn k_max(&self) -> i64 {
        self.k_min + self.values.len() as i64 - 1
    }

    pub fn get(&self, k: i64) -> T {
        let idx = k - self.k_min;
        if idx >= 0 && (idx as usize) < self.values.len() {
            self.values[idx as usize]
        } else {
            T::zero()
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, T)> + '_ {
        self.values.iter().enumerate().map(move |(i, &v)| (self.k_min + i as i64, v))
    }

    pub fn thresholded_fraction(&self) -> f64 {
        if self.thresholded.is_empty() {
            return 0.0;
        }
        self.thresholded.iter().filter(|&&t| t).count() as f64 / self.thresholded.len() as f64
    }
}

/// Scaling coefficients at `j0` and detail coefficients for `j0..=jmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet<T> {
    pub n: usize,
    pub support: (T, T),
    pub scaling: Level<T>,
    pub details: Vec<Level<T>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CoefficientRecord {
    pub kind: Kind,
    pub j: u32,
    pub k: i64,
    pub value: f64,
    pub thresholded: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CoefficientDocument {
    pub n: usize,
    pub support: (f64, f64),
    pub j0: u32,
    pub coefficients: Vec<CoefficientRecord>,
}

impl<T: Real> CoefficientSet<T> {
    pub fn j0(&self) -> u32 {
        self.scaling.j
    }

    /// Finest detail level present, or `j0 - 1` when there are none.
    pub fn jmax(&self) -> i64 {
        self.j0() as i64 + self.details.len() as i64 - 1
    }

    pub fn detail(&self, j: u32) -> Option<&Level<T>> {
        j.checked_sub(self.j0()).and_then(|i| self.details.get(i as usize))
    }

    pub fn to_document(&self) -> CoefficientDocument {
        let records = |kind: Kind, level: &Level<T>| -> Vec<CoefficientRecord> {
            level
                .iter()
                .zip(&level.thresholded)
                .map(|((k, v), &t)| CoefficientRecord { kind, j: level.j, k, value: v.as_f64(), thresholded: t })
                .collect()
        };
        let mut coefficients = records(Kind::Phi, &self.scaling);
        for level in &self.details {
            coefficients.extend(records(Kind::Psi, level));
        }
        CoefficientDocument {
            n: self.n,
            support: (self.support.0.as_f64(), self.support.1.as_f64()),
            j0: self.j0(),
            coefficients,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }
}

/// Per-translate sums `sum_i f_{j,k}(X_i)` and `sum_i f_{j,k}(X_i)^2` over one level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSums<T> {
    pub j: u32,
    pub k_min: i64,
    pub sum: Vec<T>,
    pub sum_sq: Vec<T>,
}

/// Accumulates basis-function sums at level `j` over the translates meeting the support.
pub fn level_sums<T: Real>(sample: &Sample<T>, tables: &WaveletTables<T>, kind: Kind, j: u32) -> LevelSums<T> {
    let (lo, hi) = sample.support();
    let range = tables.translates_over(j, lo, hi);
    let k_min = *range.start();
    let len = (range.end() - range.start() + 1).max(0) as usize;
    let mut sum = vec![T::zero(); len];
    let mut sum_sq = vec![T::zero(); len];
    let scale = T::of(2f64.powi(j as i32));
    let amplitude = scale.sqrt();
    for &x in sample.values() {
        let sx = scale * x;
        for k in tables.translates_at(j, x) {
            let idx = k - k_min;
            if idx < 0 || idx as usize >= len {
                continue;
            }
            let v = amplitude * tables.mother(kind, sx - T::of(k as f64));
            sum[idx as usize] = sum[idx as usize] + v;
            sum_sq[idx as usize] = sum_sq[idx as usize] + v * v;
        }
    }
    LevelSums { j, k_min, sum, sum_sq }
}

/// Sample means of `phi_{j0,k}` and of `psi_{j,k}` for `j0 <= j <= jmax`.
pub fn empirical_coefficients<T: Real>(
    sample: &Sample<T>,
    tables: &WaveletTables<T>,
    j0: u32,
    jmax: u32,
) -> Result<CoefficientSet<T>> {
    sample.require(1)?;
    if jmax < j0 {
        return Err(Error::InvalidParameter(format!("jmax = {jmax} is below j0 = {j0}")));
    }
    let n = T::of_usize(sample.len());
    let mean_level = |kind: Kind, j: u32| -> Level<T> {
        let sums = level_sums(sample, tables, kind, j);
        let len = sums.sum.len();
        Level {
            j,
            k_min: sums.k_min,
            values: sums.sum.into_iter().map(|s| s / n).collect(),
            thresholded: vec![false; len],
        }
    };
    Ok(CoefficientSet {
        n: sample.len(),
        support: sample.support(),
        scaling: mean_level(Kind::Phi, j0),
        details: (j0..=jmax).map(|j| mean_level(Kind::Psi, j)).collect(),
    })
}

/// `beta` when `|beta| > lambda`, zero otherwise.
pub fn hard_threshold<T: Real>(beta: T, lambda: T) -> T {
    if beta.abs() > lambda {
        beta
    } else {
        T::zero()
    }
}

/// `sign(beta) * max(|beta| - lambda, 0)`.
pub fn soft_threshold<T: Real>(beta: T, lambda: T) -> T {
    let shrunk = beta.abs() - lambda;
    if shrunk > T::zero() {
        shrunk.copysign(beta)
    } else {
        T::zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdMode {
    Hard,
    Soft,
    None,
}

impl ThresholdMode {
    pub fn apply<T: Real>(self, beta: T, lambda: T) -> T {
        match self {
            ThresholdMode::Hard => hard_threshold(beta, lambda),
            ThresholdMode::Soft => soft_threshold(beta, lambda),
            ThresholdMode::None => beta,
        }
    }
}

impl fmt::Display for ThresholdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThresholdMode::Hard => "hard",
            ThresholdMode::Soft => "soft",
            ThresholdMode::None => "none",
        })
    }
}

impl FromStr for ThresholdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hard" => Ok(ThresholdMode::Hard),
            "soft" => Ok(ThresholdMode::Soft),
            "none" => Ok(ThresholdMode::None),
            other => Err(Error::InvalidParameter(format!("unknown threshold mode `{other}`"))),
        }
    }
}

/// Thresholds per detail level and the finest level kept.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdPlan<T> {
    pub mode: ThresholdMode,
    pub j0: u32,
    pub j1: u32,
    /// Levels missing from the map are thresholded at zero.
    pub lambdas: BTreeMap<u32, T>,
}

impl<T: Real> ThresholdPlan<T> {
    pub fn lambda(&self, j: u32) -> T {
        self.lambdas.get(&j).copied().unwrap_or_else(T::zero)
    }

    /// Keeps every coefficient up to `j1`.
    pub fn identity(j0: u32, j1: u32) -> Self {
        Self { mode: ThresholdMode::None, j0, j1, lambdas: BTreeMap::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    Natural,
    Two,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Two => x.log2(),
        }
    }
}

/// Logarithm bases of the level schedule. The defaults read the coarse level
/// with a natural log and the fine level (a dyadic index) with base 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleBases {
    pub coarse: LogBase,
    pub fine: LogBase,
}

impl Default for ScheduleBases {
    fn default() -> Self {
        Self { coarse: LogBase::Natural, fine: LogBase::Two }
    }
}

/// Coarse level `j0 = ceil(log(n) / (1 + N))`.
pub fn coarse_level(n: usize, vanishing_moments: u32, base: LogBase) -> u32 {
    let j0 = (base.log(n as f64) / (1.0 + vanishing_moments as f64)).ceil();
    j0.max(0.0) as u32
}

/// Level-dependent thresholds `lambda_j = K sqrt(j / n)` on
/// `j0 <= j <= j1`, with `j1 = floor(log(n (ln n)^{-2/b-3}))`.
pub fn theoretical_plan<T: Real>(
    n: usize,
    vanishing_moments: u32,
    dependence_exponent: f64,
    k_const: f64,
    mode: ThresholdMode,
    bases: ScheduleBases,
) -> Result<ThresholdPlan<T>> {
    if n < 8 {
        return Err(Error::InvalidParameter(format!("schedule needs n >= 8, got {n}")));
    }
    if vanishing_moments < 1 || !(dependence_exponent > 0.0) || !(k_const > 0.0) {
        return Err(Error::InvalidParameter(
            "schedule needs N >= 1, b > 0 and K > 0".to_string(),
        ));
    }
    let j0 = coarse_level(n, vanishing_moments, bases.coarse);
    let nf = n as f64;
    let inner = nf * nf.ln().powf(-2.0 / dependence_exponent - 3.0);
    let j1 = bases.fine.log(inner).floor() as i64;
    if j1 < j0 as i64 {
        return Err(Error::DegenerateSchedule { j0: j0 as i64, j1 });
    }
    let j1 = j1 as u32;
    let lambdas = (j0..=j1).map(|j| (j, T::of(theoretical_lambda(k_const, j, n)))).collect();
    Ok(ThresholdPlan { mode, j0, j1, lambdas })
}

/// `K sqrt(j / n)`.
pub fn theoretical_lambda(k_const: f64, j: u32, n: usize) -> f64 {
    k_const * (j as f64 / n as f64).sqrt()
}

/// Thresholds detail levels `j0..=j1` and drops the finer ones.
pub fn apply_plan<T: Real>(coeffs: &CoefficientSet<T>, plan: &ThresholdPlan<T>) -> Result<CoefficientSet<T>> {
    if plan.j1 as i64 > coeffs.jmax() {
        return Err(Error::InvalidParameter(format!(
            "plan keeps level {} but coefficients stop at {}",
            plan.j1,
            coeffs.jmax()
        )));
    }
    let details = coeffs
        .details
        .iter()
        .filter(|level| level.j <= plan.j1)
        .map(|level| {
            let lambda = plan.lambda(level.j);
            let values: Vec<T> = level.values.iter().map(|&b| plan.mode.apply(b, lambda)).collect();
            let thresholded = match plan.mode {
                ThresholdMode::None => vec![false; values.len()],
                _ => values.iter().map(|v| *v == T::zero()).collect(),
            };
            Level { j: level.j, k_min: level.k_min, values, thresholded }
        })
        .collect();
    Ok(CoefficientSet { n: coeffs.n, support: coeffs.support, scaling: coeffs.scaling.clone(), details })
}

/// Function values on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate<T> {
    pub lo: T,
    pub hi: T,
    pub values: Vec<T>,
    pub method: String,
}

impl<T: Real> DensityEstimate<T> {
    pub fn from_fn(lo: T, hi: T, grid_points: usize, method: impl Into<String>, f: impl Fn(T) -> T) -> Self {
        let mut est = Self { lo, hi, values: vec![T::zero(); grid_points], method: method.into() };
        for g in 0..grid_points {
            est.values[g] = f(est.x(g));
        }
        est
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dx(&self) -> T {
        (self.hi - self.lo) / T::of_usize(self.values.len().max(2) - 1)
    }

    pub fn x(&self, g: usize) -> T {
        if g + 1 == self.values.len() {
            self.hi
        } else {
            self.lo + self.dx() * T::of_usize(g)
        }
    }

    pub fn grid(&self) -> Vec<T> {
        (0..self.values.len()).map(|g| self.x(g)).collect()
    }

    pub fn integral(&self) -> T {
        trapezoid(&self.values, self.dx())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,f")?;
        for (g, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", self.x(g), v)?;
        }
        Ok(())
    }
}

/// Reconstruction on `grid_points` uniform points over the coefficient support.
pub fn reconstruct<T: Real>(
    coeffs: &CoefficientSet<T>,
    tables: &WaveletTables<T>,
    grid_points: usize,
) -> Result<DensityEstimate<T>> {
    reconstruct_on(coeffs, tables, coeffs.support.0, coeffs.support.1, grid_points)
}

/// Reconstruction on an arbitrary interval.
pub fn reconstruct_on<T: Real>(
    coeffs: &CoefficientSet<T>,
    tables: &WaveletTables<T>,
    lo: T,
    hi: T,
    grid_points: usize,
) -> Result<DensityEstimate<T>> {
    if grid_points < 64 {
        return Err(Error::InvalidParameter(format!("need at least 64 grid points, got {grid_points}")));
    }
    if !(lo < hi) {
        return Err(Error::InvalidParameter(format!("empty reconstruction interval [{lo}, {hi}]")));
    }
    let mut est = DensityEstimate { lo, hi, values: vec![T::zero(); grid_points], method: "wavelet".into() };
    let grid = est.grid();
    let dx = est.dx().as_f64();
    let (s_lo, s_hi) = tables.support();
    let mut add_level = |kind: Kind, level: &Level<T>| {
        let scale = 2f64.powi(level.j as i32);
        let amplitude = T::of(scale.sqrt());
        let scale_t = T::of(scale);
        for (k, c) in level.iter() {
            if c == T::zero() {
                continue;
            }
            // grid indices whose abscissa falls in ((k + s_lo) / 2^j, (k + s_hi) / 2^j)
            let x_lo = (k + s_lo) as f64 / scale;
            let x_hi = (k + s_hi) as f64 / scale;
            let g_lo = ((x_lo - lo.as_f64()) / dx).floor().max(0.0) as usize;
            let g_hi = (((x_hi - lo.as_f64()) / dx).ceil().max(0.0) as usize).min(grid_points - 1);
            let kt = T::of(k as f64);
            for g in g_lo..=g_hi {
                let v = tables.mother(kind, scale_t * grid[g] - kt);
                est.values[g] = est.values[g] + c * amplitude * v;
            }
        }
    };
    add_level(Kind::Phi, &coeffs.scaling);
    for level in &coeffs.details {
        add_level(Kind::Psi, level);
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::{Family, WaveletFilter};
    use proptest::prelude::*;

    fn haar() -> WaveletTables<f64> {
        WaveletTables::cascade(&WaveletFilter::haar(), 12).unwrap()
    }

    fn sym8() -> WaveletTables<f64> {
        WaveletTables::cascade(&WaveletFilter::build(Family::Symmlet, 8).unwrap(), 12).unwrap()
    }

    #[test]
    fn hard_threshold_examples() {
        assert_eq!(hard_threshold(0.5, 0.0), 0.5);
        assert_eq!(hard_threshold(0.3, 0.3), 0.0);
        assert_eq!(hard_threshold(-0.8, 0.5), -0.8);
    }

    #[test]
    fn soft_threshold_examples() {
        assert!((soft_threshold(0.5f64, 0.2) - 0.3).abs() < 1e-15);
        assert!((soft_threshold(-0.5f64, 0.2) + 0.3).abs() < 1e-15);
        assert_eq!(soft_threshold(0.1, 0.2), 0.0);
    }

    proptest! {
        #[test]
        fn soft_shrinks_more_than_hard(beta in -10.0f64..10.0, lambda in 0.0f64..10.0) {
            let s = soft_threshold(beta, lambda).abs();
            let h = hard_threshold(beta, lambda).abs();
            prop_assert!(s <= h);
            prop_assert!(h <= beta.abs());
        }

        #[test]
        fn hard_survivors_shrink_with_lambda(
            betas in proptest::collection::vec(-1.0f64..1.0, 1..50),
            a in 0.0f64..1.0,
            b in 0.0f64..1.0,
        ) {
            let (small, large) = if a <= b { (a, b) } else { (b, a) };
            for &beta in &betas {
                if hard_threshold(beta, large) != 0.0 {
                    prop_assert!(hard_threshold(beta, small) != 0.0);
                }
            }
        }
    }

    #[test]
    fn single_point_scaling_coefficient() {
        let s = Sample::new(vec![0.5], 0.0, 1.0).unwrap();
        let c = empirical_coefficients(&s, &haar(), 0, 0).unwrap();
        assert!((c.scaling.get(0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn symmetric_pair_cancels_haar_detail() {
        let s = Sample::new(vec![0.1, 0.9], 0.0, 1.0).unwrap();
        let c = empirical_coefficients(&s, &haar(), 0, 0).unwrap();
        assert!(c.detail(0).unwrap().get(0).abs() < 1e-14);
    }

    #[test]
    fn empty_sample_is_an_error() {
        let s = Sample::<f64>::new(vec![], 0.0, 1.0).unwrap();
        assert!(matches!(empirical_coefficients(&s, &haar(), 0, 1), Err(Error::EmptySample)));
    }

    #[test]
    fn out_of_support_values_are_rejected() {
        assert!(Sample::new(vec![0.5, 1.5], 0.0, 1.0).is_err());
        assert!(Sample::new(vec![f64::NAN], 0.0, 1.0).is_err());
    }

    #[test]
    fn stored_translates_meet_the_support() {
        let t = sym8();
        let s = Sample::new(vec![0.2, 0.4, 0.7], 0.0, 1.0).unwrap();
        let c = empirical_coefficients(&s, &t, 1, 4).unwrap();
        for level in std::iter::once(&c.scaling).chain(&c.details) {
            let scale = 2f64.powi(level.j as i32);
            for (k, v) in level.iter() {
                assert!(v.is_finite());
                let (a, b) = ((k - 7) as f64 / scale, (k + 8) as f64 / scale);
                assert!(a < 1.0 && b > 0.0, "j={} k={k}", level.j);
            }
            // one more translate on either side would miss [0, 1]
            let (first, last) = (level.k_min - 1, level.k_max() + 1);
            assert!((first + 8) as f64 / scale <= 0.0);
            assert!((last - 7) as f64 / scale >= 1.0);
        }
    }

    #[test]
    fn schedule_examples() {
        assert_eq!(coarse_level(1024, 8, LogBase::Natural), 1);
        assert_eq!(coarse_level(1024, 8, LogBase::Two), 2);
        let plan: ThresholdPlan<f64> =
            theoretical_plan(1 << 20, 8, 1e6, 1.0, ThresholdMode::Hard, ScheduleBases::default()).unwrap();
        assert!(plan.j0 <= plan.j1);
        assert!((plan.lambda(4) - (4.0 / (1u64 << 20) as f64).sqrt()).abs() < 1e-15);
        let err = theoretical_plan::<f64>(8, 8, 1.0, 1.0, ThresholdMode::Hard, ScheduleBases::default());
        assert!(matches!(err, Err(Error::DegenerateSchedule { .. })));
    }

    #[test]
    fn lambda_formula() {
        assert!((theoretical_lambda(1.0, 4, 1024) - 0.0625).abs() < 1e-15);
        // at n = 1024 the fine level collapses below the coarse one unless b is large
        let err = theoretical_plan::<f64>(1024, 8, 1.0, 1.0, ThresholdMode::Soft, ScheduleBases::default());
        assert!(matches!(err, Err(Error::DegenerateSchedule { j0: 1, .. })));
    }

    #[test]
    fn identity_plan_keeps_levels_up_to_j1() {
        let t = sym8();
        let s = Sample::new((0..40).map(|i| (i as f64 + 0.5) / 40.0).collect(), 0.0, 1.0).unwrap();
        let c = empirical_coefficients(&s, &t, 1, 4).unwrap();
        let out = apply_plan(&c, &ThresholdPlan::identity(1, 3)).unwrap();
        assert_eq!(out.details.len(), 3);
        assert_eq!(out.details[..], c.details[..3]);
        assert_eq!(out.scaling, c.scaling);
    }

    #[test]
    fn infinite_thresholds_leave_the_scaling_projection() {
        let t = sym8();
        let s = Sample::new((0..40).map(|i| ((i * 7) % 40) as f64 / 40.0).collect(), 0.0, 1.0).unwrap();
        let c = empirical_coefficients(&s, &t, 1, 4).unwrap();
        let plan = ThresholdPlan {
            mode: ThresholdMode::Hard,
            j0: 1,
            j1: 4,
            lambdas: (1..=4).map(|j| (j, 1e9)).collect(),
        };
        let out = apply_plan(&c, &plan).unwrap();
        assert!(out.details.iter().all(|l| l.values.iter().all(|v| *v == 0.0)));
        assert!(out.details.iter().all(|l| l.thresholded.iter().all(|t| *t)));
        let a = reconstruct(&out, &t, 256).unwrap();
        let mut scaling_only = c.clone();
        scaling_only.details.clear();
        let b = reconstruct(&scaling_only, &t, 256).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn plan_beyond_computed_levels_is_rejected() {
        let t = haar();
        let s = Sample::new(vec![0.3, 0.6], 0.0, 1.0).unwrap();
        let c = empirical_coefficients(&s, &t, 0, 2).unwrap();
        assert!(apply_plan(&c, &ThresholdPlan::identity(0, 3)).is_err());
    }

    #[test]
    fn zero_coefficients_reconstruct_to_zero() {
        let t = sym8();
        let s = Sample::new(vec![0.3, 0.6], 0.0, 1.0).unwrap();
        let mut c = empirical_coefficients(&s, &t, 1, 3).unwrap();
        c.scaling.values.iter_mut().for_each(|v| *v = 0.0);
        c.details.iter_mut().for_each(|l| l.values.iter_mut().for_each(|v| *v = 0.0));
        let est = reconstruct(&c, &t, 128).unwrap();
        assert!(est.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn haar_constant_reconstruction() {
        let t = haar();
        let c = CoefficientSet {
            n: 1,
            support: (0.0, 1.0),
            scaling: Level { j: 0, k_min: 0, values: vec![1.0], thresholded: vec![false] },
            details: vec![],
        };
        let est = reconstruct(&c, &t, 100).unwrap();
        // the right endpoint belongs to the next translate
        assert!(est.values[..99].iter().all(|v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn too_few_grid_points() {
        let t = haar();
        let s = Sample::new(vec![0.3, 0.6], 0.0, 1.0).unwrap();
        let c = empirical_coefficients(&s, &t, 0, 0).unwrap();
        assert!(reconstruct(&c, &t, 63).is_err());
    }

    #[test]
    fn json_lists_every_coefficient() {
        let t = haar();
        let s = Sample::new(vec![0.3, 0.6], 0.0, 1.0).unwrap();
        let c = empirical_coefficients(&s, &t, 0, 1).unwrap();
        let doc: CoefficientDocument = serde_json::from_str(&c.to_json().unwrap()).unwrap();
        assert_eq!(doc.coefficients.len(), 1 + 1 + 2);
        assert_eq!(doc.coefficients[0].kind, Kind::Phi);
        assert!(doc.coefficients.iter().all(|r| !r.thresholded));
    }

    #[test]
    fn generic_over_f32() {
        let t = WaveletTables::<f32>::cascade(&WaveletFilter::build(Family::Symmlet, 4).unwrap(), 10).unwrap();
        let s = Sample::new(vec![0.25f32, 0.5, 0.75, 0.8], 0.0, 1.0).unwrap();
        let c = empirical_coefficients(&s, &t, 1, 3).unwrap();
        let est = reconstruct(&c, &t, 128).unwrap();
        assert!(est.values.iter().all(|v| v.is_finite()));
    }
}
