//! Cross-validated thresholds for the hard (HTCV) and soft (STCV) estimators.
//!
//! At level `j` the criterion is
//!
//! ```text
//! CV_j(lambda) = sum_{k : |b_k| >= lambda} [ b_k^2 - 2/(n(n-1)) sum_{i != h} psi_{j,k}(X_i) psi_{j,k}(X_h) (+ lambda^2) ]
//! ```
//!
//! with the `lambda^2` term present only for STCV. The pairwise sum is
//! `(sum_i psi)^2 - sum_i psi^2`, so a level costs one pass over the sample.
//!
//! The criterion only changes where `lambda` crosses an observed `|b_k|`. The
//! survivor set is constant on each interval `(b_(i-1), b_(i)]`, HTCV is flat
//! there and STCV grows with `lambda`. Minimizing over `{0}`, every `|b_k|`, and
//! the point just above every `|b_k|` therefore reaches every value the
//! criterion attains, up to one rounding step at the open left ends.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{
    apply_plan, coarse_level, level_sums, reconstruct, CoefficientSet, DensityEstimate, Level, LogBase, Sample,
    ThresholdMode, ThresholdPlan,
};
use crate::scalar::Real;
use crate::wavelet::{Kind, WaveletTables};

/// Criterion values at or below this magnitude count as zero when locating `j1`.
pub const ZERO_CRITERION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CvMode {
    #[serde(rename = "HTCV")]
    Htcv,
    #[serde(rename = "STCV")]
    Stcv,
}

impl CvMode {
    pub fn threshold_mode(self) -> ThresholdMode {
        match self {
            CvMode::Htcv => ThresholdMode::Hard,
            CvMode::Stcv => ThresholdMode::Soft,
        }
    }
}

impl fmt::Display for CvMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CvMode::Htcv => "HTCV",
            CvMode::Stcv => "STCV",
        })
    }
}

impl FromStr for CvMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "HTCV" => Ok(CvMode::Htcv),
            "STCV" => Ok(CvMode::Stcv),
            other => Err(Error::InvalidParameter(format!("unknown cross-validation mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvCriterionValue<T> {
    pub j: u32,
    pub lambda: T,
    pub value: T,
}

/// Empirical detail coefficients of one level with their criterion summands.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelCriterion<T> {
    pub j: u32,
    pub k_min: i64,
    pub betas: Vec<T>,
    /// `b_k^2 - 2/(n(n-1)) sum_{i != h} psi(X_i) psi(X_h)`.
    pub terms: Vec<T>,
}

impl<T: Real> LevelCriterion<T> {
    pub fn compute(sample: &Sample<T>, tables: &WaveletTables<T>, j: u32) -> Result<Self> {
        sample.require(2)?;
        let n = T::of_usize(sample.len());
        let pair_norm = T::of(2.0) / (n * (n - T::one()));
        let sums = level_sums(sample, tables, Kind::Psi, j);
        let betas: Vec<T> = sums.sum.iter().map(|&s| s / n).collect();
        let terms = sums
            .sum
            .iter()
            .zip(&sums.sum_sq)
            .zip(&betas)
            .map(|((&s, &sq), &b)| b * b - pair_norm * (s * s - sq))
            .collect();
        Ok(Self { j, k_min: sums.k_min, betas, terms })
    }

    /// `(sum of surviving terms, number of survivors)` for `|b_k| >= lambda`.
    pub fn parts(&self, lambda: T) -> (T, usize) {
        self.betas.iter().zip(&self.terms).filter(|(b, _)| b.abs() >= lambda).fold(
            (T::zero(), 0),
            |(sum, count), (_, &t)| (sum + t, count + 1),
        )
    }

    pub fn value(&self, lambda: T, mode: CvMode) -> T {
        let (sum, count) = self.parts(lambda);
        match mode {
            CvMode::Htcv => sum,
            CvMode::Stcv => sum + lambda * lambda * T::of_usize(count),
        }
    }

    /// Sorted candidate thresholds: zero, each `|b_k|`, and the next point above each.
    pub fn candidates(&self) -> Vec<T> {
        let mut c = Vec::with_capacity(2 * self.betas.len() + 1);
        c.push(T::zero());
        for b in &self.betas {
            let a = b.abs();
            c.push(a);
            c.push(just_above(a));
        }
        c.sort_by(|a, b| a.partial_cmp(b).expect("finite coefficients"));
        c.dedup();
        c
    }

    /// Minimizes the criterion over the candidates, preferring the smallest `lambda` on ties.
    pub fn select(&self, mode: CvMode) -> CvCriterionValue<T> {
        // suffix sums over coefficients sorted by |b| give every survivor set in one pass
        let mut order: Vec<usize> = (0..self.betas.len()).collect();
        order.sort_by(|&a, &b| self.betas[a].abs().partial_cmp(&self.betas[b].abs()).expect("finite"));
        let sorted: Vec<T> = order.iter().map(|&i| self.betas[i].abs()).collect();
        let mut suffix = vec![T::zero(); order.len() + 1];
        for i in (0..order.len()).rev() {
            suffix[i] = suffix[i + 1] + self.terms[order[i]];
        }
        let mut best = CvCriterionValue { j: self.j, lambda: T::zero(), value: T::infinity() };
        for lambda in self.candidates() {
            let first = sorted.partition_point(|&a| a < lambda);
            let count = sorted.len() - first;
            let value = match mode {
                CvMode::Htcv => suffix[first],
                CvMode::Stcv => suffix[first] + lambda * lambda * T::of_usize(count),
            };
            if value < best.value {
                best = CvCriterionValue { j: self.j, lambda, value };
            }
        }
        best
    }

    pub fn level(&self) -> Level<T> {
        Level {
            j: self.j,
            k_min: self.k_min,
            values: self.betas.clone(),
            thresholded: vec![false; self.betas.len()],
        }
    }
}

fn just_above<T: Real>(a: T) -> T {
    if a == T::zero() {
        T::min_positive_value()
    } else {
        a * (T::one() + T::epsilon())
    }
}

/// `CV_j(lambda)` evaluated directly.
pub fn cv_criterion<T: Real>(
    sample: &Sample<T>,
    tables: &WaveletTables<T>,
    j: u32,
    lambda: T,
    mode: CvMode,
) -> Result<T> {
    if !(lambda >= T::zero()) {
        return Err(Error::InvalidParameter(format!("lambda must be nonnegative, got {lambda}")));
    }
    Ok(LevelCriterion::compute(sample, tables, j)?.value(lambda, mode))
}

/// `argmin_lambda CV_j(lambda)`.
pub fn select_lambda<T: Real>(
    sample: &Sample<T>,
    tables: &WaveletTables<T>,
    j: u32,
    mode: CvMode,
) -> Result<CvCriterionValue<T>> {
    Ok(LevelCriterion::compute(sample, tables, j)?.select(mode))
}

/// Smallest level from which every criterion minimum up to `j*` is zero;
/// `j*` itself when the finest level already has a nonzero minimum.
/// `levels` must cover `j0..=j*` in order.
pub fn select_j1<T: Real>(levels: &[CvCriterionValue<T>]) -> u32 {
    let Some(last) = levels.last() else {
        return 0;
    };
    let mut j1 = last.j;
    for level in levels.iter().rev() {
        if level.value.abs().as_f64() <= ZERO_CRITERION {
            j1 = level.j;
        } else {
            break;
        }
    }
    j1
}

/// `j* = floor(log2 n)`.
pub fn finest_level(n: usize) -> u32 {
    (usize::BITS - 1).saturating_sub(n.leading_zeros())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSelection {
    pub j: u32,
    pub lambda: f64,
    pub cv: f64,
    /// Share of the level's coefficients with `|b| <= lambda`.
    pub thresholded_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvSelection {
    pub mode: CvMode,
    pub j0: u32,
    pub j_star: u32,
    pub j1_hat: u32,
    pub levels: Vec<LevelSelection>,
}

impl CvSelection {
    pub fn lambda(&self, j: u32) -> Option<f64> {
        self.levels.iter().find(|l| l.j == j).map(|l| l.lambda)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `j,lambda,cv,thresholded_fraction` rows.
    pub fn profile_csv(&self) -> String {
        let mut out = String::from("j,lambda,cv,thresholded_fraction\n");
        for l in &self.levels {
            out.push_str(&format!("{},{},{},{}\n", l.j, l.lambda, l.cv, l.thresholded_fraction));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct CvFit<T> {
    pub estimate: DensityEstimate<T>,
    pub selection: CvSelection,
    pub coefficients: CoefficientSet<T>,
}

/// HTCV or STCV estimate: `j0 = ceil(ln n / (1 + N))`, per-level thresholds
/// by cross validation on `j0..=j*`, details above `j1` dropped.
pub fn fit_cv<T: Real>(
    sample: &Sample<T>,
    tables: &WaveletTables<T>,
    mode: CvMode,
    grid_points: usize,
) -> Result<CvFit<T>> {
    sample.require(2)?;
    let n = sample.len();
    let j0 = coarse_level(n, tables.filter().vanishing_moments(), LogBase::Natural);
    let j_star = finest_level(n).max(j0);

    let criteria = (j0..=j_star)
        .map(|j| LevelCriterion::compute(sample, tables, j))
        .collect::<Result<Vec<_>>>()?;
    let chosen: Vec<CvCriterionValue<T>> = criteria.iter().map(|c| c.select(mode)).collect();
    let j1_hat = select_j1(&chosen);

    let scaling_sums = level_sums(sample, tables, Kind::Phi, j0);
    let nt = T::of_usize(n);
    let raw = CoefficientSet {
        n,
        support: sample.support(),
        scaling: Level {
            j: j0,
            k_min: scaling_sums.k_min,
            thresholded: vec![false; scaling_sums.sum.len()],
            values: scaling_sums.sum.into_iter().map(|s| s / nt).collect(),
        },
        details: criteria.iter().map(LevelCriterion::level).collect(),
    };
    let plan = ThresholdPlan {
        mode: mode.threshold_mode(),
        j0,
        j1: j1_hat,
        lambdas: chosen.iter().map(|c| (c.j, c.lambda)).collect(),
    };
    let coefficients = apply_plan(&raw, &plan)?;
    let mut estimate = reconstruct(&coefficients, tables, grid_points)?;
    estimate.method = mode.to_string();

    let levels = criteria
        .iter()
        .zip(&chosen)
        .map(|(c, sel)| {
            let killed = c.betas.iter().filter(|b| b.abs() <= sel.lambda).count();
            LevelSelection {
                j: c.j,
                lambda: sel.lambda.as_f64(),
                cv: sel.value.as_f64(),
                thresholded_fraction: if c.betas.is_empty() { 0.0 } else { killed as f64 / c.betas.len() as f64 },
            }
        })
        .collect();
    Ok(CvFit { estimate, selection: CvSelection { mode, j0, j_star, j1_hat, levels }, coefficients })
}
