//! One entry point for every estimator compared by the harness.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cross_validation::{fit_cv, CvMode, CvSelection};
use crate::error::{Error, Result};
use crate::estimator::{
    apply_plan, empirical_coefficients, reconstruct, theoretical_plan, DensityEstimate, Sample, ScheduleBases,
    ThresholdMode,
};
use crate::kernel::{fit_kernel, BandwidthRule, KernelConfig};
use crate::wavelet::WaveletTables;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "HTCV")]
    Htcv,
    #[serde(rename = "STCV")]
    Stcv,
    #[serde(rename = "theoretical-hard")]
    TheoreticalHard,
    #[serde(rename = "theoretical-soft")]
    TheoreticalSoft,
    #[serde(rename = "kernel-rot")]
    KernelRot,
    #[serde(rename = "kernel-cv")]
    KernelCv,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Htcv,
        Method::Stcv,
        Method::TheoreticalHard,
        Method::TheoreticalSoft,
        Method::KernelRot,
        Method::KernelCv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Htcv => "HTCV",
            Method::Stcv => "STCV",
            Method::TheoreticalHard => "theoretical-hard",
            Method::TheoreticalSoft => "theoretical-soft",
            Method::KernelRot => "kernel-rot",
            Method::KernelCv => "kernel-cv",
        }
    }

    pub fn is_wavelet(self) -> bool {
        !matches!(self, Method::KernelRot | Method::KernelCv)
    }

    pub fn valid_names() -> String {
        Self::ALL.iter().map(|m| m.name()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}; valid methods: {}", Self::valid_names())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub grid_points: usize,
    /// Threshold constant of the theoretical schedule. Not computable from the
    /// process, so it defaults to 1.
    #[serde(default = "default_k")]
    pub k_const: f64,
    /// Exponent `b` of the dependence decay in the theoretical schedule.
    #[serde(default = "default_b")]
    pub dependence_b: f64,
    #[serde(default)]
    pub bases: ScheduleBases,
}

fn default_b() -> f64 {
    1.0
}

fn default_k() -> f64 {
    1.0
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { grid_points: 4096, k_const: default_k(), dependence_b: default_b(), bases: ScheduleBases::default() }
    }
}

/// Per-level threshold and share of killed coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelStat {
    pub j: u32,
    pub lambda: f64,
    pub thresholded_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub estimate: DensityEstimate<f64>,
    pub j1: Option<u32>,
    pub levels: Vec<LevelStat>,
    pub bandwidth: Option<f64>,
    pub selection: Option<CvSelection>,
}

pub fn fit_method(
    sample: &Sample<f64>,
    method: Method,
    tables: &WaveletTables<f64>,
    opts: &FitOptions,
) -> Result<FitOutcome> {
    match method {
        Method::Htcv | Method::Stcv => {
            let mode = if method == Method::Htcv { CvMode::Htcv } else { CvMode::Stcv };
            let fit = fit_cv(sample, tables, mode, opts.grid_points)?;
            let levels = fit
                .selection
                .levels
                .iter()
                .map(|l| LevelStat { j: l.j, lambda: l.lambda, thresholded_fraction: l.thresholded_fraction })
                .collect();
            Ok(FitOutcome {
                estimate: fit.estimate,
                j1: Some(fit.selection.j1_hat),
                levels,
                bandwidth: None,
                selection: Some(fit.selection),
            })
        }
        Method::TheoreticalHard | Method::TheoreticalSoft => {
            let mode = if method == Method::TheoreticalHard { ThresholdMode::Hard } else { ThresholdMode::Soft };
            let plan = theoretical_plan::<f64>(
                sample.len(),
                tables.filter().vanishing_moments(),
                opts.dependence_b,
                opts.k_const,
                mode,
                opts.bases,
            )?;
            let raw = empirical_coefficients(sample, tables, plan.j0, plan.j1)?;
            let coeffs = apply_plan(&raw, &plan)?;
            let mut estimate = reconstruct(&coeffs, tables, opts.grid_points)?;
            estimate.method = method.name().into();
            let levels = coeffs
                .details
                .iter()
                .map(|l| LevelStat { j: l.j, lambda: plan.lambda(l.j), thresholded_fraction: l.thresholded_fraction() })
                .collect();
            Ok(FitOutcome { estimate, j1: Some(plan.j1), levels, bandwidth: None, selection: None })
        }
        Method::KernelRot | Method::KernelCv => {
            let rule = if method == Method::KernelRot { BandwidthRule::RuleOfThumb } else { BandwidthRule::Cv };
            let (h, estimate) = fit_kernel(sample, &KernelConfig::new(rule, opts.grid_points))?;
            Ok(FitOutcome { estimate, j1: None, levels: vec![], bandwidth: Some(h), selection: None })
        }
    }
}
